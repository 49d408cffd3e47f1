use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::valence::{GroupCitationCounts, Orientation};
use super::ProfileError;
use crate::model::MediumId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserGroup {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRow {
    pub user_id: String,
    pub group: UserGroup,
    pub medium_id: MediumId,
    pub topic_id: String,
    pub count: u64,
}

/// Citation counts per (topic, medium, group), summed over users.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CitationTable {
    counts: BTreeMap<(String, MediumId), [u64; 2]>,
    totals: BTreeMap<String, [u64; 2]>,
}

fn slot(group: UserGroup) -> usize {
    match group {
        UserGroup::Left => 0,
        UserGroup::Right => 1,
    }
}

impl CitationTable {
    pub fn from_rows(rows: impl IntoIterator<Item = CitationRow>) -> Self {
        let mut table = CitationTable::default();
        for row in rows {
            table.add(&row);
        }
        table
    }

    pub fn add(&mut self, row: &CitationRow) {
        let s = slot(row.group);
        self.counts
            .entry((row.topic_id.clone(), row.medium_id.clone()))
            .or_default()[s] += row.count;
        self.totals.entry(row.topic_id.clone()).or_default()[s] += row.count;
    }

    /// Reads `user_id,group,medium_id,topic_id,count` rows (header required).
    pub fn read_csv(reader: impl Read) -> Result<Self, ProfileError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = CitationTable::default();
        for (i, row) in csv.deserialize::<CitationRow>().enumerate() {
            let row = row.map_err(|e| ProfileError::Input(format!("citations row {}: {e}", i + 1)))?;
            table.add(&row);
        }
        Ok(table)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Counts for every (topic, medium) pair citing `medium`, with group
    /// totals taken over all media on the same topic.
    pub fn for_medium(&self, medium: &MediumId, orientation: Orientation) -> Vec<GroupCitationCounts> {
        self.counts
            .iter()
            .filter(|((_, m), _)| m == medium)
            .map(|((topic, m), c)| self.group_counts(topic, m, *c, orientation))
            .collect()
    }

    pub fn get(&self, topic: &str, medium: &MediumId, orientation: Orientation) -> Option<GroupCitationCounts> {
        let c = self.counts.get(&(topic.to_owned(), medium.clone()))?;
        Some(self.group_counts(topic, medium, *c, orientation))
    }

    fn group_counts(&self, topic: &str, medium: &MediumId, c: [u64; 2], orientation: Orientation) -> GroupCitationCounts {
        let t = self.totals[topic];
        let (c0, c1) = match orientation {
            Orientation::RightIsC0 => (1, 0),
            Orientation::LeftIsC0 => (0, 1),
        };
        GroupCitationCounts {
            medium_id: medium.clone(),
            topic_id: topic.to_owned(),
            tf_c0: c[c0],
            total_c0: t[c0],
            tf_c1: c[c1],
            total_c1: t[c1],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates_users_and_topic_totals() {
        let text = "user_id,group,medium_id,topic_id,count\n\
                    u1,right,m1,t1,3\nu2,right,m1,t1,2\nu3,left,m1,t1,1\n\
                    u1,right,m2,t1,5\nu3,left,m2,t1,9\nu3,left,m2,t2,4\n";
        let table = CitationTable::read_csv(text.as_bytes()).unwrap();
        let c = table.get("t1", &MediumId::from("m1"), Orientation::RightIsC0).unwrap();
        assert_eq!((c.tf_c0, c.total_c0, c.tf_c1, c.total_c1), (5, 10, 1, 10));
        let c = table.get("t1", &MediumId::from("m1"), Orientation::LeftIsC0).unwrap();
        assert_eq!((c.tf_c0, c.total_c0, c.tf_c1, c.total_c1), (1, 10, 5, 10));
        assert_eq!(table.for_medium(&MediumId::from("m2"), Orientation::RightIsC0).len(), 2);
    }

    #[test]
    fn bad_group_is_reported_with_row() {
        let text = "user_id,group,medium_id,topic_id,count\nu1,center,m1,t1,3\n";
        let err = CitationTable::read_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }
}
