use serde::{Deserialize, Serialize};

use super::ProfileError;
use crate::model::{MediumId, UnknownLabel};

/// Citation counts of one medium on one topic by the two user groups, with
/// each group's total citations on that topic across all media.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCitationCounts {
    pub medium_id: MediumId,
    pub topic_id: String,
    pub tf_c0: u64,
    pub total_c0: u64,
    pub tf_c1: u64,
    pub total_c1: u64,
}

impl GroupCitationCounts {
    /// The same counts with the two groups exchanged.
    pub fn swapped(&self) -> Self {
        GroupCitationCounts {
            tf_c0: self.tf_c1,
            total_c0: self.total_c1,
            tf_c1: self.tf_c0,
            total_c1: self.total_c0,
            ..self.clone()
        }
    }
}

/// Valence of a medium: `2a / (a + b) − 1` with `a = tf_c0 / total_c0` and
/// `b = tf_c1 / total_c1`, evaluated as `(a − b) / (a + b)` so that swapping
/// the groups negates the result exactly.
///
/// Counts above 2^53 lose precision when converted.
pub fn valence(c: &GroupCitationCounts) -> Result<f64, ProfileError> {
    if c.tf_c0 > c.total_c0 || c.tf_c1 > c.total_c1 {
        return Err(ProfileError::InvalidCounts(format!(
            "{}/{}: citations exceed group totals",
            c.medium_id, c.topic_id
        )));
    }
    if c.total_c0 == 0 || c.total_c1 == 0 || (c.tf_c0 == 0 && c.tf_c1 == 0) {
        return Err(ProfileError::UndefinedValence {
            medium_id: c.medium_id.clone(),
            topic_id: c.topic_id.clone(),
        });
    }
    let a = c.tf_c0 as f64 / c.total_c0 as f64;
    let b = c.tf_c1 as f64 / c.total_c1 as f64;
    Ok(((a - b) / (a + b)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValenceLabel {
    FarLeft,
    Left,
    Center,
    Right,
    FarRight,
}

impl ValenceLabel {
    pub const ALL: [ValenceLabel; 5] = [
        ValenceLabel::FarLeft,
        ValenceLabel::Left,
        ValenceLabel::Center,
        ValenceLabel::Right,
        ValenceLabel::FarRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ValenceLabel::FarLeft => "far_left",
            ValenceLabel::Left => "left",
            ValenceLabel::Center => "center",
            ValenceLabel::Right => "right",
            ValenceLabel::FarRight => "far_right",
        }
    }
}

impl std::str::FromStr for ValenceLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ValenceLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_owned()))
    }
}

/// Five ranges of width 0.4 over [−1, 1], lower bound inclusive; the top
/// range also includes 1. Positive scores lean towards group C0.
pub fn valence_label(v: f64) -> Result<ValenceLabel, ProfileError> {
    if !(-1.0..=1.0).contains(&v) {
        return Err(ProfileError::Range(v));
    }
    Ok(if v < -0.6 {
        ValenceLabel::FarLeft
    } else if v < -0.2 {
        ValenceLabel::Left
    } else if v < 0.2 {
        ValenceLabel::Center
    } else if v < 0.6 {
        ValenceLabel::Right
    } else {
        ValenceLabel::FarRight
    })
}

/// Which citation group plays C0 in the valence formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// C0 is the right-leaning group: positive valence reads as right.
    #[default]
    RightIsC0,
    /// C0 is the left-leaning group; labels are mirrored so they keep their political meaning.
    LeftIsC0,
}

impl Orientation {
    pub fn label(self, v: f64) -> Result<ValenceLabel, ProfileError> {
        match self {
            Orientation::RightIsC0 => valence_label(v),
            Orientation::LeftIsC0 => valence_label(-v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValenceRecord {
    pub medium_id: MediumId,
    pub topic_id: String,
    pub score: f64,
    pub label: ValenceLabel,
    /// Citations of this medium on this topic by both groups.
    pub citations: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tf_c0: u64, total_c0: u64, tf_c1: u64, total_c1: u64) -> GroupCitationCounts {
        GroupCitationCounts {
            medium_id: MediumId::from("m"),
            topic_id: "t".into(),
            tf_c0,
            total_c0,
            tf_c1,
            total_c1,
        }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(valence(&counts(5, 50, 0, 80)).unwrap(), 1.0);
        assert_eq!(valence(&counts(10, 100, 20, 200)).unwrap(), 0.0);
        assert!((valence(&counts(30, 100, 10, 100)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn undefined_and_invalid() {
        assert!(matches!(valence(&counts(0, 10, 0, 10)), Err(ProfileError::UndefinedValence { .. })));
        assert!(matches!(valence(&counts(1, 0, 1, 10)), Err(ProfileError::InvalidCounts(_))));
        assert!(matches!(valence(&counts(0, 0, 1, 10)), Err(ProfileError::UndefinedValence { .. })));
        assert!(matches!(valence(&counts(11, 10, 1, 10)), Err(ProfileError::InvalidCounts(_))));
    }

    #[test]
    fn label_boundaries() {
        let cases = [
            (-1.0, ValenceLabel::FarLeft),
            (-0.6, ValenceLabel::Left),
            (-0.2, ValenceLabel::Center),
            (0.0, ValenceLabel::Center),
            (0.2, ValenceLabel::Right),
            (0.5, ValenceLabel::Right),
            (0.6, ValenceLabel::FarRight),
            (1.0, ValenceLabel::FarRight),
        ];
        for (v, label) in cases {
            assert_eq!(valence_label(v).unwrap(), label, "{v}");
        }
        assert!(valence_label(1.0 + 1e-12).is_err());
        assert!(valence_label(f64::NAN).is_err());
        assert_eq!(Orientation::LeftIsC0.label(1.0).unwrap(), ValenceLabel::FarLeft);
    }
}
