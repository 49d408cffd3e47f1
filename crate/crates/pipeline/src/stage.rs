//! Stage execution: consume from the committed offset, run the handler,
//! publish results, and commit only once the output is durable.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::queue::{Message, Queue, QueueError};

/// Turns one input payload into zero or more output payloads. Must be
/// idempotent with respect to the article the message is about.
pub type Handler = Arc<dyn Fn(&[u8]) -> Result<Vec<Vec<u8>>, String> + Send + Sync>;

/// Wraps a typed function as a JSON [`Handler`].
pub fn json_handler<I, O, F>(f: F) -> Handler
where
    I: DeserializeOwned,
    O: Serialize,
    F: Fn(I) -> Result<Vec<O>, String> + Send + Sync + 'static,
{
    Arc::new(move |bytes: &[u8]| {
        let input: I = serde_json::from_slice(bytes).map_err(|e| format!("undecodable message: {e}"))?;
        f(input)?
            .iter()
            .map(|o| serde_json::to_vec(o).map_err(|e| e.to_string()))
            .collect()
    })
}

#[derive(Clone)]
pub struct StageDescriptor {
    pub name: String,
    pub input: String,
    /// `None` for sink stages.
    pub output: Option<String>,
    pub handler: Handler,
    pub parallelism: usize,
}

impl std::fmt::Debug for StageDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StageDescriptor")
            .field("name", &self.name)
            .field("input", &self.input)
            .field("output", &self.output)
            .field("parallelism", &self.parallelism)
            .finish()
    }
}

pub fn dead_letter_topic(stage: &str) -> String {
    format!("{stage}.dead")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StagePolicy {
    /// Messages consumed per step; the offset is committed once per step.
    pub batch_size: usize,
    /// Redeliveries after the first failed attempt before a message is dead-lettered.
    pub max_retries: u32,
}

impl Default for StagePolicy {
    fn default() -> Self {
        StagePolicy {
            batch_size: 32,
            max_retries: 3,
        }
    }
}

/// A message the handler kept failing on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeadLetter {
    pub stage: String,
    pub topic: String,
    pub offset: u64,
    pub attempts: u32,
    pub error: String,
    pub payload: String,
}

/// Where a step can be interrupted by fault injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultPoint {
    /// Handlers ran, nothing published yet.
    AfterHandle,
    /// Part of the batch's output is published and the next record is torn.
    MidPublish,
    /// Output is durable, offset not yet committed.
    BeforeCommit,
}

pub trait FaultInjector: Send + Sync {
    /// Whether the stage dies at `point` of its current step.
    fn should_kill(&self, stage: &str, point: FaultPoint) -> bool;
}

/// Kills each listed stage exactly once, at a given point of its `n`th
/// non-empty step (counting from 1).
#[derive(Debug, Default)]
pub struct KillOnce {
    plan: Mutex<BTreeMap<String, (FaultPoint, u32)>>,
    steps: Mutex<BTreeMap<(String, FaultPoint), u32>>,
    fired: Mutex<Vec<String>>,
}

impl KillOnce {
    pub fn new(plan: impl IntoIterator<Item = (String, FaultPoint, u32)>) -> Self {
        KillOnce {
            plan: Mutex::new(plan.into_iter().map(|(s, p, n)| (s, (p, n))).collect()),
            ..Default::default()
        }
    }

    /// Stages killed so far, in order.
    pub fn fired(&self) -> Vec<String> {
        self.fired.lock().unwrap().clone()
    }

    pub fn pending(&self) -> usize {
        self.plan.lock().unwrap().len()
    }
}

impl FaultInjector for KillOnce {
    fn should_kill(&self, stage: &str, point: FaultPoint) -> bool {
        let mut plan = self.plan.lock().unwrap();
        let Some(&(at, n)) = plan.get(stage) else { return false };
        if at != point {
            return false;
        }
        let mut steps = self.steps.lock().unwrap();
        let count = steps.entry((stage.to_owned(), point)).or_default();
        *count += 1;
        if *count < n {
            return false;
        }
        plan.remove(stage);
        self.fired.lock().unwrap().push(stage.to_owned());
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Idle,
    Processed { messages: usize, dead_lettered: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum StageFailure {
    /// Fault injection stopped the stage; its in-memory state is gone.
    #[error("stage `{0}` killed")]
    Killed(String),
    #[error(transparent)]
    Queue(#[from] QueueError),
}

fn run_with_retries(handler: &Handler, payload: &[u8], max_retries: u32) -> Result<Vec<Vec<u8>>, (u32, String)> {
    let mut last = String::new();
    for attempt in 1..=max_retries + 1 {
        match catch_unwind(AssertUnwindSafe(|| handler(payload))) {
            Ok(Ok(out)) => return Ok(out),
            Ok(Err(e)) => last = e,
            Err(panic) => {
                last = panic
                    .downcast_ref::<&str>()
                    .map(|s| (*s).to_owned())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "handler panicked".into());
                last = format!("panic: {last}");
            }
        }
        log::debug!("attempt {attempt} failed: {last}");
    }
    Err((max_retries + 1, last))
}

fn handle_batch(desc: &StageDescriptor, batch: &[Message], policy: &StagePolicy) -> Vec<Result<Vec<Vec<u8>>, (u32, String)>> {
    let workers = desc.parallelism.max(1).min(batch.len());
    if workers <= 1 {
        return batch.iter().map(|m| run_with_retries(&desc.handler, &m.payload, policy.max_retries)).collect();
    }
    let chunk = batch.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = batch
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|m| run_with_retries(&desc.handler, &m.payload, policy.max_retries))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("handler panics are caught")).collect()
    })
}

/// Processes one batch of `desc`'s input. Output order follows input order
/// whatever the parallelism.
pub fn step(
    queue: &dyn Queue,
    desc: &StageDescriptor,
    policy: &StagePolicy,
    faults: Option<&dyn FaultInjector>,
) -> Result<StepOutcome, StageFailure> {
    let from = queue.committed(&desc.name, &desc.input)?;
    let batch = queue.read(&desc.input, from, policy.batch_size.max(1))?;
    let Some(last) = batch.last() else {
        return Ok(StepOutcome::Idle);
    };
    let next = last.offset + 1;
    let kill = |point| faults.is_some_and(|f| f.should_kill(&desc.name, point));

    let results = handle_batch(desc, &batch, policy);
    if kill(FaultPoint::AfterHandle) {
        return Err(StageFailure::Killed(desc.name.clone()));
    }

    let dead_topic = dead_letter_topic(&desc.name);
    let tear_at = kill(FaultPoint::MidPublish).then_some(batch.len() / 2);
    let mut dead = 0;
    for (i, (msg, result)) in batch.iter().zip(results).enumerate() {
        if tear_at == Some(i) {
            let output = desc.output.as_deref().unwrap_or(&dead_topic);
            queue.inject_torn_write(output, b"{\"torn\":true}")?;
            return Err(StageFailure::Killed(desc.name.clone()));
        }
        match result {
            Ok(outputs) => {
                if let Some(topic) = &desc.output {
                    for o in outputs {
                        queue.publish(topic, &o)?;
                    }
                }
            }
            Err((attempts, error)) => {
                log::warn!("{}: dead-lettering offset {} after {attempts} attempts: {error}", desc.name, msg.offset);
                let letter = DeadLetter {
                    stage: desc.name.clone(),
                    topic: desc.input.clone(),
                    offset: msg.offset,
                    attempts,
                    error,
                    payload: String::from_utf8_lossy(&msg.payload).into_owned(),
                };
                queue.publish(&dead_topic, &serde_json::to_vec(&letter).expect("dead letter serializes"))?;
                dead += 1;
            }
        }
    }
    if let Some(topic) = &desc.output {
        queue.sync(topic)?;
    }
    if dead > 0 {
        queue.sync(&dead_topic)?;
    }
    if kill(FaultPoint::BeforeCommit) {
        return Err(StageFailure::Killed(desc.name.clone()));
    }
    queue.commit(&desc.name, &desc.input, next)?;
    Ok(StepOutcome::Processed {
        messages: batch.len(),
        dead_lettered: dead,
    })
}
