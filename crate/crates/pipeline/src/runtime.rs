use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use crate::queue::{Queue, QueueError};
use crate::stage::{dead_letter_topic, step, FaultInjector, StageDescriptor, StageFailure, StagePolicy, StepOutcome};

pub type QueueOpener = Arc<dyn Fn() -> Result<Arc<dyn Queue>, QueueError> + Send + Sync>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunReport {
    pub steps: usize,
    pub messages: usize,
    pub dead_lettered: usize,
    /// Crash-restarts caused by fault injection.
    pub restarts: usize,
}

/// A set of stages over one queue.
///
/// A killed stage is treated as a crash of the whole process: the queue is
/// reopened from disk, dropping every in-memory handle, and consumption
/// resumes from the committed offsets.
pub struct Pipeline {
    opener: QueueOpener,
    queue: Arc<dyn Queue>,
    stages: Vec<StageDescriptor>,
    policy: StagePolicy,
    faults: Option<Arc<dyn FaultInjector>>,
}

impl Pipeline {
    pub fn new(opener: QueueOpener, stages: Vec<StageDescriptor>, policy: StagePolicy) -> Result<Self, QueueError> {
        let queue = opener()?;
        for s in &stages {
            queue.create_topic(&s.input)?;
            if let Some(out) = &s.output {
                queue.create_topic(out)?;
            }
            queue.create_topic(&dead_letter_topic(&s.name))?;
        }
        Ok(Pipeline {
            opener,
            queue,
            stages,
            policy,
            faults: None,
        })
    }

    pub fn with_faults(mut self, faults: Arc<dyn FaultInjector>) -> Self {
        self.faults = Some(faults);
        self
    }

    pub fn queue(&self) -> Arc<dyn Queue> {
        self.queue.clone()
    }

    pub fn stages(&self) -> &[StageDescriptor] {
        &self.stages
    }

    fn restart(&mut self) -> Result<(), QueueError> {
        self.queue = (self.opener)()?;
        Ok(())
    }

    /// Steps every stage round-robin until a full round finds no input.
    pub fn run_until_idle(&mut self) -> Result<RunReport, QueueError> {
        let mut report = RunReport::default();
        loop {
            let mut progressed = false;
            for i in 0..self.stages.len() {
                let outcome = step(
                    self.queue.as_ref(),
                    &self.stages[i],
                    &self.policy,
                    self.faults.as_deref(),
                );
                match outcome {
                    Ok(StepOutcome::Idle) => {}
                    Ok(StepOutcome::Processed { messages, dead_lettered }) => {
                        progressed = true;
                        report.steps += 1;
                        report.messages += messages;
                        report.dead_lettered += dead_lettered;
                    }
                    Err(StageFailure::Killed(stage)) => {
                        log::info!("stage `{stage}` killed; restarting from committed offsets");
                        self.restart()?;
                        report.restarts += 1;
                        progressed = true;
                    }
                    Err(StageFailure::Queue(e)) => return Err(e),
                }
            }
            if !progressed {
                return Ok(report);
            }
        }
    }

    /// Unconsumed messages per stage input.
    pub fn lag(&self) -> Result<Vec<(String, String, u64)>, QueueError> {
        self.stages
            .iter()
            .map(|s| Ok((s.name.clone(), s.input.clone(), self.queue.lag(&s.name, &s.input)?)))
            .collect()
    }

    /// Runs each stage on its own thread, polling its input every `poll`
    /// when idle, until [`PipelineHandle::stop`].
    pub fn start(self, poll: Duration) -> PipelineHandle {
        let stop = Arc::new(AtomicBool::new(false));
        let threads = self
            .stages
            .into_iter()
            .map(|desc| {
                let stop = stop.clone();
                let queue = self.queue.clone();
                let policy = self.policy.clone();
                std::thread::Builder::new()
                    .name(format!("stage-{}", desc.name))
                    .spawn(move || {
                        while !stop.load(Ordering::Relaxed) {
                            match step(queue.as_ref(), &desc, &policy, None) {
                                Ok(StepOutcome::Processed { .. }) => continue,
                                Ok(StepOutcome::Idle) => {}
                                Err(e) => log::error!("stage `{}`: {e}", desc.name),
                            }
                            std::thread::sleep(poll);
                        }
                    })
                    .expect("spawn stage thread")
            })
            .collect();
        PipelineHandle { stop, threads }
    }
}

pub struct PipelineHandle {
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl PipelineHandle {
    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        self.stop.clone()
    }

    /// Signals every stage to finish its current batch and waits for them.
    pub fn stop(self) {
        self.stop.store(true, Ordering::Relaxed);
        for t in self.threads {
            let _ = t.join();
        }
    }
}
