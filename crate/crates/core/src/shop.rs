//! Machines, dispatching and stochastic operation times.

use serde::{Deserialize, Serialize};

use crate::controllers::OrderId;
use crate::error::Result;
use crate::model::CalibratedScenario;
use crate::rng::RngStream;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispatchRule {
    /// First in first out at this queue.
    Fifo,
    /// First in system first out: earliest release first.
    Fisfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub order: OrderId,
    pub arrival: SimTime,
    pub system_entry: SimTime,
}

/// Index of the entry `rule` serves next, ties by order id.
pub fn dispatch(queue: &[QueueEntry], rule: DispatchRule) -> Option<usize> {
    let key = |e: &QueueEntry| match rule {
        DispatchRule::Fifo => (e.arrival, e.order),
        DispatchRule::Fisfo => (e.system_entry, e.order),
    };
    queue
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| key(a).cmp(&key(b)))
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub order: OrderId,
    pub start: SimTime,
    pub setup_minutes: f64,
    pub process_minutes: f64,
    pub finish: SimTime,
}

/// Single server with a queue.
#[derive(Debug, Clone)]
pub struct Machine {
    pub index: usize,
    pub name: String,
    pub rule: DispatchRule,
    pub queue: Vec<QueueEntry>,
    pub current: Option<Job>,
    minutes_per_day: f64,
    window: (f64, f64),
    busy_minutes: f64,
}

impl Machine {
    pub fn new(index: usize, name: impl Into<String>, rule: DispatchRule, minutes_per_day: f64) -> Self {
        Self {
            index,
            name: name.into(),
            rule,
            queue: Vec::new(),
            current: None,
            minutes_per_day,
            window: (0.0, f64::INFINITY),
            busy_minutes: 0.0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.current.is_none()
    }

    pub fn enqueue(&mut self, entry: QueueEntry) {
        self.queue.push(entry);
    }

    /// Removes the next order from the queue, or `None` when it is empty.
    pub fn take_next(&mut self) -> Option<QueueEntry> {
        let i = dispatch(&self.queue, self.rule)?;
        Some(self.queue.remove(i))
    }

    /// Sets the window, in minutes since time zero, over which busy time counts.
    pub fn set_window(&mut self, start: f64, end: f64) {
        self.window = (start, end);
        self.busy_minutes = self.current.map_or(0.0, |j| self.overlap(&j));
    }

    fn overlap(&self, job: &Job) -> f64 {
        let s = job.start.as_days(self.minutes_per_day) * self.minutes_per_day;
        let f = s + job.setup_minutes + job.process_minutes;
        (f.min(self.window.1) - s.max(self.window.0)).max(0.0)
    }

    /// Starts `job`, crediting its busy time inside the window right away.
    pub fn start(&mut self, job: Job) {
        debug_assert!(self.current.is_none(), "machine {} already busy", self.name);
        self.busy_minutes += self.overlap(&job);
        self.current = Some(job);
    }

    pub fn finish(&mut self) -> Option<Job> {
        self.current.take()
    }

    pub fn busy_minutes(&self) -> f64 {
        self.busy_minutes
    }
}

/// Setup and processing draws, one stream pair per machine.
#[derive(Debug, Clone)]
pub struct OperationTimes {
    setup: Vec<RngStream>,
    process: Vec<RngStream>,
    setup_mean: Vec<f64>,
    cv_setup: f64,
    cv_process: f64,
}

impl OperationTimes {
    pub fn new(cal: &CalibratedScenario, seed: u64) -> Self {
        Self {
            setup: cal
                .machines
                .iter()
                .map(|m| RngStream::new(seed, format!("setup-time/{m}")))
                .collect(),
            process: cal
                .machines
                .iter()
                .map(|m| RngStream::new(seed, format!("proc-time/{m}")))
                .collect(),
            setup_mean: cal.setup_minutes.clone(),
            cv_setup: cal.scenario.cv.setup,
            cv_process: cal.scenario.cv.processing,
        }
    }

    /// `(setup, processing)` minutes of a batch: one setup per order and one
    /// lognormal draw for the whole batch.
    pub fn draw(&mut self, machine: usize, unit_minutes: f64, quantity: f64) -> Result<(f64, f64)> {
        let setup = self.setup[machine].lognormal(self.setup_mean[machine], self.cv_setup)?;
        let process = self.process[machine].lognormal(unit_minutes * quantity, self.cv_process)?;
        Ok((setup, process))
    }
}

/// Deterministic duration of a batch: setup plus quantity times unit time.
pub fn batch_minutes(setup: f64, unit_minutes: f64, quantity: f64) -> f64 {
    setup + unit_minutes * quantity
}
