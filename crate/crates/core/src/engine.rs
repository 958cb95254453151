//! Event calendar and clock.
//!
//! Events are ordered by `(time, phase, sequence)`. The phase is a small rank
//! supplied by the payload so that events sharing a timestamp run in a fixed
//! canonical order (arrivals before planning before release, and so on);
//! within one phase the insertion sequence breaks ties.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, SimError};
use crate::time::SimTime;

/// Rank of an event payload among events that share a timestamp.
pub trait Phased {
    fn phase(&self) -> u8;
}

#[derive(Debug, Clone)]
pub struct Event<P> {
    pub time: SimTime,
    pub phase: u8,
    pub sequence: u64,
    pub payload: P,
}

impl<P> Event<P> {
    fn key(&self) -> (SimTime, u8, u64) {
        (self.time, self.phase, self.sequence)
    }
}

impl<P> PartialEq for Event<P> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<P> Eq for Event<P> {}

impl<P> PartialOrd for Event<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Event<P> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

#[derive(Debug)]
pub struct EventQueue<P> {
    heap: BinaryHeap<Event<P>>,
    clock: SimTime,
    next_sequence: u64,
    processed: u64,
}

impl<P: Phased> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: Phased> EventQueue<P> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            clock: SimTime::ZERO,
            next_sequence: 0,
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Enqueues `payload` at `time`, returning the assigned sequence number.
    pub fn schedule(&mut self, time: SimTime, payload: P) -> Result<u64> {
        if time < self.clock {
            return Err(SimError::PastEvent {
                event: time,
                clock: self.clock,
            });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(Event {
            time,
            phase: payload.phase(),
            sequence,
            payload,
        });
        Ok(sequence)
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.time)
    }

    /// Pops the next event if it is due no later than `end`, advancing the clock.
    pub fn pop_until(&mut self, end: SimTime) -> Option<Event<P>> {
        if self.heap.peek()?.time > end {
            return None;
        }
        let event = self.heap.pop()?;
        self.clock = event.time;
        self.processed += 1;
        Some(event)
    }

    /// Processes every event due no later than `end` and leaves the clock at `end`.
    ///
    /// The handler may schedule further events through the queue it receives.
    pub fn run_until<F>(&mut self, end: SimTime, mut handler: F) -> Result<u64>
    where
        F: FnMut(&mut Self, Event<P>) -> Result<()>,
    {
        let mut count = 0;
        while let Some(event) = self.pop_until(end) {
            handler(self, event)?;
            count += 1;
        }
        if end > self.clock {
            self.clock = end;
        }
        Ok(count)
    }
}
