//! Virtual clock and priority event queue.
//!
//! Events are ordered by `(fire_time, sequence)`. Sequence numbers are handed
//! out in scheduling order, so events sharing a fire time are dispatched FIFO.
//! Cancellation is lazy: a cancelled event stays in the heap and is skipped
//! when it reaches the front.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Result, SimError};

/// Handle returned by [`Scheduler::schedule`], usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

#[derive(Debug, Clone)]
pub struct Event<T> {
    pub fire_time: f64,
    pub sequence: u64,
    pub kind: T,
}

impl<T> PartialEq for Event<T> {
    fn eq(&self, other: &Self) -> bool {
        self.sequence == other.sequence
    }
}

impl<T> Eq for Event<T> {}

impl<T> PartialOrd for Event<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Event<T> {
    // Reversed so the max-heap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .fire_time
            .total_cmp(&self.fire_time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

#[derive(Debug)]
pub struct Scheduler<T> {
    now: f64,
    next_sequence: u64,
    queue: BinaryHeap<Event<T>>,
    cancelled: HashSet<u64>,
}

impl<T> Default for Scheduler<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> Scheduler<T> {
    pub fn new() -> Self {
        Scheduler {
            now: 0.0,
            next_sequence: 0,
            queue: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    /// Enqueue `kind` to fire at `fire_time`. Times before the current clock
    /// are rejected: they can only come from a bug in an event handler.
    pub fn schedule(&mut self, fire_time: f64, kind: T) -> Result<EventHandle> {
        if fire_time.is_nan() || fire_time < self.now {
            return Err(SimError::ScheduleInPast {
                fire_time,
                now: self.now,
            });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.queue.push(Event {
            fire_time,
            sequence,
            kind,
        });
        Ok(EventHandle(sequence))
    }

    /// Returns false if the event already fired or was cancelled before.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_sequence {
            return false;
        }
        let pending = self.queue.iter().any(|e| e.sequence == handle.0);
        pending && self.cancelled.insert(handle.0)
    }

    /// Fire time of the next live event, if any.
    pub fn peek_time(&mut self) -> Option<f64> {
        self.skip_cancelled();
        self.queue.peek().map(|e| e.fire_time)
    }

    /// Remove the next live event and advance the clock to its fire time.
    pub fn pop(&mut self) -> Option<Event<T>> {
        self.skip_cancelled();
        let event = self.queue.pop()?;
        debug_assert!(event.fire_time >= self.now);
        self.now = event.fire_time;
        Some(event)
    }

    /// Move the clock forward without dispatching anything.
    pub fn advance_to(&mut self, t: f64) {
        if t > self.now {
            self.now = t;
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len() - self.cancelled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Live events still queued, in no particular order.
    pub fn pending(&self) -> impl Iterator<Item = &Event<T>> {
        self.queue
            .iter()
            .filter(move |e| !self.cancelled.contains(&e.sequence))
    }

    fn skip_cancelled(&mut self) {
        while let Some(head) = self.queue.peek() {
            if self.cancelled.remove(&head.sequence) {
                self.queue.pop();
            } else {
                break;
            }
        }
    }
}
