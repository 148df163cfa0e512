use std::collections::BTreeMap;

use crate::scenario::Value;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Schedule,
    Attack,
    Player,
}

impl Origin {
    pub fn keyword(self) -> &'static str {
        match self {
            Origin::Schedule => "schedule",
            Origin::Attack => "attack",
            Origin::Player => "player",
        }
    }
}

/// A property write at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: Timestamp,
    pub target: String,
    pub property: String,
    pub value: Value,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEntry {
    pub time: Timestamp,
    pub target: String,
    pub property: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub name: String,
    pub entries: Vec<ScheduleEntry>,
    /// Seconds between repetitions of every entry.
    pub repeat: Option<i64>,
}

/// Events ordered by time, ties broken by insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventQueue {
    events: BTreeMap<(Timestamp, u64), Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: Event) {
        self.events.insert((e.time, self.next_seq), e);
        self.next_seq += 1;
    }

    pub fn peek_time(&self) -> Option<Timestamp> {
        self.events.keys().next().map(|(t, _)| *t)
    }

    /// Removes the earliest event if it is due at or before `t`.
    pub fn pop_due(&mut self, t: Timestamp) -> Option<Event> {
        match self.peek_time() {
            Some(first) if first <= t => self.events.pop_first().map(|(_, e)| e),
            _ => None,
        }
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.events.pop_first().map(|(_, e)| e)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.events.values()
    }
}

/// A dropped schedule entry whose time falls outside the run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutOfWindow {
    pub schedule: String,
    pub time: Timestamp,
    pub target: String,
    pub property: String,
}

/// Expands schedules (with repetition up to `tf`) and appends compiled attack
/// events. Entries outside `[t0, tf]` are dropped and reported.
pub fn build_event_list(
    schedules: &[Schedule],
    attack_events: &[Event],
    t0: Timestamp,
    tf: Timestamp,
) -> (EventQueue, Vec<OutOfWindow>) {
    let mut queue = EventQueue::new();
    let mut dropped = Vec::new();
    for s in schedules {
        let mut entries: Vec<&ScheduleEntry> = s.entries.iter().collect();
        entries.sort_by_key(|e| e.time);
        let mut occurrences = Vec::new();
        for e in entries {
            match s.repeat.filter(|p| *p > 0) {
                Some(period) if e.time <= tf => {
                    let mut t = e.time;
                    if t < t0 {
                        t = t + (t0 - t + period - 1) / period * period;
                    }
                    while t <= tf {
                        occurrences.push((t, e));
                        t = t + period;
                    }
                }
                _ if e.time >= t0 && e.time <= tf => occurrences.push((e.time, e)),
                _ => dropped.push(OutOfWindow {
                    schedule: s.name.clone(),
                    time: e.time,
                    target: e.target.clone(),
                    property: e.property.clone(),
                }),
            }
        }
        occurrences.sort_by_key(|(t, _)| *t);
        for (t, e) in occurrences {
            queue.push(Event {
                time: t,
                target: e.target.clone(),
                property: e.property.clone(),
                value: e.value.clone(),
                origin: Origin::Schedule,
            });
        }
    }
    for e in attack_events {
        if e.time >= t0 && e.time <= tf {
            queue.push(e.clone());
        } else {
            dropped.push(OutOfWindow {
                schedule: e.origin.keyword().to_string(),
                time: e.time,
                target: e.target.clone(),
                property: e.property.clone(),
            });
        }
    }
    (queue, dropped)
}
