use std::sync::{Condvar, Mutex, MutexGuard};

use crate::error::{Error, Result};
use crate::graph::{Dist, INF};
use crate::partition::{other, SIDES};

#[derive(Debug)]
struct Marks {
    /// Worker `i` has finished every level with key `>= finished_from[i]`.
    finished_from: [Dist; SIDES],
    done: [bool; SIDES],
    /// The level key each worker is blocked on, if any.
    waiting: [Option<Dist>; SIDES],
    deadlock: bool,
}

/// Level-progress watermarks published by the two backward workers.
#[derive(Debug)]
pub struct LevelWatermarks {
    marks: Mutex<Marks>,
    changed: Condvar,
}

impl Default for LevelWatermarks {
    fn default() -> Self {
        Self::new()
    }
}

impl LevelWatermarks {
    pub fn new() -> Self {
        LevelWatermarks {
            marks: Mutex::new(Marks {
                finished_from: [INF; SIDES],
                done: [false; SIDES],
                waiting: [None; SIDES],
                deadlock: false,
            }),
            changed: Condvar::new(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Marks> {
        self.marks.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn publish(&self, side: usize, key: Dist) {
        let mut m = self.lock();
        m.finished_from[side] = m.finished_from[side].min(key);
        drop(m);
        self.changed.notify_all();
    }

    pub fn finish(&self, side: usize) {
        let mut m = self.lock();
        m.done[side] = true;
        m.waiting[side] = None;
        drop(m);
        self.changed.notify_all();
    }

    /// Blocks until the other worker has finished level `key`. Fails if both
    /// workers end up waiting on levels neither can reach.
    pub fn wait_for(&self, side: usize, key: Dist) -> Result<()> {
        let o = other(side);
        let mut m = self.lock();
        loop {
            if m.deadlock {
                return Err(Error::Deadlock("peer worker detected a wait cycle".into()));
            }
            if m.done[o] || m.finished_from[o] <= key {
                m.waiting[side] = None;
                return Ok(());
            }
            if let Some(theirs) = m.waiting[o] {
                if m.finished_from[side] > theirs {
                    m.deadlock = true;
                    drop(m);
                    self.changed.notify_all();
                    return Err(Error::Deadlock(format!(
                        "worker {side} waits for level {key} of worker {o}, \
                         which waits for level {theirs}"
                    )));
                }
            }
            m.waiting[side] = Some(key);
            m = self.changed.wait(m).unwrap_or_else(|e| e.into_inner());
        }
    }
}

/// Marks a worker finished when dropped, so an early return or panic never
/// leaves the peer blocked.
pub(crate) struct FinishGuard<'a> {
    pub marks: &'a LevelWatermarks,
    pub side: usize,
}

impl Drop for FinishGuard<'_> {
    fn drop(&mut self) {
        self.marks.finish(self.side);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn waiter_released_by_publish() {
        let w = LevelWatermarks::new();
        std::thread::scope(|s| {
            let h = s.spawn(|| w.wait_for(0, 5));
            std::thread::sleep(std::time::Duration::from_millis(10));
            w.publish(1, 7);
            w.publish(1, 5);
            assert!(h.join().unwrap().is_ok());
        });
    }

    #[test]
    fn waiter_released_by_finish() {
        let w = LevelWatermarks::new();
        std::thread::scope(|s| {
            let h = s.spawn(|| w.wait_for(1, 2));
            w.finish(0);
            assert!(h.join().unwrap().is_ok());
        });
    }

    #[test]
    fn mutual_wait_is_detected() {
        let w = LevelWatermarks::new();
        w.publish(0, 10);
        w.publish(1, 10);
        let (a, b) = std::thread::scope(|s| {
            let h0 = s.spawn(|| w.wait_for(0, 3));
            let h1 = s.spawn(|| w.wait_for(1, 4));
            (h0.join().unwrap(), h1.join().unwrap())
        });
        assert!(matches!(a, Err(Error::Deadlock(_))));
        assert!(matches!(b, Err(Error::Deadlock(_))));
    }
}
