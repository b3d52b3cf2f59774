//! Gateway demodulator: unlimited preamble detectors feeding a fixed pool
//! of demodulation paths shared by all channels.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Instant(f64);

impl Eq for Instant {}

impl PartialOrd for Instant {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Instant {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathDecision {
    Assigned,
    Dropped,
}

#[derive(Debug, Clone)]
pub struct DemodulatorState {
    /// `None` means unlimited.
    paths: Option<usize>,
    busy: BinaryHeap<Reverse<(Instant, u32)>>,
    max_busy: usize,
}

impl DemodulatorState {
    pub fn new(paths: Option<u32>) -> Self {
        DemodulatorState {
            paths: paths.map(|p| p as usize),
            busy: BinaryHeap::new(),
            max_busy: 0,
        }
    }

    /// Frees every path whose frame ended at or before `now`.
    pub fn release_until(&mut self, now: f64) {
        while let Some(Reverse((Instant(t), _))) = self.busy.peek() {
            if *t <= now {
                self.busy.pop();
            } else {
                break;
            }
        }
    }

    /// Handles a preamble lock at `now` for a frame that ends at `release`.
    /// Releases due at `now` happen first.
    pub fn detect(&mut self, now: f64, frame: u32, release: f64) -> PathDecision {
        self.release_until(now);
        let free = match self.paths {
            Some(p) => self.busy.len() < p,
            None => true,
        };
        if !free {
            return PathDecision::Dropped;
        }
        self.busy.push(Reverse((Instant(release), frame)));
        self.max_busy = self.max_busy.max(self.busy.len());
        if let Some(p) = self.paths {
            assert!(self.busy.len() <= p, "path occupancy {} exceeds {p}", self.busy.len());
        }
        PathDecision::Assigned
    }

    pub fn busy(&self) -> usize {
        self.busy.len()
    }

    /// Highest simultaneous occupancy seen so far.
    pub fn max_busy(&self) -> usize {
        self.max_busy
    }
}

/// A preamble lock waiting for a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub time: f64,
    pub frame: u32,
    pub release: f64,
}

/// Runs all detections through the demodulator in `(time, frame)` order and
/// returns the decision for each, in the input order.
pub fn demodulator_step(detections: &[Detection], state: &mut DemodulatorState) -> Vec<PathDecision> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&detections[a], &detections[b]);
        x.time.total_cmp(&y.time).then(x.frame.cmp(&y.frame))
    });
    let mut decisions = vec![PathDecision::Dropped; detections.len()];
    for i in order {
        let d = detections[i];
        decisions[i] = state.detect(d.time, d.frame, d.release);
    }
    decisions
}
