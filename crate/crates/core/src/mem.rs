//! Allocation accounting for the low-memory solve path.
//!
//! The meter counts live f64 slots owned by a solve (iterate vectors, oracle
//! workspace, trace scalars) so tests can assert that the sampling-mode
//! representation stays O(n + d) instead of the O(n^2) a dense iterate needs.

use std::sync::atomic::{AtomicUsize, Ordering};

#[derive(Debug, Default)]
pub struct MemMeter {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl MemMeter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `floats` newly allocated slots as live.
    pub fn alloc(&self, floats: usize) {
        let now = self.current.fetch_add(floats, Ordering::Relaxed) + floats;
        self.bump_peak(now);
    }

    /// Record `floats` slots released.
    pub fn free(&self, floats: usize) {
        let mut cur = self.current.load(Ordering::Relaxed);
        loop {
            let next = cur.saturating_sub(floats);
            match self.current.compare_exchange_weak(
                cur,
                next,
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => return,
                Err(seen) => cur = seen,
            }
        }
    }

    /// Record a short-lived allocation of `floats` slots that is freed before
    /// the caller returns (e.g. a Lanczos basis inside one oracle call).
    pub fn transient(&self, floats: usize) {
        let now = self.current.load(Ordering::Relaxed) + floats;
        self.bump_peak(now);
    }

    pub fn current_floats(&self) -> usize {
        self.current.load(Ordering::Relaxed)
    }

    pub fn peak_floats(&self) -> usize {
        self.peak.load(Ordering::Relaxed)
    }

    fn bump_peak(&self, candidate: usize) {
        let mut peak = self.peak.load(Ordering::Relaxed);
        while candidate > peak {
            match self.peak.compare_exchange_weak(
                peak,
                candidate,
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => return,
                Err(seen) => peak = seen,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_tracks_high_water_mark() {
        let m = MemMeter::new();
        m.alloc(100);
        m.alloc(50);
        m.free(120);
        m.alloc(10);
        assert_eq!(m.current_floats(), 40);
        assert_eq!(m.peak_floats(), 150);
        m.transient(500);
        assert_eq!(m.peak_floats(), 540);
        assert_eq!(m.current_floats(), 40);
    }
}
