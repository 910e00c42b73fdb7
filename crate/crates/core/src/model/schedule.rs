use std::f64::consts::PI;

/// Linear warmup from 0 to `peak` over the first `warmup_steps` updates,
/// then cosine decay to 0 at `total_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmupCosine {
    pub peak: f64,
    pub warmup_steps: usize,
    pub total_steps: usize,
}

impl WarmupCosine {
    /// Warmup length is `ceil(warmup_ratio * total_steps)`.
    pub fn new(peak: f64, warmup_ratio: f64, total_steps: usize) -> Self {
        WarmupCosine {
            peak,
            warmup_steps: warmup_steps(warmup_ratio, total_steps),
            total_steps,
        }
    }

    /// Learning rate applied by the update that starts at `step` updates done.
    pub fn lr(&self, step: usize) -> f64 {
        if step < self.warmup_steps {
            return self.peak * step as f64 / self.warmup_steps as f64;
        }
        let decay = self.total_steps.saturating_sub(self.warmup_steps);
        if decay == 0 {
            return 0.0;
        }
        let progress = ((step - self.warmup_steps) as f64 / decay as f64).min(1.0);
        self.peak * 0.5 * (1.0 + (PI * progress).cos())
    }
}

pub(crate) fn warmup_steps(ratio: f64, total: usize) -> usize {
    // Tolerance keeps 0.03 * 600 at 18 despite binary rounding.
    ((ratio * total as f64) - 1e-9).ceil().max(0.0) as usize
}
