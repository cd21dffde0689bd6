use super::{TimeSeries, WorkloadError};

/// Decay factor of the centered exponential kernel.
pub const EXP_DECAY: f64 = 0.5;

/// A symmetric centered kernel. Near the ends of a series the kernel is
/// truncated and the remaining weights renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    half: usize,
    /// Unnormalized weights for offsets `-half..=half`.
    raw: Vec<f64>,
}

impl Kernel {
    /// Triangle with weights `ceil(window/2) - |j|` for `|j| <= floor(window/2)`.
    pub fn triangular(window: usize) -> Result<Self, WorkloadError> {
        if window == 0 {
            return Err(WorkloadError::InvalidWindow);
        }
        let half = window / 2;
        let peak = window.div_ceil(2);
        let raw = (0..=2 * half)
            .map(|k| (peak - k.abs_diff(half)) as f64)
            .collect();
        Ok(Kernel { half, raw })
    }

    /// Weights `EXP_DECAY^|j|` for `|j| <= (span-1)/2`; `span` must be odd.
    pub fn exponential(span: usize) -> Result<Self, WorkloadError> {
        if span == 0 || span % 2 == 0 {
            return Err(WorkloadError::InvalidSpan(span));
        }
        let half = (span - 1) / 2;
        let raw = (0..=2 * half)
            .map(|k| EXP_DECAY.powi(k.abs_diff(half) as i32))
            .collect();
        Ok(Kernel { half, raw })
    }

    /// Normalized `(index, weight)` pairs used at position `i` of a series
    /// of length `len`. Zero-weight taps are omitted.
    pub fn weights_at(&self, i: usize, len: usize) -> Vec<(usize, f64)> {
        let lo = i.saturating_sub(self.half);
        let hi = (i + self.half).min(len.saturating_sub(1));
        let taps: Vec<(usize, f64)> = (lo..=hi)
            .map(|j| (j, self.raw[j + self.half - i]))
            .filter(|(_, w)| *w > 0.0)
            .collect();
        let total: f64 = taps.iter().map(|(_, w)| w).sum();
        taps.into_iter().map(|(j, w)| (j, w / total)).collect()
    }

    /// Applies the kernel. Computed as `x[i] + Σ w (x[j] - x[i])` and clamped
    /// to the window's range, so constant stretches come out exactly constant
    /// and the output never leaves the convex hull of its inputs.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let len = values.len();
        (0..len)
            .map(|i| {
                let center = values[i];
                let taps = self.weights_at(i, len);
                let (mut lo, mut hi) = (center, center);
                let mut delta = 0.0;
                for (j, w) in taps {
                    let v = values[j];
                    lo = lo.min(v);
                    hi = hi.max(v);
                    delta += w * (v - center);
                }
                (center + delta).clamp(lo, hi)
            })
            .collect()
    }
}

fn smoothed(series: &TimeSeries, kernel: &Kernel) -> TimeSeries {
    TimeSeries {
        values: kernel.apply(&series.values),
        ..series.clone()
    }
}

/// Centered moving average with a triangular kernel.
pub fn triangular_smooth(series: &TimeSeries, window: usize) -> Result<TimeSeries, WorkloadError> {
    if series.is_empty() {
        return Err(WorkloadError::EmptyInput);
    }
    let kernel = Kernel::triangular(window)?;
    if window > 2 * series.len() + 1 {
        return Err(WorkloadError::DegenerateWindow {
            window,
            len: series.len(),
        });
    }
    Ok(smoothed(series, &kernel))
}

/// Centered exponential smoothing over `span` steps.
pub fn centered_exp_smooth(series: &TimeSeries, span: usize) -> Result<TimeSeries, WorkloadError> {
    let kernel = Kernel::exponential(span)?;
    if series.is_empty() {
        return Err(WorkloadError::EmptyInput);
    }
    Ok(smoothed(series, &kernel))
}
