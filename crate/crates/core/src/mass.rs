//! Cumulative-frequency prefix selection shared by the process-graph filter
//! and the variant filter.

/// Relative slack on the mass comparison so that e.g. 9/10 ≥ 0.9 holds
/// regardless of how the threshold literal rounds.
const MASS_EPS: f64 = 1e-12;

/// Length of the shortest prefix of `freqs` (assumed sorted descending)
/// whose cumulative share of the total reaches `mass`.
///
/// Returns 0 for `mass <= 0` or an empty / all-zero input.
pub fn mass_prefix_len(freqs: &[u64], mass: f64) -> usize {
    let total: u64 = freqs.iter().sum();
    if total == 0 || mass <= 0.0 {
        return 0;
    }
    let target = mass * total as f64 * (1.0 - MASS_EPS);
    let mut cum = 0u64;
    for (i, f) in freqs.iter().enumerate() {
        cum += f;
        if cum as f64 >= target {
            return i + 1;
        }
    }
    freqs.len()
}
