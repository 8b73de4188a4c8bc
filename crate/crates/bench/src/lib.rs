//! Shared inputs for the `engines` benchmarks.

use irslab_core::SystemConfig;

/// The default sweep shape: unit direct link, 0 dB threshold, `points`
/// transmit SNRs between -30 and 10 dB.
pub fn sweep(n_elements: usize, points: usize) -> SystemConfig {
    let grid = (0..points)
        .map(|i| -30.0 + 40.0 * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    SystemConfig::new(n_elements, 1.0, 0.0, grid).expect("benchmark sweep is valid")
}
