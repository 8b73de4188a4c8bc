//! Monte-Carlo estimates of outage straight from channel draws.
//!
//! Generator: ChaCha8 (`rand_chacha`). Each grid point `i` and block `b` of
//! `BLOCK_LEN` samples gets its own keystream, seeded with the user seed and
//! stream id `i << 40 | b`. Blocks are counted independently and the integer
//! counts summed, so the estimate does not depend on how blocks are spread
//! over threads.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{PhaseMode, SystemConfig};
use crate::curve::{CurvePoint, Method, OutageCurve, SampleInfo};
use crate::error::{Error, Result};

/// Samples drawn from one keystream.
pub const BLOCK_LEN: u64 = 1 << 16;
const MAX_BLOCKS: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub seed: u64,
    pub n_samples: u64,
    pub n_streams: usize,
}

impl McConfig {
    pub fn new(seed: u64, n_samples: u64, n_streams: usize) -> Result<Self> {
        let cfg = Self {
            seed,
            n_samples,
            n_streams,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("Monte Carlo needs at least one sample".into()));
        }
        if self.n_streams == 0 {
            return Err(Error::Config("Monte Carlo needs at least one stream".into()));
        }
        if self.n_samples.div_ceil(BLOCK_LEN) > MAX_BLOCKS {
            return Err(Error::Config(format!(
                "{} samples exceed the stream budget",
                self.n_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_count(hits: u64, n_samples: u64, seed: u64) -> Self {
        let p_hat = hits as f64 / n_samples as f64;
        Self {
            p_hat,
            std_err: (p_hat * (1.0 - p_hat) / n_samples as f64).sqrt(),
            n_samples,
            seed,
        }
    }
}

/// Keystream for block `block` of grid point `point`.
pub fn substream(seed: u64, point: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point << 40) | block);
    rng
}

/// Uniform on (0, 1], 53 random bits.
#[inline]
pub fn open_closed_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Rayleigh magnitude with scale `sigma` by inversion.
#[inline]
pub fn sample_rayleigh<R: RngCore + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    sigma * (-2.0 * open_closed_uniform(rng).ln()).sqrt()
}

/// Product of two independent unit-scale Rayleigh magnitudes.
#[inline]
pub fn sample_double_rayleigh<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let a = open_closed_uniform(rng).ln();
    let b = open_closed_uniform(rng).ln();
    2.0 * (a * b).sqrt()
}

/// `H = Σ |h1n||h2n| + |h_d|` under perfect alignment.
pub fn sample_h<R: RngCore + ?Sized>(n: usize, sigma_d: f64, rng: &mut R) -> f64 {
    let mut s = 0.0;
    for _ in 0..n {
        s += sample_double_rayleigh(rng);
    }
    s + sample_rayleigh(sigma_d, rng)
}

/// In-phase and quadrature parts `(H cos φ, H sin φ)` of one element with
/// residual phase `φ ~ U[-π/2, π/2]`.
pub fn sample_xy<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    let h = sample_double_rayleigh(rng);
    let phi = PI * (open_closed_uniform(rng) - 0.5);
    let (s, c) = phi.sin_cos();
    (h * c, h * s)
}

/// `|G|² = (Σ X_n + |h_d|)² + (Σ Y_n)²` under one-bit alignment.
pub fn sample_g2<R: RngCore + ?Sized>(n: usize, sigma_d: f64, rng: &mut R) -> f64 {
    let mut x = 0.0;
    let mut y = 0.0;
    for _ in 0..n {
        let (dx, dy) = sample_xy(rng);
        x += dx;
        y += dy;
    }
    let re = x + sample_rayleigh(sigma_d, rng);
    re * re + y * y
}

/// Count how often `hit` fires over `mc.n_samples` draws for grid point `point`.
pub fn count_hits<F>(point: u64, mc: &McConfig, hit: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let blocks = mc.n_samples.div_ceil(BLOCK_LEN);
    let per_stream = blocks.div_ceil(mc.n_streams as u64).max(1);
    let chunks: Vec<(u64, u64)> = (0..blocks)
        .step_by(per_stream as usize)
        .map(|lo| (lo, (lo + per_stream).min(blocks)))
        .collect();
    chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut hits = 0u64;
            for block in lo..hi {
                let len = BLOCK_LEN.min(mc.n_samples - block * BLOCK_LEN);
                let mut rng = substream(mc.seed, point, block);
                for _ in 0..len {
                    hits += hit(&mut rng) as u64;
                }
            }
            hits
        })
        .sum()
}

/// One estimate per grid point of `cfg`.
pub fn mc_estimates(mode: PhaseMode, cfg: &SystemConfig, mc: &McConfig) -> Result<Vec<McEstimate>> {
    cfg.validate()?;
    mc.validate()?;
    let n = cfg.n_elements;
    let sigma = cfg.sigma_d;
    Ok(cfg
        .gamma_t_grid_db
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let th = cfg.threshold(g, mode);
            let hits = match mode {
                PhaseMode::Perfect => count_hits(i as u64, mc, |rng| sample_h(n, sigma, rng) < th),
                PhaseMode::OneBit => count_hits(i as u64, mc, |rng| sample_g2(n, sigma, rng) < th),
            };
            McEstimate::from_count(hits, mc.n_samples, mc.seed)
        })
        .collect())
}

pub fn mc_outage(mode: PhaseMode, cfg: &SystemConfig, mc: &McConfig) -> Result<OutageCurve> {
    let est = mc_estimates(mode, cfg, mc)?;
    let points = cfg
        .gamma_t_grid_db
        .iter()
        .zip(&est)
        .map(|(&g, e)| CurvePoint::value(g, e.p_hat, Some(e.std_err)))
        .collect();
    let method = match mode {
        PhaseMode::Perfect => Method::McPerfect,
        PhaseMode::OneBit => Method::McOneBit,
    };
    Ok(OutageCurve::new(
        method,
        cfg,
        points,
        Some(SampleInfo {
            n_samples: mc.n_samples,
            seed: mc.seed,
        }),
    ))
}
