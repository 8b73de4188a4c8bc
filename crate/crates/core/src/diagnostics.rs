//! How good the gamma stand-in and the X/Y independence assumption are.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::distributions::{ln_double_rayleigh_pdf, surrogate_scale, surrogate_shape, GammaShapeScale};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_panels, integrate_to_infinity, QuadratureSpec};
use crate::specfun::{bessel_k0, ln_bessel_k0, ln_gamma};

// Both x K0(x) and the gamma densities are below 1e-300 past this point.
const KL_TAIL_CUTOFF: f64 = 750.0;
const KL_PANELS: [f64; 9] = [0.0, 0.25, 1.0, 3.0, 8.0, 20.0, 60.0, 200.0, KL_TAIL_CUTOFF];

/// Gamma stand-in with shape `k + ε/N` and the usual scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlSpec {
    pub n_elements: usize,
    pub epsilon: f64,
}

impl KlSpec {
    pub fn new(n_elements: usize, epsilon: f64) -> Result<Self> {
        let spec = Self { n_elements, epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(Error::Config("KL study needs N ≥ 1".into()));
        }
        if !(-0.5..=0.5).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon = {} outside [-0.5, 0.5]", self.epsilon)));
        }
        if !(self.shape() > 0.0) {
            return Err(Error::Config(format!("shape {} is not positive", self.shape())));
        }
        Ok(())
    }

    pub fn shape(&self) -> f64 {
        surrogate_shape() + self.epsilon / self.n_elements as f64
    }

    /// The offset that reproduces rounding `N k` to the nearest integer.
    pub fn rounded(n_elements: usize) -> Result<Self> {
        let nk = n_elements as f64 * surrogate_shape();
        Self::new(n_elements, nk.round() - nk)
    }
}

/// `D(f_H ‖ Gamma(k + ε/N, θ))` in nats, `f_H(x) = x K0(x)`.
pub fn kl_double_rayleigh_vs_gamma(spec: &KlSpec, q: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let law = GammaShapeScale::new(spec.shape(), surrogate_scale())?;
    let f = |x: f64| {
        let lf = ln_double_rayleigh_pdf(x);
        let v = lf.exp();
        if v == 0.0 {
            0.0
        } else {
            v * (lf - law.ln_pdf(x))
        }
    };
    Ok(integrate_panels(f, &KL_PANELS, q)?.value)
}

/// KL divergence that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlValue {
    /// `f64::INFINITY` when `saturated`.
    pub nats: f64,
    pub saturated: bool,
}

fn ln_student_t_pdf(x: f64, n: f64, ln_norm: f64) -> f64 {
    ln_norm - 0.5 * (n + 1.0) * (x * x / n).ln_1p()
}

/// `D(t_n ‖ N(0, 1))`. Infinite for `n ≤ 2`, where the second moment is.
pub fn kl_student_t_vs_normal(n: usize, q: &QuadratureSpec) -> Result<KlValue> {
    if n == 0 {
        return Err(Error::domain(
            "kl_student_t_vs_normal",
            "needs at least one degree of freedom",
        ));
    }
    if n <= 2 {
        return Ok(KlValue {
            nats: f64::INFINITY,
            saturated: true,
        });
    }
    let nf = n as f64;
    let ln_norm = ln_gamma(0.5 * (nf + 1.0))? - ln_gamma(0.5 * nf)? - 0.5 * (nf * PI).ln();
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let f = |x: f64| {
        let lt = ln_student_t_pdf(x, nf, ln_norm);
        let v = lt.exp();
        if v == 0.0 {
            0.0
        } else {
            v * (lt + 0.5 * x * x + half_ln_2pi)
        }
    };
    let body = integrate(f, 0.0, 8.0, q)?.value;
    let tail = integrate_to_infinity(f, 8.0, q)?.value;
    Ok(KlValue {
        nats: 2.0 * (body + tail),
        saturated: false,
    })
}

/// Joint density of one element's in-phase and quadrature parts,
/// `K0(√(x² + y²))/π` on `x ≥ 0`.
pub fn joint_pdf_xy(x: f64, y: f64) -> Result<f64> {
    if x < 0.0 {
        return Ok(0.0);
    }
    let r = x.hypot(y);
    if r == 0.0 {
        return Err(Error::domain("joint_pdf_xy", "density is unbounded at the origin"));
    }
    Ok(bessel_k0(r)? / PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInformation {
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    pub nats: f64,
}

/// `I(X_n; Y_n) = h(X_n) + h(Y_n) - h(X_n, Y_n)`.
///
/// The joint density is radial on the half plane, so in polar coordinates
/// `h(X, Y) = -∫₀^∞ r K0(r) ln(K0(r)/π) dr`.
pub fn mutual_information_xy(q: &QuadratureSpec) -> Result<MutualInformation> {
    let f = |r: f64| {
        let lk = ln_bessel_k0(r).unwrap_or(f64::NEG_INFINITY);
        let v = r * lk.exp();
        if v == 0.0 {
            0.0
        } else {
            -v * (lk - PI.ln())
        }
    };
    let h_xy = integrate_panels(f, &KL_PANELS, q)?.value;
    let h_x = 1.0;
    let h_y = 1.0 + LN_2;
    Ok(MutualInformation {
        h_x,
        h_y,
        h_xy,
        nats: h_x + h_y - h_xy,
    })
}

/// `E[cos φ sin φ]` for `φ ~ U[-π/2, π/2]`; zero, so `X_n` and `Y_n` are
/// uncorrelated.
pub fn phase_cross_moment(q: &QuadratureSpec) -> Result<f64> {
    Ok(integrate(|p: f64| p.cos() * p.sin() / PI, -FRAC_PI_2, FRAC_PI_2, q)?.value)
}
