//! Outage CDFs: the received amplitude `H = Σ H_n + |h_d|` under perfect
//! alignment and the received power `|G|² = (X + R)² + Y²` under one-bit
//! alignment.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use log::{debug, warn};
use rayon::prelude::*;

use crate::asymptotics::{cdf_g2_leading, cdf_h_leading};
use crate::channel::{PhaseMode, SystemConfig};
use crate::curve::{CurvePoint, Method, OutageCurve};
use crate::distributions::{
    rayleigh_cdf, surrogate_scale, surrogate_shape, GammaShapeScale, LaplaceSum, NonNegativeLaw,
};
use crate::error::{Error, Result};
use crate::quad::{integrate_small, QuadratureSpec};
use crate::specfun::{binomial, ln_gamma, normal_cdf, regularized_gamma_p};

/// A closed-form value is trusted when its rounding bound stays below
/// `CLOSED_FORM_REL_TOL * |value| + CLOSED_FORM_ABS_FLOOR`. The floor only
/// absorbs underflow: deep-tail values feed relative-accuracy integrals, so
/// the test has to stay relative there too.
pub const CLOSED_FORM_REL_TOL: f64 = 1e-9;
pub const CLOSED_FORM_ABS_FLOOR: f64 = 1e-300;
// Ulps lost per incomplete-gamma evaluation, generously rounded up.
const ROUNDING_ULPS: f64 = 64.0;

/// `∫₀ˣ n^i e^(-b n²) dn = sgn(x)^(i+1) b^(-(i+1)/2) γ((i+1)/2, b x²) / 2`.
fn half_line_moment(i: u32, b: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let s = 0.5 * (i as f64 + 1.0);
    let mag = 0.5 * (ln_gamma(s)? - s * b.ln()).exp() * regularized_gamma_p(s, b * x * x)?;
    Ok(if x < 0.0 && i % 2 == 0 { -mag } else { mag })
}

/// `∫₀ᵗ q^I e^(-a q) e^(-b (t-q)²) dq`, by closed form or by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma2Mode {
    ClosedForm,
    Quadrature,
}

/// The shifted-Gaussian integral `∫₀ᵗ q^I e^(-a q) e^(-b (t-q)²) dq`.
///
/// The closed form completes the square, `q = m + n` with `c = a/(2b)` and
/// `m = t - c`, and splits `∫_{-m}^{c} n^i e^(-b n²) dn` at zero so the
/// sign of `m` is handled for every power `i`.
pub fn lemma2_integral(power: u32, a: f64, b: f64, t: f64, mode: Lemma2Mode, q: &QuadratureSpec) -> Result<f64> {
    if !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(
            "lemma2_integral",
            format!("need finite a and b > 0, got a={a}, b={b}"),
        ));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(
            "lemma2_integral",
            format!("t = {t} must be finite and nonnegative"),
        ));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    match mode {
        Lemma2Mode::Quadrature => {
            let f = |x: f64| {
                let d = t - x;
                (power as f64 * x.ln() - a * x - b * d * d).exp()
            };
            Ok(integrate_small(f, 0.0, t, q)?.value)
        }
        Lemma2Mode::ClosedForm => {
            let (v, bound) = lemma2_closed_form(power, a, b, t)?;
            if !v.is_finite() {
                return Err(Error::IllConditioned { value: v, bound });
            }
            Ok(v)
        }
    }
}

/// Closed form of [`lemma2_integral`] together with a bound on its rounding
/// error. The binomial sum expands `(m + n)^I`; with `m < 0` and `n` near
/// `|m|` it cancels heavily and the bound says by how much.
pub fn lemma2_closed_form(power: u32, a: f64, b: f64, t: f64) -> Result<(f64, f64)> {
    if !(b > 0.0) || !a.is_finite() || !b.is_finite() || !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(
            "lemma2_closed_form",
            format!("need finite a, b > 0 and t >= 0, got a={a}, b={b}, t={t}"),
        ));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let c = a / (2.0 * b);
    let m = t - c;
    let pre = (a * a / (4.0 * b) - a * t).exp();
    let mut sum = 0.0;
    let mut magnitude = 0.0;
    for i in 0..=power {
        let (gc, gm) = (half_line_moment(i, b, c)?, half_line_moment(i, b, -m)?);
        let w = binomial(power, i)? * m.powi((power - i) as i32);
        sum += w * (gc - gm);
        magnitude += w.abs() * (gc.abs() + gm.abs());
    }
    Ok((pre * sum, ROUNDING_ULPS * f64::EPSILON * pre * magnitude))
}

/// `∫₀ᶻ P(R ≤ z - q) dF_Q(q)` for `R ~ Rayleigh(sigma)` independent of `Q`.
///
/// Written with `-expm1` so the integrand keeps full precision when `sigma`
/// is much larger than `z`.
pub fn lemma1_cdf<L: NonNegativeLaw + ?Sized>(law: &L, sigma: f64, z: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain("lemma1_cdf", format!("sigma = {sigma} must be positive")));
    }
    if z.is_nan() {
        return Err(Error::domain("lemma1_cdf", "z is NaN"));
    }
    if z <= 0.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let atom = law.atom_at_zero();
    let head = if atom > 0.0 {
        atom * -(-z * z * inv).exp_m1()
    } else {
        0.0
    };
    let body = integrate_small(
        |x| {
            let d = z - x;
            law.pdf(x) * -(-d * d * inv).exp_m1()
        },
        0.0,
        z,
        q,
    )?;
    Ok((head + body.value).clamp(0.0, 1.0))
}

/// The pieces of the closed-form amplitude CDF at one threshold:
/// `F = P(K, t/θ) - Σ_i C(K-1, i) m^(K-1-i) B_i · prefactor`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Terms {
    pub rounded_shape: u32,
    /// `exp(σ²/(2θ²) - t/θ) / (Γ(K) θ^K)`
    pub prefactor: f64,
    /// `t - σ²/θ`
    pub m: f64,
    /// `B_i = ∫_{-m}^{σ²/θ} n^i e^(-n²/(2σ²)) dn`
    pub b: Vec<f64>,
    pub gamma_term: f64,
}

/// `Q + R` with `Q ~ Gamma(shape, scale)` for integer `shape` and
/// `R ~ Rayleigh(sigma)`.
///
/// Covers both the gamma stand-in for `Σ H_n + |h_d|` and the in-phase sum
/// `X + R` of the one-bit model.
#[derive(Debug, Clone)]
pub struct GammaRayleighSum {
    shape: u32,
    scale: f64,
    sigma: f64,
    a: f64,
    b: f64,
    c: f64,
    ln_norm: f64,
    binom: Vec<f64>,
    moments_at_c: Vec<f64>,
}

impl GammaRayleighSum {
    pub fn new(shape: u32, scale: f64, sigma: f64) -> Result<Self> {
        if shape == 0 {
            return Err(Error::domain("GammaRayleighSum", "shape must be at least 1"));
        }
        if !(scale > 0.0) || !scale.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain(
                "GammaRayleighSum",
                format!("scale = {scale} and sigma = {sigma} must be positive"),
            ));
        }
        let a = 1.0 / scale;
        let b = 1.0 / (2.0 * sigma * sigma);
        let c = a / (2.0 * b);
        let power = shape - 1;
        let binom = (0..=power).map(|i| binomial(power, i)).collect::<Result<Vec<_>>>()?;
        let moments_at_c = (0..=power)
            .map(|i| half_line_moment(i, b, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            shape,
            scale,
            sigma,
            a,
            b,
            c,
            ln_norm: ln_gamma(shape as f64)? + shape as f64 * scale.ln(),
            binom,
            moments_at_c,
        })
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn terms(&self, t: f64) -> Result<Prop1Terms> {
        Ok(self.expand(t)?.0)
    }

    /// Terms, the sum of absolute values the subtraction runs over, and ln prefactor.
    fn expand(&self, t: f64) -> Result<(Prop1Terms, f64, f64)> {
        let m = t - self.c;
        let ln_pre = self.a * self.a / (4.0 * self.b) - self.a * t - self.ln_norm;
        let mut b = Vec::with_capacity(self.shape as usize);
        let mut magnitude = 0.0;
        for i in 0..self.shape {
            let at_m = half_line_moment(i, self.b, -m)?;
            let bi = self.moments_at_c[i as usize] - at_m;
            let weight = self.ln_weight(i as usize, ln_pre, m).exp();
            magnitude += weight * (self.moments_at_c[i as usize].abs() + at_m.abs());
            b.push(bi);
        }
        let gamma_term = regularized_gamma_p(self.shape as f64, t / self.scale)?;
        Ok((
            Prop1Terms {
                rounded_shape: self.shape,
                prefactor: ln_pre.exp(),
                m,
                b,
                gamma_term,
            },
            magnitude + gamma_term,
            ln_pre,
        ))
    }

    /// ln of `prefactor · C(K-1, i) · |m|^(K-1-i)`.
    fn ln_weight(&self, i: usize, ln_pre: f64, m: f64) -> f64 {
        let p = self.shape as usize - 1 - i;
        let ln_m = if p == 0 { 0.0 } else { p as f64 * m.abs().ln() };
        ln_pre + self.binom[i].ln() + ln_m
    }

    /// Closed-form CDF. Fails with [`Error::IllConditioned`] when the
    /// alternating sum cannot deliver the configured accuracy.
    pub fn cdf_closed(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::domain("GammaRayleighSum::cdf_closed", "t is NaN"));
        }
        if t <= 0.0 {
            return Ok(0.0);
        }
        let (terms, magnitude, ln_pre) = self.expand(t)?;
        let mut correction = 0.0;
        for (i, bi) in terms.b.iter().enumerate() {
            let p = self.shape as usize - 1 - i;
            let ln_w = self.ln_weight(i, ln_pre, terms.m);
            let sign = if terms.m < 0.0 && p % 2 == 1 { -1.0 } else { 1.0 };
            correction += sign * ln_w.exp() * bi;
        }
        let value = terms.gamma_term - correction;
        let bound = ROUNDING_ULPS * f64::EPSILON * magnitude;
        if !value.is_finite() || !bound.is_finite() || bound > CLOSED_FORM_REL_TOL * value.abs() + CLOSED_FORM_ABS_FLOOR
        {
            return Err(Error::IllConditioned { value, bound });
        }
        Ok(value.clamp(0.0, 1.0))
    }

    pub fn cdf_quadrature(&self, t: f64, q: &QuadratureSpec) -> Result<f64> {
        let law = GammaShapeScale::new(self.shape as f64, self.scale)?;
        lemma1_cdf(&law, self.sigma, t, q)
    }

    /// Closed form where it is well conditioned, quadrature elsewhere.
    pub fn cdf(&self, t: f64, q: &QuadratureSpec) -> Result<f64> {
        match self.cdf_closed(t) {
            Err(Error::IllConditioned { value, bound }) => {
                debug!(
                    "closed form at t={t} (K={}, sigma={}) gave {value:e} with bound {bound:e}; using quadrature",
                    self.shape, self.sigma
                );
                self.cdf_quadrature(t, q)
            }
            other => other,
        }
    }
}

/// How `F_H` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdfHMode {
    /// Closed form with the gamma shape rounded to `round(N k)`; errors
    /// when ill conditioned.
    ClosedForm,
    /// Convolution integral against the gamma stand-in; `exact_shape`
    /// keeps `N k` unrounded.
    Quadrature { exact_shape: bool },
    /// Closed form, falling back to quadrature on the rounded shape.
    #[default]
    Auto,
}

/// `round(N k)`, at least 1.
pub fn rounded_shape(n: usize) -> u32 {
    ((n as f64 * surrogate_shape()).round() as u32).max(1)
}

/// CDF of `H` at amplitude `t` under the gamma stand-in for `Σ H_n`.
pub fn cdf_h(t: f64, n: usize, sigma_d: f64, q: &QuadratureSpec, mode: CdfHMode) -> Result<f64> {
    check_sigma("cdf_h", sigma_d)?;
    if t.is_nan() {
        return Err(Error::domain("cdf_h", "t is NaN"));
    }
    if n == 0 {
        return Ok(rayleigh_cdf(t, sigma_d));
    }
    match mode {
        CdfHMode::Quadrature { exact_shape: true } => {
            let law = GammaShapeScale::new(n as f64 * surrogate_shape(), surrogate_scale())?;
            lemma1_cdf(&law, sigma_d, t, q)
        }
        _ => {
            let sum = GammaRayleighSum::new(rounded_shape(n), surrogate_scale(), sigma_d)?;
            match mode {
                CdfHMode::ClosedForm => sum.cdf_closed(t),
                CdfHMode::Quadrature { .. } => sum.cdf_quadrature(t, q),
                CdfHMode::Auto => sum.cdf(t, q),
            }
        }
    }
}

/// Closed-form terms of `F_H` at `t`.
pub fn prop1_terms(t: f64, n: usize, sigma_d: f64) -> Result<Prop1Terms> {
    check_sigma("prop1_terms", sigma_d)?;
    if n == 0 {
        return Err(Error::domain("prop1_terms", "needs at least one element"));
    }
    GammaRayleighSum::new(rounded_shape(n), surrogate_scale(), sigma_d)?.terms(t)
}

/// CDF of the one-bit received power `|G|²` at `t`.
///
/// `P(|G|² < t) = ∫₀^t f_{Y²}(y) P(X + R < √(t - y)) dy`, evaluated with
/// `y = t sin²φ` so neither the `y^(-1/2)` singularity nor the square root
/// at `y = t` reaches the quadrature nodes.
pub fn cdf_g2(t: f64, n: usize, sigma_d: f64, q: &QuadratureSpec) -> Result<f64> {
    check_sigma("cdf_g2", sigma_d)?;
    if t.is_nan() {
        return Err(Error::domain("cdf_g2", "t is NaN"));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    if n == 0 {
        return Ok(-(-t / (2.0 * sigma_d * sigma_d)).exp_m1());
    }
    let shape = u32::try_from(n).map_err(|_| Error::domain("cdf_g2", format!("N = {n} is too large")))?;
    let xr = GammaRayleighSum::new(shape, 1.0, sigma_d)?;
    let y = LaplaceSum::new(n)?;
    let root = t.sqrt();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |phi: f64| {
        let (s, c) = phi.sin_cos();
        match xr.cdf(root * c, q) {
            Ok(p) => y.square_pdf_substituted(root * s) * p * root * c,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let res = integrate_small(integrand, 0.0, FRAC_PI_2, q);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(res?.value.clamp(0.0, 1.0))
}

/// Mean and variance of `Σ H_n + |h_d|`.
pub fn amplitude_moments(n: usize, sigma_d: f64) -> (f64, f64) {
    let nf = n as f64;
    let mean = nf * FRAC_PI_2 + sigma_d * FRAC_PI_2.sqrt();
    let var = nf * (4.0 - PI * PI / 4.0) + sigma_d * sigma_d * (2.0 - FRAC_PI_2);
    (mean, var)
}

/// Gaussian (central-limit) approximation of `F_H`.
pub fn clt_cdf_h(t: f64, n: usize, sigma_d: f64) -> Result<f64> {
    check_sigma("clt_cdf_h", sigma_d)?;
    let (mean, var) = amplitude_moments(n, sigma_d);
    Ok(normal_cdf((t - mean) / var.sqrt()))
}

fn check_sigma(function: &'static str, sigma_d: f64) -> Result<()> {
    if !(sigma_d > 0.0) || !sigma_d.is_finite() {
        return Err(Error::domain(function, format!("sigma_d = {sigma_d} must be positive")));
    }
    Ok(())
}

fn point_value(method: Method, cfg: &SystemConfig, gamma_t_db: f64, q: &QuadratureSpec) -> Result<f64> {
    let n = cfg.n_elements;
    let s = cfg.sigma_d;
    match method {
        Method::Perfect => cdf_h(cfg.threshold(gamma_t_db, PhaseMode::Perfect), n, s, q, CdfHMode::Auto),
        Method::OneBit => cdf_g2(cfg.threshold(gamma_t_db, PhaseMode::OneBit), n, s, q),
        Method::CltPerfect => clt_cdf_h(cfg.threshold(gamma_t_db, PhaseMode::Perfect), n, s),
        Method::AsymptoticPerfect => cdf_h_leading(cfg.threshold(gamma_t_db, PhaseMode::Perfect), n, s),
        Method::AsymptoticOneBit => cdf_g2_leading(cfg.threshold(gamma_t_db, PhaseMode::OneBit), n, s),
        Method::McPerfect | Method::McOneBit => Err(Error::Config(format!(
            "method {method} is simulated, not evaluated analytically"
        ))),
    }
}

/// Evaluate a deterministic method over the SNR grid, points in parallel.
///
/// A point that fails keeps its error message; the rest of the curve is
/// still produced.
pub fn outage(method: Method, cfg: &SystemConfig, q: &QuadratureSpec) -> Result<OutageCurve> {
    cfg.validate()?;
    if method.is_simulated() {
        return Err(Error::Config(format!(
            "method {method} is simulated, not evaluated analytically"
        )));
    }
    let points = cfg
        .gamma_t_grid_db
        .par_iter()
        .map(|&g| match point_value(method, cfg, g, q) {
            Ok(p) => {
                if !(-1e-6..=1.0 + 1e-6).contains(&p) {
                    // leading-order terms exceed 1 far from their range of validity
                    if matches!(method, Method::AsymptoticPerfect | Method::AsymptoticOneBit) {
                        debug!("{method} at {g} dB gave {p:e}; clamped to 1");
                    } else {
                        warn!("{method} at {g} dB produced {p:e}; clamped to [0, 1]");
                    }
                }
                CurvePoint::value(g, p.clamp(0.0, 1.0), None)
            }
            Err(e) => CurvePoint::failed(g, e.to_string()),
        })
        .collect();
    Ok(OutageCurve::new(method, cfg, points, None))
}
