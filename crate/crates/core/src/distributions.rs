//! Per-path and aggregate fading laws.
//!
//! `H_n = |h1n||h2n|` is double Rayleigh with density `x K0(x)`; its
//! moment-matched gamma stand-in has `k = π²/(16-π²)`, `θ = (16-π²)/(2π)`.
//! Under one-bit alignment the in-phase part `X_n = H_n cos φ_n` is unit
//! exponential and the quadrature part `Y_n = H_n sin φ_n` is unit Laplace.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::specfun::{bessel_k0, ln_bessel_k0, ln_gamma, regularized_gamma_p};

/// A nonnegative random variable seen through its density plus an optional
/// point mass at zero.
pub trait NonNegativeLaw {
    fn pdf(&self, x: f64) -> f64;

    fn atom_at_zero(&self) -> f64 {
        0.0
    }
}

/// Degenerate law concentrated at zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointMassAtZero;

impl NonNegativeLaw for PointMassAtZero {
    fn pdf(&self, _x: f64) -> f64 {
        0.0
    }

    fn atom_at_zero(&self) -> f64 {
        1.0
    }
}

/// Gamma law with shape `k` and scale `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaShapeScale {
    pub k: f64,
    pub theta: f64,
}

impl GammaShapeScale {
    pub fn new(k: f64, theta: f64) -> Result<Self> {
        if !(k > 0.0) || !(theta > 0.0) || !k.is_finite() || !theta.is_finite() {
            return Err(Error::Config(format!(
                "gamma law needs positive shape and scale, got k={k}, theta={theta}"
            )));
        }
        Ok(Self { k, theta })
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if x == 0.0 {
            return match self.k.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => -self.theta.ln(),
                _ => f64::NEG_INFINITY,
            };
        }
        // shape and scale are validated, ln Γ cannot fail
        let lg = ln_gamma(self.k).unwrap_or(f64::NAN);
        (self.k - 1.0) * x.ln() - x / self.theta - self.k * self.theta.ln() - lg
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        regularized_gamma_p(self.k, x / self.theta).unwrap_or(f64::NAN)
    }

    pub fn mean(&self) -> f64 {
        self.k * self.theta
    }

    pub fn variance(&self) -> f64 {
        self.k * self.theta * self.theta
    }
}

impl NonNegativeLaw for GammaShapeScale {
    fn pdf(&self, x: f64) -> f64 {
        GammaShapeScale::pdf(self, x)
    }
}

/// Shape of the double-Rayleigh gamma stand-in.
pub fn surrogate_shape() -> f64 {
    PI * PI / (16.0 - PI * PI)
}

/// Scale of the double-Rayleigh gamma stand-in.
pub fn surrogate_scale() -> f64 {
    (16.0 - PI * PI) / (2.0 * PI)
}

pub fn gamma_surrogate() -> GammaShapeScale {
    GammaShapeScale {
        k: surrogate_shape(),
        theta: surrogate_scale(),
    }
}

/// Gamma law of the sum of `n` surrogate per-path gains.
pub fn sum_s_law(n: usize) -> Result<GammaShapeScale> {
    if n == 0 {
        return Err(Error::domain("sum_s_law", "need at least one element"));
    }
    GammaShapeScale::new(n as f64 * surrogate_shape(), surrogate_scale())
}

pub fn sum_s_pdf(x: f64, n: usize) -> Result<f64> {
    Ok(sum_s_law(n)?.pdf(x))
}

/// Density of the product of two independent unit-scale Rayleigh variables.
pub fn double_rayleigh_pdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    x * bessel_k0(x).unwrap_or(0.0)
}

/// ln(x K0(x)), finite far beyond the point where the density underflows.
pub fn ln_double_rayleigh_pdf(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    x.ln() + ln_bessel_k0(x).unwrap_or(f64::NEG_INFINITY)
}

/// Density of cos φ with φ uniform on [-π/2, π/2].
pub fn cos_phase_pdf(x: f64) -> f64 {
    if !(0.0..1.0).contains(&x) {
        return 0.0;
    }
    2.0 / (PI * (1.0 - x * x).sqrt())
}

/// Density of the in-phase component `X_n` (unit exponential).
pub fn xn_pdf(z: f64) -> f64 {
    if z < 0.0 {
        0.0
    } else {
        (-z).exp()
    }
}

/// Density of the quadrature component `Y_n` (unit Laplace).
pub fn yn_pdf(y: f64) -> f64 {
    0.5 * (-y.abs()).exp()
}

/// Erlang(n, 1) density of `X = Σ X_n`.
pub fn x_pdf(x: f64, n: usize) -> f64 {
    if n == 0 || x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if n == 1 { 1.0 } else { 0.0 };
    }
    if n == 1 {
        return (-x).exp();
    }
    let lg = ln_gamma(n as f64).unwrap_or(f64::NAN);
    ((n as f64 - 1.0) * x.ln() - x - lg).exp()
}

/// Erlang(n, 1) CDF, `1 - Σ_{j<n} u^j e^-u / j!`.
pub fn x_cdf(u: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if u <= 0.0 {
        return 0.0;
    }
    regularized_gamma_p(n as f64, u).unwrap_or(f64::NAN)
}

/// Law of `Y = Σ Y_n`, a sum of `n` i.i.d. unit Laplace variables.
///
/// Coefficients of the polynomial-times-exponential density are built once
/// in log space so `n` up to 64 neither overflows nor loses the small terms.
#[derive(Debug, Clone)]
pub struct LaplaceSum {
    n: usize,
    /// weights[j] multiplies |y|^j
    weights: Vec<f64>,
}

impl LaplaceSum {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("LaplaceSum", "need at least one term"));
        }
        let nf = n as f64;
        let lg_n = ln_gamma(nf)?;
        let mut weights = vec![0.0; n];
        for m in 0..n {
            let mf = m as f64;
            let ln_w = ln_gamma(nf + mf)? - ln_gamma(mf + 1.0)? - ln_gamma(nf - mf)? - lg_n;
            // powers of two scaled separately so n = 1 reduces to exactly 1/2
            weights[n - 1 - m] = ln_w.exp() * 0.5f64.powi((n + m) as i32);
        }
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let a = y.abs();
        if a > 700.0 {
            return self.ln_pdf_tail(a).exp();
        }
        let mut poly = 0.0;
        for w in self.weights.iter().rev() {
            poly = poly * a + w;
        }
        poly * (-a).exp()
    }

    fn ln_pdf_tail(&self, a: f64) -> f64 {
        let la = a.ln();
        let max = self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| w.ln() + j as f64 * la)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| (w.ln() + j as f64 * la - max).exp())
            .sum();
        max + s.ln() - a
    }

    /// Density of `Y²` at `v > 0`: `f_Y(√v)/√v`.
    pub fn square_pdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return if v == 0.0 { f64::INFINITY } else { 0.0 };
        }
        let r = v.sqrt();
        self.pdf(r) / r
    }

    /// `Y²` density after the substitution `v = u²`: `2u f_{Y²}(u²) = 2 f_Y(u)`.
    ///
    /// `∫₀ᵗ g(v) f_{Y²}(v) dv = ∫₀^√t g(u²) square_pdf_substituted(u) du`,
    /// with no endpoint singularity.
    pub fn square_pdf_substituted(&self, u: f64) -> f64 {
        if u < 0.0 {
            0.0
        } else {
            2.0 * self.pdf(u)
        }
    }
}

/// Density of `Y = Σ_{n} Y_n`.
pub fn y_pdf(y: f64, n: usize) -> Result<f64> {
    Ok(LaplaceSum::new(n)?.pdf(y))
}

/// Density of `Y²`; integrable `v^(-1/2)` singularity at zero.
pub fn y2_pdf(v: f64, n: usize) -> Result<f64> {
    Ok(LaplaceSum::new(n)?.square_pdf(v))
}

pub fn rayleigh_pdf(r: f64, sigma: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma;
    r / s2 * (-r * r / (2.0 * s2)).exp()
}

pub fn rayleigh_cdf(r: f64, sigma: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    -(-r * r / (2.0 * sigma * sigma)).exp_m1()
}

/// Rayleigh median, `σ √(2 ln 2)`.
pub fn rayleigh_median(sigma: f64) -> f64 {
    sigma * (2.0 * LN_2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_panels, integrate_to_infinity, QuadratureSpec};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::new(1e-13, 1e-12, 400).unwrap()
    }

    fn total_mass<F: Fn(f64) -> f64>(f: F) -> f64 {
        integrate_to_infinity(f, 0.0, &spec()).unwrap().value
    }

    #[test]
    fn double_rayleigh_basics() {
        assert_eq!(double_rayleigh_pdf(0.0), 0.0);
        assert!((double_rayleigh_pdf(1.0) - bessel_k0(1.0).unwrap()).abs() < 1e-16);
        let pieces = [0.0, 1.0, 5.0, 20.0, 60.0, 750.0];
        let mass = integrate_panels(double_rayleigh_pdf, &pieces, &spec()).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-8);
        let mean = integrate_panels(|x| x * double_rayleigh_pdf(x), &pieces, &spec())
            .unwrap()
            .value;
        assert!((mean - PI / 2.0).abs() < 1e-8);
        let ln = ln_double_rayleigh_pdf(3.0);
        assert!((ln - double_rayleigh_pdf(3.0).ln()).abs() < 1e-13);
    }

    #[test]
    fn surrogate_constants() {
        let g = gamma_surrogate();
        assert!((g.k - 1.609_945_759_918_522).abs() < 1e-12);
        assert!((g.theta - 0.975_682_762_675_428_9).abs() < 1e-12);
        assert!((g.k * g.theta - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn surrogate_moment_match_and_residual() {
        let pieces = [0.0, 1.0, 5.0, 20.0, 60.0, 750.0];
        let g = gamma_surrogate();
        let exact2 = integrate_panels(|x| x * x * double_rayleigh_pdf(x), &pieces, &spec())
            .unwrap()
            .value;
        let surrogate2 = g.variance() + g.mean() * g.mean();
        // E[H_n²] = E|h1|² E|h2|² = 4
        assert!((exact2 - 4.0).abs() < 1e-8);
        assert!((surrogate2 - exact2).abs() < 1e-8);
        // The mismatch first shows in the third moment: (E R³)² = (3√(π/2))²
        // for the product vs k(k+1)(k+2)θ³ for the gamma law.
        let exact3 = integrate_panels(|x| x.powi(3) * double_rayleigh_pdf(x), &pieces, &spec())
            .unwrap()
            .value;
        assert!((exact3 - 4.5 * PI).abs() < 1e-7);
        let surrogate3 = g.k * (g.k + 1.0) * (g.k + 2.0) * g.theta.powi(3);
        let gap = (surrogate3 - exact3) / exact3;
        assert!((gap - (-0.003_432_054_9)).abs() < 1e-8, "third-moment gap {gap}");
    }

    #[test]
    fn sum_s_is_gamma_with_scaled_shape() {
        let mass = total_mass(|x| sum_s_pdf(x, 3).unwrap());
        assert!((mass - 1.0).abs() < 1e-8);
        let law = sum_s_law(2).unwrap();
        let mode = (law.k - 1.0) * law.theta;
        assert!(law.pdf(mode) > law.pdf(mode - 1e-3) && law.pdf(mode) > law.pdf(mode + 1e-3));
        // direct log-density evaluation at x = π
        let k = 2.0 * surrogate_shape();
        let th = surrogate_scale();
        let direct = ((k - 1.0) * PI.ln() - PI / th - k * th.ln() - ln_gamma(k).unwrap()).exp();
        assert!((sum_s_pdf(PI, 2).unwrap() - direct).abs() < 1e-15);
        assert!(sum_s_law(0).is_err());
    }

    #[test]
    fn cos_phase_density() {
        assert!((cos_phase_pdf(0.0) - 2.0 / PI).abs() < 1e-16);
        assert_eq!(cos_phase_pdf(1.5), 0.0);
        assert_eq!(cos_phase_pdf(-0.1), 0.0);
        // x = sin φ removes the edge singularity
        let mass = integrate(|p: f64| cos_phase_pdf(p.sin()) * p.cos(), 0.0, PI / 2.0, &spec())
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-12);
    }

    /// ∫₀¹ (1/c) f_cos(c) f_H(z/c) dc with c = sin φ.
    fn xn_convolution(z: f64) -> f64 {
        integrate(
            |p: f64| {
                let c = p.sin();
                if c <= 0.0 {
                    return 0.0;
                }
                (2.0 / PI) / c * double_rayleigh_pdf(z / c)
            },
            0.0,
            PI / 2.0,
            &spec(),
        )
        .unwrap()
        .value
    }

    #[test]
    fn xn_from_phase_convolution() {
        for &z in &[0.1, 1.0, 3.0] {
            assert!((xn_convolution(z) - xn_pdf(z)).abs() < 1e-6, "z={z}");
        }
    }

    #[test]
    fn component_laws() {
        assert_eq!(xn_pdf(0.0), 1.0);
        assert_eq!(yn_pdf(0.0), 0.5);
        assert_eq!(yn_pdf(-1.7), yn_pdf(1.7));
        assert!((x_cdf(1.0, 1) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(x_cdf(0.0, 5), 0.0);
        assert!((x_cdf(2.0, 3) - (1.0 - 5.0 * (-2.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn single_term_sums_reduce_exactly() {
        let y1 = LaplaceSum::new(1).unwrap();
        for &v in &[0.0, 0.3, 1.0, 4.5, 30.0] {
            assert_eq!(x_pdf(v, 1), xn_pdf(v));
            assert_eq!(y1.pdf(v), yn_pdf(v));
            assert_eq!(y1.pdf(-v), yn_pdf(-v));
        }
    }

    #[test]
    fn laplace_sum_matches_convolution() {
        // Y1 + Y2 has density (1 + |y|) e^-|y| / 4
        let y2 = LaplaceSum::new(2).unwrap();
        for &y in &[0.0, 0.5, 1.0, 3.0, -2.0] {
            let conv = (1.0 + f64::abs(y)) * (-f64::abs(y)).exp() / 4.0;
            assert!((y2.pdf(y) - conv).abs() < 1e-16);
        }
        assert!((y2.pdf(1.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-16);
        // three terms: numeric convolution of the two-term law with a Laplace
        let y3 = LaplaceSum::new(3).unwrap();
        for &y in &[0.0, 0.7, 2.5] {
            let conv = integrate_panels(|s| y2.pdf(s) * yn_pdf(y - s), &[-60.0, 0.0, y, 60.0], &spec())
                .unwrap()
                .value;
            assert!((y3.pdf(y) - conv).abs() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn laplace_sum_even_and_normalized() {
        for n in 1..=32 {
            let law = LaplaceSum::new(n).unwrap();
            for &y in &[0.1, 1.0, 7.0, 40.0] {
                assert_eq!(law.pdf(y), law.pdf(-y));
            }
        }
        for n in [1, 4, 16, 64] {
            let law = LaplaceSum::new(n).unwrap();
            let mass = 2.0 * total_mass(|y| law.pdf(y));
            assert!((mass - 1.0).abs() < 1e-8, "n={n}: {mass}");
            // through the substituted Y² form
            let mass2 = total_mass(|u| law.square_pdf_substituted(u));
            assert!((mass2 - 1.0).abs() < 1e-8, "n={n}: {mass2}");
        }
        let law = LaplaceSum::new(64).unwrap();
        assert!(law.pdf(800.0) > 0.0 && law.pdf(800.0).is_finite());
    }

    #[test]
    fn y2_density_has_inverse_sqrt_singularity() {
        for n in [1, 3, 8] {
            let law = LaplaceSum::new(n).unwrap();
            let a = law.square_pdf(1e-10) * 1e-5;
            let b = law.square_pdf(1e-12) * 1e-6;
            assert!((a / b - 1.0).abs() < 1e-4, "n={n}");
        }
    }

    #[test]
    fn erlang_normalized() {
        for n in [1, 2, 5, 16] {
            let mass = total_mass(|x| x_pdf(x, n));
            assert!((mass - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rayleigh_law() {
        let s = 1.7;
        assert!((rayleigh_cdf(rayleigh_median(s), s) - 0.5).abs() < 1e-15);
        assert_eq!(rayleigh_cdf(0.0, s), 0.0);
        assert!((total_mass(|r| rayleigh_pdf(r, s)) - 1.0).abs() < 1e-8);
        let mean = total_mass(|r| r * rayleigh_pdf(r, s));
        assert!((mean - s * (PI / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn densities_nonnegative() {
        let law = LaplaceSum::new(7).unwrap();
        let g = gamma_surrogate();
        for i in 0..2000 {
            let x = i as f64 * 0.05 - 10.0;
            for v in [
                double_rayleigh_pdf(x),
                cos_phase_pdf(x),
                xn_pdf(x),
                yn_pdf(x),
                x_pdf(x, 3),
                law.pdf(x),
                rayleigh_pdf(x, 1.0),
                GammaShapeScale::pdf(&g, x),
            ] {
                assert!(v >= 0.0);
            }
        }
    }
}
