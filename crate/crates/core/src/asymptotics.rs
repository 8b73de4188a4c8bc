//! Leading-order small-threshold behavior and diversity orders.

use std::fmt;

use crate::channel::PhaseMode;
use crate::curve::OutageCurve;
use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

fn check_small(function: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(function, format!("needs 0 < argument < 1, got {x}")));
    }
    Ok(())
}

fn check_elements(function: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain(function, "needs at least one element"));
    }
    Ok(())
}

fn check_sigma(function: &'static str, sigma_d: f64) -> Result<()> {
    if !(sigma_d > 0.0) || !sigma_d.is_finite() {
        return Err(Error::domain(function, format!("sigma_d = {sigma_d} must be positive")));
    }
    Ok(())
}

/// Leading term of the density of `Σ_{n=1}^{N} H_n` near zero,
/// `x^(2N-1) (ln 1/x)^N / (2N-1)!`.
pub fn f_s_leading(x: f64, n: usize) -> Result<f64> {
    check_small("f_s_leading", x)?;
    check_elements("f_s_leading", n)?;
    let nf = n as f64;
    let ln = (2.0 * nf - 1.0) * x.ln() + nf * (-x.ln()).ln() - ln_gamma(2.0 * nf)?;
    Ok(ln.exp())
}

/// Leading term of `P(H ≤ t)` under perfect alignment,
/// `t^(2(N+1)) (ln 1/t)^N / (4σ² N (N+1) (2N+1) (2N-1)!)`.
pub fn cdf_h_leading(t: f64, n: usize, sigma_d: f64) -> Result<f64> {
    check_small("cdf_h_leading", t)?;
    check_elements("cdf_h_leading", n)?;
    check_sigma("cdf_h_leading", sigma_d)?;
    let nf = n as f64;
    let ln = 2.0 * (nf + 1.0) * t.ln() + nf * (-t.ln()).ln()
        - (4.0 * sigma_d * sigma_d * nf * (nf + 1.0) * (2.0 * nf + 1.0)).ln()
        - ln_gamma(2.0 * nf)?;
    Ok(ln.exp())
}

/// Leading term of `P(|G|² ≤ t)` under one-bit alignment,
/// `t^((N+3)/2) Γ(N/2+2) Γ(N-1/2) / (2σ² Γ(N) Γ(N+3) Γ((N+5)/2))`.
pub fn cdf_g2_leading(t: f64, n: usize, sigma_d: f64) -> Result<f64> {
    check_elements("cdf_g2_leading", n)?;
    check_sigma("cdf_g2_leading", sigma_d)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("cdf_g2_leading", format!("t = {t} must be positive")));
    }
    let nf = n as f64;
    let ln = 0.5 * (nf + 3.0) * t.ln() + ln_gamma(0.5 * nf + 2.0)? + ln_gamma(nf - 0.5)?
        - (2.0 * sigma_d * sigma_d).ln()
        - ln_gamma(nf)?
        - ln_gamma(nf + 3.0)?
        - ln_gamma(0.5 * (nf + 5.0))?;
    Ok(ln.exp())
}

/// Nonnegative rational in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// `N + 1` for perfect alignment, `(N + 3)/2` for one-bit.
pub fn diversity_order(mode: PhaseMode, n: usize) -> Result<Rational> {
    check_elements("diversity_order", n)?;
    let n = n as u64;
    Ok(match mode {
        PhaseMode::Perfect => Rational::new(n + 1, 1),
        PhaseMode::OneBit => Rational::new(n + 3, 2),
    })
}

/// Negated least-squares slope of `log10 P` against `log10 γ_t` over the
/// points with `γ_t` (dB) inside `fit_range_db`, ends included.
pub fn estimate_slope(curve: &OutageCurve, fit_range_db: (f64, f64)) -> Result<f64> {
    let (lo, hi) = (fit_range_db.0.min(fit_range_db.1), fit_range_db.0.max(fit_range_db.1));
    let pts: Vec<(f64, f64)> = curve
        .values()
        .filter(|&(g, p)| g >= lo && g <= hi && p > 0.0)
        .map(|(g, p)| (g / 10.0, p.log10()))
        .collect();
    let distinct = pts.windows(2).any(|w| w[0].0 != w[1].0);
    if pts.len() < 2 || !distinct {
        return Err(Error::InsufficientPoints {
            needed: 2,
            found: pts.len(),
        });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// dB span of the points whose outage lies in `[p_lo, p_hi]`.
pub fn probability_window(curve: &OutageCurve, p_lo: f64, p_hi: f64) -> Option<(f64, f64)> {
    let inside: Vec<f64> = curve
        .values()
        .filter(|&(_, p)| p >= p_lo && p <= p_hi)
        .map(|(g, _)| g)
        .collect();
    let lo = inside.iter().copied().reduce(f64::min)?;
    let hi = inside.iter().copied().reduce(f64::max)?;
    Some((lo, hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    pub mode: PhaseMode,
    pub n_elements: usize,
    pub theoretical_order: Rational,
    pub fitted_slope: f64,
    pub fit_range_db: (f64, f64),
}

impl DiversityReport {
    pub fn from_curve(curve: &OutageCurve, fit_range_db: (f64, f64)) -> Result<Self> {
        let mode = curve.method.mode();
        Ok(Self {
            mode,
            n_elements: curve.n_elements,
            theoretical_order: diversity_order(mode, curve.n_elements)?,
            fitted_slope: estimate_slope(curve, fit_range_db)?,
            fit_range_db,
        })
    }

    /// `fitted / theoretical - 1`.
    pub fn relative_error(&self) -> f64 {
        self.fitted_slope / self.theoretical_order.as_f64() - 1.0
    }
}

/// Transmit SNR (dB) at which a decreasing outage curve `p(γ_t)` crosses
/// `target`, by bisection on `[lo_db, hi_db]`.
pub fn snr_at_outage<F>(p: F, target: f64, lo_db: f64, hi_db: f64, tol_db: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo_db, hi_db);
    if !(p(lo)? >= target && p(hi)? <= target) {
        return Err(Error::domain(
            "snr_at_outage",
            format!("target {target:e} not bracketed by [{lo_db}, {hi_db}] dB"),
        ));
    }
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if p(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::lemma1_cdf;
    use crate::channel::SystemConfig;
    use crate::curve::{CurvePoint, Method};
    use crate::distributions::{double_rayleigh_pdf, NonNegativeLaw};
    use crate::quad::{integrate_small, QuadratureSpec};
    use proptest::prelude::*;

    struct DoubleRayleigh;

    impl NonNegativeLaw for DoubleRayleigh {
        fn pdf(&self, x: f64) -> f64 {
            double_rayleigh_pdf(x)
        }
    }

    struct DoubleRayleighPair(QuadratureSpec);

    impl NonNegativeLaw for DoubleRayleighPair {
        fn pdf(&self, s: f64) -> f64 {
            integrate_small(|x| double_rayleigh_pdf(x) * double_rayleigh_pdf(s - x), 0.0, s, &self.0)
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        }
    }

    fn exact_cdf_h(t: f64, n: usize) -> f64 {
        let q = QuadratureSpec::new(1e-14, 1e-10, 400).unwrap();
        match n {
            1 => lemma1_cdf(&DoubleRayleigh, 1.0, t, &q).unwrap(),
            2 => lemma1_cdf(&DoubleRayleighPair(q), 1.0, t, &q).unwrap(),
            _ => unreachable!(),
        }
    }

    fn synthetic(method: Method, n: usize, grid: &[f64], p: impl Fn(f64) -> f64) -> OutageCurve {
        let cfg = SystemConfig::new(n, 1.0, 0.0, grid.to_vec()).unwrap();
        let pts = grid.iter().map(|&g| CurvePoint::value(g, p(g), None)).collect();
        OutageCurve::new(method, &cfg, pts, None)
    }

    #[test]
    fn leading_density_examples() {
        assert!((f_s_leading(0.1, 1).unwrap() - 0.1 * 10f64.ln()).abs() < 1e-15);
        let x: f64 = 1e-3;
        let want = x.powi(3) * 1000f64.ln().powi(2) / 6.0;
        assert!(((f_s_leading(x, 2).unwrap() - want) / want).abs() < 1e-13);
        let r = f_s_leading(1e-4, 1).unwrap() / double_rayleigh_pdf(1e-4);
        assert!((r - 1.0).abs() < 0.05, "{r}");
        assert!(f_s_leading(1.0, 1).is_err());
        assert!(f_s_leading(0.5, 0).is_err());
    }

    #[test]
    fn leading_cdf_examples() {
        let want = 1e-8 * 100f64.ln() / 24.0;
        assert!(((cdf_h_leading(0.01, 1, 1.0).unwrap() - want) / want).abs() < 1e-13);
        let a = cdf_h_leading(0.05, 3, 1.0).unwrap();
        let b = cdf_h_leading(0.05, 3, 2.0).unwrap();
        assert!((b - a / 4.0).abs() < 1e-15 * a);
        assert!(cdf_h_leading(1.0, 1, 1.0).is_err());
        assert!(cdf_h_leading(0.5, 1, 0.0).is_err());

        // Γ(3) = 2, Γ(1.5) = √π/2, Γ(2) = 1, Γ(5) = 24, Γ(3.5) = 15√π/8
        let want = 0.01f64.powf(2.5) * 2.0 * (0.5 / 24.0) / (2.0 * 15.0 / 8.0);
        assert!(((cdf_g2_leading(0.01, 2, 1.0).unwrap() - want) / want).abs() < 1e-13);
        assert!(cdf_g2_leading(3.0, 2, 1.0).is_ok());
        assert!(cdf_g2_leading(0.0, 2, 1.0).is_err());
    }

    #[test]
    fn diversity_orders() {
        assert_eq!(diversity_order(PhaseMode::Perfect, 4).unwrap(), Rational::new(5, 1));
        assert_eq!(diversity_order(PhaseMode::OneBit, 1).unwrap(), Rational::new(2, 1));
        assert_eq!(diversity_order(PhaseMode::OneBit, 3).unwrap(), Rational::new(3, 1));
        assert_eq!(diversity_order(PhaseMode::OneBit, 2).unwrap().to_string(), "5/2");
        assert!(diversity_order(PhaseMode::Perfect, 0).is_err());
        for n in 1..64 {
            let p = diversity_order(PhaseMode::Perfect, n).unwrap().as_f64();
            let o = diversity_order(PhaseMode::OneBit, n).unwrap().as_f64();
            assert_eq!(p - o, (n as f64 - 1.0) / 2.0);
        }
    }

    #[test]
    fn slope_of_pure_power_law() {
        let grid: Vec<f64> = (0..11).map(|i| 10.0 + 2.0 * i as f64).collect();
        let c = synthetic(Method::Perfect, 2, &grid, |g| 0.3 * 10f64.powf(-3.0 * g / 10.0));
        assert!((estimate_slope(&c, (10.0, 30.0)).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(
            estimate_slope(&c, (10.5, 11.5)),
            Err(Error::InsufficientPoints { found: 0, .. })
        ));
        assert!(matches!(
            estimate_slope(&c, (11.0, 13.0)),
            Err(Error::InsufficientPoints { found: 1, .. })
        ));
    }

    #[test]
    fn slope_with_log_correction_approaches_from_below() {
        // -d log P / d log γ = 3 - 2/ln γ for P = γ^-3 (ln γ)^2
        let law = |g: f64| {
            let lin = 10f64.powf(g / 10.0);
            lin.powi(-3) * lin.ln().powi(2)
        };
        let grid: Vec<f64> = (0..=60).map(|i| 60.0 + i as f64).collect();
        let c = synthetic(Method::Perfect, 2, &grid, law);
        let s1 = estimate_slope(&c, (60.0, 80.0)).unwrap();
        let s2 = estimate_slope(&c, (80.0, 100.0)).unwrap();
        let s3 = estimate_slope(&c, (100.0, 120.0)).unwrap();
        assert!(s1 < s2 && s2 < s3 && s3 < 3.0, "{s1} {s2} {s3}");
        let local = 3.0 - 2.0 / (10f64.powf(7.0)).ln();
        assert!((s1 - local).abs() < 2e-3, "{s1} vs {local}");
    }

    #[test]
    fn one_bit_leading_curve_has_exact_order() {
        for n in [1usize, 2, 4, 7] {
            let grid: Vec<f64> = (0..21).map(|i| 20.0 + i as f64).collect();
            let c = synthetic(Method::AsymptoticOneBit, n, &grid, |g| {
                cdf_g2_leading(10f64.powf(-g / 10.0), n, 1.0).unwrap()
            });
            let rep = DiversityReport::from_curve(&c, (20.0, 40.0)).unwrap();
            assert!((rep.fitted_slope - (n as f64 + 3.0) / 2.0).abs() < 1e-9);
            assert!(rep.relative_error().abs() < 1e-9);
        }
    }

    #[test]
    fn probability_window_selects_points() {
        let grid: Vec<f64> = (0..10).map(|i| i as f64 * 10.0).collect();
        let c = synthetic(Method::Perfect, 1, &grid, |g| 10f64.powf(-g / 10.0));
        assert_eq!(probability_window(&c, 1e-6, 1e-4), Some((40.0, 60.0)));
        assert_eq!(probability_window(&c, 1e-30, 1e-20), None);
    }

    #[test]
    fn bisection_finds_crossing() {
        let g = snr_at_outage(|db| Ok(10f64.powf(-db / 10.0)), 1e-2, -10.0, 40.0, 1e-9).unwrap();
        assert!((g - 20.0).abs() < 1e-8);
        assert!(snr_at_outage(|db| Ok(10f64.powf(-db / 10.0)), 1e-9, -10.0, 40.0, 1e-9).is_err());
    }

    #[test]
    fn leading_term_against_exact_single_element() {
        // exact P(H1 + R ≤ t) from the x K0(x) density, σ = 1
        let expect = [(1e-1, 0.658), (1e-2, 0.793), (1e-3, 0.852), (1e-4, 0.885)];
        for (t, ratio) in expect {
            let r = cdf_h_leading(t, 1, 1.0).unwrap() / exact_cdf_h(t, 1);
            assert!((r - ratio).abs() < 2e-3, "t={t}: ratio {r}");
        }
    }

    #[test]
    fn leading_term_ratio_tightens() {
        for n in [1usize, 2] {
            let mut last = f64::INFINITY;
            for t in [1e-2, 1e-3, 1e-4] {
                let r = cdf_h_leading(t, n, 1.0).unwrap() / exact_cdf_h(t, n);
                if t == 1e-2 {
                    assert!((0.5..=2.0).contains(&r), "N={n}: ratio {r}");
                }
                let gap = (r - 1.0).abs();
                assert!(gap < last, "N={n} t={t}: gap {gap} did not shrink");
                last = gap;
            }
        }
    }

    proptest! {
        #[test]
        fn one_bit_leading_log_slope(n in 1usize..40, t in 1e-6f64..10.0, sigma in 0.1f64..10.0) {
            let h = 1e-3;
            let a = cdf_g2_leading(t, n, sigma).unwrap().ln();
            let b = cdf_g2_leading(t * (1.0 + h), n, sigma).unwrap().ln();
            let slope = (b - a) / (1.0 + h).ln();
            prop_assert!((slope - (n as f64 + 3.0) / 2.0).abs() < 1e-6);
        }

        #[test]
        fn leading_h_scales_with_inverse_sigma_squared(n in 1usize..20, t in 1e-4f64..0.9, sigma in 0.1f64..10.0) {
            let a = cdf_h_leading(t, n, sigma).unwrap();
            let b = cdf_h_leading(t, n, 2.0 * sigma).unwrap();
            prop_assert!((b * 4.0 - a).abs() <= 1e-12 * a);
        }
    }
}
