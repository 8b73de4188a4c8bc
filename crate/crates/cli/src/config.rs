//! Experiment settings: built-in defaults, then a `key = value` file, then
//! command-line flags, each layer overriding the previous one.
//!
//! Recognised file keys (flags use the same names with dashes):
//!
//! ```text
//! n, sigma_d, d_sr, d_rd, d_sd, gamma_th_db,
//! snr_from_db, snr_to_db, snr_points,
//! mode, methods, seed, samples, streams, out, svg,
//! fit_from_db, fit_to_db, fit_p_lo, fit_p_hi,
//! diag_n, diag_epsilons,
//! quad_abs_tol, quad_rel_tol, quad_max_subdivisions
//! ```
//!
//! `#` starts a comment. When `sigma_d` is absent it is derived from the
//! three distances. `IRSLAB_QUAD_TOL`, if set, replaces the quadrature
//! relative tolerance (absolute tolerance becomes 1% of it) after the file
//! is read and before flags are applied.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use irslab_core::channel::snr_grid;
use irslab_core::{McConfig, Method, PhaseMode, QuadratureSpec, SystemConfig, SystemGeometry};

use crate::error::CliError;

pub const QUAD_TOL_ENV: &str = "IRSLAB_QUAD_TOL";

/// Which phase configurations a run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Perfect,
    OneBit,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<PhaseMode> {
        match self {
            ModeSelection::Perfect => vec![PhaseMode::Perfect],
            ModeSelection::OneBit => vec![PhaseMode::OneBit],
            ModeSelection::Both => vec![PhaseMode::Perfect, PhaseMode::OneBit],
        }
    }
}

impl FromStr for ModeSelection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "both" => Ok(ModeSelection::Both),
            other => match other.parse::<PhaseMode>() {
                Ok(PhaseMode::Perfect) => Ok(ModeSelection::Perfect),
                Ok(PhaseMode::OneBit) => Ok(ModeSelection::OneBit),
                Err(_) => Err(CliError::Config(format!(
                    "mode must be perfect, one_bit or both, got `{other}`"
                ))),
            },
        }
    }
}

/// Engine family named in `--methods`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Analytic,
    MonteCarlo,
    Clt,
    Asymptotic,
    /// A fully qualified method tag such as `mc_one_bit`.
    Exact(Method),
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "analytic" => Ok(Family::Analytic),
            "mc" => Ok(Family::MonteCarlo),
            "clt" => Ok(Family::Clt),
            "asymptotic" => Ok(Family::Asymptotic),
            other => other
                .parse::<Method>()
                .map(Family::Exact)
                .map_err(|_| CliError::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Expand families over the selected modes, keeping first-seen order.
pub fn resolve_methods(families: &[Family], modes: ModeSelection) -> Result<Vec<Method>, CliError> {
    let mut out = Vec::new();
    let mut push = |m: Method| {
        if !out.contains(&m) {
            out.push(m);
        }
    };
    for &f in families {
        for mode in modes.modes() {
            let perfect = mode == PhaseMode::Perfect;
            match f {
                Family::Analytic => push(if perfect { Method::Perfect } else { Method::OneBit }),
                Family::MonteCarlo => push(if perfect { Method::McPerfect } else { Method::McOneBit }),
                Family::Asymptotic => push(if perfect {
                    Method::AsymptoticPerfect
                } else {
                    Method::AsymptoticOneBit
                }),
                Family::Clt => {
                    if perfect {
                        push(Method::CltPerfect)
                    }
                }
                Family::Exact(m) => push(m),
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("no method selected for the chosen mode".into()));
    }
    Ok(out)
}

/// Every setting a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n_elements: usize,
    /// `None` means: derive from `geometry`.
    pub sigma_d: Option<f64>,
    pub geometry: SystemGeometry,
    pub gamma_th_db: f64,
    pub snr_from_db: f64,
    pub snr_to_db: f64,
    pub snr_points: usize,
    pub mode: ModeSelection,
    pub methods: Vec<Family>,
    pub seed: u64,
    pub samples: u64,
    pub streams: usize,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub fit_range_db: Option<(f64, f64)>,
    pub fit_p_range: (f64, f64),
    pub diag_n: Vec<usize>,
    pub diag_epsilons: Vec<f64>,
    pub quad: QuadratureSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n_elements: 8,
            sigma_d: None,
            geometry: SystemGeometry::default(),
            gamma_th_db: 0.0,
            snr_from_db: -30.0,
            snr_to_db: 10.0,
            snr_points: 41,
            mode: ModeSelection::Both,
            methods: vec![Family::Analytic],
            seed: 1,
            samples: 1_000_000,
            streams: 8,
            out: None,
            svg: None,
            fit_range_db: None,
            fit_p_range: (1e-6, 1e-4),
            diag_n: vec![1, 2, 4, 8, 16, 32, 64, 100],
            diag_epsilons: vec![0.0, 0.1, 0.3, 0.5],
            quad: QuadratureSpec::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| CliError::Config(format!("cannot parse `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentSpec {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "n" => self.n_elements = parse(key, v)?,
            "sigma_d" => self.sigma_d = Some(parse(key, v)?),
            "d_sr" => self.geometry.d_sr = parse(key, v)?,
            "d_rd" => self.geometry.d_rd = parse(key, v)?,
            "d_sd" => self.geometry.d_sd = parse(key, v)?,
            "gamma_th_db" => self.gamma_th_db = parse(key, v)?,
            "snr_from_db" => self.snr_from_db = parse(key, v)?,
            "snr_to_db" => self.snr_to_db = parse(key, v)?,
            "snr_points" => self.snr_points = parse(key, v)?,
            "mode" => self.mode = v.parse()?,
            "methods" => self.methods = parse_list(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "samples" => self.samples = parse_count(key, v)?,
            "streams" => self.streams = parse(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "svg" => self.svg = Some(PathBuf::from(v)),
            "fit_from_db" => self.fit_range_db = Some((parse(key, v)?, self.fit_range_db.map_or(f64::NAN, |r| r.1))),
            "fit_to_db" => self.fit_range_db = Some((self.fit_range_db.map_or(f64::NAN, |r| r.0), parse(key, v)?)),
            "fit_p_lo" => self.fit_p_range.0 = parse(key, v)?,
            "fit_p_hi" => self.fit_p_range.1 = parse(key, v)?,
            "diag_n" => self.diag_n = parse_list(key, v)?,
            "diag_epsilons" => self.diag_epsilons = parse_list(key, v)?,
            "quad_abs_tol" => self.quad.abs_tol = parse(key, v)?,
            "quad_rel_tol" => self.quad.rel_tol = parse(key, v)?,
            "quad_max_subdivisions" => self.quad.max_subdivisions = parse(key, v)?,
            other => return Err(CliError::Config(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Apply every setting of a `key = value` document.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::Config(format!("line {}: {}", lineno + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Apply `IRSLAB_QUAD_TOL` if it is set.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        self.apply_quad_tol(std::env::var(QUAD_TOL_ENV).ok().as_deref())
    }

    pub fn apply_quad_tol(&mut self, value: Option<&str>) -> Result<(), CliError> {
        if let Some(v) = value {
            let rel: f64 = parse(QUAD_TOL_ENV, v)?;
            self.quad = QuadratureSpec::new(rel * 1e-2, rel, self.quad.max_subdivisions)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        snr_grid(self.snr_from_db, self.snr_to_db, self.snr_points)
    }

    pub fn system(&self) -> Result<SystemConfig, CliError> {
        if self.snr_points == 0 {
            return Err(CliError::Config("the SNR grid is empty".into()));
        }
        let cfg = match self.sigma_d {
            Some(s) => SystemConfig::new(self.n_elements, s, self.gamma_th_db, self.grid()),
            None => SystemConfig::from_geometry(self.n_elements, &self.geometry, self.gamma_th_db, self.grid()),
        };
        cfg.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn mc(&self) -> Result<McConfig, CliError> {
        McConfig::new(self.seed, self.samples, self.streams).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        QuadratureSpec::new(self.quad.abs_tol, self.quad.rel_tol, self.quad.max_subdivisions)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn resolved_methods(&self) -> Result<Vec<Method>, CliError> {
        resolve_methods(&self.methods, self.mode)
    }
}

/// Sample counts accept `1e7` as well as `10000000`.
fn parse_count(key: &str, value: &str) -> Result<u64, CliError> {
    if let Ok(n) = value.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = parse(key, value)?;
    if x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(CliError::Config(format!("`{value}` is not a whole sample count")))
    }
}
