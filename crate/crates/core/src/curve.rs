//! Outage curves over a transmit-SNR grid and the method tags that name them.

use std::fmt;
use std::str::FromStr;

use crate::analytic::outage;
use crate::channel::{PhaseMode, SystemConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{mc_outage, McConfig};
use crate::quad::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Perfect,
    OneBit,
    CltPerfect,
    AsymptoticPerfect,
    AsymptoticOneBit,
    McPerfect,
    McOneBit,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Perfect,
        Method::OneBit,
        Method::CltPerfect,
        Method::AsymptoticPerfect,
        Method::AsymptoticOneBit,
        Method::McPerfect,
        Method::McOneBit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Perfect => "perfect",
            Method::OneBit => "one_bit",
            Method::CltPerfect => "clt_perfect",
            Method::AsymptoticPerfect => "asymptotic_perfect",
            Method::AsymptoticOneBit => "asymptotic_one_bit",
            Method::McPerfect => "mc_perfect",
            Method::McOneBit => "mc_one_bit",
        }
    }

    pub fn mode(self) -> PhaseMode {
        match self {
            Method::Perfect | Method::CltPerfect | Method::AsymptoticPerfect | Method::McPerfect => PhaseMode::Perfect,
            Method::OneBit | Method::AsymptoticOneBit | Method::McOneBit => PhaseMode::OneBit,
        }
    }

    pub fn is_simulated(self) -> bool {
        matches!(self, Method::McPerfect | Method::McOneBit)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// One grid point. Exactly one of `p_out` and `error` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub gamma_t_db: f64,
    pub p_out: Option<f64>,
    pub std_err: Option<f64>,
    pub error: Option<String>,
}

impl CurvePoint {
    pub fn value(gamma_t_db: f64, p_out: f64, std_err: Option<f64>) -> Self {
        Self {
            gamma_t_db,
            p_out: Some(p_out),
            std_err,
            error: None,
        }
    }

    pub fn failed(gamma_t_db: f64, error: impl Into<String>) -> Self {
        Self {
            gamma_t_db,
            p_out: None,
            std_err: None,
            error: Some(error.into()),
        }
    }
}

/// Simulation metadata carried by Monte-Carlo curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleInfo {
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageCurve {
    pub method: Method,
    pub n_elements: usize,
    pub sigma_d: f64,
    pub gamma_th_db: f64,
    pub points: Vec<CurvePoint>,
    pub samples: Option<SampleInfo>,
}

impl OutageCurve {
    pub fn new(method: Method, cfg: &SystemConfig, points: Vec<CurvePoint>, samples: Option<SampleInfo>) -> Self {
        Self {
            method,
            n_elements: cfg.n_elements,
            sigma_d: cfg.sigma_d,
            gamma_th_db: cfg.gamma_th_db,
            points,
            samples,
        }
    }

    /// `(gamma_t_db, p_out)` for every point that has a value.
    pub fn values(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().filter_map(|p| p.p_out.map(|v| (p.gamma_t_db, v)))
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

/// Evaluate any method. Simulated methods need `mc`.
pub fn evaluate(method: Method, cfg: &SystemConfig, q: &QuadratureSpec, mc: Option<&McConfig>) -> Result<OutageCurve> {
    if method.is_simulated() {
        let mc = mc.ok_or_else(|| Error::Config(format!("method {method} needs a Monte-Carlo configuration")))?;
        mc_outage(method.mode(), cfg, mc)
    } else {
        outage(method, cfg, q)
    }
}
