//! Link geometry, path loss and SNR conventions.
//!
//! After normalizing by the reflected-path loss, each cascaded element
//! contributes a product of two unit-scale Rayleigh magnitudes and the direct
//! path is Rayleigh with scale `sigma_d = sqrt(2 xi_d / (xi1 xi2))`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Intercept of the urban-micro NLOS path-loss law at 5 GHz, dB.
pub const UMI_NLOS_INTERCEPT_DB: f64 = -40.9;
/// Distance slope of the urban-micro NLOS path-loss law, dB per decade.
pub const UMI_NLOS_SLOPE_DB: f64 = 36.7;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Phase configuration of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseMode {
    /// Every element co-phased with the direct path.
    Perfect,
    /// 0°/180° shifters; residual phase error uniform on [-π/2, π/2].
    OneBit,
}

impl PhaseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseMode::Perfect => "perfect",
            PhaseMode::OneBit => "one_bit",
        }
    }
}

impl fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "perfect" => Ok(PhaseMode::Perfect),
            "one_bit" | "one-bit" | "onebit" => Ok(PhaseMode::OneBit),
            other => Err(Error::Config(format!("unknown phase mode `{other}`"))),
        }
    }
}

/// Distances in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemGeometry {
    pub d_sr: f64,
    pub d_rd: f64,
    pub d_sd: f64,
}

impl SystemGeometry {
    pub fn new(d_sr: f64, d_rd: f64, d_sd: f64) -> Result<Self> {
        for (name, d) in [("d_sr", d_sr), ("d_rd", d_rd), ("d_sd", d_sd)] {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Config(format!("{name} = {d} must be a positive distance")));
            }
        }
        Ok(Self { d_sr, d_rd, d_sd })
    }
}

impl Default for SystemGeometry {
    fn default() -> Self {
        Self {
            d_sr: 40.0,
            d_rd: 30.0,
            d_sd: 50.0,
        }
    }
}

/// Linear power gains of the three hops and the resulting direct-link scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub xi1: f64,
    pub xi2: f64,
    pub xi_d: f64,
    pub sigma_d: f64,
}

impl LinkBudget {
    pub fn from_gains(xi1: f64, xi2: f64, xi_d: f64) -> Result<Self> {
        for (name, g) in [("xi1", xi1), ("xi2", xi2), ("xi_d", xi_d)] {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::Config(format!("{name} = {g} must be a positive gain")));
            }
        }
        let sigma_d = (2.0 * xi_d / (xi1 * xi2)).sqrt();
        Ok(Self {
            xi1,
            xi2,
            xi_d,
            sigma_d,
        })
    }
}

/// Urban-micro NLOS path loss, `-40.9 - 36.7 log10(d)` dB.
pub fn path_loss_db(d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain("path_loss_db", format!("distance {d} must be positive")));
    }
    Ok(UMI_NLOS_INTERCEPT_DB - UMI_NLOS_SLOPE_DB * d.log10())
}

pub fn link_budget(geom: &SystemGeometry) -> Result<LinkBudget> {
    let g = SystemGeometry::new(geom.d_sr, geom.d_rd, geom.d_sd)?;
    LinkBudget::from_gains(
        db_to_linear(path_loss_db(g.d_sr)?),
        db_to_linear(path_loss_db(g.d_rd)?),
        db_to_linear(path_loss_db(g.d_sd)?),
    )
}

/// Threshold on the channel statistic below which the link is in outage.
///
/// Perfect alignment thresholds the amplitude `H` at `sqrt(γ_th/γ_t)`;
/// one-bit thresholds the power `|G|²` at `γ_th/γ_t`.
pub fn gain_threshold(gamma_th_db: f64, gamma_t_db: f64, mode: PhaseMode) -> f64 {
    let ratio = db_to_linear(gamma_th_db - gamma_t_db);
    match mode {
        PhaseMode::Perfect => ratio.sqrt(),
        PhaseMode::OneBit => ratio,
    }
}

/// `points` evenly spaced dB values from `from_db` to `to_db` inclusive.
pub fn snr_grid(from_db: f64, to_db: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from_db],
        _ => {
            let step = (to_db - from_db) / (points - 1) as f64;
            (0..points).map(|i| from_db + step * i as f64).collect()
        }
    }
}

/// Everything the outage engines need to know about the link.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of surface elements; zero means direct link only.
    pub n_elements: usize,
    pub sigma_d: f64,
    pub gamma_th_db: f64,
    pub gamma_t_grid_db: Vec<f64>,
}

impl SystemConfig {
    pub fn new(n_elements: usize, sigma_d: f64, gamma_th_db: f64, gamma_t_grid_db: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            n_elements,
            sigma_d,
            gamma_th_db,
            gamma_t_grid_db,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_geometry(
        n_elements: usize,
        geom: &SystemGeometry,
        gamma_th_db: f64,
        gamma_t_grid_db: Vec<f64>,
    ) -> Result<Self> {
        Self::new(n_elements, link_budget(geom)?.sigma_d, gamma_th_db, gamma_t_grid_db)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_d > 0.0) || !self.sigma_d.is_finite() {
            return Err(Error::Config(format!("sigma_d = {} must be positive", self.sigma_d)));
        }
        if !self.gamma_th_db.is_finite() {
            return Err(Error::Config("gamma_th_db must be finite".into()));
        }
        if self.gamma_t_grid_db.iter().any(|g| !g.is_finite()) {
            return Err(Error::Config("transmit-SNR grid contains a non-finite value".into()));
        }
        if self.gamma_t_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("transmit-SNR grid must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn threshold(&self, gamma_t_db: f64, mode: PhaseMode) -> f64 {
        gain_threshold(self.gamma_th_db, gamma_t_db, mode)
    }
}
