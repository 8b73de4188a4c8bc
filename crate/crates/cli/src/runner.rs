use std::fs;
use std::io::Write;
use std::path::Path;

use log::info;

use irslab_core::asymptotics::probability_window;
use irslab_core::diagnostics::{kl_double_rayleigh_vs_gamma, kl_student_t_vs_normal, mutual_information_xy, KlSpec};
use irslab_core::{evaluate, DiversityReport, OutageCurve};

use crate::config::ExperimentSpec;
use crate::error::CliError;
use crate::output::{diagnostics_csv, diversity_csv, outage_csv, outage_svg, DiagnosticRow};

/// Rendered outputs of an outage run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageArtifacts {
    pub curves: Vec<OutageCurve>,
    pub csv: String,
    pub svg: Option<String>,
}

pub fn outage_curves(spec: &ExperimentSpec) -> Result<Vec<OutageCurve>, CliError> {
    let sys = spec.system()?;
    let q = spec.quadrature()?;
    let methods = spec.resolved_methods()?;
    let mc = if methods.iter().any(|m| m.is_simulated()) {
        Some(spec.mc()?)
    } else {
        None
    };
    let mut curves = Vec::with_capacity(methods.len());
    for m in methods {
        info!(
            "evaluating {m} for N={} over {} points",
            sys.n_elements,
            sys.gamma_t_grid_db.len()
        );
        let curve = evaluate(m, &sys, &q, mc.as_ref())?;
        if curve.failures() > 0 {
            log::warn!("{m}: {} of {} points failed", curve.failures(), curve.points.len());
        }
        curves.push(curve);
    }
    Ok(curves)
}

pub fn run_outage(spec: &ExperimentSpec) -> Result<OutageArtifacts, CliError> {
    let curves = outage_curves(spec)?;
    let csv = outage_csv(&curves);
    let svg = spec.svg.as_ref().map(|_| outage_svg(&curves));
    Ok(OutageArtifacts { curves, csv, svg })
}

pub fn diversity_reports(spec: &ExperimentSpec) -> Result<Vec<(String, DiversityReport)>, CliError> {
    let mut out = Vec::new();
    for curve in outage_curves(spec)? {
        let range = match spec.fit_range_db {
            Some((lo, hi)) if lo.is_finite() && hi.is_finite() => (lo, hi),
            Some(_) => {
                return Err(CliError::Config(
                    "fit range needs both fit_from_db and fit_to_db".into(),
                ));
            }
            None => {
                let (p_lo, p_hi) = spec.fit_p_range;
                probability_window(&curve, p_lo, p_hi).ok_or_else(|| {
                    CliError::Numerical(format!(
                        "{}: no grid point with outage in [{p_lo:e}, {p_hi:e}]",
                        curve.method
                    ))
                })?
            }
        };
        let report = DiversityReport::from_curve(&curve, range)?;
        out.push((curve.method.to_string(), report));
    }
    Ok(out)
}

pub fn run_diversity(spec: &ExperimentSpec) -> Result<String, CliError> {
    Ok(diversity_csv(&diversity_reports(spec)?))
}

pub fn diagnostic_rows(spec: &ExperimentSpec) -> Result<Vec<DiagnosticRow>, CliError> {
    let q = spec.quadrature()?;
    let mut rows = Vec::new();
    let mi = mutual_information_xy(&q)?;
    rows.push(DiagnosticRow {
        name: "mutual_information",
        n: None,
        epsilon: None,
        value_nats: mi.nats,
    });
    rows.push(DiagnosticRow {
        name: "joint_entropy_xy",
        n: None,
        epsilon: None,
        value_nats: mi.h_xy,
    });
    for &n in &spec.diag_n {
        for &eps in &spec.diag_epsilons {
            let ks = KlSpec::new(n, eps)?;
            rows.push(DiagnosticRow {
                name: "kl_gamma",
                n: Some(n),
                epsilon: Some(eps),
                value_nats: kl_double_rayleigh_vs_gamma(&ks, &q)?,
            });
        }
        let rounded = KlSpec::rounded(n)?;
        rows.push(DiagnosticRow {
            name: "kl_gamma_rounded",
            n: Some(n),
            epsilon: Some(rounded.epsilon),
            value_nats: kl_double_rayleigh_vs_gamma(&rounded, &q)?,
        });
        rows.push(DiagnosticRow {
            name: "kl_student_t_ref",
            n: Some(n),
            epsilon: None,
            value_nats: kl_student_t_vs_normal(n, &q)?.nats,
        });
    }
    Ok(rows)
}

pub fn run_diagnostics(spec: &ExperimentSpec) -> Result<String, CliError> {
    Ok(diagnostics_csv(&diagnostic_rows(spec)?))
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Write `csv` to the configured output or to stdout.
pub fn emit_csv(spec: &ExperimentSpec, csv: &str) -> Result<(), CliError> {
    match &spec.out {
        Some(p) => write_file(p, csv),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn emit_outage(spec: &ExperimentSpec, art: &OutageArtifacts) -> Result<(), CliError> {
    emit_csv(spec, &art.csv)?;
    if let (Some(path), Some(svg)) = (&spec.svg, &art.svg) {
        write_file(path, svg)?;
    }
    Ok(())
}
