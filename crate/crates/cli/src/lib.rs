//! Command-line surface over `irslab-core`.
//!
//! Three subcommands share one set of flags:
//!
//! * `outage` writes one CSV row per (method, transmit SNR), optionally an SVG;
//! * `diversity` fits high-SNR slopes and reports them next to the theoretical orders;
//! * `diagnostics` writes the relative-entropy and mutual-information study.
//!
//! Exit status: 0 success, 1 configuration error, 2 numerical failure, 3 I/O failure.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentSpec, Family, ModeSelection};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "irslab", version, about = "Outage analysis of IRS-assisted links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outage probability versus transmit SNR
    Outage(RunArgs),
    /// Fitted high-SNR slopes against the theoretical diversity orders
    Diversity(RunArgs),
    /// Relative entropy of the gamma stand-in and X/Y mutual information
    Diagnostics(RunArgs),
}

/// Flags override the config file, which overrides built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// `key = value` settings file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// perfect, one_bit or both
    #[arg(long)]
    pub mode: Option<String>,
    /// Comma list of analytic, mc, clt, asymptotic or exact method tags
    #[arg(long)]
    pub methods: Option<String>,
    /// Number of surface elements
    #[arg(long)]
    pub n: Option<String>,
    /// Direct-link Rayleigh scale; derived from the distances when absent
    #[arg(long)]
    pub sigma_d: Option<String>,
    #[arg(long)]
    pub d_sr: Option<String>,
    #[arg(long)]
    pub d_rd: Option<String>,
    #[arg(long)]
    pub d_sd: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_from_db: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_to_db: Option<String>,
    #[arg(long)]
    pub snr_points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_th_db: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Monte-Carlo samples per grid point; `1e7` is accepted
    #[arg(long)]
    pub samples: Option<String>,
    /// Work partitions for Monte Carlo; does not change results
    #[arg(long)]
    pub streams: Option<String>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    pub out: Option<String>,
    /// SVG destination (outage only)
    #[arg(long)]
    pub svg: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub fit_from_db: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub fit_to_db: Option<String>,
    /// Lower outage bound of the automatic fit window
    #[arg(long)]
    pub fit_p_lo: Option<String>,
    #[arg(long)]
    pub fit_p_hi: Option<String>,
    /// Comma list of N for diagnostics
    #[arg(long)]
    pub diag_n: Option<String>,
    /// Comma list of shape offsets for diagnostics
    #[arg(long, allow_hyphen_values = true)]
    pub diag_epsilons: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("mode", &self.mode),
            ("methods", &self.methods),
            ("n", &self.n),
            ("sigma_d", &self.sigma_d),
            ("d_sr", &self.d_sr),
            ("d_rd", &self.d_rd),
            ("d_sd", &self.d_sd),
            ("snr_from_db", &self.snr_from_db),
            ("snr_to_db", &self.snr_to_db),
            ("snr_points", &self.snr_points),
            ("gamma_th_db", &self.gamma_th_db),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("streams", &self.streams),
            ("out", &self.out),
            ("svg", &self.svg),
            ("fit_from_db", &self.fit_from_db),
            ("fit_to_db", &self.fit_to_db),
            ("fit_p_lo", &self.fit_p_lo),
            ("fit_p_hi", &self.fit_p_hi),
            ("diag_n", &self.diag_n),
            ("diag_epsilons", &self.diag_epsilons),
        ]
    }

    /// Defaults, then `--config`, then `quad_tol` (the environment value),
    /// then flags.
    pub fn to_spec(&self, quad_tol: Option<&str>) -> Result<ExperimentSpec, CliError> {
        let mut spec = ExperimentSpec::default();
        if let Some(path) = &self.config {
            spec.apply_file(path)?;
        }
        spec.apply_quad_tol(quad_tol)?;
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                spec.set(key, v)?;
            }
        }
        Ok(spec)
    }
}

/// Execute one parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let env_tol = std::env::var(config::QUAD_TOL_ENV).ok();
    match &cli.command {
        Command::Outage(a) => {
            let spec = a.to_spec(env_tol.as_deref())?;
            let art = runner::run_outage(&spec)?;
            runner::emit_outage(&spec, &art)
        }
        Command::Diversity(a) => {
            let spec = a.to_spec(env_tol.as_deref())?;
            let csv = runner::run_diversity(&spec)?;
            runner::emit_csv(&spec, &csv)
        }
        Command::Diagnostics(a) => {
            let spec = a.to_spec(env_tol.as_deref())?;
            let csv = runner::run_diagnostics(&spec)?;
            runner::emit_csv(&spec, &csv)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "n = 4\nsigma_d = 2\nseed = 9\n").unwrap();
        let cli = Cli::try_parse_from([
            "irslab",
            "outage",
            "--config",
            path.to_str().unwrap(),
            "--n",
            "16",
            "--snr-from-db",
            "-40",
        ])
        .unwrap();
        let Command::Outage(args) = cli.command else { panic!() };
        let spec = args.to_spec(Some("1e-7")).unwrap();
        assert_eq!(spec.n_elements, 16);
        assert_eq!(spec.sigma_d, Some(2.0));
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.snr_from_db, -40.0);
        assert_eq!(spec.snr_to_db, 10.0);
        assert_eq!(spec.quad.rel_tol, 1e-7);
    }

    #[test]
    fn missing_config_file_is_config_error() {
        let args = RunArgs {
            config: Some("/nonexistent/irslab.cfg".into()),
            ..Default::default()
        };
        assert_eq!(args.to_spec(None).unwrap_err().exit_code(), 1);
    }
}
