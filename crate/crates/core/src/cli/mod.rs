//! Command-line layer: configuration, text I/O and the subcommands.
//!
//! Every command returns its rendered output as a string so it can be tested
//! without a process boundary; the binary only prints and maps errors to
//! exit codes.

mod commands;
mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::inference::FitError;
use crate::lattice::{LatticeError, SubsetLattice};
use crate::params::{Link, ParamError};
use crate::risk::RiskError;
use crate::selection::SelectionError;

pub use commands::{
    cmd_fit, cmd_plot_data, cmd_risk, cmd_select, cmd_simulate, cmd_transform, parse_totals, run,
};
pub use io::{
    export_cases, export_counts, format_zero_set, ingest, ingest_str, parse_matrix, parse_zero_set,
    render_matrix,
};

pub const MAX_RESPONSES: usize = 8;
pub const MAX_COVARIATES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Internal(_) => 5,
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        match e {
            ParamError::Boundary { .. } | ParamError::Domain { .. } => CliError::Numerical(e.to_string()),
            ParamError::Validation { .. } => CliError::Data(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Param(p) => p.into(),
            FitError::Data(d) => CliError::Data(d.to_string()),
            FitError::InvalidSpec(s) => CliError::Config(s),
            FitError::NoValidStart => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RiskError> for CliError {
    fn from(e: RiskError) -> Self {
        match e {
            RiskError::Param(p) => p.into(),
            RiskError::Argument(s) => CliError::Config(s),
        }
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::Fit(f) => f.into(),
            SelectionError::Argument(s) => CliError::Config(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Cases,
    Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkArg {
    Lm,
    Lml,
}

impl From<LinkArg> for Link {
    fn from(l: LinkArg) -> Self {
        match l {
            LinkArg::Lm => Link::Lm,
            LinkArg::Lml => Link::Lml,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Procedure {
    Forward,
    Backward,
}

#[derive(Debug, Parser)]
#[command(name = "lmlreg", version, about = "LM and LML regression for multivariate binary responses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and print coefficients, standard errors and p-values.
    Fit,
    /// Convert a parameter matrix into every other parameterization.
    Transform,
    /// Run stepwise model selection.
    Select {
        #[arg(long, value_enum, default_value = "forward")]
        procedure: Procedure,
    },
    /// Relative risks, reference relative risks and implied independencies.
    Risk,
    /// Draw a data set from a coefficient or probability matrix.
    Simulate {
        /// Total sample size split evenly over covariate cells, or one
        /// comma-separated total per cell.
        #[arg(long)]
        totals: String,
    },
    /// Average covariate effects with confidence intervals under both links.
    PlotData,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Comma-separated data, or a TSV parameter matrix for `transform` and `simulate`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "cases")]
    pub format: InputFormat,
    /// Response column names, e.g. `b,c,d,r`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub responses: Vec<String>,
    /// Binary covariate column names, e.g. `h,a`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, global = true, value_enum, default_value = "lml")]
    pub link: LinkArg,
    /// Wald threshold used by `select`.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    /// Pseudo-count added to every cell; 0.5 when given without a value.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "0.5")]
    pub smooth: Option<f64>,
    /// Zero-set file: one `D;E` pair per line, `#` starts a comment.
    #[arg(long, global = true)]
    pub zeros: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "tsv")]
    pub out: OutputFormat,
    /// Drop covariate cells without observations from the likelihood.
    #[arg(long, global = true)]
    pub allow_missing_cells: bool,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub responses: Vec<String>,
    pub covariates: Vec<String>,
    pub link: Link,
    pub alpha: f64,
    pub smooth: Option<f64>,
    pub zeros: Option<PathBuf>,
    pub seed: u64,
    pub out: OutputFormat,
    pub allow_missing_cells: bool,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        let input = args
            .input
            .clone()
            .ok_or_else(|| CliError::Config("--input is required".into()))?;
        let cfg = Self {
            input,
            format: args.format,
            responses: args.responses.iter().map(|s| s.trim().to_string()).collect(),
            covariates: args.covariates.iter().map(|s| s.trim().to_string()).collect(),
            link: args.link.into(),
            alpha: args.alpha,
            smooth: args.smooth,
            zeros: args.zeros.clone(),
            seed: args.seed,
            out: args.out,
            allow_missing_cells: args.allow_missing_cells,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.responses.is_empty() || self.covariates.is_empty() {
            return Err(CliError::Config("--responses and --covariates must both be nonempty".into()));
        }
        if self.responses.len() > MAX_RESPONSES {
            return Err(CliError::Config(format!(
                "at most {MAX_RESPONSES} responses are supported, got {}",
                self.responses.len()
            )));
        }
        if self.covariates.len() > MAX_COVARIATES {
            return Err(CliError::Config(format!(
                "at most {MAX_COVARIATES} covariates are supported, got {}",
                self.covariates.len()
            )));
        }
        if let Some(shared) = self.responses.iter().find(|r| self.covariates.contains(r)) {
            return Err(CliError::Config(format!("`{shared}` is both a response and a covariate")));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CliError::Config(format!("--alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if let Some(eps) = self.smooth {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(CliError::Config(format!("--smooth must be positive, got {eps}")));
            }
        }
        self.response_lattice()?;
        self.covariate_lattice()?;
        Ok(())
    }

    pub fn response_lattice(&self) -> Result<SubsetLattice, CliError> {
        Ok(SubsetLattice::new(&self.responses)?)
    }

    pub fn covariate_lattice(&self) -> Result<SubsetLattice, CliError> {
        Ok(SubsetLattice::new(&self.covariates)?)
    }
}
