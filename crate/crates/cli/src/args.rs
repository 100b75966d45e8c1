use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use qnn_core::learning::DEFAULT_FD_STEP;
use qnn_core::witness::DEFAULT_GRID;
use qnn_core::{Family, GradientEngine, UnitConvention};

pub const DEFAULT_CONFIG: &str = "qnn-config.json";

#[derive(Parser, Debug)]
#[command(name = "qnn", version, about = "Train and evaluate three-qubit entanglement witnesses")]
pub struct Cli {
    /// Configuration file holding the calibrated unit convention.
    #[arg(long, global = true, default_value = DEFAULT_CONFIG)]
    pub config: PathBuf,

    /// Overrides the unit convention of every loaded schedule.
    #[arg(long, global = true, value_enum)]
    pub convention: Option<ConventionArg>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConventionArg {
    Angular,
    Plain,
}

impl From<ConventionArg> for UnitConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Angular => UnitConvention::Angular,
            ConventionArg::Plain => UnitConvention::Plain,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EngineArg {
    Stepwise,
    Spectral,
}

impl From<EngineArg> for GradientEngine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Stepwise => GradientEngine::Stepwise,
            EngineArg::Spectral => GradientEngine::Spectral,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Fig1,
    Fig2,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Fig1 => Family::Fig1,
            FamilyArg::Fig2 => Family::Fig2,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit a schedule to a dataset by gradient descent with momentum.
    Train {
        /// Dataset file, or `set1` / `set2`.
        #[arg(long)]
        dataset: String,
        /// Starting schedule file, or a bundled schedule name.
        #[arg(long, default_value = "initial")]
        init: String,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        momentum: Option<f64>,
        /// Integrator step in ns.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        /// Stop once the RMS error falls to this value.
        #[arg(long)]
        stop_at_rms: Option<f64>,
        /// Where to write the trained schedule.
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch RMS as CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Print the four outputs and labels for one state.
    Evaluate {
        /// Schedule file, or a bundled schedule name.
        #[arg(long)]
        params: String,
        /// Ket expression or catalogue name.
        #[arg(long)]
        state: String,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a two-parameter state family on a grid and write CSV.
    Sweep {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        n: usize,
        #[arg(long)]
        params: String,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Crossing locus CSV for fig2; defaults to `<out>` with a
        /// `_crossing` suffix.
        #[arg(long)]
        crossing: Option<PathBuf>,
    },
    /// Compare the exact gradient with central differences.
    GradCheck {
        #[arg(long)]
        params: String,
        #[arg(long)]
        state: String,
        /// Finite-difference step in MHz.
        #[arg(long, default_value_t = DEFAULT_FD_STEP)]
        h: f64,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Choose the unit convention that reproduces the reference Bell outputs
    /// and record it in the configuration file.
    Calibrate {
        #[arg(long, default_value = "set1")]
        params: String,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// List the named states.
    Catalog,
}
