// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE`, a flat `key = value` file whose
//! keys are long flag names (`min-tx = 5`, `ses-descending = true`). Blank
//! lines and lines starting with `#` are ignored. Flags given on the command
//! line win over the file; `SEGFLOW_SEED` is the fallback for `--seed`.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::network::Channel;

pub use config::{parse_config, render_config};
pub use manifest::{sha256_file, FileDigest, Manifest, MANIFEST_FILE, RUN_CONFIG_FILE};

#[derive(Parser, Debug)]
#[command(name = "segflow", version, about = "Behavioral segregation analysis of neighborhood interaction networks")]
#[command(args_override_self = true, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate inputs and write normalized tables and ingest counts
    Ingest(IngestArgs),
    /// Neighborhood mean diversity entropies and their correlation with SES
    Diversity(AnalysisArgs),
    /// Raw and population-weighted interaction networks as edge lists
    Network(AnalysisArgs),
    /// Mixing matrices, assortativity and asymmetry bias
    Mixing(MixingArgs),
    /// Extremes and distance sweeps of assortativity
    Sweep(SweepArgs),
    /// Asymmetry bias over the extremes sweep with its null band
    Asymmetry(AsymmetryArgs),
    /// Fit the gravity model per channel
    Gravity(GravityArgs),
    /// SES-shuffle null distribution of assortativity and bias
    Null(NullArgs),
    /// Jackknife confidence interval of assortativity
    Jackknife(JackknifeArgs),
    /// Assortativity and revenue GINI for empirical, gravity and reshuffled purchase networks
    GiniReport(GiniArgs),
    /// Generate a synthetic city in the ingest formats
    Synth(SynthArgs),
    /// Re-execute a run from its manifest
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for replicate loops (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, env = "SEGFLOW_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Flat key = value config file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Data {
    /// CSV: neighborhood_id,lat,lon,population,ses
    #[arg(long)]
    pub neighborhoods: PathBuf,
    /// CSV: customer_id,store_id,timestamp,amount[,customer_home,store_neighborhood]
    #[arg(long)]
    pub purchases: Option<PathBuf>,
    /// CSV: source_user,target_user,timestamp
    #[arg(long)]
    pub mentions: Option<PathBuf>,
    /// CSV: user_id,lat,lon,timestamp
    #[arg(long)]
    pub posts: Option<PathBuf>,
    /// JSON: neighborhood_id -> polygon ring(s), lon/lat
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// CSV: user_id,neighborhood_id (skips home inference)
    #[arg(long)]
    pub homes: Option<PathBuf>,
    /// IANA zone for timestamps without offset and for night hours
    #[arg(long, default_value = "UTC")]
    pub timezone: String,
    #[arg(long, default_value_t = 10)]
    pub min_tx: usize,
    #[arg(long, default_value_t = 20)]
    pub night_start: u32,
    #[arg(long, default_value_t = 6)]
    pub night_end: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelChoice {
    Purchase,
    Mention,
    /// Every channel whose inputs are present
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct Grouping {
    /// Number of SES groups
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Higher score means lower status (e.g. a marginalization index)
    #[arg(long)]
    pub ses_descending: bool,
    #[arg(long, value_enum, default_value_t = ChannelChoice::Both)]
    pub channel: ChannelChoice,
}

#[derive(Args, Debug, Clone)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: Data,
}

#[derive(Args, Debug, Clone)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: Data,
    #[command(flatten)]
    pub grouping: Grouping,
}

#[derive(Args, Debug, Clone)]
pub struct MixingArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Build mixing matrices from unweighted counts
    #[arg(long)]
    pub raw_mixing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepChoice {
    Extremes,
    Distance,
    All,
}

#[derive(Args, Debug, Clone)]
pub struct Resampling {
    /// Jackknife replicates per sweep (0 disables intervals)
    #[arg(long, default_value_t = 100)]
    pub jackknife_replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub removal_fraction: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub resampling: Resampling,
    #[arg(long, value_enum, default_value_t = SweepChoice::All)]
    pub kind: SweepChoice,
    /// Distance thresholds as percentiles of pairwise distances
    #[arg(long, value_delimiter = ',', default_value = "20,40,60,80,100")]
    pub percentiles: Vec<f64>,
    /// Distance thresholds in km (overrides --percentiles)
    #[arg(long, value_delimiter = ',')]
    pub km: Option<Vec<f64>>,
    /// Re-rank kept groups 1..2t instead of keeping their labels
    #[arg(long)]
    pub relabel: bool,
}

#[derive(Args, Debug, Clone)]
pub struct AsymmetryArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub resampling: Resampling,
    /// SES-shuffle replicates for the null band (0 disables)
    #[arg(long, default_value_t = 100)]
    pub null_replicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitWeightChoice {
    /// Raw observed counts
    Observed,
    /// Population-weighted flows
    Weighted,
}

#[derive(Args, Debug, Clone)]
pub struct GravityFit {
    #[arg(long, default_value_t = 0.0)]
    pub epsilon_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub epsilon_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon_step: f64,
    /// Keep the best grid point without golden-section refinement
    #[arg(long)]
    pub no_refine: bool,
    /// Distance term -α(T + ε) instead of -α log(T + ε)
    #[arg(long)]
    pub linear_distance: bool,
    #[arg(long, value_enum, default_value_t = FitWeightChoice::Observed)]
    pub fit_weights: FitWeightChoice,
}

#[derive(Args, Debug, Clone)]
pub struct GravityArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[command(flatten)]
    pub fit: GravityFit,
}

#[derive(Args, Debug, Clone)]
pub struct NullArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
}

#[derive(Args, Debug, Clone)]
pub struct JackknifeArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub removal_fraction: f64,
}

#[derive(Args, Debug, Clone)]
pub struct GiniArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: Data,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub ses_descending: bool,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8,1")]
    pub fractions: Vec<f64>,
    /// Reshuffle replicates per fraction
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    /// Fitted parameters JSON from `gravity`; fitted here when absent
    #[arg(long)]
    pub gravity_params: Option<PathBuf>,
    #[command(flatten)]
    pub fit: GravityFit,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "homophilous")]
    pub preset: String,
    #[arg(long)]
    pub n_neighborhoods: Option<usize>,
    #[arg(long)]
    pub purchase_events: Option<f64>,
    #[arg(long)]
    pub mention_events: Option<f64>,
    #[arg(long)]
    pub homophily: Option<f64>,
    #[arg(long)]
    pub tilt: Option<f64>,
    #[arg(long)]
    pub exploration_gradient: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    /// manifest.json of an earlier run
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail unless every output hash matches the manifest
    #[arg(long)]
    pub verify: bool,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand(&argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_VALIDATION;
        }
    };
    let resolved = manifest::resolved_config(&matches);
    match commands::execute(cli.command, resolved) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_INTERNAL
    }
}

pub(crate) fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) type CliResult<T> = Result<T>;
