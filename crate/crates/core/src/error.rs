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

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}, line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },
    #[error("duplicate neighborhood id {0:?}")]
    DuplicateId(String),
    #[error("no neighborhoods")]
    NoNeighborhoods,
    #[error("no neighborhood has positive population")]
    NoPopulation,
    #[error("malformed polygon for neighborhood {id:?}: {reason}")]
    MalformedPolygon { id: String, reason: String },
    #[error("empty activity")]
    EmptyActivity,
    #[error("degenerate correlation")]
    DegenerateCorrelation,
    #[error("degenerate attribute distribution")]
    DegenerateAttributeDistribution,
    #[error("no interaction mass")]
    NoInteractionMass,
    #[error("population weighting undefined for neighborhood {id:?}: {reason}")]
    UndefinedWeighting { id: String, reason: String },
    #[error("inconsistent census for neighborhood {0:?}: zero population with sampled users")]
    InconsistentCensus(String),
    #[error("cannot split {n} neighborhoods into {k} groups")]
    TooFewNeighborhoods { n: usize, k: usize },
    #[error("singular normal equations (condition number {condition:.3e})")]
    SingularNormalEquations { condition: f64 },
    #[error("too few positive entries to fit: {found} < {required}")]
    TooFewPositiveEntries { found: usize, required: usize },
    #[error("distance singularity: epsilon is 0 and some distance is 0")]
    DistanceSingularity,
    #[error("simulated flow is zero on used pair {origin:?} -> {dest:?}")]
    ZeroSimulatedFlow { origin: String, dest: String },
    #[error("all values are zero")]
    AllZero,
    #[error("{discarded} of {total} replicates were degenerate")]
    TooManyDegenerateReplicates { discarded: usize, total: usize },
    #[error("too few edges for resampling: {found} < {required}")]
    TooFewEdges { found: usize, required: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs or configuration rather than by
    /// the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Output { .. })
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
