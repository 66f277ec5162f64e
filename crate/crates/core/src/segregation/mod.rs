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

//! Socio-economic grouping, mixing matrices, assortativity and the sweeps
//! built on them.

mod groups;
mod mixing;
mod sweep;

pub use groups::{assign_groups, assign_groups_from_scores, GroupAssignment};
pub use mixing::{asymmetry_bias, assortativity, mixing_matrix, mixing_matrix_raw, MixingMatrix};
pub use sweep::{
    asymmetry_sweep, distance_sweep, extremes_sweep, extremes_steps, percentile, SweepKind,
    SweepResult, SweepSide, SweepStep, Thresholds, DEFAULT_PERCENTILES,
};
