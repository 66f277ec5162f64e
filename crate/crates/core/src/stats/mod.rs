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

//! Resampling confidence intervals, the GINI coefficient and the
//! segregation/inequality report.

mod gini;
mod jackknife;
mod report;
pub(crate) mod summary;

pub use gini::gini;
pub use jackknife::{jackknife, jackknife_assortativity, jackknife_sweep, ResampleEstimate};
pub use report::{
    segregation_inequality_report, InequalityReport, ReportOptions, ReportRow, DEFAULT_FRACTIONS,
};
pub use summary::{mean_std, percentile_interval};
