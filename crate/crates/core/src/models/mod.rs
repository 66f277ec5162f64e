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

//! Baseline models: gravity fitting and simulation, the SES-shuffle null
//! model, and store/customer location reshuffling.

mod gravity;
mod null;
mod reshuffle;

pub use gravity::{
    fit_gravity, simulate_gravity, EpsilonGrid, FitWeights, GravityFitOptions, GravityParams,
};
pub use null::{null_shuffle_ses, NullDistribution, NullStepSummary};
pub use reshuffle::{
    adjust_gravity_amounts, customer_counts, reshuffle_locations, reshuffle_once, revenue_by_neighborhood,
    store_counts, AdjustDirection, ReshuffleReplicate,
};
