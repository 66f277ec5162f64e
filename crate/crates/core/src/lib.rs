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

//! Spatial segregation of purchase and social-mention flows between urban
//! neighborhoods: ingest, interaction networks, mixing matrices, gravity and
//! null models, resampling statistics and synthetic cities.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod models;
pub mod network;
pub mod rng;
pub mod segregation;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use network::{Channel, DistanceMatrix, InteractionNetwork, Weighting};
