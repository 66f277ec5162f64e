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

//! Neighborhood interaction networks, population weighting and centroid
//! distances.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{HomeAssignment, MentionEvent, NeighborhoodTable, PurchaseEvent};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Purchase,
    Mention,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Purchase => "purchase",
            Channel::Mention => "mention",
        })
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "purchase" => Ok(Channel::Purchase),
            "mention" => Ok(Channel::Mention),
            other => Err(Error::invalid(format!("unknown channel {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Raw,
    PopulationWeighted,
}

/// Directed weighted flows between neighborhoods, rows = origin.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionNetwork {
    ids: Vec<String>,
    weights: Vec<f64>,
    channel: Channel,
    weighting: Weighting,
    population: Vec<f64>,
    users: Vec<f64>,
}

impl InteractionNetwork {
    /// Zero network over the table's canonical node order.
    pub fn empty(table: &NeighborhoodTable, channel: Channel) -> Self {
        let n = table.len();
        InteractionNetwork {
            ids: table.ids(),
            weights: vec![0.0; n * n],
            channel,
            weighting: Weighting::Raw,
            population: table.populations(),
            users: vec![0.0; n],
        }
    }

    /// Builds a network from a dense row-major matrix.
    pub fn from_dense(
        ids: Vec<String>,
        weights: Vec<f64>,
        channel: Channel,
        weighting: Weighting,
        population: Vec<f64>,
        users: Vec<f64>,
    ) -> Result<Self> {
        let n = ids.len();
        if weights.len() != n * n || population.len() != n || users.len() != n {
            return Err(Error::invalid("network dimensions do not match node count"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("network weights must be finite and non-negative"));
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("node ids must be unique and sorted"));
        }
        Ok(InteractionNetwork {
            ids,
            weights,
            channel,
            weighting,
            population,
            users,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn population(&self) -> &[f64] {
        &self.population
    }

    /// Sampled users (card customers or Twitter users) per neighborhood.
    pub fn users(&self) -> &[f64] {
        &self.users
    }

    pub fn set_users(&mut self, users: Vec<f64>) -> Result<()> {
        if users.len() != self.len() {
            return Err(Error::invalid("user count length mismatch"));
        }
        self.users = users;
        Ok(())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.len() + j]
    }

    pub fn add(&mut self, i: usize, j: usize, w: f64) {
        let n = self.len();
        self.weights[i * n + j] += w;
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Copy with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= factor);
        out
    }

    /// Copy keeping only entries where `keep(i, j)` holds.
    pub fn filtered(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        let n = self.len();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                if !keep(i, j) {
                    out.weights[i * n + j] = 0.0;
                }
            }
        }
        out
    }

    /// Applies the sampling-bias correction: purchases divide by `m_i/p_i`,
    /// mentions by `(m_i m_j)/(p_i p_j)`.
    pub fn population_weight(&self, population: &[f64], users: &[f64]) -> Result<Self> {
        let n = self.len();
        if population.len() != n || users.len() != n {
            return Err(Error::invalid("population/user vectors do not match node count"));
        }
        for i in 0..n {
            if population[i] == 0.0 && users[i] > 0.0 {
                return Err(Error::InconsistentCensus(self.ids[i].clone()));
            }
        }
        // Per-node factor p/m; `None` where m = 0.
        let factor: Vec<Option<f64>> = (0..n)
            .map(|i| (users[i] > 0.0).then(|| population[i] / users[i]))
            .collect();
        let undefined = |i: usize, side: &str| Error::UndefinedWeighting {
            id: self.ids[i].clone(),
            reason: format!("{side} has flows but no sampled users"),
        };
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                let w = self.get(i, j);
                if w == 0.0 {
                    continue;
                }
                let fi = factor[i].ok_or_else(|| undefined(i, "origin"))?;
                let scale = match self.channel {
                    Channel::Purchase => fi,
                    Channel::Mention => fi * factor[j].ok_or_else(|| undefined(j, "destination"))?,
                };
                out.weights[i * n + j] = w * scale;
            }
        }
        out.population = population.to_vec();
        out.users = users.to_vec();
        out.weighting = Weighting::PopulationWeighted;
        Ok(out)
    }

    /// Population weighting with the network's own census attributes.
    pub fn weighted(&self) -> Result<Self> {
        self.population_weight(&self.population.clone(), &self.users.clone())
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        InteractionNetwork::from_dense(
            self.ids.clone(),
            weights,
            self.channel,
            self.weighting,
            self.population.clone(),
            self.users.clone(),
        )
    }

    pub fn to_edge_csv(&self) -> String {
        let mut s = String::from("origin_id,dest_id,weight\n");
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let w = self.get(i, j);
                if w != 0.0 {
                    s.push_str(&format!("{},{},{}\n", self.ids[i], self.ids[j], w));
                }
            }
        }
        s
    }

    pub fn header(&self) -> NetworkHeader {
        NetworkHeader {
            nodes: self.ids.clone(),
            channel: self.channel,
            weighting: self.weighting,
        }
    }
}

/// JSON sidecar of an exported edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkHeader {
    pub nodes: Vec<String>,
    pub channel: Channel,
    pub weighting: Weighting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBuild {
    pub network: InteractionNetwork,
    /// Events dropped because an endpoint did not resolve.
    pub dropped: usize,
}

/// Counts purchases from home neighborhood (row) to store neighborhood
/// (column). Sampled users are the distinct customers per home.
pub fn build_purchase_network(events: &[PurchaseEvent], table: &NeighborhoodTable) -> NetworkBuild {
    let mut net = InteractionNetwork::empty(table, Channel::Purchase);
    let mut customers: HashMap<usize, BTreeSet<&str>> = HashMap::new();
    let mut dropped = 0;
    for e in events {
        match (table.index_of(&e.customer_home), table.index_of(&e.store_location)) {
            (Some(i), Some(j)) => {
                net.add(i, j, 1.0);
                customers.entry(i).or_default().insert(&e.customer_id);
            }
            _ => dropped += 1,
        }
    }
    let mut users = vec![0.0; table.len()];
    for (i, set) in customers {
        users[i] = set.len() as f64;
    }
    net.users = users;
    NetworkBuild { network: net, dropped }
}

/// Counts mentions from the source's home (row) to the target's home
/// (column). Sampled users are all users with an inferred home.
pub fn build_mention_network(
    mentions: &[MentionEvent],
    homes: &HomeAssignment,
    table: &NeighborhoodTable,
) -> NetworkBuild {
    let mut net = InteractionNetwork::empty(table, Channel::Mention);
    let home_index = |u: &str| homes.get(u).and_then(|h| table.index_of(h));
    let mut dropped = 0;
    for m in mentions {
        match (home_index(&m.source_user), home_index(&m.target_user)) {
            (Some(i), Some(j)) => net.add(i, j, 1.0),
            _ => dropped += 1,
        }
    }
    net.users = homes.counts(table);
    NetworkBuild { network: net, dropped }
}

/// Symmetric great-circle distances (km) between centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    km: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_dense(n: usize, km: Vec<f64>) -> Result<Self> {
        if km.len() != n * n || km.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("distance matrix must be n*n non-negative values"));
        }
        Ok(DistanceMatrix { n, km })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.km[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.km
    }

    pub fn max(&self) -> f64 {
        self.km.iter().copied().fold(0.0, f64::max)
    }

    /// The n(n-1)/2 distances of unordered distinct pairs.
    pub fn pairwise(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                v.push(self.get(i, j));
            }
        }
        v
    }
}

pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

pub fn centroid_distances(table: &NeighborhoodTable) -> DistanceMatrix {
    let n = table.len();
    let mut km = vec![0.0; n * n];
    for i in 0..n {
        let a = table.get(i);
        for j in i + 1..n {
            let b = table.get(j);
            let d = haversine_km(a.lat, a.lon, b.lat, b.lon);
            km[i * n + j] = d;
            km[j * n + i] = d;
        }
    }
    DistanceMatrix { n, km }
}
