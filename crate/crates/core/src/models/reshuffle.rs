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

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{NeighborhoodTable, PurchaseEvent};
use crate::network::{Channel, InteractionNetwork};
use crate::rng;

/// Distinct customers per home neighborhood, in table order.
pub fn customer_counts(events: &[PurchaseEvent], table: &NeighborhoodTable) -> Vec<f64> {
    distinct_per(events, table, |e| (&e.customer_id, &e.customer_home))
}

/// Distinct stores per store neighborhood, in table order.
pub fn store_counts(events: &[PurchaseEvent], table: &NeighborhoodTable) -> Vec<f64> {
    distinct_per(events, table, |e| (&e.store_id, &e.store_location))
}

fn distinct_per<'a>(
    events: &'a [PurchaseEvent],
    table: &NeighborhoodTable,
    key: impl Fn(&'a PurchaseEvent) -> (&'a String, &'a String),
) -> Vec<f64> {
    let mut seen: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); table.len()];
    for e in events {
        let (id, nb) = key(e);
        if let Some(i) = table.index_of(nb) {
            seen[i].insert(id);
        }
    }
    seen.iter().map(|s| s.len() as f64).collect()
}

/// Sum of transaction amounts by store neighborhood.
pub fn revenue_by_neighborhood(events: &[PurchaseEvent], table: &NeighborhoodTable) -> Vec<f64> {
    let mut rev = vec![0.0; table.len()];
    for e in events {
        if let Some(j) = table.index_of(&e.store_location) {
            rev[j] += e.amount;
        }
    }
    rev
}

/// Permutes the locations of `⌊fraction · |entities|⌋` randomly chosen
/// entities among themselves.
fn shuffle_subset<T: Clone, R: Rng>(locations: &mut [T], fraction: f64, rng: &mut R) {
    let amount = (fraction * locations.len() as f64).floor() as usize;
    if amount < 2 {
        return;
    }
    let mut chosen = index::sample(rng, locations.len(), amount).into_vec();
    chosen.sort_unstable();
    let mut places: Vec<T> = chosen.iter().map(|&i| locations[i].clone()).collect();
    places.shuffle(rng);
    for (&i, place) in chosen.iter().zip(places) {
        locations[i] = place;
    }
}

/// Entities in id order with their first-seen location, plus the entity
/// index of every event.
struct Entities<L> {
    locations: Vec<L>,
    of_event: Vec<usize>,
}

fn entities<'a, L: Clone>(
    events: &'a [PurchaseEvent],
    key: impl Fn(&'a PurchaseEvent) -> (&'a String, &'a String),
    place: impl Fn(&'a String) -> L,
) -> Entities<L> {
    let mut first: BTreeMap<&str, L> = BTreeMap::new();
    for e in events {
        let (id, nb) = key(e);
        first.entry(id.as_str()).or_insert_with(|| place(nb));
    }
    let index: BTreeMap<&str, usize> = first.keys().enumerate().map(|(i, &k)| (k, i)).collect();
    Entities {
        of_event: events.iter().map(|e| index[key(e).0.as_str()]).collect(),
        locations: first.into_values().collect(),
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("reshuffle fraction {fraction} not in (0, 1]")));
    }
    Ok(())
}

/// One reshuffle draw: a fraction of stores and a fraction of customers swap
/// neighborhoods among themselves. Per-neighborhood store and customer
/// counts and every transaction amount are preserved.
pub fn reshuffle_once<R: Rng>(events: &[PurchaseEvent], fraction: f64, rng: &mut R) -> Result<Vec<PurchaseEvent>> {
    check_fraction(fraction)?;
    let mut stores = entities(events, |e| (&e.store_id, &e.store_location), |nb| nb.clone());
    let mut homes = entities(events, |e| (&e.customer_id, &e.customer_home), |nb| nb.clone());
    shuffle_subset(&mut stores.locations, fraction, rng);
    shuffle_subset(&mut homes.locations, fraction, rng);
    Ok(events
        .iter()
        .enumerate()
        .map(|(k, e)| PurchaseEvent {
            customer_home: homes.locations[homes.of_event[k]].clone(),
            store_location: stores.locations[stores.of_event[k]].clone(),
            ..e.clone()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReshuffleReplicate {
    /// Raw purchase network of the reshuffled events.
    pub network: InteractionNetwork,
    pub revenue: Vec<f64>,
    /// Store neighborhoods after reshuffling, for store-count checks.
    pub store_counts: Vec<f64>,
    pub customer_counts: Vec<f64>,
}

/// `replicates` independent reshuffles at `fraction`. Replicate `k` is the
/// network [`reshuffle_once`] would build from stream `(seed, k)`.
pub fn reshuffle_locations(
    events: &[PurchaseEvent],
    table: &NeighborhoodTable,
    fraction: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<ReshuffleReplicate>> {
    use rayon::prelude::*;
    check_fraction(fraction)?;
    let stores = entities(events, |e| (&e.store_id, &e.store_location), |nb| table.index_of(nb));
    let homes = entities(events, |e| (&e.customer_id, &e.customer_home), |nb| table.index_of(nb));
    let n = table.len();
    let per_location = |locations: &[Option<usize>]| {
        let mut counts = vec![0.0; n];
        for i in locations.iter().flatten() {
            counts[*i] += 1.0;
        }
        counts
    };
    Ok((0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(seed, rep);
            let mut store_at = stores.locations.clone();
            let mut home_at = homes.locations.clone();
            shuffle_subset(&mut store_at, fraction, &mut rng);
            shuffle_subset(&mut home_at, fraction, &mut rng);
            let mut net = InteractionNetwork::empty(table, Channel::Purchase);
            let mut revenue = vec![0.0; n];
            let mut active = vec![false; home_at.len()];
            for (k, e) in events.iter().enumerate() {
                let home = home_at[homes.of_event[k]];
                let store = store_at[stores.of_event[k]];
                if let Some(j) = store {
                    revenue[j] += e.amount;
                }
                if let (Some(i), Some(j)) = (home, store) {
                    net.add(i, j, 1.0);
                    active[homes.of_event[k]] = true;
                }
            }
            let mut users = vec![0.0; n];
            for (c, home) in home_at.iter().enumerate() {
                if let (true, Some(i)) = (active[c], home) {
                    users[*i] += 1.0;
                }
            }
            net.set_users(users).expect("one entry per neighborhood");
            ReshuffleReplicate {
                network: net,
                revenue,
                store_counts: per_location(&store_at),
                customer_counts: per_location(&home_at),
            }
        })
        .collect())
}

/// Which way the per-pair count ratio is applied to transaction amounts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustDirection {
    /// amount · w_ij / ŵ_ij
    #[default]
    ObservedOverSimulated,
    /// amount · ŵ_ij / w_ij
    SimulatedOverObserved,
}

/// Rescales each transaction by the ratio of observed to simulated counts on
/// its pair and re-aggregates revenue by store neighborhood.
pub fn adjust_gravity_amounts(
    events: &[PurchaseEvent],
    table: &NeighborhoodTable,
    empirical: &InteractionNetwork,
    simulated: &InteractionNetwork,
    direction: AdjustDirection,
) -> Result<Vec<f64>> {
    let mut rev = vec![0.0; table.len()];
    for e in events {
        let (Some(i), Some(j)) = (table.index_of(&e.customer_home), table.index_of(&e.store_location)) else {
            continue;
        };
        let (w, w_hat) = (empirical.get(i, j), simulated.get(i, j));
        if w_hat <= 0.0 {
            return Err(Error::ZeroSimulatedFlow {
                origin: e.customer_home.clone(),
                dest: e.store_location.clone(),
            });
        }
        let factor = match direction {
            AdjustDirection::ObservedOverSimulated => w / w_hat,
            AdjustDirection::SimulatedOverObserved => w_hat / w,
        };
        rev[j] += e.amount * factor;
    }
    Ok(rev)
}
