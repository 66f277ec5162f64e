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

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use super::summary::{mean_std, percentile_interval};
use crate::error::{Error, Result};
use crate::network::InteractionNetwork;
use crate::rng;
use crate::segregation::{assortativity, mixing_matrix, GroupAssignment, SweepResult};

pub const MIN_EDGES: usize = 20;
const MAX_DISCARD_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResampleEstimate {
    pub point: f64,
    pub replicates: Vec<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub std: f64,
    pub discarded: usize,
    pub removal_fraction: f64,
}

impl ResampleEstimate {
    pub fn replicate_count(&self) -> usize {
        self.replicates.len()
    }
}

/// Evaluates `stat` on `replicates` copies of `net`, each with
/// `⌊removal_fraction · E⌋` of its E nonzero entries zeroed at random.
pub fn jackknife<T, F>(
    net: &InteractionNetwork,
    removal_fraction: f64,
    replicates: usize,
    seed: u64,
    stat: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&InteractionNetwork) -> T + Sync,
{
    if !(0.0..1.0).contains(&removal_fraction) {
        return Err(Error::invalid("removal fraction must lie in [0, 1)"));
    }
    if replicates == 0 {
        return Err(Error::invalid("jackknife needs at least one replicate"));
    }
    let edges: Vec<usize> = net
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, _)| i)
        .collect();
    if edges.len() < MIN_EDGES {
        return Err(Error::TooFewEdges {
            found: edges.len(),
            required: MIN_EDGES,
        });
    }
    let remove = (removal_fraction * edges.len() as f64).floor() as usize;
    let out = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let mut weights = net.weights().to_vec();
            for k in index::sample(&mut rng::stream(seed, rep), edges.len(), remove) {
                weights[edges[k]] = 0.0;
            }
            let pruned = net.with_weights(weights).expect("same shape as the source network");
            stat(&pruned)
        })
        .collect();
    Ok(out)
}

fn estimate(point: f64, values: Vec<f64>, total: usize, removal_fraction: f64) -> Result<ResampleEstimate> {
    let discarded = total - values.len();
    if values.is_empty() || discarded as f64 > MAX_DISCARD_SHARE * total as f64 {
        return Err(Error::TooManyDegenerateReplicates { discarded, total });
    }
    let (ci_low, ci_high) = percentile_interval(&values, 0.95);
    let (_, std) = mean_std(&values);
    Ok(ResampleEstimate {
        point,
        replicates: values,
        ci_low,
        ci_high,
        std,
        discarded,
        removal_fraction,
    })
}

/// Delete-a-fraction jackknife of the assortativity of a population-weighted
/// network; the interval is the 2.5–97.5 percentile range of replicates.
pub fn jackknife_assortativity(
    net: &InteractionNetwork,
    groups: &GroupAssignment,
    removal_fraction: f64,
    replicates: usize,
    seed: u64,
) -> Result<ResampleEstimate> {
    let point = assortativity(&mixing_matrix(net, groups)?)?;
    let values = jackknife(net, removal_fraction, replicates, seed, |pruned| {
        mixing_matrix(pruned, groups).and_then(|m| assortativity(&m)).ok()
    })?;
    let valid: Vec<f64> = values.into_iter().flatten().collect();
    estimate(point, valid, replicates, removal_fraction)
}

/// Runs `sweep` on the network and on jackknife replicates, attaching a
/// per-step 95% interval and standard deviation. Steps that are invalid on
/// the full network, or degenerate in too many replicates, carry no interval.
pub fn jackknife_sweep<F>(
    net: &InteractionNetwork,
    removal_fraction: f64,
    replicates: usize,
    seed: u64,
    sweep: F,
) -> Result<SweepResult>
where
    F: Fn(&InteractionNetwork) -> Result<SweepResult> + Sync,
{
    let mut base = sweep(net)?;
    let reps = jackknife(net, removal_fraction, replicates, seed, |pruned| {
        sweep(pruned).map(|s| s.values()).ok()
    })?;
    for (t, step) in base.steps.iter_mut().enumerate() {
        let Some(point) = step.value else { continue };
        let values: Vec<f64> = reps
            .iter()
            .filter_map(|r| r.as_ref().and_then(|v| v.get(t).copied().flatten()))
            .collect();
        if let Ok(est) = estimate(point, values, replicates, removal_fraction) {
            step.ci_low = Some(est.ci_low);
            step.ci_high = Some(est.ci_high);
            step.std = Some(est.std);
            step.replicates = est.replicate_count();
        }
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Channel, Weighting};
    use crate::segregation::assign_groups_from_scores;

    fn dense(n: usize, seed: usize) -> (InteractionNetwork, GroupAssignment) {
        let ids: Vec<String> = (0..n).map(|i| format!("N{i:02}")).collect();
        let w: Vec<f64> = (0..n * n)
            .map(|v| {
                let (i, j) = (v / n, v % n);
                let base = 1.0 + ((v * 7919 + seed * 104729) % 97) as f64 / 10.0;
                if i.abs_diff(j) <= 2 { base * 4.0 } else { base }
            })
            .collect();
        let net = InteractionNetwork::from_dense(ids.clone(), w, Channel::Purchase, Weighting::PopulationWeighted, vec![1.0; n], vec![1.0; n]).unwrap();
        let scores: Vec<f64> = (0..n).map(|i| i as f64).collect();
        (net, assign_groups_from_scores(&scores, &ids, 4, true).unwrap())
    }

    #[test]
    fn zero_removal_degenerates_to_point() {
        let (net, g) = dense(12, 1);
        let est = jackknife_assortativity(&net, &g, 0.0, 25, 3).unwrap();
        assert!(est.replicates.iter().all(|&r| r == est.point));
        assert_eq!(est.ci_low, est.ci_high);
        assert!(est.std < 1e-12);
    }

    #[test]
    fn reproducible_with_seed() {
        let (net, g) = dense(12, 2);
        let a = jackknife_assortativity(&net, &g, 0.05, 40, 8).unwrap();
        let b = jackknife_assortativity(&net, &g, 0.05, 40, 8).unwrap();
        assert_eq!(a, b);
        assert!(a.ci_low <= a.ci_high);
        assert_eq!(a.replicate_count(), 40);
    }

    #[test]
    fn needs_enough_edges() {
        let (net, g) = dense(4, 0);
        assert!(matches!(
            jackknife_assortativity(&net, &g, 0.05, 10, 1),
            Err(Error::TooFewEdges { found: 16, .. })
        ));
    }
}
