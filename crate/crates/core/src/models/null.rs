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

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::NeighborhoodTable;
use crate::rng;
use crate::segregation::{
    asymmetry_bias, assortativity, extremes_steps, mixing_matrix, GroupAssignment,
};
use crate::network::InteractionNetwork;
use crate::stats::summary::mean_std;

/// Mean and spread of a statistic across null replicates for one sweep step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullStepSummary {
    pub step: usize,
    pub groups: Vec<usize>,
    pub r_mean: Option<f64>,
    pub r_std: Option<f64>,
    pub bias_mean: Option<f64>,
    pub bias_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullDistribution {
    pub r: Vec<f64>,
    pub bias: Vec<f64>,
    pub r_mean: f64,
    pub r_std: f64,
    pub bias_mean: f64,
    pub bias_std: f64,
    /// Replicates whose shuffled grouping was degenerate.
    pub discarded: usize,
    /// Per-step summaries of the extremes sweep (empty when k is odd).
    pub steps: Vec<NullStepSummary>,
}

struct Replicate {
    r: Option<f64>,
    bias: Option<f64>,
    steps: Vec<(Option<f64>, Option<f64>)>,
}

/// Random permutation of node attributes for replicate `index`. Node `i`
/// receives the attributes of node `perm[i]`.
pub(crate) fn permutation(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, index));
    perm
}

/// SES-shuffle null model: the (population-weighted) flows stay fixed while
/// neighborhood SES, and with it the group labels, is permuted at random.
pub fn null_shuffle_ses(
    net: &InteractionNetwork,
    table: &NeighborhoodTable,
    groups: &GroupAssignment,
    replicates: usize,
    seed: u64,
) -> Result<NullDistribution> {
    if replicates == 0 {
        return Err(Error::invalid("null model needs at least one replicate"));
    }
    let n = net.len();
    if table.len() != n || groups.len() != n {
        return Err(Error::invalid("table, groups and network sizes differ"));
    }
    let step_sets = extremes_steps(groups.k()).unwrap_or_default();
    let ses = table.ses();
    let reps: Vec<Replicate> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let perm = permutation(n, seed, rep);
            debug_assert!({
                let mut shuffled: Vec<f64> = perm.iter().map(|&p| ses[p]).collect();
                let mut orig = ses.clone();
                shuffled.sort_by(f64::total_cmp);
                orig.sort_by(f64::total_cmp);
                shuffled == orig
            });
            let shuffled = groups.permuted(&perm);
            match mixing_matrix(net, &shuffled) {
                Ok(mix) => Replicate {
                    r: assortativity(&mix).ok(),
                    bias: asymmetry_bias(&mix).ok(),
                    steps: step_sets
                        .iter()
                        .map(|g| match mix.restrict(g, false) {
                            Ok(sub) => (assortativity(&sub).ok(), asymmetry_bias(&sub).ok()),
                            Err(_) => (None, None),
                        })
                        .collect(),
                },
                Err(_) => Replicate {
                    r: None,
                    bias: None,
                    steps: vec![(None, None); step_sets.len()],
                },
            }
        })
        .collect();

    let mut r = Vec::with_capacity(replicates);
    let mut bias = Vec::with_capacity(replicates);
    let mut discarded = 0;
    for rep in &reps {
        match (rep.r, rep.bias) {
            (Some(a), Some(b)) => {
                r.push(a);
                bias.push(b);
            }
            _ => discarded += 1,
        }
    }
    if r.is_empty() {
        return Err(Error::TooManyDegenerateReplicates {
            discarded,
            total: replicates,
        });
    }
    let (r_mean, r_std) = mean_std(&r);
    let (bias_mean, bias_std) = mean_std(&bias);
    let steps = step_sets
        .iter()
        .enumerate()
        .map(|(t, g)| {
            let rs: Vec<f64> = reps.iter().filter_map(|x| x.steps[t].0).collect();
            let bs: Vec<f64> = reps.iter().filter_map(|x| x.steps[t].1).collect();
            let summary = |v: &[f64]| (!v.is_empty()).then(|| mean_std(v));
            let (rm, bm) = (summary(&rs), summary(&bs));
            NullStepSummary {
                step: t + 1,
                groups: g.clone(),
                r_mean: rm.map(|x| x.0),
                r_std: rm.map(|x| x.1),
                bias_mean: bm.map(|x| x.0),
                bias_std: bm.map(|x| x.1),
            }
        })
        .collect();
    Ok(NullDistribution {
        r,
        bias,
        r_mean,
        r_std,
        bias_mean,
        bias_std,
        discarded,
        steps,
    })
}

impl NullDistribution {
    /// `replicate,statistic,value`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("replicate,statistic,value\n");
        for (i, v) in self.r.iter().enumerate() {
            s.push_str(&format!("{i},assortativity,{v}\n"));
        }
        for (i, v) in self.bias.iter().enumerate() {
            s.push_str(&format!("{i},bias,{v}\n"));
        }
        s
    }
}
