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

use serde::Serialize;

use super::groups::GroupAssignment;
use super::mixing::{asymmetry_bias, assortativity, mixing_matrix, MixingMatrix};
use crate::error::{Error, Result};
use crate::network::{DistanceMatrix, InteractionNetwork};

pub const DEFAULT_PERCENTILES: [f64; 5] = [20.0, 40.0, 60.0, 80.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Extremes,
    Distance,
    Asymmetry,
}

/// Which pairs survive a distance threshold `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepSide {
    /// `T_ij <= d`, including the diagonal.
    Within,
    /// `T_ij > d`.
    Beyond,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStep {
    pub step: usize,
    /// Percentage of neighborhoods included (extremes sweeps) or the
    /// distance threshold in km (distance sweeps).
    pub param: f64,
    pub side: Option<SweepSide>,
    /// Included groups, 1-based.
    pub groups: Vec<usize>,
    /// Assortativity or bias; `None` when the step is degenerate.
    pub value: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub std: Option<f64>,
    pub replicates: usize,
}

impl SweepStep {
    pub fn valid(&self) -> bool {
        self.value.is_some()
    }

    fn label(&self) -> String {
        match self.side {
            Some(SweepSide::Within) => format!("within:{}", self.param),
            Some(SweepSide::Beyond) => format!("beyond:{}", self.param),
            None => self.param.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub steps: Vec<SweepStep>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.steps.iter().map(|s| s.value).collect()
    }

    /// `step,param,r_or_bias,ci_low,ci_high,valid`; distance params are
    /// prefixed with their side.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = String::from("step,param,r_or_bias,ci_low,ci_high,valid\n");
        for st in &self.steps {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                st.step,
                st.label(),
                opt(st.value),
                opt(st.ci_low),
                opt(st.ci_high),
                st.valid()
            ));
        }
        s
    }
}

/// Group sets of the extremes sweep: step `t` keeps `{1..t} ∪ {k-t+1..k}`.
pub fn extremes_steps(k: usize) -> Result<Vec<Vec<usize>>> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::invalid(format!("extremes sweep needs an even k, got {k}")));
    }
    Ok((1..=k / 2)
        .map(|t| (1..=t).chain(k - t + 1..=k).collect())
        .collect())
}

fn extremes_with(
    mix: &MixingMatrix,
    relabel: bool,
    kind: SweepKind,
    stat: impl Fn(&MixingMatrix) -> Result<f64>,
) -> Result<SweepResult> {
    let k = mix.k();
    let steps = extremes_steps(k)?
        .into_iter()
        .enumerate()
        .map(|(t, groups)| {
            let value = mix.restrict(&groups, relabel).and_then(|sub| stat(&sub)).ok();
            SweepStep {
                step: t + 1,
                param: 100.0 * groups.len() as f64 / k as f64,
                side: None,
                groups,
                value,
                ci_low: None,
                ci_high: None,
                std: None,
                replicates: 0,
            }
        })
        .collect();
    Ok(SweepResult { kind, steps })
}

/// Assortativity over progressively larger sets of extreme groups. The last
/// step is the full matrix.
pub fn extremes_sweep(mix: &MixingMatrix, relabel: bool) -> Result<SweepResult> {
    extremes_with(mix, relabel, SweepKind::Extremes, assortativity)
}

/// Asymmetry bias over the same group sets as [`extremes_sweep`].
pub fn asymmetry_sweep(mix: &MixingMatrix) -> Result<SweepResult> {
    extremes_with(mix, false, SweepKind::Asymmetry, asymmetry_bias)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Thresholds {
    Km(Vec<f64>),
    Percentiles(Vec<f64>),
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::Percentiles(DEFAULT_PERCENTILES.to_vec())
    }
}

impl Thresholds {
    /// Thresholds in km; percentiles are taken over distinct-pair distances.
    pub fn resolve(&self, dist: &DistanceMatrix) -> Result<Vec<f64>> {
        let km = match self {
            Thresholds::Km(v) => v.clone(),
            Thresholds::Percentiles(q) => {
                if q.iter().any(|q| !(0.0..=100.0).contains(q)) {
                    return Err(Error::invalid("percentiles must lie in [0, 100]"));
                }
                let mut pairs = dist.pairwise();
                if pairs.is_empty() {
                    return Err(Error::invalid("need at least two neighborhoods"));
                }
                pairs.sort_by(f64::total_cmp);
                q.iter().map(|&q| percentile(&pairs, q)).collect()
            }
        };
        if km.iter().any(|d| !(d.is_finite() && *d > 0.0)) || km.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("thresholds must be positive and ascending"));
        }
        Ok(km)
    }
}

/// Linearly interpolated percentile of ascending `sorted` data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Assortativity after pruning edges by centroid distance, for each
/// threshold and side. `net` must be population weighted.
pub fn distance_sweep(
    net: &InteractionNetwork,
    groups: &GroupAssignment,
    dist: &DistanceMatrix,
    thresholds: &Thresholds,
) -> Result<SweepResult> {
    if dist.len() != net.len() {
        return Err(Error::invalid("distance matrix does not match network"));
    }
    let km = thresholds.resolve(dist)?;
    let mut steps = Vec::with_capacity(2 * km.len());
    for (t, &d) in km.iter().enumerate() {
        for side in [SweepSide::Within, SweepSide::Beyond] {
            let pruned = prune(net, dist, d, side);
            let value = mixing_matrix(&pruned, groups).and_then(|m| assortativity(&m)).ok();
            steps.push(SweepStep {
                step: t + 1,
                param: d,
                side: Some(side),
                groups: (1..=groups.k()).collect(),
                value,
                ci_low: None,
                ci_high: None,
                std: None,
                replicates: 0,
            });
        }
    }
    Ok(SweepResult {
        kind: SweepKind::Distance,
        steps,
    })
}

pub(crate) fn prune(net: &InteractionNetwork, dist: &DistanceMatrix, d: f64, side: SweepSide) -> InteractionNetwork {
    net.filtered(|i, j| {
        let t = dist.get(i, j);
        match side {
            SweepSide::Within => i == j || t <= d,
            SweepSide::Beyond => i != j && t > d,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Channel, Weighting};
    use crate::segregation::groups::assign_groups_from_scores;

    fn grid(k: usize, mass: Vec<f64>) -> MixingMatrix {
        MixingMatrix::from_grid(k, mass, Channel::Purchase).unwrap()
    }

    #[test]
    fn step_sets() {
        let s = extremes_steps(10).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s[0], vec![1, 10]);
        assert_eq!(s[1], vec![1, 2, 9, 10]);
        assert_eq!(s[4], (1..=10).collect::<Vec<_>>());
        assert!(extremes_steps(5).is_err());
    }

    #[test]
    fn extremes_interacting_internally_gives_one() {
        let k = 10;
        let mut m = vec![0.5; k * k];
        m[k - 1] = 0.0;
        m[(k - 1) * k] = 0.0;
        let mix = grid(k, m);
        let sweep = extremes_sweep(&mix, false).unwrap();
        assert!((sweep.steps[0].value.unwrap() - 1.0).abs() < 1e-12);
        let full = assortativity(&mix).unwrap();
        assert!((sweep.steps[4].value.unwrap() - full).abs() < 1e-12);
        assert_eq!(sweep.steps[0].param, 20.0);
    }

    #[test]
    fn six_group_manual_submatrices() {
        let k = 6;
        let m: Vec<f64> = (0..36).map(|v| 1.0 + ((v * 17 + 5) % 11) as f64).collect();
        let mix = grid(k, m.clone());
        let sweep = extremes_sweep(&mix, false).unwrap();
        for (t, groups) in [vec![1, 6], vec![1, 2, 5, 6], vec![1, 2, 3, 4, 5, 6]].iter().enumerate() {
            // Manual: copy the sub-block, normalize, apply the covariance formula.
            let g = groups.len();
            let total: f64 = groups.iter().flat_map(|&a| groups.iter().map(move |&b| (a, b))).map(|(a, b)| m[(a - 1) * k + b - 1]).sum();
            let e = |a: usize, b: usize| m[(groups[a] - 1) * k + groups[b] - 1] / total;
            let x = |a: usize| groups[a] as f64;
            let (mut sa, mut sb, mut sa2, mut sb2, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for a in 0..g {
                for b in 0..g {
                    sa += e(a, b) * x(a);
                    sb += e(a, b) * x(b);
                    sa2 += e(a, b) * x(a) * x(a);
                    sb2 += e(a, b) * x(b) * x(b);
                    sab += e(a, b) * x(a) * x(b);
                }
            }
            let r = (sab - sa * sb) / ((sa2 - sa * sa).sqrt() * (sb2 - sb * sb).sqrt());
            assert!((sweep.steps[t].value.unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_step_is_flagged_not_fatal() {
        let k = 4;
        // Groups 1 and 4 exchange nothing and group 4 has no mass at all.
        let mut m = vec![1.0; 16];
        for j in 0..4 {
            m[3 * 4 + j] = 0.0;
            m[j * 4 + 3] = 0.0;
        }
        let sweep = extremes_sweep(&grid(k, m), false).unwrap();
        assert!(!sweep.steps[0].valid());
        assert!(sweep.steps[1].valid());
        assert!(sweep.to_csv().contains("1,50,,,,false"));
    }

    #[test]
    fn percentile_interpolation() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 100.0), 5.0);
        assert_eq!(percentile(&v, 50.0), 3.0);
        assert!((percentile(&v, 20.0) - 1.8).abs() < 1e-12);
    }

    fn four_node_line() -> (InteractionNetwork, GroupAssignment, DistanceMatrix) {
        let ids: Vec<String> = (0..4).map(|i| format!("N{i}")).collect();
        // Nodes on a line 1 km apart; every pair carries flow.
        let mut km = vec![0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                km[i * 4 + j] = (i as f64 - j as f64).abs();
            }
        }
        let w: Vec<f64> = (0..16).map(|v| 1.0 + (v % 3) as f64).collect();
        let net = InteractionNetwork::from_dense(ids.clone(), w, Channel::Purchase, Weighting::PopulationWeighted, vec![1.0; 4], vec![1.0; 4]).unwrap();
        let g = assign_groups_from_scores(&[0.0, 1.0, 2.0, 3.0], &ids, 4, true).unwrap();
        (net, g, DistanceMatrix::from_dense(4, km).unwrap())
    }

    #[test]
    fn distance_sweep_edges() {
        let (net, g, dist) = four_node_line();
        let full = assortativity(&mixing_matrix(&net, &g).unwrap()).unwrap();
        let s = distance_sweep(&net, &g, &dist, &Thresholds::Km(vec![0.5, 3.0])).unwrap();
        // Below the smallest distance only self-flows remain: r = 1.
        assert!((s.steps[0].value.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.steps[0].side, Some(SweepSide::Within));
        // At the max distance nothing is pruned on the within side.
        assert!((s.steps[2].value.unwrap() - full).abs() < 1e-12);
        assert!(!s.steps[3].valid());
        assert!(distance_sweep(&net, &g, &dist, &Thresholds::Km(vec![2.0, 1.0])).is_err());
    }

    #[test]
    fn pruned_sides_partition_mass() {
        let (net, _, dist) = four_node_line();
        for d in [0.5, 1.0, 1.5, 2.5, 3.0] {
            let a = prune(&net, &dist, d, SweepSide::Within);
            let b = prune(&net, &dist, d, SweepSide::Beyond);
            for (i, w) in net.weights().iter().enumerate() {
                assert_eq!(a.weights()[i] + b.weights()[i], *w);
            }
        }
    }

    #[test]
    fn percentile_thresholds_match_sorted_oracle() {
        let (_, _, dist) = four_node_line();
        let km = Thresholds::default().resolve(&dist).unwrap();
        // Pair distances: 1,1,1,2,2,3.
        let sorted = [1.0, 1.0, 1.0, 2.0, 2.0, 3.0];
        let expected: Vec<f64> = DEFAULT_PERCENTILES
            .iter()
            .map(|q| {
                let pos = q / 100.0 * 5.0;
                let lo = pos.floor() as usize;
                let hi = (lo + 1).min(5);
                sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
            })
            .collect();
        assert_eq!(km, expected);
    }
}
