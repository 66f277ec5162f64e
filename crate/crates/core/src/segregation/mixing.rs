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
use crate::error::{Error, Result};
use crate::network::{Channel, InteractionNetwork, Weighting};

/// Group-level aggregate flows, rows = origin group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingMatrix {
    k: usize,
    mass: Vec<f64>,
    /// Attribute value of each row/column group.
    labels: Vec<f64>,
    channel: Channel,
}

impl MixingMatrix {
    pub fn new(k: usize, mass: Vec<f64>, labels: Vec<f64>, channel: Channel) -> Result<Self> {
        if k == 0 || mass.len() != k * k || labels.len() != k {
            return Err(Error::invalid("mixing matrix dimensions do not match k"));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid("mixing mass must be finite and non-negative"));
        }
        Ok(MixingMatrix {
            k,
            mass,
            labels,
            channel,
        })
    }

    /// Square matrix with labels `1..=k`.
    pub fn from_grid(k: usize, mass: Vec<f64>, channel: Channel) -> Result<Self> {
        MixingMatrix::new(k, mass, (1..=k).map(|g| g as f64).collect(), channel)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn raw(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.mass[m * self.k + n]
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Globally normalized view `e` with all entries summing to 1.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::NoInteractionMass);
        }
        Ok(self.mass.iter().map(|m| m / total).collect())
    }

    /// Row-stochastic view. Rows without mass are left at zero and flagged
    /// `false` in the second vector.
    pub fn stochastic(&self) -> (Vec<f64>, Vec<bool>) {
        let k = self.k;
        let mut s = vec![0.0; k * k];
        let mut has_mass = vec![false; k];
        for m in 0..k {
            let row = &self.mass[m * k..(m + 1) * k];
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                has_mass[m] = true;
                for n in 0..k {
                    s[m * k + n] = row[n] / sum;
                }
            }
        }
        (s, has_mass)
    }

    /// Sub-matrix over the given 1-based groups. Attribute values keep the
    /// original group labels unless `relabel`, which renumbers them 1..
    pub fn restrict(&self, groups: &[usize], relabel: bool) -> Result<Self> {
        if groups.iter().any(|&g| g == 0 || g > self.k) {
            return Err(Error::invalid("group index out of range"));
        }
        let k = groups.len();
        let mut mass = Vec::with_capacity(k * k);
        for &m in groups {
            for &n in groups {
                mass.push(self.get(m - 1, n - 1));
            }
        }
        let labels = if relabel {
            (1..=k).map(|g| g as f64).collect()
        } else {
            groups.iter().map(|&g| self.labels[g - 1]).collect()
        };
        MixingMatrix::new(k, mass, labels, self.channel)
    }

    pub fn transposed(&self) -> Self {
        let k = self.k;
        let mut mass = vec![0.0; k * k];
        for m in 0..k {
            for n in 0..k {
                mass[n * k + m] = self.mass[m * k + n];
            }
        }
        MixingMatrix {
            mass,
            ..self.clone()
        }
    }

    /// CSV grid with group labels on both axes.
    pub fn to_grid_csv(&self, values: &[f64]) -> String {
        let k = self.k;
        let mut s = String::from("group");
        for l in &self.labels {
            s.push_str(&format!(",{l}"));
        }
        s.push('\n');
        for m in 0..k {
            s.push_str(&self.labels[m].to_string());
            for n in 0..k {
                s.push_str(&format!(",{}", values[m * k + n]));
            }
            s.push('\n');
        }
        s
    }
}

/// Aggregates a population-weighted network into group-level flows.
pub fn mixing_matrix(net: &InteractionNetwork, groups: &GroupAssignment) -> Result<MixingMatrix> {
    if net.weighting() != Weighting::PopulationWeighted {
        return Err(Error::invalid(
            "mixing expects a population-weighted network; use mixing_matrix_raw for raw counts",
        ));
    }
    mixing_matrix_raw(net, groups)
}

/// Aggregation without the weighting-state check.
pub fn mixing_matrix_raw(net: &InteractionNetwork, groups: &GroupAssignment) -> Result<MixingMatrix> {
    let n = net.len();
    if groups.len() != n {
        return Err(Error::invalid("group assignment does not match network nodes"));
    }
    let k = groups.k();
    let mut mass = vec![0.0; k * k];
    let weights = net.weights();
    for i in 0..n {
        let row = (groups.group(i) - 1) * k;
        for j in 0..n {
            let w = weights[i * n + j];
            if w != 0.0 {
                mass[row + groups.group(j) - 1] += w;
            }
        }
    }
    if mass.iter().all(|&m| m == 0.0) {
        return Err(Error::NoInteractionMass);
    }
    MixingMatrix::from_grid(k, mass, net.channel())
}

/// Newman's assortativity coefficient over the globally normalized mixing
/// matrix, using group labels as attribute values.
pub fn assortativity(mix: &MixingMatrix) -> Result<f64> {
    let e = mix.normalized()?;
    let k = mix.k();
    let x = mix.labels();
    let mut a = vec![0.0; k];
    let mut b = vec![0.0; k];
    for m in 0..k {
        for n in 0..k {
            a[m] += e[m * k + n];
            b[n] += e[m * k + n];
        }
    }
    let mean = |p: &[f64]| p.iter().zip(x).map(|(p, x)| p * x).sum::<f64>();
    let (mu_a, mu_b) = (mean(&a), mean(&b));
    let var = |p: &[f64], mu: f64| p.iter().zip(x).map(|(p, x)| p * (x - mu).powi(2)).sum::<f64>();
    let (var_a, var_b) = (var(&a, mu_a), var(&b, mu_b));
    let scale = x.iter().map(|v| v * v).fold(1.0, f64::max);
    let floor = 1e-14 * scale;
    if var_a <= floor || var_b <= floor {
        return Err(Error::DegenerateAttributeDistribution);
    }
    let mut cov = 0.0;
    for m in 0..k {
        for n in 0..k {
            cov += (x[m] - mu_a) * (x[n] - mu_b) * e[m * k + n];
        }
    }
    Ok((cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Mass flowing from lower to higher groups (upper triangle) minus mass
/// flowing from higher to lower groups, on the normalized matrix.
pub fn asymmetry_bias(mix: &MixingMatrix) -> Result<f64> {
    let e = mix.normalized()?;
    let k = mix.k();
    let mut bias = 0.0;
    for m in 0..k {
        for n in 0..k {
            if m < n {
                bias += e[m * k + n];
            } else if m > n {
                bias -= e[m * k + n];
            }
        }
    }
    Ok(bias)
}
