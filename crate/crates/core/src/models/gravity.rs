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

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Channel, DistanceMatrix, InteractionNetwork, Weighting};

/// Fitted constants of `w_ij ≈ c · n_i^β1 · m_j^β2 / (T_ij + ε)^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GravityParams {
    pub c: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub channel: Channel,
    #[serde(default)]
    pub r2_weighted: f64,
    #[serde(default)]
    pub residual_norm: f64,
    /// Positive entries used by the fit.
    #[serde(default)]
    pub entries_used: usize,
    /// Zero-flow pairs left out of the fit.
    #[serde(default)]
    pub zero_entries_excluded: usize,
    /// Distance enters linearly as `-α (T + ε)` instead of `-α log(T + ε)`.
    #[serde(default)]
    pub linear_distance: bool,
}

impl GravityParams {
    pub fn new(c: f64, beta1: f64, beta2: f64, epsilon: f64, alpha: f64, channel: Channel) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) || !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::invalid("gravity parameters need c > 0 and epsilon >= 0"));
        }
        if !(beta1.is_finite() && beta2.is_finite() && alpha.is_finite()) {
            return Err(Error::invalid("gravity exponents must be finite"));
        }
        Ok(GravityParams {
            c,
            beta1,
            beta2,
            epsilon,
            alpha,
            channel,
            r2_weighted: 0.0,
            residual_norm: 0.0,
            entries_used: 0,
            zero_entries_excluded: 0,
            linear_distance: false,
        })
    }

    fn distance_term(&self, t: f64) -> f64 {
        if self.linear_distance {
            (-self.alpha * (t + self.epsilon)).exp()
        } else {
            (t + self.epsilon).powf(-self.alpha)
        }
    }

    /// Model intensity for one pair.
    pub fn intensity(&self, origin: f64, dest: f64, t: f64) -> f64 {
        self.c * origin.powf(self.beta1) * dest.powf(self.beta2) * self.distance_term(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for EpsilonGrid {
    fn default() -> Self {
        EpsilonGrid {
            min: 0.0,
            max: 2.0,
            step: 0.01,
        }
    }
}

impl EpsilonGrid {
    fn points(&self) -> Result<Vec<f64>> {
        if !(self.min >= 0.0 && self.max >= self.min && self.step > 0.0) {
            return Err(Error::invalid("epsilon grid needs 0 <= min <= max and step > 0"));
        }
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.min + i as f64 * self.step).collect())
    }
}

/// Source of the regression weights.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FitWeights<'a> {
    /// Each entry weighted by its own observed count.
    #[default]
    Observed,
    /// Weights taken from another matrix (e.g. the population-weighted one).
    External(&'a InteractionNetwork),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityFitOptions<'a> {
    pub epsilon_grid: EpsilonGrid,
    /// Refine ε by golden-section search around the best grid point.
    pub refine_epsilon: bool,
    pub linear_distance: bool,
    pub weights: FitWeights<'a>,
    pub min_positive: usize,
}

impl Default for GravityFitOptions<'_> {
    fn default() -> Self {
        GravityFitOptions {
            epsilon_grid: EpsilonGrid::default(),
            refine_epsilon: true,
            linear_distance: false,
            weights: FitWeights::Observed,
            min_positive: 20,
        }
    }
}

struct Sample {
    log_w: f64,
    log_origin: f64,
    log_dest: f64,
    t: f64,
    weight: f64,
}

struct Solution {
    coef: [f64; 4],
    ssr: f64,
}

const MAX_CONDITION: f64 = 1e12;

fn solve(samples: &[Sample], eps: f64, linear: bool) -> Result<Solution> {
    let rows = samples.len();
    let mut x = DMatrix::<f64>::zeros(rows, 4);
    let mut y = DVector::<f64>::zeros(rows);
    for (r, s) in samples.iter().enumerate() {
        let sw = s.weight.sqrt();
        let dist = if linear { -(s.t + eps) } else { -(s.t + eps).ln() };
        x[(r, 0)] = sw;
        x[(r, 1)] = sw * s.log_origin;
        x[(r, 2)] = sw * s.log_dest;
        x[(r, 3)] = sw * dist;
        y[r] = sw * s.log_w;
    }
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let eig = xtx.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v.abs()), hi.max(v.abs())));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::SingularNormalEquations { condition });
    }
    let beta = xtx
        .cholesky()
        .ok_or(Error::SingularNormalEquations { condition })?
        .solve(&xty);
    let resid = &y - &x * &beta;
    Ok(Solution {
        coef: [beta[0], beta[1], beta[2], beta[3]],
        ssr: resid.norm_squared(),
    })
}

/// Weighted least-squares fit of the log-linearized gravity model.
///
/// For fixed ε the model is linear in `(log c, β1, β2, α)`; ε is chosen on
/// a grid (optionally refined) to minimize the weighted residual norm.
pub fn fit_gravity(
    net: &InteractionNetwork,
    dist: &DistanceMatrix,
    origin_counts: &[f64],
    dest_counts: &[f64],
    opts: &GravityFitOptions<'_>,
) -> Result<GravityParams> {
    let n = net.len();
    if dist.len() != n || origin_counts.len() != n || dest_counts.len() != n {
        return Err(Error::invalid("gravity inputs do not match network size"));
    }
    let external = match opts.weights {
        FitWeights::External(w) if w.len() != n => {
            return Err(Error::invalid("weight network does not match"));
        }
        FitWeights::External(w) => Some(w),
        FitWeights::Observed => None,
    };
    let mut samples = Vec::new();
    let mut zeros = 0;
    for i in 0..n {
        for j in 0..n {
            let w = net.get(i, j);
            if w <= 0.0 {
                zeros += 1;
                continue;
            }
            if origin_counts[i] <= 0.0 || dest_counts[j] <= 0.0 {
                continue;
            }
            let weight = external.map_or(w, |e| e.get(i, j));
            samples.push(Sample {
                log_w: w.ln(),
                log_origin: origin_counts[i].ln(),
                log_dest: dest_counts[j].ln(),
                t: dist.get(i, j),
                weight,
            });
        }
    }
    if samples.len() < opts.min_positive {
        return Err(Error::TooFewPositiveEntries {
            found: samples.len(),
            required: opts.min_positive,
        });
    }
    let has_zero_distance = samples.iter().any(|s| s.t == 0.0);
    let usable = |eps: f64| opts.linear_distance || !(eps == 0.0 && has_zero_distance);

    let mut best: Option<(f64, Solution)> = None;
    let mut last_err = None;
    for eps in opts.epsilon_grid.points()? {
        if !usable(eps) {
            continue;
        }
        match solve(&samples, eps, opts.linear_distance) {
            Ok(sol) if best.as_ref().is_none_or(|(_, b)| sol.ssr < b.ssr) => best = Some((eps, sol)),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let (mut eps, mut sol) = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap_or(Error::DistanceSingularity)),
    };

    if opts.refine_epsilon && !opts.linear_distance {
        let g = opts.epsilon_grid;
        let lo = (eps - g.step).max(g.min);
        let hi = (eps + g.step).min(g.max);
        let objective = |e: f64| {
            if !usable(e) {
                return f64::INFINITY;
            }
            solve(&samples, e, false).map_or(f64::INFINITY, |s| s.ssr)
        };
        let e = golden_section(lo, hi, objective);
        if let Ok(s) = solve(&samples, e, false) {
            if s.ssr <= sol.ssr {
                eps = e;
                sol = s;
            }
        }
    }

    let total_w: f64 = samples.iter().map(|s| s.weight).sum();
    let mean = samples.iter().map(|s| s.weight * s.log_w).sum::<f64>() / total_w;
    let sst: f64 = samples.iter().map(|s| s.weight * (s.log_w - mean).powi(2)).sum();
    let [log_c, beta1, beta2, alpha] = sol.coef;
    Ok(GravityParams {
        c: log_c.exp(),
        beta1,
        beta2,
        epsilon: eps,
        alpha,
        channel: net.channel(),
        r2_weighted: if sst > 0.0 { 1.0 - sol.ssr / sst } else { 1.0 },
        residual_norm: sol.ssr.sqrt(),
        entries_used: samples.len(),
        zero_entries_excluded: zeros,
        linear_distance: opts.linear_distance,
    })
}

fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Real-valued flows predicted by the model. Node ids and census attributes
/// are copied from `template` so the result can be population weighted like
/// an observed network.
pub fn simulate_gravity(
    params: &GravityParams,
    dist: &DistanceMatrix,
    origin_counts: &[f64],
    dest_counts: &[f64],
    template: &InteractionNetwork,
) -> Result<InteractionNetwork> {
    let n = template.len();
    if dist.len() != n || origin_counts.len() != n || dest_counts.len() != n {
        return Err(Error::invalid("gravity inputs do not match network size"));
    }
    if !(params.c > 0.0) || params.epsilon < 0.0 {
        return Err(Error::invalid("gravity parameters need c > 0 and epsilon >= 0"));
    }
    if !params.linear_distance && params.epsilon == 0.0 && dist.as_slice().contains(&0.0) {
        return Err(Error::DistanceSingularity);
    }
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            weights[i * n + j] = params.intensity(origin_counts[i], dest_counts[j], dist.get(i, j));
        }
    }
    InteractionNetwork::from_dense(
        template.ids().to_vec(),
        weights,
        template.channel(),
        Weighting::Raw,
        template.population().to_vec(),
        template.users().to_vec(),
    )
}
