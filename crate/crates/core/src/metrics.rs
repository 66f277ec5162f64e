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

//! Behavioral diversity and correlation statistics.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{HomeAssignment, MentionEvent, NeighborhoodTable, PurchaseEvent};
use crate::network::Channel;

/// Shannon entropy (nats) of an activity histogram.
pub fn individual_diversity<I>(counts: I) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    let counts: Vec<f64> = counts.into_iter().collect();
    if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::invalid("counts must be finite and non-negative"));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyActivity);
    }
    let h = -counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            p * p.ln()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Per-individual activity counts over targets (stores or mentioned users).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiversityProfiles {
    counts: BTreeMap<String, HashMap<String, f64>>,
}

impl DiversityProfiles {
    pub fn record(&mut self, individual: &str, target: &str) {
        *self
            .counts
            .entry(individual.to_string())
            .or_default()
            .entry(target.to_string())
            .or_default() += 1.0;
    }

    pub fn from_purchases(events: &[PurchaseEvent]) -> Self {
        let mut p = DiversityProfiles::default();
        for e in events {
            p.record(&e.customer_id, &e.store_id);
        }
        p
    }

    pub fn from_mentions(events: &[MentionEvent]) -> Self {
        let mut p = DiversityProfiles::default();
        for e in events {
            p.record(&e.source_user, &e.target_user);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Entropy of each individual, in id order.
    pub fn entropies(&self) -> Vec<(&str, f64)> {
        self.counts
            .iter()
            .map(|(id, c)| {
                let h = individual_diversity(c.values().copied()).expect("recorded counts are positive");
                (id.as_str(), h)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodDiversityRow {
    pub neighborhood_id: String,
    pub channel: Channel,
    /// `None` when the neighborhood has no profiled residents.
    pub mean_diversity: Option<f64>,
    pub resident_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodDiversity {
    pub channel: Channel,
    pub rows: Vec<NeighborhoodDiversityRow>,
    /// Profiled individuals without a usable home.
    pub skipped_without_home: usize,
}

impl NeighborhoodDiversity {
    pub fn means(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.mean_diversity).collect()
    }

    /// `neighborhood_id,channel,mean_diversity,resident_count`; undefined
    /// means are left empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("neighborhood_id,channel,mean_diversity,resident_count\n");
        for r in &self.rows {
            let mean = r.mean_diversity.map(|m| m.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", r.neighborhood_id, r.channel, mean, r.resident_count));
        }
        s
    }
}

/// Mean individual entropy over the residents of each neighborhood.
pub fn neighborhood_diversity(
    profiles: &DiversityProfiles,
    homes: &HomeAssignment,
    table: &NeighborhoodTable,
    channel: Channel,
) -> NeighborhoodDiversity {
    let mut sums = vec![0.0; table.len()];
    let mut counts = vec![0usize; table.len()];
    let mut skipped = 0;
    for (id, h) in profiles.entropies() {
        match homes.get(id).and_then(|home| table.index_of(home)) {
            Some(i) => {
                sums[i] += h;
                counts[i] += 1;
            }
            None => skipped += 1,
        }
    }
    let rows = table
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| NeighborhoodDiversityRow {
            neighborhood_id: r.id.clone(),
            channel,
            mean_diversity: (counts[i] > 0).then(|| sums[i] / counts[i] as f64),
            resident_count: counts[i],
        })
        .collect();
    NeighborhoodDiversity {
        channel,
        rows,
        skipped_without_home: skipped,
    }
}

/// Pearson correlation, optionally weighted.
pub fn pearson(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("pearson needs two vectors of equal length >= 2"));
    }
    if let Some(w) = weights {
        if w.len() != x.len() || w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("weights must be non-negative and match the data"));
        }
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..x.len()).map(weight).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateCorrelation);
    }
    let mx = (0..x.len()).map(|i| weight(i) * x[i]).sum::<f64>() / total;
    let my = (0..y.len()).map(|i| weight(i) * y[i]).sum::<f64>() / total;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        let w = weight(i);
        sxy += w * dx * dy;
        sxx += w * dx * dx;
        syy += w * dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation between neighborhood mean diversity and SES, over the
/// neighborhoods where the mean is defined.
pub fn diversity_ses_correlation(div: &NeighborhoodDiversity, table: &NeighborhoodTable) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = div
        .rows
        .iter()
        .zip(table.records())
        .filter_map(|(row, nb)| row.mean_diversity.map(|m| (m, nb.ses)))
        .unzip();
    pearson(&x, &y, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn entropy_examples() {
        assert_eq!(individual_diversity([5.0]).unwrap(), 0.0);
        let uniform = individual_diversity([1.0; 4]).unwrap();
        assert!((uniform - 4f64.ln()).abs() < TOL);
        assert!((uniform - 1.386294).abs() < 1e-6);
        // -(0.75 ln 0.75 + 0.25 ln 0.25)
        let skewed = individual_diversity([3.0, 1.0]).unwrap();
        assert!((skewed - 0.562335).abs() < 1e-6);
        assert!(matches!(individual_diversity([0.0, 0.0]), Err(Error::EmptyActivity)));
        assert!(individual_diversity([1.0, -1.0]).is_err());
    }

    #[test]
    fn zero_counts_contribute_nothing() {
        let a = individual_diversity([2.0, 0.0, 2.0, 0.0]).unwrap();
        assert!((a - 2f64.ln()).abs() < TOL);
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], None).unwrap() - 1.0).abs() < TOL);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0], None).unwrap() + 1.0).abs() < TOL);
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], None),
            Err(Error::DegenerateCorrelation)
        ));
        assert!(pearson(&[1.0], &[1.0], None).is_err());
    }

    /// Textbook covariance formula over sums, independent of the centered
    /// two-pass form used above.
    fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn pearson_ten_point_fixture() {
        let x = [0.3, 1.7, 2.2, 3.9, 4.1, 5.5, 6.0, 7.2, 8.8, 9.4];
        let y = [1.2, 0.8, 2.9, 3.1, 5.0, 4.4, 6.7, 6.1, 9.0, 8.2];
        let r = pearson(&x, &y, None).unwrap();
        assert!((r - pearson_oracle(&x, &y)).abs() < 1e-12);
        let w = [1.0; 10];
        assert!((pearson(&x, &y, Some(&w)).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn integer_weights_equal_replication() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let y = [2.0, 1.0, 5.0, 6.0];
        let w = [1.0, 3.0, 2.0, 1.0];
        let (mut xr, mut yr) = (vec![], vec![]);
        for i in 0..4 {
            for _ in 0..w[i] as usize {
                xr.push(x[i]);
                yr.push(y[i]);
            }
        }
        let a = pearson(&x, &y, Some(&w)).unwrap();
        assert!((a - pearson_oracle(&xr, &yr)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn entropy_bounds_and_invariances(counts in prop::collection::vec(0u32..50, 1..12), scale in 1u32..9) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let c: Vec<f64> = counts.iter().map(|&v| v as f64).collect();
            let h = individual_diversity(c.iter().copied()).unwrap();
            let distinct = counts.iter().filter(|&&v| v > 0).count() as f64;
            prop_assert!(h >= 0.0 && h <= distinct.ln() + 1e-12);

            let mut rev = c.clone();
            rev.reverse();
            prop_assert!((individual_diversity(rev).unwrap() - h).abs() < 1e-12);

            let scaled = c.iter().map(|v| v * scale as f64);
            prop_assert!((individual_diversity(scaled).unwrap() - h).abs() < 1e-12);
        }

        #[test]
        fn merging_targets_never_increases_entropy(counts in prop::collection::vec(0u32..50, 2..12), i in 0usize..12, j in 0usize..12) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let (i, j) = (i % counts.len(), j % counts.len());
            prop_assume!(i != j);
            let c: Vec<f64> = counts.iter().map(|&v| v as f64).collect();
            let mut merged = c.clone();
            merged[i] += merged[j];
            merged.remove(j);
            prop_assert!(individual_diversity(merged).unwrap() <= individual_diversity(c).unwrap() + 1e-12);
        }
    }
}
