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

use crate::error::{Error, Result};
use crate::ingest::NeighborhoodTable;

/// Group label `1..=k` per neighborhood, in table order. Label 1 is the
/// lowest socio-economic status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupAssignment {
    k: usize,
    labels: Vec<usize>,
}

impl GroupAssignment {
    pub fn from_labels(k: usize, labels: Vec<usize>) -> Result<Self> {
        if k < 2 || labels.iter().any(|&g| g == 0 || g > k) {
            return Err(Error::invalid("group labels must lie in 1..=k with k >= 2"));
        }
        Ok(GroupAssignment { k, labels })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label of node `i` (1-based).
    pub fn group(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &g in &self.labels {
            sizes[g - 1] += 1;
        }
        sizes
    }

    /// Same partition with node labels moved by `perm`: node `i` takes the
    /// label of node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        GroupAssignment {
            k: self.k,
            labels: perm.iter().map(|&p| self.labels[p]).collect(),
        }
    }
}

pub fn assign_groups(table: &NeighborhoodTable, k: usize, ses_ascending: bool) -> Result<GroupAssignment> {
    let ids = table.ids();
    assign_groups_from_scores(&table.ses(), &ids, k, ses_ascending)
}

/// Splits nodes into `k` equal-size blocks by ascending score, ties broken
/// by id. When `n % k = r > 0` the `r` lowest groups get one extra member.
/// With `ses_ascending = false` scores are negated first (marginalization
/// indices, where higher means poorer).
pub fn assign_groups_from_scores(
    scores: &[f64],
    ids: &[String],
    k: usize,
    ses_ascending: bool,
) -> Result<GroupAssignment> {
    let n = scores.len();
    if ids.len() != n {
        return Err(Error::invalid("score and id vectors differ in length"));
    }
    if k < 2 || n < k {
        return Err(Error::TooFewNeighborhoods { n, k });
    }
    let key = |i: usize| if ses_ascending { scores[i] } else { -scores[i] };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then_with(|| ids[a].cmp(&ids[b])));
    let (base, extra) = (n / k, n % k);
    let mut labels = vec![0; n];
    let mut pos = 0;
    for g in 0..k {
        let size = base + usize::from(g < extra);
        for &node in &order[pos..pos + size] {
            labels[node] = g + 1;
        }
        pos += size;
    }
    Ok(GroupAssignment { k, labels })
}
