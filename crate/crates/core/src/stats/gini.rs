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

use crate::error::{Error, Result};

/// GINI coefficient: mean absolute pairwise difference over twice the mean.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("gini needs finite non-negative values"));
    }
    let total: f64 = values.iter().sum();
    if values.is_empty() || total <= 0.0 {
        return Err(Error::AllZero);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // Σ_i (2i - n - 1) x_(i) over ascending order, 1-based i.
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok((weighted / (n * total)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise_oracle(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sum: f64 = v.iter().flat_map(|a| v.iter().map(move |b| (a - b).abs())).sum();
        sum / (2.0 * n * n * mean)
    }

    #[test]
    fn reference_values() {
        assert_eq!(gini(&[5.0; 4]).unwrap(), 0.0);
        assert!((gini(&[0.0, 0.0, 0.0, 1.0]).unwrap() - 0.75).abs() < 1e-15);
        assert!((gini(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(gini(&[0.0, 0.0]), Err(Error::AllZero)));
        assert!(gini(&[1.0, -1.0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_pairwise_and_invariances(v in prop::collection::vec(0.0f64..1000.0, 1..40), c in 0.001f64..1e4) {
            prop_assume!(v.iter().sum::<f64>() > 0.0);
            let g = gini(&v).unwrap();
            prop_assert!((g - pairwise_oracle(&v)).abs() < 1e-12);
            prop_assert!((0.0..1.0).contains(&g));
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            prop_assert!((gini(&scaled).unwrap() - g).abs() < 1e-12);
            let doubled: Vec<f64> = v.iter().chain(v.iter()).copied().collect();
            prop_assert!((gini(&doubled).unwrap() - g).abs() < 1e-9);
        }
    }
}
