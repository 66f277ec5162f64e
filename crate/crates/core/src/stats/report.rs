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

use super::gini::gini;
use super::summary::mean_std;
use crate::error::{Error, Result};
use crate::ingest::{NeighborhoodTable, PurchaseEvent};
use crate::models::{
    adjust_gravity_amounts, customer_counts, reshuffle_locations, revenue_by_neighborhood,
    simulate_gravity, store_counts, AdjustDirection, GravityParams,
};
use crate::network::{build_purchase_network, DistanceMatrix, InteractionNetwork};
use crate::segregation::{assortativity, mixing_matrix, GroupAssignment};

pub const DEFAULT_FRACTIONS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub fractions: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            replicates: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub fraction: Option<f64>,
    pub assortativity_mean: f64,
    pub assortativity_std: f64,
    /// Over all neighborhoods, store-less ones counted as zero revenue.
    pub gini_mean: f64,
    pub gini_std: f64,
    /// Over neighborhoods that host at least one store.
    pub gini_storeful_mean: f64,
    pub gini_storeful_std: f64,
    pub total_revenue: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub rows: Vec<ReportRow>,
}

impl InequalityReport {
    pub fn row(&self, label: &str, fraction: Option<f64>) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label && r.fraction == fraction)
    }

    fn csv(&self, storeful: bool) -> String {
        let mut s = String::from("label,fraction,assortativity_mean,assortativity_std,gini_mean,gini_std,replicates\n");
        for r in &self.rows {
            let (g, gs) = if storeful {
                (r.gini_storeful_mean, r.gini_storeful_std)
            } else {
                (r.gini_mean, r.gini_std)
            };
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.label,
                r.fraction.map(|f| f.to_string()).unwrap_or_default(),
                r.assortativity_mean,
                r.assortativity_std,
                g,
                gs,
                r.replicates
            ));
        }
        s
    }

    /// Report CSV with store-less neighborhoods counted as zero revenue.
    pub fn to_csv(&self) -> String {
        self.csv(false)
    }

    /// Same layout, GINI restricted to neighborhoods with stores.
    pub fn to_csv_storeful(&self) -> String {
        self.csv(true)
    }
}

fn storeful(revenue: &[f64], stores: &[f64]) -> Vec<f64> {
    revenue
        .iter()
        .zip(stores)
        .filter(|(_, &s)| s > 0.0)
        .map(|(&r, _)| r)
        .collect()
}

fn net_assortativity(raw: &InteractionNetwork, groups: &GroupAssignment) -> Result<f64> {
    assortativity(&mixing_matrix(&raw.weighted()?, groups)?)
}

struct Measure {
    r: f64,
    gini: f64,
    gini_storeful: f64,
    total: f64,
}

fn row(label: &str, fraction: Option<f64>, measures: &[Measure]) -> ReportRow {
    let col = |f: fn(&Measure) -> f64| mean_std(&measures.iter().map(f).collect::<Vec<_>>());
    let (am, asd) = col(|m| m.r);
    let (gm, gsd) = col(|m| m.gini);
    let (sm, ssd) = col(|m| m.gini_storeful);
    ReportRow {
        label: label.to_string(),
        fraction,
        assortativity_mean: am,
        assortativity_std: asd,
        gini_mean: gm,
        gini_std: gsd,
        gini_storeful_mean: sm,
        gini_storeful_std: ssd,
        total_revenue: measures[0].total,
        replicates: measures.len(),
    }
}

/// Assortativity and revenue inequality for the empirical purchase network,
/// the gravity-model network (amounts adjusted in both ratio directions) and
/// location-reshuffled networks at each fraction.
///
/// Adjusted gravity revenues are rescaled to the empirical total; GINI and
/// assortativity are both scale-free, so only the reported total changes.
pub fn segregation_inequality_report(
    events: &[PurchaseEvent],
    table: &NeighborhoodTable,
    groups: &GroupAssignment,
    gravity: &GravityParams,
    dist: &DistanceMatrix,
    opts: &ReportOptions,
) -> Result<InequalityReport> {
    if opts.replicates == 0 {
        return Err(Error::invalid("report needs at least one replicate"));
    }
    let empirical = build_purchase_network(events, table).network;
    let revenue = revenue_by_neighborhood(events, table);
    let stores = store_counts(events, table);
    let total: f64 = revenue.iter().sum();
    let measure = |net: &InteractionNetwork, revenue: &[f64], stores: &[f64]| -> Result<Measure> {
        Ok(Measure {
            r: net_assortativity(net, groups)?,
            gini: gini(revenue)?,
            gini_storeful: gini(&storeful(revenue, stores))?,
            total: revenue.iter().sum(),
        })
    };

    let mut rows = vec![row("empirical", None, &[measure(&empirical, &revenue, &stores)?])];

    let customers = customer_counts(events, table);
    let simulated = simulate_gravity(gravity, dist, &customers, &stores, &empirical)?;
    for (label, direction) in [
        ("gravity", AdjustDirection::ObservedOverSimulated),
        ("gravity_inverse", AdjustDirection::SimulatedOverObserved),
    ] {
        let adjusted = adjust_gravity_amounts(events, table, &empirical, &simulated, direction)?;
        let adj_total: f64 = adjusted.iter().sum();
        if adj_total <= 0.0 {
            return Err(Error::AllZero);
        }
        let rescaled: Vec<f64> = adjusted.iter().map(|v| v * total / adj_total).collect();
        rows.push(row(label, None, &[measure(&simulated, &rescaled, &stores)?]));
    }

    for &f in &opts.fractions {
        let reps = reshuffle_locations(events, table, f, opts.replicates, opts.seed)?;
        let measures = reps
            .iter()
            .map(|rep| measure(&rep.network, &rep.revenue, &rep.store_counts))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row("reshuffle", Some(f), &measures));
    }
    Ok(InequalityReport { rows })
}
