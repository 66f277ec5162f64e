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

//! Synthetic cities with planted structure.
//!
//! Neighborhoods sit on a square grid. Expected flows follow a gravity law
//! multiplied by a homophily factor `exp(-h |Δses|)` and a tilt factor
//! `exp(τ (ses_j - ses_i))`; observed counts are Poisson draws around them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    mentions_to_csv, posts_to_csv, purchases_to_csv, GeoPost, Geometry, MentionEvent, Neighborhood,
    NeighborhoodTable, PurchaseEvent,
};
use crate::models::GravityParams;
use crate::network::{centroid_distances, Channel};
use crate::rng;

const KM_PER_DEGREE: f64 = 111.195;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SesField {
    /// Increases west to east.
    Linear,
    /// Highest at the center.
    Radial,
    /// Spatially uncorrelated.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum StoreLaw {
    Uniform,
    /// Expected stores ∝ (ses + 0.1)^gamma.
    SesProportional { gamma: f64 },
}

/// Gravity shape `c · n_i^β1 · m_j^β2 / (T + ε)^α`; `c` only matters
/// relative to the configured event volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityShape {
    pub c: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub name: String,
    pub n_neighborhoods: usize,
    pub extent_km: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub ses_field: SesField,
    pub ses_noise: f64,
    pub population_range: (f64, f64),
    /// Card customers per neighborhood.
    pub customers_range: (usize, usize),
    pub store_law: StoreLaw,
    pub stores_mean: f64,
    /// Twitter users per neighborhood.
    pub twitter_users_range: (usize, usize),
    pub purchase_gravity: GravityShape,
    pub mention_gravity: GravityShape,
    pub homophily: f64,
    /// In [0, 1]; at 1 homophily vanishes for median-SES pairs and is full
    /// strength between the extremes.
    pub extreme_focus: f64,
    pub tilt: f64,
    /// In [0, 1]. A purchase in neighborhood j goes to a uniformly chosen
    /// store with probability `1 - g·(1 - q_i)`, where q_i is the SES rank of
    /// the buyer's home in [0, 1], and otherwise to the buyer's habitual
    /// store there. At 0 every choice is uniform.
    pub exploration_gradient: f64,
    pub purchase_events: f64,
    pub mention_events: f64,
    pub amount_log_mean: f64,
    pub amount_log_sd: f64,
    pub night_posts_range: (usize, usize),
    pub day_posts_range: (usize, usize),
    pub seed: u64,
}

pub const PRESETS: [&str; 4] = ["neutral", "homophilous", "tilted", "extremes"];

impl SynthConfig {
    fn base(name: &str, seed: u64) -> Self {
        SynthConfig {
            name: name.to_string(),
            n_neighborhoods: 100,
            extent_km: 12.0,
            origin_lat: 41.35,
            origin_lon: 2.10,
            ses_field: SesField::Linear,
            ses_noise: 0.05,
            population_range: (2_000.0, 20_000.0),
            customers_range: (10, 40),
            store_law: StoreLaw::Uniform,
            stores_mean: 6.0,
            twitter_users_range: (8, 30),
            purchase_gravity: GravityShape {
                c: 0.249,
                beta1: 0.762,
                beta2: 0.598,
                epsilon: 0.233,
                alpha: 0.918,
            },
            mention_gravity: GravityShape {
                c: 0.119,
                beta1: 0.594,
                beta2: 0.594,
                epsilon: 0.029,
                alpha: 0.582,
            },
            homophily: 0.0,
            extreme_focus: 0.0,
            tilt: 0.0,
            exploration_gradient: 0.0,
            purchase_events: 100_000.0,
            mention_events: 40_000.0,
            amount_log_mean: 3.0,
            amount_log_sd: 0.8,
            night_posts_range: (3, 6),
            day_posts_range: (0, 4),
            seed,
        }
    }

    /// Named configurations: `neutral` (no homophily, SES uncorrelated with
    /// space), `homophilous`, `tilted` (poor→rich excess) and `extremes`
    /// (strong homophily on a radial SES field).
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        let mut cfg = SynthConfig::base(name, seed);
        match name {
            "neutral" => cfg.ses_field = SesField::Random,
            "homophilous" => cfg.homophily = 5.0,
            "tilted" => {
                cfg.homophily = 1.0;
                cfg.tilt = 1.5;
            }
            "extremes" => {
                cfg.homophily = 8.0;
                cfg.extreme_focus = 1.0;
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?} (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_neighborhoods < 2 {
            return bad("need at least 2 neighborhoods");
        }
        if !(self.extent_km > 0.0) || !(self.purchase_events > 0.0) || !(self.mention_events >= 0.0) {
            return bad("extent and event counts must be positive");
        }
        if self.customers_range.0 == 0 || self.twitter_users_range.0 == 0 || self.night_posts_range.0 == 0 {
            return bad("customer, user and night-post counts must be positive");
        }
        if self.customers_range.0 > self.customers_range.1
            || self.twitter_users_range.0 > self.twitter_users_range.1
            || self.night_posts_range.0 > self.night_posts_range.1
            || self.day_posts_range.0 > self.day_posts_range.1
        {
            return bad("ranges must be ordered");
        }
        if !(self.population_range.0 > 0.0 && self.population_range.0 <= self.population_range.1) {
            return bad("population range must be positive and ordered");
        }
        if !(self.stores_mean > 0.0) {
            return bad("stores_mean must be positive");
        }
        if !(self.homophily.is_finite() && self.homophily >= 0.0 && self.tilt.is_finite()) {
            return bad("homophily must be finite and >= 0, tilt finite");
        }
        if !(0.0..=1.0).contains(&self.extreme_focus) || !(0.0..=1.0).contains(&self.exploration_gradient) {
            return bad("extreme_focus and exploration_gradient must lie in [0, 1]");
        }
        if let StoreLaw::SesProportional { gamma } = self.store_law {
            if !gamma.is_finite() {
                return bad("store gamma must be finite");
            }
        }
        for g in [self.purchase_gravity, self.mention_gravity] {
            if !(g.c > 0.0 && g.epsilon > 0.0) {
                return bad("gravity shapes need c > 0 and epsilon > 0");
            }
        }
        Ok(())
    }
}

/// Qualitative expectation for a pipeline statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "expect")]
pub enum Expectation {
    /// |value| at most `tolerance`.
    NearZero { tolerance: f64 },
    /// value strictly above `min`.
    Above { min: f64 },
    /// |value| at most `sigmas` standard deviations of the SES-shuffle null.
    WithinNull { sigmas: f64 },
}

impl Expectation {
    /// `null_std` is only consulted by [`Expectation::WithinNull`].
    pub fn holds(&self, value: f64, null_std: Option<f64>) -> bool {
        match *self {
            Expectation::NearZero { tolerance } => value.abs() <= tolerance,
            Expectation::Above { min } => value > min,
            Expectation::WithinNull { sigmas } => null_std.is_some_and(|s| value.abs() <= sigmas * s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub name: String,
    /// Full-matrix purchase assortativity of the population-weighted network.
    pub assortativity: Expectation,
    /// Full-matrix purchase asymmetry bias.
    pub bias: Expectation,
    pub homophily: f64,
    pub tilt: f64,
    pub purchase_gravity: GravityShape,
    pub mention_gravity: GravityShape,
}

/// Expected qualitative outcomes for a configuration. Thresholds come from
/// pilot runs over 20 seeds of each preset.
pub fn planted_truth(cfg: &SynthConfig) -> PlantedTruth {
    let assortativity = if cfg.homophily >= 4.0 {
        Expectation::Above { min: 0.5 }
    } else if cfg.homophily == 0.0 && cfg.ses_field == SesField::Random {
        Expectation::NearZero { tolerance: NEUTRAL_R_TOLERANCE }
    } else {
        Expectation::Above { min: 0.0 }
    };
    let bias = if cfg.tilt > 0.0 {
        Expectation::Above { min: 0.0 }
    } else {
        Expectation::WithinNull { sigmas: 3.0 }
    };
    PlantedTruth {
        name: cfg.name.clone(),
        assortativity,
        bias,
        homophily: cfg.homophily,
        tilt: cfg.tilt,
        purchase_gravity: cfg.purchase_gravity,
        mention_gravity: cfg.mention_gravity,
    }
}

pub const NEUTRAL_R_TOLERANCE: f64 = 0.2;

/// Per-neighborhood counts used to drive the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCounts {
    pub customers: Vec<f64>,
    pub stores: Vec<f64>,
    pub twitter_users: Vec<f64>,
    /// Gravity parameters with `c` rescaled to the drawn event volume.
    pub purchase_gravity: GravityParams,
    pub mention_gravity: GravityParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCity {
    pub config: SynthConfig,
    pub table: NeighborhoodTable,
    pub geometry: Geometry,
    pub purchases: Vec<PurchaseEvent>,
    pub mentions: Vec<MentionEvent>,
    pub posts: Vec<GeoPost>,
    pub counts: PlantedCounts,
}

struct Cell {
    row: usize,
    col: usize,
    /// Grid position scaled to [0, 1].
    x: f64,
    y: f64,
}

fn uniform_usize<R: Rng>(rng: &mut R, range: (usize, usize)) -> usize {
    rng.gen_range(range.0..=range.1)
}

fn random_time<R: Rng>(rng: &mut R, start: DateTime<Utc>, days: i64) -> DateTime<Utc> {
    start + Duration::seconds(rng.gen_range(0..days * 86_400))
}

fn night_time<R: Rng>(rng: &mut R, start: DateTime<Utc>, days: i64) -> DateTime<Utc> {
    // 20:00 .. 05:59 of some day.
    let day = rng.gen_range(0..days);
    let minute = rng.gen_range(0..10 * 60);
    start + Duration::days(day) + Duration::hours(20) + Duration::minutes(minute)
}

fn day_time<R: Rng>(rng: &mut R, start: DateTime<Utc>, days: i64) -> DateTime<Utc> {
    // 08:00 .. 17:59.
    let day = rng.gen_range(0..days);
    let minute = rng.gen_range(0..10 * 60);
    start + Duration::days(day) + Duration::hours(8) + Duration::minutes(minute)
}

/// Deterministic city for `cfg`.
pub fn generate_city(cfg: &SynthConfig) -> Result<SyntheticCity> {
    cfg.validate()?;
    let mut rng = rng::root(cfg.seed);
    let n = cfg.n_neighborhoods;
    let side = (n as f64).sqrt().ceil() as usize;
    let cell_km = cfg.extent_km / side as f64;
    let dlat = cell_km / KM_PER_DEGREE;
    let dlon = cell_km / (KM_PER_DEGREE * cfg.origin_lat.to_radians().cos());
    let span = (side.max(2) - 1) as f64;
    let cells: Vec<Cell> = (0..n)
        .map(|i| {
            let (row, col) = (i / side, i % side);
            Cell {
                row,
                col,
                x: col as f64 / span,
                y: row as f64 / span,
            }
        })
        .collect();

    let noise = Normal::new(0.0, cfg.ses_noise.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut records = Vec::with_capacity(n);
    let mut rings = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        let field = match cfg.ses_field {
            SesField::Linear => c.x,
            SesField::Radial => {
                let d = ((c.x - 0.5).powi(2) + (c.y - 0.5).powi(2)).sqrt();
                1.0 - d / std::f64::consts::FRAC_1_SQRT_2
            }
            SesField::Random => rng.gen::<f64>(),
        };
        let id = format!("N{i:03}");
        let lat0 = cfg.origin_lat + c.row as f64 * dlat;
        let lon0 = cfg.origin_lon + c.col as f64 * dlon;
        records.push(Neighborhood {
            id: id.clone(),
            lat: lat0 + dlat / 2.0,
            lon: lon0 + dlon / 2.0,
            population: rng.gen_range(cfg.population_range.0..=cfg.population_range.1).round(),
            ses: field + noise.sample(&mut rng),
        });
        rings.insert(
            id,
            vec![vec![
                [lon0, lat0],
                [lon0 + dlon, lat0],
                [lon0 + dlon, lat0 + dlat],
                [lon0, lat0 + dlat],
                [lon0, lat0],
            ]],
        );
    }
    let table = NeighborhoodTable::new(records)?;
    let geometry = Geometry::new(rings)?;
    let dist = centroid_distances(&table);
    let ses = table.ses();

    let customers: Vec<usize> = (0..n).map(|_| uniform_usize(&mut rng, cfg.customers_range)).collect();
    let stores: Vec<usize> = ses
        .iter()
        .map(|&s| {
            let expected = match cfg.store_law {
                StoreLaw::Uniform => cfg.stores_mean,
                StoreLaw::SesProportional { gamma } => cfg.stores_mean * (s.max(0.0) + 0.1).powf(gamma) / 0.6f64.powf(gamma),
            };
            let draw = Poisson::new(expected.max(1e-9)).map(|p| p.sample(&mut rng) as usize).unwrap_or(0);
            draw.max(1)
        })
        .collect();
    let users: Vec<usize> = (0..n).map(|_| uniform_usize(&mut rng, cfg.twitter_users_range)).collect();

    let (lo, hi) = ses.iter().fold((f64::MAX, f64::MIN), |(a, b), &s| (a.min(s), b.max(s)));
    let extremity = |s: f64| if hi > lo { (2.0 * (s - lo) / (hi - lo) - 1.0).abs() } else { 0.0 };
    let modifier = |i: usize, j: usize| {
        let d = ses[j] - ses[i];
        let focus = 1.0 - cfg.extreme_focus + cfg.extreme_focus * (extremity(ses[i]) + extremity(ses[j])) / 2.0;
        (-cfg.homophily * focus * d.abs()).exp() * (cfg.tilt * d).exp()
    };
    let intensities = |g: &GravityShape, origin: &[usize], dest: &[usize]| -> (Vec<f64>, f64) {
        let mut lambda = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                lambda[i * n + j] = g.c * (origin[i] as f64).powf(g.beta1) * (dest[j] as f64).powf(g.beta2)
                    / (dist.get(i, j) + g.epsilon).powf(g.alpha)
                    * modifier(i, j);
            }
        }
        let total: f64 = lambda.iter().sum();
        (lambda, total)
    };

    let start = Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap();
    let days = 90;

    // Purchases.
    let (lambda, total) = intensities(&cfg.purchase_gravity, &customers, &stores);
    let scale = cfg.purchase_events / total;
    let amount = LogNormal::new(cfg.amount_log_mean, cfg.amount_log_sd).map_err(|e| Error::Config(e.to_string()))?;
    let ids = table.ids();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ses[a].total_cmp(&ses[b]).then(a.cmp(&b)));
    let mut explore = vec![1.0; n];
    for (rank, &i) in order.iter().enumerate() {
        let q = rank as f64 / (n - 1) as f64;
        explore[i] = 1.0 - cfg.exploration_gradient * (1.0 - q);
    }
    let mut purchases = Vec::new();
    for i in 0..n {
        let mut origin_events: Vec<usize> = Vec::new();
        for j in 0..n {
            let count = Poisson::new(lambda[i * n + j] * scale)
                .map(|p| p.sample(&mut rng) as usize)
                .unwrap_or(0);
            origin_events.extend(std::iter::repeat_n(j, count));
        }
        origin_events.shuffle(&mut rng);
        // Round-robin over customers keeps per-customer counts balanced.
        for (k, &j) in origin_events.iter().enumerate() {
            let customer = k % customers[i];
            let store = if explore[i] >= 1.0 || rng.gen::<f64>() < explore[i] {
                rng.gen_range(0..stores[j])
            } else {
                (customer * 7 + i) % stores[j]
            };
            purchases.push(PurchaseEvent {
                customer_id: format!("c{i:03}_{customer:03}"),
                store_id: format!("s{j:03}_{store:03}"),
                timestamp: random_time(&mut rng, start, days),
                amount: (amount.sample(&mut rng) * 100.0).round() / 100.0,
                customer_home: ids[i].clone(),
                store_location: ids[j].clone(),
            });
        }
    }

    // Mentions.
    let (mlambda, mtotal) = intensities(&cfg.mention_gravity, &users, &users);
    let mscale = cfg.mention_events / mtotal;
    let mut mentions = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j && users[i] < 2 {
                continue;
            }
            let count = Poisson::new(mlambda[i * n + j] * mscale)
                .map(|p| p.sample(&mut rng) as usize)
                .unwrap_or(0);
            for _ in 0..count {
                let s = rng.gen_range(0..users[i]);
                let mut t = rng.gen_range(0..users[j]);
                while i == j && t == s {
                    t = rng.gen_range(0..users[j]);
                }
                mentions.push(MentionEvent {
                    source_user: format!("t{i:03}_{s:03}"),
                    target_user: format!("t{j:03}_{t:03}"),
                    timestamp: random_time(&mut rng, start, days),
                });
            }
        }
    }

    // Geo-located posts: most night posts at home, daytime posts anywhere.
    let mut posts = Vec::new();
    let point_in = |rng: &mut rand_chacha::ChaCha8Rng, cell: usize| {
        let c = &cells[cell];
        let lat0 = cfg.origin_lat + c.row as f64 * dlat;
        let lon0 = cfg.origin_lon + c.col as f64 * dlon;
        (
            lat0 + dlat * rng.gen_range(0.05..0.95),
            lon0 + dlon * rng.gen_range(0.05..0.95),
        )
    };
    for i in 0..n {
        for u in 0..users[i] {
            let user_id = format!("t{i:03}_{u:03}");
            let night = uniform_usize(&mut rng, cfg.night_posts_range);
            for _ in 0..night {
                let (lat, lon) = point_in(&mut rng, i);
                posts.push(GeoPost {
                    user_id: user_id.clone(),
                    lat,
                    lon,
                    timestamp: night_time(&mut rng, start, days),
                });
            }
            let day = uniform_usize(&mut rng, cfg.day_posts_range);
            for _ in 0..day {
                let cell = rng.gen_range(0..n);
                let (lat, lon) = point_in(&mut rng, cell);
                posts.push(GeoPost {
                    user_id: user_id.clone(),
                    lat,
                    lon,
                    timestamp: day_time(&mut rng, start, days),
                });
            }
        }
    }

    let as_f64 = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let params = |g: &GravityShape, scale: f64, channel| {
        GravityParams::new(g.c * scale, g.beta1, g.beta2, g.epsilon, g.alpha, channel)
    };
    let counts = PlantedCounts {
        customers: as_f64(&customers),
        stores: as_f64(&stores),
        twitter_users: as_f64(&users),
        purchase_gravity: params(&cfg.purchase_gravity, scale, Channel::Purchase)?,
        mention_gravity: params(&cfg.mention_gravity, mscale, Channel::Mention)?,
    };
    Ok(SyntheticCity {
        config: cfg.clone(),
        table,
        geometry,
        purchases,
        mentions,
        posts,
        counts,
    })
}

/// File names written by [`SyntheticCity::write_to`].
pub mod files {
    pub const NEIGHBORHOODS: &str = "neighborhoods.csv";
    pub const PURCHASES: &str = "purchases.csv";
    pub const MENTIONS: &str = "mentions.csv";
    pub const POSTS: &str = "posts.csv";
    pub const GEOMETRY: &str = "geometry.json";
    pub const CONFIG: &str = "synth_config.json";
    pub const TRUTH: &str = "planted_truth.json";
    pub const COUNTS: &str = "planted_counts.json";
}

impl SyntheticCity {
    pub fn purchases_csv(&self) -> String {
        purchases_to_csv(&self.purchases)
    }

    pub fn mentions_csv(&self) -> String {
        mentions_to_csv(&self.mentions)
    }

    pub fn posts_csv(&self) -> String {
        posts_to_csv(&self.posts)
    }

    /// Writes the city in the ingest formats plus its config and truth.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<String>> {
        let io = |path: &Path, e: std::io::Error| Error::Output {
            path: path.to_path_buf(),
            source: e,
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let outputs = [
            (files::NEIGHBORHOODS, self.table.to_csv()?),
            (files::PURCHASES, self.purchases_csv()),
            (files::MENTIONS, self.mentions_csv()),
            (files::POSTS, self.posts_csv()),
            (files::GEOMETRY, self.geometry.to_json()?),
            (files::CONFIG, serde_json::to_string_pretty(&self.config)?),
            (files::TRUTH, serde_json::to_string_pretty(&planted_truth(&self.config))?),
            (files::COUNTS, serde_json::to_string_pretty(&self.counts)?),
        ];
        let mut written = Vec::new();
        for (name, body) in outputs {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io(&path, e))?;
            written.push(name.to_string());
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, seed: u64) -> SynthConfig {
        let mut cfg = SynthConfig::preset(name, seed).unwrap();
        cfg.n_neighborhoods = 25;
        cfg.purchase_events = 5_000.0;
        cfg.mention_events = 2_000.0;
        cfg
    }

    #[test]
    fn same_seed_same_city() {
        let a = generate_city(&small("homophilous", 3)).unwrap();
        let b = generate_city(&small("homophilous", 3)).unwrap();
        assert_eq!(a.purchases_csv(), b.purchases_csv());
        assert_eq!(a.mentions_csv(), b.mentions_csv());
        assert_eq!(a.posts_csv(), b.posts_csv());
        let c = generate_city(&small("homophilous", 4)).unwrap();
        assert_ne!(a.purchases_csv(), c.purchases_csv());
    }

    #[test]
    fn event_volume_concentrates() {
        let cfg = small("neutral", 9);
        let city = generate_city(&cfg).unwrap();
        let n = city.purchases.len() as f64;
        assert!((n - cfg.purchase_events).abs() <= 3.0 * cfg.purchase_events.sqrt());
        let m = city.mentions.len() as f64;
        assert!((m - cfg.mention_events).abs() <= 3.0 * cfg.mention_events.sqrt());
    }

    #[test]
    fn no_self_mentions_and_posts_inside_geometry() {
        let city = generate_city(&small("tilted", 1)).unwrap();
        assert!(city.mentions.iter().all(|m| m.source_user != m.target_user));
        assert!(city.posts.iter().all(|p| city.geometry.locate(p.lon, p.lat).is_some()));
    }

    #[test]
    fn presets_and_truth() {
        assert!(SynthConfig::preset("bogus", 1).is_err());
        let truth = |n: &str| planted_truth(&SynthConfig::preset(n, 1).unwrap());
        assert!(matches!(truth("neutral").assortativity, Expectation::NearZero { .. }));
        assert!(matches!(truth("homophilous").assortativity, Expectation::Above { min } if min >= 0.5));
        assert!(matches!(truth("homophilous").bias, Expectation::WithinNull { .. }));
        assert!(matches!(truth("tilted").bias, Expectation::Above { min } if min == 0.0));
        assert!(Expectation::NearZero { tolerance: 0.1 }.holds(-0.05, None));
        assert!(!Expectation::Above { min: 0.0 }.holds(0.0, None));
        assert!(Expectation::WithinNull { sigmas: 3.0 }.holds(-0.05, Some(0.02)));
        assert!(!Expectation::WithinNull { sigmas: 3.0 }.holds(0.05, None));
    }

    #[test]
    fn invalid_config() {
        let mut cfg = small("neutral", 1);
        cfg.customers_range = (0, 3);
        assert!(generate_city(&cfg).is_err());
    }
}
