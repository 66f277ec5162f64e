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

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Deserialize;

use super::home::HomeAssignment;
use super::table::NeighborhoodTable;
use super::time::CityClock;
use super::{csv_error, open, valid_coordinates};
use crate::error::{Error, Result};

/// A purchase row as read from disk. Home and store neighborhoods may be
/// absent when they are to be resolved through home inference.
#[derive(Debug, Clone, PartialEq)]
pub struct PurchaseRecord {
    pub customer_id: String,
    pub store_id: String,
    pub timestamp: DateTime<Utc>,
    pub amount: f64,
    pub customer_home: Option<String>,
    pub store_neighborhood: Option<String>,
}

/// A card transaction with both endpoints resolved to neighborhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct PurchaseEvent {
    pub customer_id: String,
    pub store_id: String,
    pub timestamp: DateTime<Utc>,
    pub amount: f64,
    pub customer_home: String,
    pub store_location: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentionEvent {
    pub source_user: String,
    pub target_user: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoPost {
    pub user_id: String,
    pub lat: f64,
    pub lon: f64,
    pub timestamp: DateTime<Utc>,
}

#[derive(Deserialize)]
struct PurchaseRow {
    customer_id: String,
    store_id: String,
    timestamp: String,
    amount: f64,
    #[serde(default)]
    customer_home: Option<String>,
    #[serde(default)]
    store_neighborhood: Option<String>,
}

#[derive(Deserialize)]
struct MentionRow {
    source_user: String,
    target_user: String,
    timestamp: String,
}

#[derive(Deserialize)]
struct PostRow {
    user_id: String,
    lat: f64,
    lon: f64,
    timestamp: String,
}

fn rows<R: Read, T: for<'de> Deserialize<'de>>(reader: R, name: &str) -> Result<Vec<(u64, T)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(name, e))?.clone();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(name, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = record.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            file: name.to_string(),
            line,
            message: e.to_string(),
        })?;
        out.push((line, row));
    }
    Ok(out)
}

fn parse_ts(clock: &CityClock, raw: &str, name: &str, line: u64) -> Result<DateTime<Utc>> {
    clock.parse(raw).map_err(|message| Error::Parse {
        file: name.to_string(),
        line,
        message,
    })
}

fn non_empty(v: Option<String>) -> Option<String> {
    v.filter(|s| !s.is_empty())
}

pub fn load_purchases(path: &Path, clock: &CityClock) -> Result<Vec<PurchaseRecord>> {
    read_purchases(open(path)?, &path.display().to_string(), clock)
}

pub fn read_purchases<R: Read>(
    reader: R,
    name: &str,
    clock: &CityClock,
) -> Result<Vec<PurchaseRecord>> {
    let mut out = Vec::new();
    for (line, row) in rows::<_, PurchaseRow>(reader, name)? {
        if !(row.amount.is_finite() && row.amount >= 0.0) {
            return Err(Error::Parse {
                file: name.to_string(),
                line,
                message: format!("negative or non-finite amount {}", row.amount),
            });
        }
        out.push(PurchaseRecord {
            timestamp: parse_ts(clock, &row.timestamp, name, line)?,
            customer_id: row.customer_id,
            store_id: row.store_id,
            amount: row.amount,
            customer_home: non_empty(row.customer_home),
            store_neighborhood: non_empty(row.store_neighborhood),
        });
    }
    Ok(out)
}

/// Outcome of resolving purchase records against the census table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PurchaseResolution {
    pub events: Vec<PurchaseEvent>,
    pub unknown_home: usize,
    pub unknown_store: usize,
}

/// Resolves each record's endpoints. A missing home column falls back to
/// `homes`; events whose home or store neighborhood cannot be resolved are
/// dropped and counted.
pub fn resolve_purchases(
    records: Vec<PurchaseRecord>,
    table: &NeighborhoodTable,
    homes: Option<&HomeAssignment>,
) -> PurchaseResolution {
    let mut res = PurchaseResolution::default();
    for r in records {
        let home = r
            .customer_home
            .or_else(|| homes.and_then(|h| h.get(&r.customer_id).map(str::to_string)))
            .filter(|h| table.contains(h));
        let Some(home) = home else {
            res.unknown_home += 1;
            continue;
        };
        let Some(store) = r.store_neighborhood.filter(|s| table.contains(s)) else {
            res.unknown_store += 1;
            continue;
        };
        res.events.push(PurchaseEvent {
            customer_id: r.customer_id,
            store_id: r.store_id,
            timestamp: r.timestamp,
            amount: r.amount,
            customer_home: home,
            store_location: store,
        });
    }
    res
}

/// Keeps the events of customers with at least `min_tx` events in total.
pub fn filter_active_customers(events: &[PurchaseEvent], min_tx: usize) -> Result<Vec<PurchaseEvent>> {
    if min_tx == 0 {
        return Err(Error::invalid("min_tx must be at least 1"));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in events {
        *counts.entry(e.customer_id.as_str()).or_default() += 1;
    }
    Ok(events
        .iter()
        .filter(|e| counts[e.customer_id.as_str()] >= min_tx)
        .cloned()
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionLoad {
    pub events: Vec<MentionEvent>,
    pub self_mentions_dropped: usize,
}

pub fn load_mentions(path: &Path, clock: &CityClock) -> Result<MentionLoad> {
    read_mentions(open(path)?, &path.display().to_string(), clock)
}

pub fn read_mentions<R: Read>(reader: R, name: &str, clock: &CityClock) -> Result<MentionLoad> {
    let mut out = MentionLoad::default();
    for (line, row) in rows::<_, MentionRow>(reader, name)? {
        let timestamp = parse_ts(clock, &row.timestamp, name, line)?;
        if row.source_user == row.target_user {
            out.self_mentions_dropped += 1;
            continue;
        }
        out.events.push(MentionEvent {
            source_user: row.source_user,
            target_user: row.target_user,
            timestamp,
        });
    }
    Ok(out)
}

pub fn load_posts(path: &Path, clock: &CityClock) -> Result<Vec<GeoPost>> {
    read_posts(open(path)?, &path.display().to_string(), clock)
}

pub fn read_posts<R: Read>(reader: R, name: &str, clock: &CityClock) -> Result<Vec<GeoPost>> {
    let mut out = Vec::new();
    for (line, row) in rows::<_, PostRow>(reader, name)? {
        if !valid_coordinates(row.lat, row.lon) {
            return Err(Error::Parse {
                file: name.to_string(),
                line,
                message: format!("invalid coordinates ({}, {})", row.lat, row.lon),
            });
        }
        out.push(GeoPost {
            timestamp: parse_ts(clock, &row.timestamp, name, line)?,
            user_id: row.user_id,
            lat: row.lat,
            lon: row.lon,
        });
    }
    Ok(out)
}

fn timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn to_csv<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Purchases in the ingest format, home and store columns filled.
pub fn purchases_to_csv(events: &[PurchaseEvent]) -> String {
    to_csv(
        ["customer_id", "store_id", "timestamp", "amount", "customer_home", "store_neighborhood"],
        events.iter().map(|e| {
            [
                e.customer_id.clone(),
                e.store_id.clone(),
                timestamp(&e.timestamp),
                e.amount.to_string(),
                e.customer_home.clone(),
                e.store_location.clone(),
            ]
        }),
    )
}

pub fn mentions_to_csv(events: &[MentionEvent]) -> String {
    to_csv(
        ["source_user", "target_user", "timestamp"],
        events
            .iter()
            .map(|m| [m.source_user.clone(), m.target_user.clone(), timestamp(&m.timestamp)]),
    )
}

pub fn posts_to_csv(posts: &[GeoPost]) -> String {
    to_csv(
        ["user_id", "lat", "lon", "timestamp"],
        posts
            .iter()
            .map(|p| [p.user_id.clone(), p.lat.to_string(), p.lon.to_string(), timestamp(&p.timestamp)]),
    )
}
