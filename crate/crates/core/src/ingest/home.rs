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

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::geometry::LocalizedPost;
use super::table::NeighborhoodTable;
use super::time::CityClock;
use super::{csv_error, open};
use crate::error::{Error, Result};

/// Half-open night window `[start, end)` in local hours; wraps past midnight
/// when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NightWindow {
    pub start: u32,
    pub end: u32,
}

impl Default for NightWindow {
    fn default() -> Self {
        NightWindow { start: 20, end: 6 }
    }
}

impl NightWindow {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start > 23 || end > 23 || start == end {
            return Err(Error::invalid(format!("invalid night window {start}..{end}")));
        }
        Ok(NightWindow { start, end })
    }

    pub fn contains(&self, hour: u32) -> bool {
        if self.start < self.end {
            (self.start..self.end).contains(&hour)
        } else {
            hour >= self.start || hour < self.end
        }
    }
}

/// Individual → home neighborhood.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomeAssignment {
    homes: BTreeMap<String, String>,
}

impl HomeAssignment {
    pub fn get(&self, user: &str) -> Option<&str> {
        self.homes.get(user).map(String::as_str)
    }

    pub fn insert(&mut self, user: impl Into<String>, home: impl Into<String>) {
        self.homes.insert(user.into(), home.into());
    }

    pub fn len(&self) -> usize {
        self.homes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.homes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.homes.iter().map(|(u, h)| (u.as_str(), h.as_str()))
    }

    /// Every assigned home must exist in the table.
    pub fn validate(&self, table: &NeighborhoodTable) -> Result<()> {
        match self.homes.iter().find(|(_, h)| !table.contains(h)) {
            Some((u, h)) => Err(Error::invalid(format!(
                "user {u:?} assigned to unknown neighborhood {h:?}"
            ))),
            None => Ok(()),
        }
    }

    /// Number of assigned individuals per neighborhood, in table order.
    pub fn counts(&self, table: &NeighborhoodTable) -> Vec<f64> {
        let mut counts = vec![0.0; table.len()];
        for h in self.homes.values() {
            if let Some(i) = table.index_of(h) {
                counts[i] += 1.0;
            }
        }
        counts
    }
}

impl HomeAssignment {
    /// `user_id,neighborhood_id` rows in user order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["user_id", "neighborhood_id"]).expect("in-memory write");
        for (u, h) in &self.homes {
            w.write_record([u, h]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

#[derive(Deserialize)]
struct HomeRow {
    user_id: String,
    neighborhood_id: String,
}

pub fn load_homes(path: &Path, table: &NeighborhoodTable) -> Result<HomeAssignment> {
    read_homes(open(path)?, &path.display().to_string(), table)
}

/// Reads a `user_id,neighborhood_id` table; homes must exist in `table` and
/// each user may appear once.
pub fn read_homes<R: Read>(reader: R, name: &str, table: &NeighborhoodTable) -> Result<HomeAssignment> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut homes = HomeAssignment::default();
    for row in rdr.deserialize::<HomeRow>() {
        let row = row.map_err(|e| csv_error(name, e))?;
        if homes.homes.contains_key(&row.user_id) {
            return Err(Error::DuplicateId(row.user_id));
        }
        homes.insert(row.user_id, row.neighborhood_id);
    }
    homes.validate(table)?;
    Ok(homes)
}

impl FromIterator<(String, String)> for HomeAssignment {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        HomeAssignment {
            homes: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomeInference {
    pub homes: HomeAssignment,
    /// Users with no night-time posts.
    pub unassigned: Vec<String>,
}

#[derive(Default)]
struct Tally {
    night: usize,
    total: usize,
}

/// Home = neighborhood with the most night posts; ties fall back to the
/// all-hours count, then to the smaller id.
pub fn infer_home(localized: &[LocalizedPost], clock: &CityClock, night: NightWindow) -> HomeInference {
    let mut per_user: BTreeMap<&str, HashMap<&str, Tally>> = BTreeMap::new();
    for p in localized {
        let t = per_user
            .entry(&p.user_id)
            .or_default()
            .entry(&p.neighborhood_id)
            .or_default();
        t.total += 1;
        if night.contains(clock.local_hour(&p.timestamp)) {
            t.night += 1;
        }
    }
    let mut out = HomeInference::default();
    for (user, tallies) in per_user {
        let best = tallies
            .iter()
            .filter(|(_, t)| t.night > 0)
            .max_by(|(ia, a), (ib, b)| {
                a.night
                    .cmp(&b.night)
                    .then(a.total.cmp(&b.total))
                    .then(ib.cmp(ia))
            });
        match best {
            Some((id, _)) => out.homes.insert(user, *id),
            None => out.unassigned.push(user.to_string()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn home_csv_round_trip() {
        let table = crate::ingest::read_neighborhoods("neighborhood_id,lat,lon,population,ses\nA,0,0,10,1\nB,0,1,10,2\n".as_bytes(), "t").unwrap();
        let homes: HomeAssignment = [("u2", "B"), ("u1", "A")].iter().map(|(u, h)| (u.to_string(), h.to_string())).collect();
        let csv = homes.to_csv();
        assert_eq!(csv, "user_id,neighborhood_id\nu1,A\nu2,B\n");
        assert_eq!(read_homes(csv.as_bytes(), "h", &table).unwrap(), homes);
        assert!(read_homes("user_id,neighborhood_id\nu1,Z\n".as_bytes(), "h", &table).is_err());
        assert!(matches!(
            read_homes("user_id,neighborhood_id\nu1,A\nu1,B\n".as_bytes(), "h", &table),
            Err(Error::DuplicateId(u)) if u == "u1"
        ));
    }
    use chrono::{TimeZone, Utc};

    fn at(user: &str, nb: &str, hour: u32) -> LocalizedPost {
        LocalizedPost {
            user_id: user.into(),
            neighborhood_id: nb.into(),
            timestamp: Utc.with_ymd_and_hms(2016, 3, 1, hour, 0, 0).unwrap(),
        }
    }

    fn posts(user: &str, nb: &str, hour: u32, n: usize) -> Vec<LocalizedPost> {
        (0..n).map(|_| at(user, nb, hour)).collect()
    }

    #[test]
    fn night_window_is_half_open() {
        let w = NightWindow::default();
        assert!(w.contains(20));
        assert!(w.contains(23));
        assert!(w.contains(0));
        assert!(w.contains(5));
        assert!(!w.contains(6));
        assert!(!w.contains(19));
        let day = NightWindow::new(9, 17).unwrap();
        assert!(day.contains(9) && !day.contains(17));
        assert!(NightWindow::new(5, 5).is_err());
    }

    #[test]
    fn majority_of_night_posts() {
        let mut p = posts("u", "A", 22, 5);
        p.extend(posts("u", "B", 23, 2));
        let r = infer_home(&p, &CityClock::default(), NightWindow::default());
        assert_eq!(r.homes.get("u"), Some("A"));
    }

    #[test]
    fn tie_breaks_on_total_then_id() {
        // 3 night posts each; B has 10 posts overall and A has 4.
        let mut p = posts("u", "A", 1, 3);
        p.extend(posts("u", "A", 12, 1));
        p.extend(posts("u", "B", 2, 3));
        p.extend(posts("u", "B", 13, 7));
        // Full tie for v: smaller id wins.
        p.extend(posts("v", "Z", 21, 2));
        p.extend(posts("v", "Y", 21, 2));
        let r = infer_home(&p, &CityClock::default(), NightWindow::default());
        assert_eq!(r.homes.get("u"), Some("B"));
        assert_eq!(r.homes.get("v"), Some("Y"));
    }

    #[test]
    fn daytime_only_users_unassigned() {
        let p = posts("d", "A", 12, 4);
        let r = infer_home(&p, &CityClock::default(), NightWindow::default());
        assert!(r.homes.is_empty());
        assert_eq!(r.unassigned, vec!["d"]);
    }

    #[test]
    fn night_uses_local_time() {
        // 19:30 UTC is 20:30 in Madrid (winter).
        let madrid = CityClock::from_name("Europe/Madrid").unwrap();
        let p = vec![LocalizedPost {
            user_id: "u".into(),
            neighborhood_id: "A".into(),
            timestamp: Utc.with_ymd_and_hms(2016, 1, 5, 19, 30, 0).unwrap(),
        }];
        assert_eq!(infer_home(&p, &madrid, NightWindow::default()).homes.len(), 1);
        assert!(infer_home(&p, &CityClock::default(), NightWindow::default()).homes.is_empty());
    }

    #[test]
    fn order_independent() {
        let mut p = posts("u", "A", 22, 3);
        p.extend(posts("u", "B", 22, 2));
        p.extend(posts("w", "C", 3, 1));
        let fwd = infer_home(&p, &CityClock::default(), NightWindow::default());
        p.reverse();
        let rev = infer_home(&p, &CityClock::default(), NightWindow::default());
        assert_eq!(fwd, rev);
    }
}
