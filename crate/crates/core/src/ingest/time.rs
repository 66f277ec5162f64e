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

use chrono::{DateTime, NaiveDateTime, TimeZone, Timelike, Utc};
use chrono_tz::Tz;

use crate::error::{Error, Result};

/// Local clock of the study city. Timestamps without an offset are read in
/// this zone and night windows are evaluated in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CityClock {
    tz: Tz,
}

impl Default for CityClock {
    fn default() -> Self {
        CityClock { tz: Tz::UTC }
    }
}

impl CityClock {
    pub fn new(tz: Tz) -> Self {
        CityClock { tz }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        name.parse::<Tz>()
            .map(CityClock::new)
            .map_err(|_| Error::Config(format!("unknown time zone {name:?}")))
    }

    pub fn name(&self) -> &'static str {
        self.tz.name()
    }

    pub fn local_hour(&self, ts: &DateTime<Utc>) -> u32 {
        ts.with_timezone(&self.tz).hour()
    }

    pub fn parse(&self, raw: &str) -> Result<DateTime<Utc>, String> {
        parse_timestamp(raw, self.tz)
    }
}

const NAIVE_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

/// Parses an ISO-8601 timestamp. Values carrying an offset are converted to
/// UTC directly; naive values are interpreted in `tz`.
pub fn parse_timestamp(raw: &str, tz: Tz) -> Result<DateTime<Utc>, String> {
    let raw = raw.trim();
    if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        return Ok(ts.with_timezone(&Utc));
    }
    for fmt in NAIVE_FORMATS {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return tz
                .from_local_datetime(&naive)
                .earliest()
                .map(|ts| ts.with_timezone(&Utc))
                .ok_or_else(|| format!("local time {raw:?} does not exist in {}", tz.name()));
        }
    }
    Err(format!("unparseable timestamp {raw:?}"))
}
