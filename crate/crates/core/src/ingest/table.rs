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

use serde::{Deserialize, Serialize};

use super::{csv_error, open, valid_coordinates};
use crate::error::{Error, Result};

/// One census district.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    #[serde(rename = "neighborhood_id")]
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub population: f64,
    pub ses: f64,
}

/// Validated census frame, stored in canonical (sorted id) order.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodTable {
    records: Vec<Neighborhood>,
    index: HashMap<String, usize>,
}

impl NeighborhoodTable {
    pub fn new(mut records: Vec<Neighborhood>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::NoNeighborhoods);
        }
        records.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId(w[0].id.clone()));
        }
        for r in &records {
            if !valid_coordinates(r.lat, r.lon) {
                return Err(Error::invalid(format!(
                    "neighborhood {:?} has invalid centroid ({}, {})",
                    r.id, r.lat, r.lon
                )));
            }
            if !(r.population.is_finite() && r.population >= 0.0) {
                return Err(Error::invalid(format!(
                    "neighborhood {:?} has invalid population {}",
                    r.id, r.population
                )));
            }
            if !r.ses.is_finite() {
                return Err(Error::invalid(format!("neighborhood {:?} has non-finite ses", r.id)));
            }
        }
        if !records.iter().any(|r| r.population > 0.0) {
            return Err(Error::NoPopulation);
        }
        let index = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        Ok(NeighborhoodTable { records, index })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Neighborhood] {
        &self.records
    }

    pub fn get(&self, i: usize) -> &Neighborhood {
        &self.records[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.id.clone()).collect()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.population).collect()
    }

    pub fn ses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ses).collect()
    }

    /// Copy of the table with SES values replaced, in canonical order.
    pub fn with_ses(&self, ses: &[f64]) -> Result<Self> {
        if ses.len() != self.len() {
            return Err(Error::invalid("ses vector length mismatch"));
        }
        let records = self
            .records
            .iter()
            .zip(ses)
            .map(|(r, &s)| Neighborhood { ses: s, ..r.clone() })
            .collect();
        NeighborhoodTable::new(records)
    }

    /// Normalized CSV rendering; identical tables render identical bytes.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::invalid(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn load_neighborhoods(path: &Path) -> Result<NeighborhoodTable> {
    read_neighborhoods(open(path)?, &path.display().to_string())
}

pub fn read_neighborhoods<R: Read>(reader: R, name: &str) -> Result<NeighborhoodTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut records = Vec::new();
    for row in rdr.deserialize::<Neighborhood>() {
        records.push(row.map_err(|e| csv_error(name, e))?);
    }
    NeighborhoodTable::new(records)
}
