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

//! Input parsing, validation and home-location inference.

mod events;
mod geometry;
mod home;
mod table;
mod time;

pub use events::{
    filter_active_customers, load_mentions, mentions_to_csv, posts_to_csv, purchases_to_csv, load_posts, load_purchases, read_mentions,
    read_posts, read_purchases, resolve_purchases, GeoPost, MentionEvent, MentionLoad,
    PurchaseEvent, PurchaseRecord, PurchaseResolution,
};
pub use geometry::{
    assign_points_to_neighborhoods, load_geometry, Geometry, LocalizedPost, PointAssignment,
};
pub use home::{infer_home, load_homes, read_homes, HomeAssignment, HomeInference, NightWindow};
pub use table::{load_neighborhoods, read_neighborhoods, Neighborhood, NeighborhoodTable};
pub use time::{parse_timestamp, CityClock};

use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn csv_error(file: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    let message = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => err.to_string(),
    };
    Error::Parse {
        file: file.to_string(),
        line,
        message,
    }
}

pub(crate) fn valid_coordinates(lat: f64, lon: f64) -> bool {
    lat.is_finite() && lon.is_finite() && (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)
}
