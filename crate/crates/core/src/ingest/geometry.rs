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

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::events::GeoPost;
use super::open;
use crate::error::{Error, Result};

type Ring = Vec<[f64; 2]>;

#[derive(Deserialize)]
#[serde(untagged)]
enum RingsJson {
    Single(Ring),
    Many(Vec<Ring>),
}

#[derive(Debug, Clone, PartialEq)]
struct Polygon {
    rings: Vec<Ring>,
    bbox: [f64; 4],
}

/// Neighborhood polygons, coordinates in (lon, lat) order.
///
/// A neighborhood may carry several rings. Containment uses the even-odd
/// rule over all of its rings, so nested rings act as holes and disjoint
/// rings as separate parts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Geometry {
    polygons: BTreeMap<String, Polygon>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Location {
    Inside,
    Boundary,
    Outside,
}

impl Geometry {
    pub fn new(rings: BTreeMap<String, Vec<Vec<[f64; 2]>>>) -> Result<Self> {
        let mut polygons = BTreeMap::new();
        for (id, rings) in rings {
            let malformed = |reason: String| Error::MalformedPolygon {
                id: id.clone(),
                reason,
            };
            if rings.is_empty() {
                return Err(malformed("no rings".into()));
            }
            let mut bbox = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
            for ring in &rings {
                validate_ring(ring).map_err(malformed)?;
                for p in ring {
                    bbox[0] = bbox[0].min(p[0]);
                    bbox[1] = bbox[1].min(p[1]);
                    bbox[2] = bbox[2].max(p[0]);
                    bbox[3] = bbox[3].max(p[1]);
                }
            }
            polygons.insert(id, Polygon { rings, bbox });
        }
        Ok(Geometry { polygons })
    }

    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let raw: BTreeMap<String, RingsJson> = serde_json::from_reader(reader)?;
        let rings = raw
            .into_iter()
            .map(|(id, r)| {
                let rings = match r {
                    RingsJson::Single(ring) => vec![ring],
                    RingsJson::Many(rings) => rings,
                };
                (id, rings)
            })
            .collect();
        Geometry::new(rings)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw: BTreeMap<&str, &Vec<Ring>> = self
            .polygons
            .iter()
            .map(|(id, p)| (id.as_str(), &p.rings))
            .collect();
        Ok(serde_json::to_string(&raw)?)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.polygons.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    /// Neighborhood containing `(lon, lat)`. Points on a shared border go to
    /// the lexicographically smallest id among the touching polygons.
    pub fn locate(&self, lon: f64, lat: f64) -> Option<&str> {
        // BTreeMap iterates ids in ascending order, so the first hit wins.
        self.polygons
            .iter()
            .find(|(_, poly)| {
                let b = poly.bbox;
                lon >= b[0]
                    && lon <= b[2]
                    && lat >= b[1]
                    && lat <= b[3]
                    && locate_in(poly, lon, lat) != Location::Outside
            })
            .map(|(id, _)| id.as_str())
    }
}

pub fn load_geometry(path: &Path) -> Result<Geometry> {
    Geometry::from_json(open(path)?)
}

fn validate_ring(ring: &Ring) -> std::result::Result<(), String> {
    if ring.len() < 4 {
        return Err(format!("ring has {} points, need at least 4", ring.len()));
    }
    if ring.iter().flatten().any(|c| !c.is_finite()) {
        return Err("non-finite coordinate".into());
    }
    if ring.first() != ring.last() {
        return Err("ring is not closed".into());
    }
    let m = ring.len() - 1;
    for i in 0..m {
        for j in i + 1..m {
            // Adjacent edges share a vertex.
            if j == i + 1 || (i == 0 && j == m - 1) {
                continue;
            }
            if segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]) {
                return Err(format!("ring self-intersects at edges {i} and {j}"));
            }
        }
    }
    Ok(())
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let scale = (b[0] - a[0]).abs().max((b[1] - a[1]).abs()).max(1.0);
    orient(a, b, p).abs() <= 1e-12 * scale * scale
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(q1, q2, p1) || on_segment(q1, q2, p2) || on_segment(p1, p2, q1) || on_segment(p1, p2, q2)
}

fn locate_in(poly: &Polygon, x: f64, y: f64) -> Location {
    let mut inside = false;
    for ring in &poly.rings {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            if on_segment(a, b, [x, y]) {
                return Location::Boundary;
            }
            if (a[1] > y) != (b[1] > y) {
                let cross = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x < cross {
                    inside = !inside;
                }
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// A post placed in a neighborhood.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalizedPost {
    pub user_id: String,
    pub neighborhood_id: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointAssignment {
    pub located: Vec<LocalizedPost>,
    pub dropped: usize,
}

pub fn assign_points_to_neighborhoods(posts: &[GeoPost], geometry: &Geometry) -> PointAssignment {
    let mut out = PointAssignment::default();
    for p in posts {
        match geometry.locate(p.lon, p.lat) {
            Some(id) => out.located.push(LocalizedPost {
                user_id: p.user_id.clone(),
                neighborhood_id: id.to_string(),
                timestamp: p.timestamp,
            }),
            None => out.dropped += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn square(x0: f64, y0: f64, side: f64) -> Vec<[f64; 2]> {
        vec![
            [x0, y0],
            [x0 + side, y0],
            [x0 + side, y0 + side],
            [x0, y0 + side],
            [x0, y0],
        ]
    }

    fn two_squares() -> Geometry {
        let mut m = BTreeMap::new();
        m.insert("B".to_string(), vec![square(0.0, 0.0, 1.0)]);
        m.insert("A".to_string(), vec![square(1.0, 0.0, 1.0)]);
        Geometry::new(m).unwrap()
    }

    fn post(lat: f64, lon: f64) -> GeoPost {
        GeoPost {
            user_id: "u".into(),
            lat,
            lon,
            timestamp: Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap(),
        }
    }

    #[test]
    fn interior_outside_and_border() {
        let g = two_squares();
        let res = assign_points_to_neighborhoods(
            &[post(0.5, 0.5), post(0.5, 1.5), post(5.0, 5.0), post(0.5, 1.0)],
            &g,
        );
        let ids: Vec<_> = res.located.iter().map(|p| p.neighborhood_id.as_str()).collect();
        // (lat 0.5, lon 1.0) lies on the shared edge of B=[0,1] and A=[1,2].
        assert_eq!(ids, vec!["B", "A", "A"]);
        assert_eq!(res.dropped, 1);
    }

    #[test]
    fn nested_ring_is_a_hole() {
        let mut m = BTreeMap::new();
        m.insert("D".to_string(), vec![square(0.0, 0.0, 4.0), square(1.0, 1.0, 2.0)]);
        let g = Geometry::new(m).unwrap();
        assert_eq!(g.locate(0.5, 0.5), Some("D"));
        assert_eq!(g.locate(2.0, 2.0), None);
    }

    #[test]
    fn malformed_polygons() {
        let open = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        for ring in [open, bowtie, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]] {
            let mut m = BTreeMap::new();
            m.insert("X".to_string(), vec![ring]);
            match Geometry::new(m) {
                Err(Error::MalformedPolygon { id, .. }) => assert_eq!(id, "X"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn json_single_and_multi_ring() {
        let json = r#"{"N1": [[0,0],[1,0],[1,1],[0,1],[0,0]],
                       "N2": [[[2,0],[3,0],[3,1],[2,1],[2,0]]]}"#;
        let g = Geometry::from_json(json.as_bytes()).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.locate(2.5, 0.5), Some("N2"));
        let again = Geometry::from_json(g.to_json().unwrap().as_bytes()).unwrap();
        assert_eq!(g, again);
    }
}
