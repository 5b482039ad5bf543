//! JSON instance files: points, radius, erasures, sources, destinations.
//!
//! ```json
//! {
//!   "points": [[0.12, 0.78], [0.4, 0.4]],
//!   "seed": 42,
//!   "radius": 0.5,
//!   "erasures": {"constant": 0.5},
//!   "sources": [0],
//!   "destinations": [1]
//! }
//! ```
//!
//! `erasures` is one of `{"constant": γ}`, `{"per_link": [[u, v, γ], ...]}`
//! or `{"distribution": {"name": "uniform", "params": [a, b], "seed": s}}`.
//! `seed` at the top level is provenance only (the seed the points were
//! sampled with, when applicable).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cutset::{ErasureModel, SdSpec};
use crate::error::Error;
use crate::geometry::{build_rgg, GeoGraph, Point, PointSet};
use crate::Result;

/// A fully specified problem instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub radius: f64,
    pub erasures: ErasureModel,
    pub sources: Vec<u32>,
    pub destinations: Vec<u32>,
}

impl Instance {
    /// Validates the instance and builds the graph, erasure model and
    /// source/destination spec. The erasure model is materialized so that
    /// distribution specs become explicit per-link maps.
    pub fn build(&self) -> Result<(GeoGraph, ErasureModel, SdSpec)> {
        let points = PointSet::from_points(self.points.clone())?;
        let graph = build_rgg(&points, self.radius)?;
        let model = self.erasures.materialize(&graph)?;
        let sd = SdSpec::new(
            self.sources.clone(),
            self.destinations.clone(),
            graph.n(),
        )?;
        Ok((graph, model, sd))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Instance::from_json(&s)
    }
}
