//! Areas of operation, ground users, and the candidate UAV lattice.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    self, ChannelParams, CoverageGeometry, LinkThresholds, REFERENCE_ALTITUDE, REFERENCE_GROUND_RADIUS,
};
use crate::error::{Error, Result};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Geometry agreement required between a stored scenario and its recomputation.
const GEOMETRY_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    User,
    TerrestrialBs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundNode {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateLocation {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

/// Where a scenario's altitude and ground radius come from. The backhaul
/// radius is always derived from the backhaul threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GeometrySource {
    /// Altitude and ground radius taken as given.
    Preset { altitude: f64, ground_radius: f64 },
    /// Ground radius solved from the access threshold at a fixed altitude.
    FixedAltitude { altitude: f64 },
    /// Altitude chosen to maximise ground coverage within a range.
    Optimized { h_min: f64, h_max: f64 },
}

impl GeometrySource {
    /// The suburban reference deployment: 1500 m altitude, 3300 m radius.
    pub fn reference() -> Self {
        GeometrySource::Preset { altitude: REFERENCE_ALTITUDE, ground_radius: REFERENCE_GROUND_RADIUS }
    }

    pub fn resolve(&self, params: &ChannelParams, thresholds: &LinkThresholds) -> Result<CoverageGeometry> {
        params.validate()?;
        thresholds.validate()?;
        let geometry = match *self {
            GeometrySource::Preset { altitude, ground_radius } => CoverageGeometry {
                altitude,
                ground_radius,
                backhaul_radius: channel::backhaul_radius(params, thresholds.backhaul_snr_min),
            },
            GeometrySource::FixedAltitude { altitude } => channel::coverage_radii(params, thresholds, altitude)?,
            GeometrySource::Optimized { h_min, h_max } => {
                channel::optimal_altitude(params, thresholds, h_min, h_max)?
            }
        };
        geometry.validate()?;
        Ok(geometry)
    }
}

impl Default for GeometrySource {
    fn default() -> Self {
        Self::reference()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub area_width: f64,
    pub area_height: f64,
    pub rng_seed: u64,
    pub channel: ChannelParams,
    pub thresholds: LinkThresholds,
    pub geometry_source: GeometrySource,
    pub geometry: CoverageGeometry,
    pub nodes: Vec<GroundNode>,
    pub candidates: Vec<CandidateLocation>,
}

#[derive(Serialize)]
struct ScenarioDocRef<'a> {
    schema_version: u32,
    #[serde(flatten)]
    scenario: &'a Scenario,
}

#[derive(Deserialize)]
struct ScenarioDoc {
    schema_version: u32,
    #[serde(flatten)]
    scenario: Scenario,
}

impl Scenario {
    pub fn n_users(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::User).count()
    }

    /// Checks every structural and physical invariant.
    pub fn validate(&self) -> Result<()> {
        if !(self.area_width > 0.0 && self.area_height > 0.0) {
            return Err(Error::Invariant("area extents must be positive".into()));
        }
        let expected = self.geometry_source.resolve(&self.channel, &self.thresholds)?;
        let close = |a: f64, b: f64| (a - b).abs() <= GEOMETRY_TOLERANCE;
        if !(close(expected.altitude, self.geometry.altitude)
            && close(expected.ground_radius, self.geometry.ground_radius)
            && close(expected.backhaul_radius, self.geometry.backhaul_radius))
        {
            return Err(Error::Invariant(format!(
                "geometry {:?} disagrees with channel and thresholds (expected {:?})",
                self.geometry, expected
            )));
        }

        let mut seen = vec![false; self.nodes.len()];
        for node in &self.nodes {
            if !(0.0..=self.area_width).contains(&node.x) || !(0.0..=self.area_height).contains(&node.y) {
                return Err(Error::Invariant(format!("ground node {} lies outside the area", node.id)));
            }
            match seen.get_mut(node.id) {
                Some(slot) if !*slot => *slot = true,
                _ => {
                    return Err(Error::Invariant(format!(
                        "ground node id {} is duplicated or outside 0..{}",
                        node.id,
                        self.nodes.len()
                    )))
                }
            }
        }

        for (idx, cand) in self.candidates.iter().enumerate() {
            if cand.id != idx {
                return Err(Error::Invariant(format!("candidate at position {idx} has id {}", cand.id)));
            }
            if !(0.0..=self.area_width).contains(&cand.x) || !(0.0..=self.area_height).contains(&cand.y) {
                return Err(Error::Invariant(format!("candidate {} lies outside the area", cand.id)));
            }
            if !close(cand.h, self.geometry.altitude) {
                return Err(Error::Invariant(format!(
                    "candidate {} altitude {} differs from common altitude {}",
                    cand.id, cand.h, self.geometry.altitude
                )));
            }
        }
        if !self.nodes.is_empty() && self.candidates.is_empty() {
            return Err(Error::Invariant("ground nodes present but no candidate locations".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ScenarioDocRef { schema_version: SCENARIO_SCHEMA_VERSION, scenario: self };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Invariant("missing schema_version".into()))?;
        if found != u64::from(SCENARIO_SCHEMA_VERSION) {
            return Err(Error::VersionMismatch { found: found as u32, expected: SCENARIO_SCHEMA_VERSION });
        }
        let doc: ScenarioDoc = serde_json::from_value(value)?;
        debug_assert_eq!(doc.schema_version, SCENARIO_SCHEMA_VERSION);
        doc.scenario.validate()?;
        Ok(doc.scenario)
    }
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let mut text = scenario.to_json()?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    Scenario::from_json(&fs::read_to_string(path)?)
}

/// Evenly spaced lattice coordinates along one axis, centred in `[0, extent]`.
fn lattice_axis(extent: f64, spacing: f64) -> Vec<f64> {
    let n = (extent / spacing).floor() as usize + 1;
    let offset = (extent - (n - 1) as f64 * spacing) / 2.0;
    (0..n).map(|i| offset + i as f64 * spacing).collect()
}

/// Candidate lattice with cells of diagonal `ground_radius`.
pub fn generate_grid(area_width: f64, area_height: f64, ground_radius: f64, altitude: f64) -> Vec<CandidateLocation> {
    generate_grid_with_spacing(area_width, area_height, ground_radius / SQRT_2, altitude)
}

pub fn generate_grid_with_spacing(
    area_width: f64,
    area_height: f64,
    spacing: f64,
    altitude: f64,
) -> Vec<CandidateLocation> {
    let xs = lattice_axis(area_width, spacing);
    let ys = lattice_axis(area_height, spacing);
    ys.iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .enumerate()
        .map(|(id, (x, y))| CandidateLocation { id, x, y, h: altitude })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredUsers {
    pub nodes: Vec<GroundNode>,
    pub cluster_sizes: Vec<usize>,
}

/// Users dropped in uniform disks around uniformly placed cluster centres.
pub fn generate_clustered_users(
    area_width: f64,
    area_height: f64,
    n_users: usize,
    cluster_size_range: (usize, usize),
    cluster_radius: f64,
    seed: u64,
) -> Result<ClusteredUsers> {
    let (lo, hi) = cluster_size_range;
    if lo == 0 || lo > hi {
        return Err(Error::InvalidParameter(format!("bad cluster size range [{lo}, {hi}]")));
    }
    if !(cluster_radius > 0.0) {
        return Err(Error::InvalidParameter("cluster radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(n_users);
    let mut cluster_sizes = Vec::new();
    while nodes.len() < n_users {
        let size = rng.gen_range(lo..=hi).min(n_users - nodes.len());
        let cx = rng.gen::<f64>() * area_width;
        let cy = rng.gen::<f64>() * area_height;
        for _ in 0..size {
            let r = cluster_radius * rng.gen::<f64>().sqrt();
            let theta = 2.0 * PI * rng.gen::<f64>();
            nodes.push(GroundNode {
                id: nodes.len(),
                x: (cx + r * theta.cos()).clamp(0.0, area_width),
                y: (cy + r * theta.sin()).clamp(0.0, area_height),
                kind: NodeKind::User,
            });
        }
        cluster_sizes.push(size);
    }
    Ok(ClusteredUsers { nodes, cluster_sizes })
}

/// Recipe for generating scenarios; sweeps vary one field of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub n_users: usize,
    pub cluster_size_min: usize,
    pub cluster_size_max: usize,
    pub cluster_radius: f64,
    /// Adds a terrestrial base station at the area centre.
    pub include_base_station: bool,
    /// Overrides the default lattice spacing of `ground_radius / sqrt(2)`.
    pub lattice_spacing: Option<f64>,
    pub channel: ChannelParams,
    pub thresholds: LinkThresholds,
    pub geometry: GeometrySource,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_width: 50_000.0,
            area_height: 50_000.0,
            n_users: 200,
            cluster_size_min: 10,
            cluster_size_max: 15,
            cluster_radius: 1000.0,
            include_base_station: true,
            lattice_spacing: None,
            channel: ChannelParams::suburban(),
            thresholds: LinkThresholds::default(),
            geometry: GeometrySource::reference(),
        }
    }
}

impl ScenarioConfig {
    pub fn generate(&self, seed: u64) -> Result<Scenario> {
        if !(self.area_width > 0.0 && self.area_height > 0.0) {
            return Err(Error::InvalidParameter("area extents must be positive".into()));
        }
        let geometry = self.geometry.resolve(&self.channel, &self.thresholds)?;
        let spacing = self.lattice_spacing.unwrap_or(geometry.ground_radius / SQRT_2);
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter("lattice spacing must be positive".into()));
        }
        let candidates = generate_grid_with_spacing(self.area_width, self.area_height, spacing, geometry.altitude);
        let mut nodes = generate_clustered_users(
            self.area_width,
            self.area_height,
            self.n_users,
            (self.cluster_size_min, self.cluster_size_max),
            self.cluster_radius,
            seed,
        )?
        .nodes;
        if self.include_base_station {
            nodes.push(GroundNode {
                id: nodes.len(),
                x: self.area_width / 2.0,
                y: self.area_height / 2.0,
                kind: NodeKind::TerrestrialBs,
            });
        }
        let scenario = Scenario {
            area_width: self.area_width,
            area_height: self.area_height,
            rng_seed: seed,
            channel: self.channel,
            thresholds: self.thresholds,
            geometry_source: self.geometry,
            geometry,
            nodes,
            candidates,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_for_nine_km_square() {
        let grid = generate_grid(9000.0, 9000.0, 3300.0, 1500.0);
        assert_eq!(grid.len(), 16);
        let s = 3300.0 / SQRT_2;
        assert!((s - 2333.452).abs() < 1e-3);
        assert!((grid[0].x - 999.8).abs() < 0.05, "{}", grid[0].x);
        assert!((grid[0].y - 999.8).abs() < 0.05);
        assert!(grid.iter().all(|c| c.h == 1500.0));
        assert!(grid.iter().enumerate().all(|(i, c)| c.id == i));
    }

    #[test]
    fn grid_is_rotation_symmetric() {
        let (w, r) = (23_000.0, 3300.0);
        let grid = generate_grid(w, w, r, 1500.0);
        let c = w / 2.0;
        for p in &grid {
            // 90° rotation about the centre: (x, y) -> (c - (y - c), c + (x - c)).
            let (rx, ry) = (2.0 * c - p.y, p.x);
            assert!(grid.iter().any(|q| (q.x - rx).abs() < 1e-6 && (q.y - ry).abs() < 1e-6));
        }
    }

    #[test]
    fn narrow_area_gets_centred_point() {
        let grid = generate_grid(1000.0, 1500.0, 3300.0, 1500.0);
        assert_eq!(grid.len(), 1);
        assert_eq!((grid[0].x, grid[0].y), (500.0, 750.0));
    }

    #[test]
    fn lattice_points_cover_the_area() {
        let (w, h, r) = (17_300.0, 11_100.0, 3300.0);
        let grid = generate_grid(w, h, r, 1500.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let (x, y) = (rng.gen::<f64>() * w, rng.gen::<f64>() * h);
            let nearest = grid.iter().map(|c| (c.x - x).hypot(c.y - y)).fold(f64::INFINITY, f64::min);
            assert!(nearest <= r / 2.0 + 1e-9, "point ({x}, {y}) is {nearest} from the lattice");
        }
    }

    #[test]
    fn no_users_no_clusters() {
        let u = generate_clustered_users(1000.0, 1000.0, 0, (10, 15), 100.0, 1).unwrap();
        assert!(u.nodes.is_empty() && u.cluster_sizes.is_empty());
    }

    #[test]
    fn cluster_count_bounds() {
        for seed in 0..1000 {
            let u = generate_clustered_users(50_000.0, 50_000.0, 200, (10, 15), 1000.0, seed).unwrap();
            let k = u.cluster_sizes.len();
            assert!((14..=20).contains(&k), "seed {seed}: {k} clusters");
            assert_eq!(u.cluster_sizes.iter().sum::<usize>(), 200);
        }
    }

    #[test]
    fn users_are_deterministic_and_in_bounds() {
        let a = generate_clustered_users(5000.0, 3000.0, 120, (10, 15), 1000.0, 42).unwrap();
        let b = generate_clustered_users(5000.0, 3000.0, 120, (10, 15), 1000.0, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.nodes.iter().all(|n| (0.0..=5000.0).contains(&n.x) && (0.0..=3000.0).contains(&n.y)));
    }

    #[test]
    fn generated_scenario_round_trips() {
        let cfg = ScenarioConfig { area_width: 12_000.0, area_height: 9000.0, n_users: 33, ..Default::default() };
        let s = cfg.generate(99).unwrap();
        assert_eq!(s.nodes.last().unwrap().kind, NodeKind::TerrestrialBs);
        let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn load_rejects_out_of_bounds_node() {
        let mut s = ScenarioConfig { n_users: 5, area_width: 9000.0, area_height: 9000.0, ..Default::default() }
            .generate(1)
            .unwrap();
        s.nodes[3].x = 9500.0;
        let err = Scenario::from_json(&s.to_json().unwrap()).unwrap_err();
        assert!(err.to_string().contains("ground node 3"), "{err}");
    }

    #[test]
    fn load_rejects_missing_seed_and_wrong_version() {
        let s = ScenarioConfig { n_users: 3, area_width: 5000.0, area_height: 5000.0, ..Default::default() }
            .generate(1)
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("rng_seed");
        assert!(Scenario::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        v["schema_version"] = 7.into();
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(Error::VersionMismatch { found: 7, .. })));
    }

    #[test]
    fn load_rejects_inconsistent_geometry() {
        let mut s = ScenarioConfig { n_users: 3, area_width: 5000.0, area_height: 5000.0, ..Default::default() }
            .generate(1)
            .unwrap();
        s.geometry.backhaul_radius += 50.0;
        assert!(matches!(Scenario::from_json(&s.to_json().unwrap()), Err(Error::Invariant(_))));
    }

    #[test]
    fn fixed_altitude_geometry_is_solved() {
        let cfg = ScenarioConfig {
            n_users: 10,
            area_width: 20_000.0,
            area_height: 20_000.0,
            geometry: GeometrySource::FixedAltitude { altitude: 1500.0 },
            ..Default::default()
        };
        let s = cfg.generate(5).unwrap();
        assert!(s.geometry.ground_radius > 3300.0);
        assert!(s.validate().is_ok());
    }
}
