//! Serializable run reports. Every float is finite, so a report survives a
//! JSON round trip byte for byte.

use atlas_core::arrangement::Arrangement;
use atlas_core::relax::{GraphVerdict, RelaxReport};
use atlas_core::sheet::ComponentTopology;
use atlas_core::stability::{StabilityReport, Verdict};
use atlas_core::varifold::{upper_bound, CrossingType, VarifoldStats};
use serde::{Deserialize, Serialize};

use crate::config::{Config, Resolved};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementSummary {
    pub curves_a: usize,
    pub curves_b: usize,
    pub crossings: usize,
    pub vertices: usize,
    pub edges: usize,
    /// All faces, the unbounded one included.
    pub faces: usize,
    pub bounded_faces: usize,
    pub fi_minus: usize,
    pub fo_minus: usize,
    /// `2^fi_minus + 2^fo_minus`, saturated at `u64::MAX`.
    pub upper_bound: u64,
    pub diameter: f64,
    pub all_convex: bool,
}

impl ArrangementSummary {
    pub fn of(arr: &Arrangement) -> Self {
        use atlas_core::arrangement::Family;
        ArrangementSummary {
            curves_a: arr.curves.count(Family::A),
            curves_b: arr.curves.count(Family::B),
            crossings: arr.crossings.len(),
            vertices: arr.vertices.len(),
            edges: arr.edges.len(),
            faces: arr.faces.len(),
            bounded_faces: arr.bounded_faces().count(),
            fi_minus: arr.fi_minus(),
            fo_minus: arr.fo_minus(),
            upper_bound: u64::try_from(upper_bound(arr)).unwrap_or(u64::MAX),
            diameter: arr.curves.diameter(),
            all_convex: arr.curves.all_convex(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Helicoidal,
    DoubleGraph,
}

impl From<CrossingType> for CrossingKind {
    fn from(t: CrossingType) -> Self {
        match t {
            CrossingType::Helicoidal => CrossingKind::Helicoidal,
            CrossingType::DoubleGraph => CrossingKind::DoubleGraph,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub v1: usize,
    pub v2: usize,
    pub e1: usize,
    pub e2: usize,
    pub f1: usize,
    pub f2: usize,
    pub h1: usize,
    pub h2: usize,
    pub s1: usize,
    pub s2: usize,
    pub chi: i64,
    pub area: f64,
    pub crossing_types: Vec<CrossingKind>,
}

impl From<&VarifoldStats> for Stats {
    fn from(s: &VarifoldStats) -> Self {
        Stats {
            v1: s.v1,
            v2: s.v2,
            e1: s.e1,
            e2: s.e2,
            f1: s.f1,
            f2: s.f2,
            h1: s.h1,
            h2: s.h2,
            s1: s.s1,
            s2: s.s2,
            chi: s.chi,
            area: s.area,
            crossing_types: s.crossing_types.iter().map(|&t| t.into()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub chi: i64,
    pub boundary_loops: usize,
    pub genus: usize,
}

impl From<&ComponentTopology> for Topology {
    fn from(c: &ComponentTopology) -> Self {
        Topology { chi: c.chi, boundary_loops: c.boundary_loops, genus: c.genus }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxSummary {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub stalled: bool,
    pub initial_area: f64,
    pub final_area: f64,
    pub area_monotone: bool,
}

impl From<&RelaxReport> for RelaxSummary {
    fn from(r: &RelaxReport) -> Self {
        RelaxSummary {
            iterations: r.iterations,
            residual: finite(r.residual),
            converged: r.converged,
            stalled: r.stalled,
            initial_area: r.area_history.first().copied().unwrap_or(0.0),
            final_area: r.area_history.last().copied().unwrap_or(0.0),
            area_monotone: r.area_monotone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Stable,
    Unstable,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub lambda1: f64,
    pub gauss_image_area: f64,
    pub stable_sufficient: bool,
    pub verdict: VerdictKind,
    pub margin: f64,
    pub iterations: usize,
}

impl From<&StabilityReport> for Stability {
    fn from(s: &StabilityReport) -> Self {
        Stability {
            lambda1: s.lambda1,
            gauss_image_area: s.gauss_image_area,
            stable_sufficient: s.stable_sufficient,
            verdict: match s.verdict {
                Verdict::Stable => VerdictKind::Stable,
                Verdict::Unstable => VerdictKind::Unstable,
                Verdict::Indeterminate => VerdictKind::Indeterminate,
            },
            margin: s.margin,
            iterations: s.iterations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub pass: bool,
    pub worst: f64,
    pub checked: usize,
}

impl From<&GraphVerdict> for Graph {
    fn from(g: &GraphVerdict) -> Self {
        Graph { pass: g.pass, worst: g.worst, checked: g.checked }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentBuild {
    pub vertices: usize,
    pub triangles: usize,
    /// `V − E + F` of the relaxed mesh.
    pub mesh_chi: i64,
    pub min_angle_deg: f64,
    pub relax: RelaxSummary,
    pub boundary_unchanged: bool,
    /// Absent when the Jacobi problem could not be solved; see `error`.
    pub stability: Option<Stability>,
    pub graph: Graph,
    pub obj: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelicoidFit {
    pub crossing: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub face: usize,
    pub min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub params: Resolved,
    pub components: Vec<ComponentBuild>,
    pub helicoid_fits: Vec<HelicoidFit>,
    pub separations: Vec<Separation>,
    pub total_area: f64,
    pub seconds: f64,
    /// Set when the surface could not be built at all.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarifoldEntry {
    pub index: usize,
    pub multiplicities: Vec<u8>,
    pub doubled_faces: Vec<usize>,
    pub stats: Stats,
    pub cw_chi: i64,
    pub components: Vec<Topology>,
    pub least_area: bool,
    pub build: Option<BuildReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub arrange_seconds: f64,
    pub enumerate_seconds: f64,
    pub build_seconds: f64,
    pub verify_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: Config,
    pub arrangement: ArrangementSummary,
    pub upper_bound: u64,
    /// Absent for `arrange`.
    pub varifolds: Option<Vec<VarifoldEntry>>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub notices: Vec<String>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, config: &Config, arr: &Arrangement) -> Self {
        let arrangement = ArrangementSummary::of(arr);
        RunReport {
            version: VERSION.into(),
            command: command.into(),
            config_hash: config.hash(),
            config: config.clone(),
            upper_bound: arrangement.upper_bound,
            arrangement,
            varifolds: None,
            checks: Vec::new(),
            warnings: Vec::new(),
            notices: Vec::new(),
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// JSON has no infinities; an unmeasurable quantity is reported as `f64::MAX`.
pub fn finite(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}
