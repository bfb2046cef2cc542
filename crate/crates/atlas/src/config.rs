//! JSON run configuration.
//!
//! ```json
//! {
//!   "curves_a": [{"circle": {"center": [0, 0], "r": 1, "samples": 256}}],
//!   "curves_b": [{"points": [[0.5, -1], [2, -1], [2, 1], [0.5, 1]]}],
//!   "t": 0.06,
//!   "mesh": {"h": 0.05},
//!   "tolerances": {"theta_min": 0.001}
//! }
//! ```
//!
//! Everything except the curve lists has a default; `t` is only needed by
//! the commands that build surfaces.

use std::path::Path;

use atlas_core::arrangement::{Arrangement, CurveSet, CurveShape, Tolerances};
use atlas_core::geom::p2;
use atlas_core::mesh::MeshParams;
use atlas_core::relax::RelaxParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AtlasError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveInput {
    Points(Vec<[f64; 2]>),
    Circle { center: [f64; 2], r: f64, samples: usize },
    Ellipse {
        center: [f64; 2],
        rx: f64,
        ry: f64,
        #[serde(default)]
        rotation: f64,
        samples: usize,
    },
}

impl CurveInput {
    pub fn shape(&self) -> CurveShape {
        match self {
            CurveInput::Points(pts) => CurveShape::Polyline(pts.iter().map(|&[x, y]| p2(x, y)).collect()),
            &CurveInput::Circle { center: [x, y], r, samples } => CurveShape::Circle { center: p2(x, y), r, samples },
            &CurveInput::Ellipse { center: [x, y], rx, ry, rotation, samples } => {
                CurveShape::Ellipse { center: p2(x, y), rx, ry, rotation, samples }
            }
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        match self {
            CurveInput::Points(pts) if pts.len() < 3 => Err(format!("polyline with {} points", pts.len())),
            CurveInput::Circle { r, samples, .. } if !(*r > 0.0) || *samples < 3 => {
                Err("circle needs r > 0 and at least 3 samples".into())
            }
            CurveInput::Ellipse { rx, ry, samples, .. } if !(*rx > 0.0 && *ry > 0.0) || *samples < 3 => {
                Err("ellipse needs positive radii and at least 3 samples".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Target edge length; defaults to `diameter / 60`.
    pub h: Option<f64>,
    /// Cutout radius around crossings; defaults to `max(3h, 5t)` clamped to fit.
    pub rho: Option<f64>,
    /// Mean-curvature tolerance; defaults to `1e-3 / diameter`.
    pub tol_h: Option<f64>,
    pub max_iters: usize,
    /// Per-step displacement cap; defaults to `h / 4`.
    pub max_step: Option<f64>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { h: None, rho: None, tol_h: None, max_iters: 20_000, max_step: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub theta_min: f64,
    pub eps_rel: f64,
    pub max_crossings: usize,
    pub eigen_tol: f64,
    /// Spectral margin; defaults to `10 · eigen_tol · ‖pencil‖`.
    pub stability_margin: Option<f64>,
    /// Graph-check threshold on `|n_z|`.
    pub graph_x: f64,
    /// Largest accepted helicoid misfit, relative to `t`.
    pub helicoid_fit: f64,
    /// Shape checks gate verification only while `t ≤ shape_t_rel · diameter`.
    pub shape_t_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        ToleranceConfig {
            theta_min: t.theta_min,
            eps_rel: t.eps_rel,
            max_crossings: t.max_crossings,
            eigen_tol: atlas_core::stability::DEFAULT_EIGEN_TOL,
            stability_margin: None,
            graph_x: 0.9,
            helicoid_fit: 0.1,
            shape_t_rel: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub curves_a: Vec<CurveInput>,
    #[serde(default)]
    pub curves_b: Vec<CurveInput>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

/// Parameters after defaults have been filled in from the geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub t: f64,
    pub h: f64,
    pub rho: f64,
    pub tol_h: f64,
    pub max_iters: usize,
    pub max_step: f64,
    pub diameter: f64,
}

impl Resolved {
    pub fn mesh_params(&self) -> MeshParams {
        MeshParams { t: self.t, h: self.h, rho: Some(self.rho) }
    }

    pub fn relax_params(&self) -> RelaxParams {
        RelaxParams { tol_h: self.tol_h, max_iters: self.max_iters, max_step: self.max_step }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| AtlasError::Config(e.to_string()))?;
        for (k, c) in cfg.curves_a.iter().chain(&cfg.curves_b).enumerate() {
            c.check().map_err(|e| AtlasError::Config(format!("curve {k}: {e}")))?;
        }
        if let Some(t) = cfg.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(AtlasError::Config(format!("t = {t} must be positive")));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AtlasError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            theta_min: self.tolerances.theta_min,
            eps_rel: self.tolerances.eps_rel,
            max_crossings: self.tolerances.max_crossings,
        }
    }

    pub fn curve_set(&self) -> Result<CurveSet> {
        let shapes = |v: &[CurveInput]| v.iter().map(CurveInput::shape).collect::<Vec<_>>();
        Ok(CurveSet::from_shapes(&shapes(&self.curves_a), &shapes(&self.curves_b), self.tolerances())?)
    }

    pub fn arrangement(&self) -> Result<Arrangement> {
        Ok(Arrangement::from_curves(self.curve_set()?)?)
    }

    /// Fills in mesh and relaxation defaults; needs `t`.
    pub fn resolve(&self, arr: &Arrangement) -> Result<Resolved> {
        let t = self.t.ok_or_else(|| AtlasError::Config("`t` is required to build surfaces".into()))?;
        let diameter = arr.curves.diameter();
        let h = self.mesh.h.unwrap_or(diameter / 60.0);
        let mut mp = MeshParams::new(t, h);
        mp.rho = self.mesh.rho;
        let mp = mp.resolve(arr)?;
        let relax = RelaxParams::for_scale(diameter, h);
        Ok(Resolved {
            t,
            h,
            rho: mp.rho(),
            tol_h: self.mesh.tol_h.unwrap_or(relax.tol_h),
            max_iters: self.mesh.max_iters,
            max_step: self.mesh.max_step.unwrap_or(relax.max_step),
            diameter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let c = Config::from_json(r#"{"curves_a": [{"points": [[0,0],[1,0],[0,1]]}]}"#).unwrap();
        assert_eq!(c.curves_b.len(), 0);
        assert_eq!(c.mesh, MeshConfig::default());
        assert_eq!(c.curve_set().unwrap().curves().len(), 1);
    }

    #[test]
    fn rejects_unknown_fields_and_short_polylines() {
        assert!(Config::from_json(r#"{"curves_a": [], "colour": 1}"#).is_err());
        assert!(Config::from_json(r#"{"curves_a": [{"points": [[0,0],[1,0]]}]}"#).is_err());
        assert!(Config::from_json(r#"{"curves_a": [{"circle": {"center": [0,0], "r": 1}}]}"#).is_err());
    }

    #[test]
    fn echo_is_stable() {
        let c = Config::from_json(
            r#"{"curves_a": [{"ellipse": {"center": [0,0], "rx": 2, "ry": 1, "samples": 64}}], "t": 0.1}"#,
        )
        .unwrap();
        let again = Config::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        assert_eq!(c.hash().len(), 64);
    }
}
