//! The four commands as library functions. Per-varifold work runs in
//! parallel; results are always assembled in enumeration order.

use std::time::Instant;

use atlas_core::arrangement::{Arrangement, Family};
use atlas_core::geom::Point2;
use atlas_core::mesh::{assemble_mesh, TriMesh};
use atlas_core::relax::{graph_check, helicoid_fit, relax, sheet_separation};
use atlas_core::sheet::{build_complex, cw_euler_characteristic, genus_and_boundaries};
use atlas_core::stability::{gauss_image_area, verdict_for, JacobiProblem};
use atlas_core::varifold::{
    brute_force_enumerate, check_admissible, compute_stats, enumerate_varifolds, least_area_varifold, Varifold,
};
use rayon::prelude::*;

use crate::config::{Config, Resolved};
use crate::error::{AtlasError, Result};
use crate::report::{
    finite, BuildReport, Check, ComponentBuild, HelicoidFit, RelaxSummary, RunReport, Separation, VarifoldEntry,
    VerdictKind,
};

pub const THREADS_ENV: &str = "VARIFOLD_ATLAS_THREADS";
pub const LARGE_T_WARNING: &str = "asymptotic regime not guaranteed";

/// Sizes the global thread pool from `VARIFOLD_ATLAS_THREADS`, if set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| AtlasError::Config(format!("{THREADS_ENV}={v} is not a positive integer")))?;
    // Fails only if a pool already exists, which is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn arrange(cfg: &Config) -> Result<(Arrangement, RunReport)> {
    let start = Instant::now();
    let arr = cfg.arrangement()?;
    let mut report = RunReport::new("arrange", cfg, &arr);
    report.timing.arrange_seconds = start.elapsed().as_secs_f64();
    if let Some(t) = cfg.t {
        if t > 0.5 * report.arrangement.diameter {
            report.warnings.push(format!("t = {t} exceeds half the diameter: {LARGE_T_WARNING}"));
        }
    }
    Ok((arr, report))
}

/// Combinatorial entry for one varifold.
pub fn varifold_entry(arr: &Arrangement, v: &Varifold, index: usize) -> Result<VarifoldEntry> {
    let stats = compute_stats(arr, v).map_err(|e| AtlasError::Verification(format!("varifold {index}: {e}")))?;
    let complex = build_complex(arr, v)?;
    Ok(VarifoldEntry {
        index,
        multiplicities: v.multiplicities().to_vec(),
        doubled_faces: v.doubled_faces().collect(),
        stats: (&stats).into(),
        cw_chi: cw_euler_characteristic(&complex)?,
        components: genus_and_boundaries(&complex)?.iter().map(Into::into).collect(),
        least_area: false,
        build: None,
    })
}

/// Fills `report.varifolds` and returns the varifolds in the same order.
pub fn enumerate(arr: &Arrangement, report: &mut RunReport) -> Result<Vec<Varifold>> {
    let start = Instant::now();
    report.command = "enumerate".into();
    let vs = enumerate_varifolds(arr);
    let mut entries = vs.iter().enumerate().map(|(k, v)| varifold_entry(arr, v, k)).collect::<Result<Vec<_>>>()?;
    match least_area_varifold(arr, &vs) {
        Ok(k) => entries[k].least_area = true,
        Err(e) => report.checks.push(Check::new("least_area", false, e.to_string())),
    }
    report.varifolds = Some(entries);
    report.timing.enumerate_seconds = start.elapsed().as_secs_f64();
    Ok(vs)
}

/// A built surface: relaxed meshes, one per connected component.
#[derive(Clone, Debug)]
pub struct Built {
    pub meshes: Vec<TriMesh>,
    /// Per-component relaxation history as CSV.
    pub relax_csv: Vec<String>,
    pub report: BuildReport,
}

fn boundary_unchanged(before: &TriMesh, after: &TriMesh) -> bool {
    before.vertices.len() == after.vertices.len()
        && (0..before.vertices.len()).filter(|&v| before.is_boundary(v)).all(|v| {
            let (a, b) = (before.vertices[v], after.vertices[v]);
            a.x.to_bits() == b.x.to_bits() && a.y.to_bits() == b.y.to_bits() && a.z.to_bits() == b.z.to_bits()
        })
}

/// Meshes, relaxes and checks one varifold. Failures are recorded in the
/// report rather than returned.
pub fn build_varifold(cfg: &Config, arr: &Arrangement, v: &Varifold, p: &Resolved) -> Built {
    let start = Instant::now();
    let mut report = BuildReport {
        params: *p,
        components: Vec::new(),
        helicoid_fits: Vec::new(),
        separations: Vec::new(),
        total_area: 0.0,
        seconds: 0.0,
        error: None,
    };
    let complex = match build_complex(arr, v) {
        Ok(c) => c,
        Err(e) => {
            report.error = Some(e.to_string());
            return Built { meshes: Vec::new(), relax_csv: Vec::new(), report };
        }
    };
    let initial = match assemble_mesh(&complex, &p.mesh_params()) {
        Ok(m) => m,
        Err(e) => {
            report.error = Some(e.to_string());
            report.seconds = start.elapsed().as_secs_f64();
            return Built { meshes: Vec::new(), relax_csv: Vec::new(), report };
        }
    };
    let centers: Vec<Point2> = arr.crossings.iter().map(|x| x.position).collect();
    let tol = &cfg.tolerances;
    let mut meshes = Vec::with_capacity(initial.len());
    let mut relax_csv = Vec::with_capacity(initial.len());
    for mesh in initial {
        let before = mesh.clone();
        let (m, relax_summary, mut error) = match relax(mesh, &p.relax_params()) {
            Ok((m, r)) => {
                relax_csv.push(r.to_csv());
                (m, (&r).into(), None)
            }
            Err(e) => {
                let area = before.area();
                let r = RelaxSummary {
                    iterations: 0,
                    residual: f64::MAX,
                    converged: false,
                    stalled: false,
                    initial_area: area,
                    final_area: area,
                    area_monotone: true,
                };
                relax_csv.push(String::new());
                (before.clone(), r, Some(e.to_string()))
            }
        };
        let stability = JacobiProblem::jacobi(&m)
            .and_then(|jp| verdict_for(&jp, gauss_image_area(&m)?, tol.stability_margin, tol.eigen_tol));
        let stability = match stability {
            Ok(s) => Some((&s).into()),
            Err(e) => {
                error.get_or_insert(e.to_string());
                None
            }
        };
        for frame in &m.bands {
            let residual = helicoid_fit(&m, frame).map(finite).unwrap_or(f64::MAX);
            report.helicoid_fits.push(HelicoidFit { crossing: frame.crossing, residual });
        }
        report.total_area += m.area();
        report.components.push(ComponentBuild {
            vertices: m.vertices.len(),
            triangles: m.triangles.len(),
            mesh_chi: m.euler_characteristic(),
            min_angle_deg: m.min_angle_deg(),
            relax: relax_summary,
            boundary_unchanged: boundary_unchanged(&before, &m),
            stability,
            graph: (&graph_check(&m, &centers, p.rho, tol.graph_x)).into(),
            obj: None,
            error,
        });
        meshes.push(m);
    }
    report.helicoid_fits.sort_by_key(|f| f.crossing);
    for face in v.doubled_faces() {
        if let Some(min) = sheet_separation(&meshes, &complex, face) {
            report.separations.push(Separation { face, min: finite(min) });
        }
    }
    report.seconds = start.elapsed().as_secs_f64();
    Built { meshes, relax_csv, report }
}

/// Builds the selected varifolds in parallel, attaching each report to its entry.
pub fn build(
    cfg: &Config,
    arr: &Arrangement,
    vs: &[Varifold],
    selection: &[usize],
    report: &mut RunReport,
) -> Result<Vec<(usize, Built)>> {
    let start = Instant::now();
    report.command = "build".into();
    let p = cfg.resolve(arr)?;
    for &k in selection {
        if k >= vs.len() {
            return Err(AtlasError::Config(format!("varifold {k} does not exist ({} enumerated)", vs.len())));
        }
    }
    let built: Vec<(usize, Built)> = selection.par_iter().map(|&k| (k, build_varifold(cfg, arr, &vs[k], &p))).collect();
    if let Some(entries) = report.varifolds.as_mut() {
        for (k, b) in &built {
            entries[*k].build = Some(b.report.clone());
        }
    }
    report.timing.build_seconds = start.elapsed().as_secs_f64();
    Ok(built)
}

fn fmt_list(v: &[String]) -> String {
    if v.is_empty() {
        "ok".into()
    } else {
        v.join("; ")
    }
}

/// Every cross-check; the outcome is in `report.checks`.
pub fn verify(cfg: &Config, arr: &Arrangement, vs: &[Varifold], report: &mut RunReport) {
    let start = Instant::now();
    report.command = "verify".into();
    let mut checks = Vec::new();

    match brute_force_enumerate(arr) {
        Ok(oracle) => {
            let same = oracle == vs;
            checks.push(Check::new(
                "oracle",
                same,
                format!("enumerated {}, exhaustive search found {}", vs.len(), oracle.len()),
            ));
        }
        Err(e) => report.notices.push(format!("enumeration oracle skipped: {e}")),
    }

    let entries = report.varifolds.clone().unwrap_or_default();
    let bound = report.upper_bound;
    checks.push(Check::new("bound", entries.len() as u64 <= bound, format!("{} varifolds, bound {bound}", entries.len())));

    let mut chi_problems = Vec::new();
    for e in &entries {
        let comp: i64 = e.components.iter().map(|c| c.chi).sum();
        if e.stats.chi != e.cw_chi || e.stats.chi != comp {
            chi_problems.push(format!(
                "varifold {}: formula {} vs complex {} vs components {comp}",
                e.index, e.stats.chi, e.cw_chi
            ));
        }
        if let Some(b) = &e.build {
            if b.error.is_none() {
                let mesh: i64 = b.components.iter().map(|c| c.mesh_chi).sum();
                if mesh != e.stats.chi {
                    chi_problems.push(format!("varifold {}: formula {} vs mesh {mesh}", e.index, e.stats.chi));
                }
            }
        }
    }
    checks.push(Check::new("euler", chi_problems.is_empty(), fmt_list(&chi_problems)));

    let flat: Vec<&VarifoldEntry> = entries.iter().filter(|e| e.least_area).collect();
    let mut least = vec![];
    if flat.len() != 1 {
        least.push(format!("{} least-area entries", flat.len()));
    } else if let Some(b0) = flat[0].build.as_ref().filter(|b| b.error.is_none()) {
        for e in entries.iter().filter(|e| e.index != flat[0].index) {
            if let Some(b) = e.build.as_ref().filter(|b| b.error.is_none()) {
                if b.total_area <= b0.total_area {
                    least.push(format!(
                        "varifold {} relaxed area {:.6} ≤ {:.6}",
                        e.index, b.total_area, b0.total_area
                    ));
                }
            }
        }
    }
    checks.push(Check::new("least_area", least.is_empty(), fmt_list(&least)));

    let built: Vec<(&VarifoldEntry, &BuildReport)> =
        entries.iter().filter_map(|e| e.build.as_ref().map(|b| (e, b))).collect();
    if !built.is_empty() {
        let p = built[0].1.params;
        let shape_gated = p.t <= cfg.tolerances.shape_t_rel * p.diameter * (1.0 + 1e-12);
        let (mut relax_bad, mut stab_bad, mut gauss_bad, mut graph_bad, mut fit_bad, mut sep_bad) =
            (vec![], vec![], vec![], vec![], vec![], vec![]);
        for (e, b) in &built {
            let k = e.index;
            if let Some(err) = &b.error {
                relax_bad.push(format!("varifold {k}: {err}"));
                continue;
            }
            for (c, comp) in b.components.iter().enumerate() {
                let r = &comp.relax;
                if let Some(err) = &comp.error {
                    relax_bad.push(format!("varifold {k} component {c}: {err}"));
                }
                if !r.converged || !r.area_monotone || !comp.boundary_unchanged {
                    relax_bad.push(format!(
                        "varifold {k} component {c}: converged={} monotone={} boundary_fixed={} residual={:.3e}",
                        r.converged, r.area_monotone, comp.boundary_unchanged, r.residual
                    ));
                }
                match &comp.stability {
                    Some(s) if s.verdict == VerdictKind::Stable => {}
                    Some(s) => stab_bad.push(format!("varifold {k} component {c}: {:?}, λ₁ = {:.4e}", s.verdict, s.lambda1)),
                    None => stab_bad.push(format!("varifold {k} component {c}: no verdict")),
                }
                if let Some(s) = &comp.stability {
                    if e.stats.v1 <= 2 && s.gauss_image_area >= 2.0 * std::f64::consts::PI {
                        gauss_bad.push(format!("varifold {k} component {c}: {:.4}", s.gauss_image_area));
                    }
                }
                if !comp.graph.pass {
                    graph_bad.push(format!("varifold {k} component {c}: min |n_z| {:.4}", comp.graph.worst));
                }
            }
            for f in &b.helicoid_fits {
                if f.residual > cfg.tolerances.helicoid_fit {
                    fit_bad.push(format!("varifold {k} crossing {}: {:.4}", f.crossing, f.residual));
                }
            }
            for s in &b.separations {
                if !(s.min > 0.0) {
                    sep_bad.push(format!("varifold {k} face {}: {:.3e}", s.face, s.min));
                }
            }
        }
        checks.push(Check::new("relaxation", relax_bad.is_empty(), fmt_list(&relax_bad)));
        checks.push(Check::new("stability", stab_bad.is_empty(), fmt_list(&stab_bad)));
        checks.push(Check::new("gauss_image", gauss_bad.is_empty(), fmt_list(&gauss_bad)));
        if shape_gated {
            checks.push(Check::new("graph", graph_bad.is_empty(), fmt_list(&graph_bad)));
            checks.push(Check::new("helicoid_fit", fit_bad.is_empty(), fmt_list(&fit_bad)));
        } else {
            report.notices.push(format!(
                "t = {} is above {} × diameter; graph and helicoid checks are informational (graph: {}; helicoid: {})",
                p.t,
                cfg.tolerances.shape_t_rel,
                fmt_list(&graph_bad),
                fmt_list(&fit_bad)
            ));
        }
        checks.push(Check::new("separation", sep_bad.is_empty(), fmt_list(&sep_bad)));
    }

    let pair = arr.curves.count(Family::A) == 1 && arr.curves.count(Family::B) == 1;
    if arr.curves.all_convex() && pair {
        let bad: Vec<String> = entries
            .iter()
            .flat_map(|e| e.components.iter().filter(|c| c.genus != 0).map(move |c| format!("varifold {}: genus {}", e.index, c.genus)))
            .collect();
        checks.push(Check::new("convex_genus", bad.is_empty(), fmt_list(&bad)));
    }

    report.checks.retain(|c| c.name != "least_area");
    report.checks.extend(checks);
    report.timing.verify_seconds = start.elapsed().as_secs_f64();
}

/// Re-derives the combinatorial fields of a saved report against `arr`.
pub fn replay(arr: &Arrangement, saved: &RunReport) -> Vec<Check> {
    let mut problems = Vec::new();
    for e in saved.varifolds.iter().flatten() {
        let v = Varifold::new(e.multiplicities.clone());
        if let Err(err) = check_admissible(arr, &v) {
            problems.push(format!("varifold {}: {err}", e.index));
            continue;
        }
        match compute_stats(arr, &v) {
            Ok(s) => {
                let comp: i64 = e.components.iter().map(|c| c.chi).sum();
                if s.chi != e.stats.chi || s.chi != e.cw_chi || s.chi != comp {
                    problems.push(format!(
                        "chi mismatch for varifold {}: recomputed {}, report says {} (complex {}, components {comp})",
                        e.index, s.chi, e.stats.chi, e.cw_chi
                    ));
                }
            }
            Err(err) => problems.push(format!("varifold {}: {err}", e.index)),
        }
    }
    let n = saved.varifolds.as_ref().map_or(0, Vec::len);
    let count = enumerate_varifolds(arr).len();
    if n != count {
        problems.push(format!("report lists {n} varifolds, enumeration finds {count}"));
    }
    vec![Check::new("replay", problems.is_empty(), fmt_list(&problems))]
}
