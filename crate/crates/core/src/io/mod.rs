//! Configuration, CSV and SVG output, and the drivers behind each CLI subcommand.

pub mod config;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::{
    assemble_constants, domination, estimate_radius, majorant_sequence, norm_sequence, run_majorants, BoundOptions,
    GeometryConstants, RecursionConstants, Seeds, RADIUS_WINDOW,
};
use crate::cell::CellProblem;
use crate::direct::{convergence_study, DirectProblem};
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::fem::CellOperators;
use crate::hierarchy::{run_hierarchy, SeriesSolution};
use crate::mesh::CellGeometry;
use crate::spectrum::{Backend, ContrastSign, DirichletSpectrum};

pub use config::{parse_config, InclusionKind, RunConfig};
pub use svg::emit_band_svg;

/// CLI subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Mesh,
    Spectrum,
    Dispersion,
    Series,
    Bounds,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::Spectrum => "spectrum",
            Command::Dispersion => "dispersion",
            Command::Series => "series",
            Command::Bounds => "bounds",
            Command::Validate => "validate",
        }
    }
}

/// Files written by a command and a one-line summary per run.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(format!("{}: {e}", path.display())))
}

/// Writes `rows` under `header` as comma-separated values.
pub fn write_csv<R: AsRef<[String]>>(path: &Path, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(r.as_ref()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub const SPECTRUM_HEADER: [&str; 4] = ["j", "nu_j", "mean_j", "class"];
pub const DISPERSION_HEADER: [&str; 3] = ["zeta0", "tau_sq", "band_index"];
pub const SERIES_HEADER: [&str; 5] = ["m", "zeta_m", "norm_Pc", "norm_P", "norm_tilde"];
pub const BOUNDS_HEADER: [&str; 9] = ["m", "a_hat", "b_hat", "c_hat", "d_hat", "p_bar", "p", "s", "domination_ok"];
pub const VALIDATE_HEADER: [&str; 7] = ["eta", "M", "zeta_series", "zeta_direct", "abs_err", "field_err", "residual"];
pub const FIELD_HEADER: [&str; 2] = ["node_index", "value"];

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Geometry and operators for a configuration.
pub fn build_geometry(cfg: &RunConfig) -> Result<(CellGeometry, CellOperators)> {
    let geom = CellGeometry::build(cfg.inclusion()?, cfg.h)?;
    let ops = CellOperators::new(&geom);
    Ok((geom, ops))
}

pub fn build_spectrum(cfg: &RunConfig, geom: &CellGeometry, ops: &CellOperators) -> Result<DirichletSpectrum> {
    DirichletSpectrum::compute(geom, ops, cfg.n_modes, cfg.backend, cfg.mean_threshold)
}

/// FEM spectrum for the bounds when the configured backend is not FEM.
fn fem_spectrum(cfg: &RunConfig, geom: &CellGeometry, ops: &CellOperators, spec: &DirichletSpectrum) -> Result<Option<DirichletSpectrum>> {
    if spec.backend == Backend::Fem {
        return Ok(None);
    }
    DirichletSpectrum::compute(geom, ops, cfg.n_modes, Backend::Fem, cfg.mean_threshold).map(Some)
}

/// `ζ₀` on the configured branch at `τ`, refined to the discrete relation.
pub fn branch_zeta0(cell: &CellProblem<'_>, rel: &DispersionRelation<'_>, branch: usize, tau: f64) -> Result<f64> {
    let z = rel.invert_branch(branch, tau)?;
    rel.discrete_zeta0(cell, branch, tau, z)
}

fn suffix(cfg: &RunConfig, stem: &str, k: usize) -> String {
    match &cfg.tau_sweep {
        Some(_) => format!("{stem}_tau{k}.csv"),
        None => format!("{stem}.csv"),
    }
}

/// Runs `cmd` and writes its outputs plus `effective_config.json` into `out`.
pub fn run_command(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Report> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let echo = out.join("effective_config.json");
    fs::write(&echo, cfg.echo() + "\n").map_err(|e| io_err(&echo, e))?;
    let mut report = Report {
        files: vec![echo],
        summary: Vec::new(),
    };
    let (geom, ops) = build_geometry(cfg)?;
    if cmd == Command::Mesh {
        let path = out.join("mesh.txt");
        fs::write(&path, geom.export_text()).map_err(|e| io_err(&path, e))?;
        report.files.push(path);
        report.summary.push(format!(
            "mesh: {} nodes, {} triangles, {} dofs, h_max {:.4}",
            geom.nodes.len(),
            geom.triangles.len(),
            geom.n_dofs(),
            geom.max_edge()
        ));
        return Ok(report);
    }
    let spec = build_spectrum(cfg, &geom, &ops)?;
    if cmd == Command::Spectrum {
        let rows: Vec<Vec<String>> = spec
            .modes
            .iter()
            .enumerate()
            .map(|(j, m)| vec![(j + 1).to_string(), num(m.nu), num(m.mean), m.class.label().to_string()])
            .collect();
        let path = out.join("spectrum.csv");
        write_csv(&path, &SPECTRUM_HEADER, &rows)?;
        report.files.push(path);
        report.summary.push(format!(
            "spectrum: {} modes, {} nonzero-mean, nu_1 = {:.6}",
            spec.len(),
            spec.nonzero_mean().count(),
            spec.modes[0].nu
        ));
        return Ok(report);
    }
    let cell = CellProblem::new(&geom, &ops, cfg.direction())?;
    let rel = DispersionRelation::new(&cell, &spec, cfg.sign)?;
    if cmd == Command::Dispersion {
        let zeta_max = cfg.zeta_max.unwrap_or(spec.modes[0].nu);
        let samples = rel.sample_bands(cfg.samples_per_band, zeta_max)?;
        let rows: Vec<Vec<String>> = samples
            .iter()
            .map(|s| vec![num(s.zeta0), num(s.tau_sq), s.band.to_string()])
            .collect();
        let path = out.join("dispersion.csv");
        write_csv(&path, &DISPERSION_HEADER, &rows)?;
        report.files.push(path);
        if cfg.svg {
            let path = out.join("band.svg");
            let svg = emit_band_svg(&samples, &rel.asymptotes(), &spec.mu_prime())?;
            fs::write(&path, svg).map_err(|e| io_err(&path, e))?;
            report.files.push(path);
        }
        report.summary.push(format!(
            "dispersion: E = {:.6}, {} samples over {} bands",
            rel.effective,
            samples.len(),
            samples.iter().map(|s| s.band).max().map_or(0, |b| b + 1)
        ));
        return Ok(report);
    }

    let bound_spec = match cmd {
        Command::Bounds => fem_spectrum(cfg, &geom, &ops, &spec)?,
        _ => None,
    };
    let geometry = match cmd {
        Command::Bounds => Some(GeometryConstants::compute(&cell)?),
        _ => None,
    };
    for (k, tau) in cfg.taus().into_iter().enumerate() {
        let zeta0 = branch_zeta0(&cell, &rel, cfg.branch, tau)?;
        let series = run_hierarchy(&cell, Some(&spec), cfg.sign, tau, zeta0, cfg.order)?;
        match cmd {
            Command::Series => write_series(cfg, out, k, &series, &mut report)?,
            Command::Bounds => {
                let bspec = bound_spec.as_ref().unwrap_or(&spec);
                let brel = DispersionRelation::with_effective(bspec, cfg.sign, cfg.direction(), rel.effective);
                write_bounds(cfg, out, k, &cell, &brel, &series, geometry.as_ref().unwrap(), &mut report)?
            }
            Command::Validate => {
                let problem = DirectProblem::new(&cell, cfg.sign, tau)?;
                let rows = convergence_study(&problem, &series, &cfg.orders_to_validate(), &cfg.etas)?;
                let csv_rows: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| {
                        vec![
                            num(r.eta),
                            r.order.to_string(),
                            num(r.zeta_series),
                            num(r.zeta_direct),
                            num(r.abs_err),
                            num(r.field_err),
                            num(r.residual),
                        ]
                    })
                    .collect();
                let path = out.join(suffix(cfg, "validate", k));
                write_csv(&path, &VALIDATE_HEADER, &csv_rows)?;
                report.files.push(path);
                let worst = rows
                    .iter()
                    .filter(|r| r.order == cfg.order.min(series.order))
                    .map(|r| r.abs_err)
                    .fold(0.0, f64::max);
                if let Ok(fit) = estimate_radius(&norm_sequence(&series), RADIUS_WINDOW) {
                    let limit = tau * fit.radius;
                    for &eta in cfg.etas.iter().filter(|e| **e > limit) {
                        report
                            .summary
                            .push(format!("warning: eta = {eta} exceeds the estimated radius {limit:.4e}"));
                    }
                }
                report.summary.push(format!(
                    "validate: tau = {tau}, zeta0 = {:.10}, max |zeta_series - zeta_direct| at M = {}: {worst:.3e}",
                    series.zeta0, cfg.order
                ));
            }
            _ => unreachable!(),
        }
    }
    Ok(report)
}

fn write_series(cfg: &RunConfig, out: &Path, k: usize, series: &SeriesSolution, report: &mut Report) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..=series.order)
        .map(|m| {
            let n = series.norms[m];
            vec![m.to_string(), num(series.zeta[m]), num(n.p_bar), num(n.p), num(n.p_tilde)]
        })
        .collect();
    let path = out.join(suffix(cfg, "series", k));
    write_csv(&path, &SERIES_HEADER, &rows)?;
    report.files.push(path);
    if cfg.dump_fields {
        for (m, psi) in series.psi.iter().enumerate() {
            let rows: Vec<Vec<String>> = psi.iter().enumerate().map(|(i, v)| vec![i.to_string(), num(*v)]).collect();
            let stem = match cfg.tau_sweep {
                Some(_) => format!("psi_{m}_tau{k}.csv"),
                None => format!("psi_{m}.csv"),
            };
            let path = out.join(stem);
            write_csv(&path, &FIELD_HEADER, &rows)?;
            report.files.push(path);
        }
    }
    report.summary.push(format!(
        "series: tau = {}, zeta0 = {:.10}, M = {}, max defect {:.2e}, odd ratio {:.2e}",
        series.tau,
        series.zeta0,
        series.order,
        series.max_defect(),
        series.odd_ratio()
    ));
    Ok(())
}

/// Constants and radius estimates of one `bounds` run.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsSummary {
    pub tau: f64,
    pub zeta0: f64,
    pub k: f64,
    pub k_tau: f64,
    pub b_tau: f64,
    pub omega: f64,
    pub a: f64,
    pub determinant: f64,
    pub radius_norms: Option<f64>,
    pub radius_majorants: Option<f64>,
    pub dominated: bool,
}

#[allow(clippy::too_many_arguments)]
fn write_bounds(
    cfg: &RunConfig,
    out: &Path,
    k: usize,
    cell: &CellProblem<'_>,
    rel: &DispersionRelation<'_>,
    series: &SeriesSolution,
    geometry: &GeometryConstants,
    report: &mut Report,
) -> Result<()> {
    let mut opts = BoundOptions::for_spectrum(rel.spectrum);
    if let Some(e) = cfg.epsilon {
        opts.epsilon = e;
    }
    opts.ceiling = cfg.ceiling;
    let state = assemble_constants(cell, rel, cfg.branch, series, geometry, &opts)?;
    let rc = RecursionConstants::from(&state);
    let seeds = Seeds::from_series(series);
    let maj = run_majorants(&rc, &seeds, series.order);
    let dom = domination(series, &maj);
    let rows: Vec<Vec<String>> = dom
        .iter()
        .map(|d| {
            let m = d.m;
            let n = series.norms[m];
            vec![
                m.to_string(),
                num(maj.a[m]),
                num(maj.b[m]),
                num(maj.c[m]),
                num(maj.d[m]),
                num(n.p_bar),
                num(n.p),
                num(n.s),
                d.ok().to_string(),
            ]
        })
        .collect();
    let path = out.join(suffix(cfg, "bounds", k));
    write_csv(&path, &BOUNDS_HEADER, &rows)?;
    report.files.push(path);
    let summary = BoundsSummary {
        tau: series.tau,
        zeta0: series.zeta0,
        k: state.k,
        k_tau: state.k_tau,
        b_tau: state.b_tau,
        omega: geometry.poincare.omega,
        a: geometry.extension.a,
        determinant: crate::bounds::jacobian_determinant(rc, &seeds),
        radius_norms: estimate_radius(&norm_sequence(series), RADIUS_WINDOW).ok().map(|f| f.radius),
        radius_majorants: estimate_radius(&majorant_sequence(&maj), RADIUS_WINDOW).ok().map(|f| f.radius),
        dominated: dom.iter().all(|d| d.ok()),
    };
    let json_path = out.join(suffix(cfg, "bounds_summary", k).replace(".csv", ".json"));
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(&json_path, json + "\n").map_err(|e| io_err(&json_path, e))?;
    report.files.push(json_path);
    let fmt_r = |r: Option<f64>| r.map_or("n/a".to_string(), |v| format!("{v:.4e}"));
    report.summary.push(format!(
        "bounds: tau = {}, K = {:.4}, K_tau = {:.4}, B_tau = {:.4}, Omega = {:.4}, A = {:.4}, det = {}, R_norms = {}, R_majorants = {}, dominated = {}",
        summary.tau,
        summary.k,
        summary.k_tau,
        summary.b_tau,
        summary.omega,
        summary.a,
        summary.determinant,
        fmt_r(summary.radius_norms),
        fmt_r(summary.radius_majorants),
        summary.dominated
    ));
    if cfg.sign == ContrastSign::Positive {
        if let Some(env) = state.envelope {
            report.summary.push(format!(
                "bounds: envelope C1 = {:.4}, C2 = {:.4}, B1 = {:.4}, B2 = {:.4}, M(eps) = {:.4}",
                env.c1, env.c2, env.b1, env.b2, env.nonresonance
            ));
        }
    }
    Ok(())
}
