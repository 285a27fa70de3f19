//! Subcommand implementations: phantom generation, forward sweeps,
//! inversion with error metrics, and the identity-verification suite.

use crate::config::ExperimentConfig;
use crate::exit::CliError;
use funkslice_core::field::{GridField2, ScalarField};
use funkslice_core::inversion::{funk_invert, radon_invert, SliceInversion};
use funkslice_core::profile::{
    self, chebyshev_offsets, read_profile, sweep_funk, sweep_radon, sweep_slice, FieldHeader,
    LatticeSpec, SectionProfile, TransformId,
};
use funkslice_core::verify;
use funkslice_core::{Error, SectionRule};
use serde::Serialize;
use std::path::{Path, PathBuf};

fn required_path(p: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    p.clone()
        .ok_or_else(|| CliError::Config(format!("config is missing paths.{what}")))
}

fn rule_for(cfg: &ExperimentConfig) -> Result<SectionRule, CliError> {
    Ok(match SectionRule::default_for(cfg.k).map_err(CliError::core)? {
        SectionRule::Circle { .. } => SectionRule::Circle {
            nodes: cfg.section_nodes,
        },
        SectionRule::Sphere { .. } => SectionRule::Sphere {
            polar: cfg.section_nodes / 8,
            azimuth: cfg.section_nodes / 4,
        },
    })
}

pub fn cmd_phantom(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let out = required_path(&cfg.paths.field, "field")?;
    let ctx = cfg.context().map_err(|e| CliError::Config(e.to_string()))?;
    let spec = cfg.phantom_spec();
    let f = spec.build(&ctx).map_err(|e| CliError::Config(e.to_string()))?;
    let residual = spec
        .symmetry_residual(&ctx, cfg.residual_samples, cfg.seed)
        .map_err(CliError::core)?;
    let header = FieldHeader {
        n: cfg.n,
        grid: if cfg.n == 2 {
            vec![cfg.grid.nlat, cfg.grid.nlon]
        } else {
            vec![cfg.grid.nlat, cfg.grid.nlat, cfg.grid.nlon]
        },
        center: cfg.center.clone(),
        phantom: Some(spec),
        symmetry_residual: Some(residual),
        code_version: funkslice_core::CODE_VERSION.to_string(),
    };
    if cfg.n == 2 {
        let grid = GridField2::sample(cfg.grid.nlat, cfg.grid.nlon, f.as_ref());
        profile::write_field2(&out, &header, &grid).map_err(CliError::core)?;
    } else {
        profile::write_field3(&out, &header, f.as_ref()).map_err(CliError::core)?;
    }
    log::info!(
        "phantom written to {} (class {}, symmetry residual {residual:.3e})",
        out.display(),
        header.phantom.as_ref().unwrap().class.as_str()
    );
    println!("{}", out.display());
    Ok(())
}

pub fn cmd_forward(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let out = required_path(&cfg.paths.profile, "profile")?;
    let spec = cfg.phantom_spec();
    let mut prof: SectionProfile = match cfg.transform.as_str() {
        "funk" | "slice" => {
            let ctx = cfg.context().map_err(|e| CliError::Config(e.to_string()))?;
            let f = spec.build(&ctx).map_err(|e| CliError::Config(e.to_string()))?;
            let lattice = LatticeSpec::parallel_for(&ctx, cfg.lattice.angles, cfg.lattice.offsets)
                .map_err(CliError::core)?;
            let rule = rule_for(cfg)?;
            if cfg.transform == "funk" {
                sweep_funk(&ctx, f.as_ref(), &lattice, rule).map_err(CliError::core)?
            } else {
                sweep_slice(&ctx, f.as_ref(), &lattice, rule).map_err(CliError::core)?
            }
        }
        "radon" => {
            let m = cfg.n;
            let d = cfg.k - 1;
            let f = spec
                .build_centerless(m)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let lattice = match (m, d) {
                (2, 1) => LatticeSpec::LineSinogram2 {
                    angles: cfg.lattice.angles,
                    offsets: chebyshev_offsets(cfg.lattice.offsets, false),
                },
                (3, 2) => LatticeSpec::PlaneSinogram3 {
                    azimuth: cfg.lattice.angles,
                    polar: cfg.lattice.angles / 2,
                    offsets: chebyshev_offsets(cfg.lattice.offsets, false),
                },
                _ => {
                    return Err(CliError::Config(format!(
                        "radon sweep supports (m, d) in {{(2,1), (3,2)}}, got ({m}, {d})"
                    )))
                }
            };
            sweep_radon(f.as_ref(), m, &lattice, cfg.chord_nodes).map_err(CliError::core)?
        }
        other => return Err(CliError::Config(format!("unknown transform '{other}'"))),
    };
    prof.header.phantom = Some(spec);
    prof.header.seed = Some(cfg.seed);
    if !prof.flagged.is_empty() {
        log::warn!("{} lattice points failed and are NaN", prof.flagged.len());
    }
    profile::write_profile(&out, &prof).map_err(CliError::core)?;
    log::info!("profile written to {}", out.display());
    println!("{}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct Metrics {
    relative_l2: Option<f64>,
    linf: Option<f64>,
    flagged_points: usize,
}

pub fn cmd_invert(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let input = required_path(&cfg.paths.profile, "profile")?;
    let out = required_path(&cfg.paths.recon, "recon")?;
    let prof = read_profile(&input).map_err(CliError::core)?;
    // profile/config compatibility is a hard error
    if prof.header.n != cfg.n || prof.header.k != cfg.k {
        return Err(CliError::Config(format!(
            "profile is (n = {}, k = {}), config wants (n = {}, k = {})",
            prof.header.n, prof.header.k, cfg.n, cfg.k
        )));
    }
    if prof.header.transform != TransformId::Radon {
        let dc: Vec<f64> = prof.header.center.clone();
        if dc.len() != cfg.center.len()
            || dc
                .iter()
                .zip(&cfg.center)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()))
        {
            return Err(CliError::Config(
                "profile center does not match config center".into(),
            ));
        }
    }
    let params = cfg.inversion.to_params();
    let truth = prof
        .header
        .phantom
        .clone()
        .map(|spec| -> Result<_, CliError> {
            if prof.header.transform == TransformId::Radon {
                spec.build_centerless(prof.header.n).map_err(CliError::core)
            } else {
                let ctx = cfg.context().map_err(|e| CliError::Config(e.to_string()))?;
                spec.build(&ctx).map_err(CliError::core)
            }
        })
        .transpose()?;

    match prof.header.transform {
        TransformId::Funk => {
            let ctx = cfg.context().map_err(|e| CliError::Config(e.to_string()))?;
            let (grid, flagged) =
                funk_invert(&ctx, &prof, cfg.grid.nlat, cfg.grid.nlon, params)
                    .map_err(CliError::core)?;
            write_recon_and_metrics(cfg, &out, grid, flagged.len(), truth.as_deref())?;
        }
        TransformId::Slice => {
            let inv = SliceInversion::from_profile(&prof, params).map_err(CliError::core)?;
            let template =
                GridField2::from_values(cfg.grid.nlat, cfg.grid.nlon, vec![0.0; cfg.grid.nlat * cfg.grid.nlon]);
            use rayon::prelude::*;
            let values: Vec<f64> = (0..cfg.grid.nlat * cfg.grid.nlon)
                .into_par_iter()
                .map(|flat| {
                    let (i, j) = (flat / cfg.grid.nlon, flat % cfg.grid.nlon);
                    inv.reconstruct_at(&template.node(i, j)).unwrap_or(f64::NAN)
                })
                .collect();
            let flagged = values.iter().filter(|v| v.is_nan()).count();
            let grid = GridField2::from_values(cfg.grid.nlat, cfg.grid.nlon, values);
            // the slice transform reconstructs the a^⊥-even part
            let truth_even = truth.map(|t| {
                let ctx = cfg.context().expect("validated");
                funkslice_core::mobius::parity_parts(
                    ctx.center(),
                    &std::sync::Arc::from(t),
                )
                .expect("nonzero center")
                .0
            });
            write_recon_and_metrics(cfg, &out, grid, flagged, truth_even.as_deref())?;
        }
        TransformId::Radon => {
            let m = prof.header.n;
            let params = cfg.inversion.to_params();
            let pts = ball_lattice(m, 9, 0.85);
            let mut rows = String::from(
                "# columns: point coords, reconstructed value, reference value\n",
            );
            let mut worst: f64 = 0.0;
            let mut num = 0.0;
            let mut den = 0.0;
            for p in &pts {
                let v = radon_invert(&prof, p, &params).map_err(CliError::core)?;
                let t = truth
                    .as_deref()
                    .map(|f| f.eval(&nalgebra::DVector::from_vec(p.clone())))
                    .unwrap_or(f64::NAN);
                for c in p {
                    rows.push_str(&format!("{c:?},"));
                }
                rows.push_str(&format!("{v:?},{t:?}\n"));
                if t.is_finite() {
                    worst = worst.max((v - t).abs());
                    num += (v - t) * (v - t);
                    den += t * t;
                }
            }
            profile::atomic_write(&out, rows.as_bytes()).map_err(CliError::core)?;
            if let Some(metrics_path) = &cfg.paths.metrics {
                let metrics = Metrics {
                    relative_l2: if den > 0.0 {
                        Some((num / den).sqrt())
                    } else {
                        None
                    },
                    linf: truth.as_ref().map(|_| worst),
                    flagged_points: 0,
                };
                write_metrics(metrics_path, &metrics)?;
            }
            log::info!("reconstruction written to {}", out.display());
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn ball_lattice(m: usize, per_axis: usize, radius: f64) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    let coords: Vec<f64> = (0..per_axis)
        .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
        .collect();
    match m {
        2 => {
            for x in &coords {
                for y in &coords {
                    if x * x + y * y < radius * radius {
                        pts.push(vec![*x, *y]);
                    }
                }
            }
        }
        3 => {
            for x in &coords {
                for y in &coords {
                    for z in &coords {
                        if x * x + y * y + z * z < radius * radius {
                            pts.push(vec![*x, *y, *z]);
                        }
                    }
                }
            }
        }
        _ => {}
    }
    pts
}

fn write_recon_and_metrics(
    cfg: &ExperimentConfig,
    out: &Path,
    grid: GridField2,
    flagged: usize,
    truth: Option<&dyn ScalarField>,
) -> Result<(), CliError> {
    let header = FieldHeader {
        n: 2,
        grid: vec![grid.nlat, grid.nlon],
        center: cfg.center.clone(),
        phantom: cfg.phantom.clone(),
        symmetry_residual: None,
        code_version: funkslice_core::CODE_VERSION.to_string(),
    };
    profile::write_field2(out, &header, &grid).map_err(CliError::core)?;
    let metrics = Metrics {
        relative_l2: truth.map(|t| grid.relative_l2_error(t)),
        linf: truth.map(|t| grid.linf_error(t)),
        flagged_points: flagged,
    };
    if let Some(metrics_path) = &cfg.paths.metrics {
        write_metrics(metrics_path, &metrics)?;
    }
    if let Some(rel) = metrics.relative_l2 {
        log::info!("relative L2 error {rel:.4e}");
    }
    log::info!("reconstruction written to {}", out.display());
    println!("{}", out.display());
    Ok(())
}

fn write_metrics(path: &Path, metrics: &Metrics) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(metrics)
        .map_err(|e| CliError::Core(Error::Format(e.to_string())))?;
    profile::atomic_write(path, body.as_bytes()).map_err(CliError::core)
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let mut vcfg = cfg.verify.clone().unwrap_or_default();
    vcfg.seed = cfg.seed;
    let report = verify::run_suite(&vcfg).map_err(CliError::core)?;
    println!(
        "{:<26} {:>12} {:>10} {:>8} {:>9}",
        "check", "residual", "tolerance", "status", "time"
    );
    for c in &report.checks {
        println!(
            "{:<26} {:>12.3e} {:>10.1e} {:>8} {:>8.0}ms",
            c.name,
            c.residual,
            c.tolerance,
            if c.passed { "pass" } else { "FAIL" },
            c.runtime_ms
        );
    }
    if let Some(path) = &cfg.paths.report {
        let body = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Core(Error::Format(e.to_string())))?;
        profile::atomic_write(path, body.as_bytes()).map_err(CliError::core)?;
        log::info!("report written to {}", path.display());
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Accuracy("verification checks failed".into()))
    }
}
