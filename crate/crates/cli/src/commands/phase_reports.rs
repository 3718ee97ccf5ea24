//! `hannay` and `berry`: geometric-phase reports as JSON.
//!
//! `hannay` is purely closed-form: the classical angle shift Θ and the
//! level ladder γₙ. `berry` adds, per requested period T, a full PDE
//! traversal of the loop with the extracted geometric remainder, its gap
//! to the closed form, and the 1/T convergence ratios.

use std::io::Write;

use serde::Serialize;

use gpberry::ehrenfest::Drive;
use gpberry::phases::{berry_contour, berry_surface, dynamic_phase, extract_geometric_phase};
use gpberry::propagator::propagate;
use gpberry::states::eigenstate;
use gpberry::{Error as CoreError, PhaseDecomposition64, SpatialGrid64};

use crate::commands::Context;
use crate::error::{CliError, Status};
use crate::render;

#[derive(Serialize)]
struct HannayReport {
    period_t: f64,
    hbar: f64,
    kappa_tilde: f64,
    /// Classical angle shift Θ = −γₙ/(n+½) for one loop traversal.
    theta: f64,
    levels: Vec<HannayRow>,
}

#[derive(Serialize)]
struct HannayRow {
    n: usize,
    /// Geometric phase γₙ by the contour integral.
    gamma: f64,
}

pub fn run_hannay(ctx: &Context, out: &mut dyn Write) -> Result<Status, CliError> {
    ctx.validate()?;
    let theta = gpberry::phases::hannay_angle(&ctx.path, &ctx.scales)?;
    let levels = ctx
        .config
        .levels
        .iter()
        .map(|&n| {
            Ok(HannayRow {
                n,
                gamma: berry_contour(&ctx.path, n, &ctx.scales)?,
            })
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let report = HannayReport {
        period_t: ctx.path.period(),
        hbar: ctx.scales.hbar,
        kappa_tilde: ctx.scales.kappa_tilde,
        theta,
        levels,
    };
    write!(out, "{}", render::to_json(&report))?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct BerryReport {
    hbar: f64,
    kappa_tilde: f64,
    /// Loop sampling resolution behind the closed-form quadratures.
    quadrature_points: usize,
    levels: Vec<BerryLevel>,
}

#[derive(Serialize)]
struct BerryLevel {
    n: usize,
    /// γₙ by the contour integral of the geometric potential.
    closed_form_gamma: f64,
    /// γₙ by the curvature flux through the loop's cone (Stokes check).
    surface_gamma: f64,
    runs: Vec<BerryRun>,
}

/// One finite-T traversal. On `AdiabaticityLost` the numeric fields stay
/// null and `status` carries the error, so slow-convergence campaigns keep
/// their completed rows.
#[derive(Serialize)]
struct BerryRun {
    #[serde(rename = "T")]
    t: f64,
    status: String,
    total: Option<f64>,
    dynamic: Option<f64>,
    geometric: Option<f64>,
    fidelity: Option<f64>,
    winding: Option<i64>,
    error_vs_closed_form: Option<f64>,
    ratio_vs_previous: Option<f64>,
}

pub fn run_berry(ctx: &Context, out: &mut dyn Write) -> Result<Status, CliError> {
    ctx.validate()?;
    let periods = if ctx.config.periods.is_empty() {
        vec![ctx.path.period()]
    } else {
        ctx.config.periods.clone()
    };
    let grid = ctx.grid(ctx.max_level())?;

    let mut levels = Vec::new();
    for &n in &ctx.config.levels {
        let gamma = berry_contour(&ctx.path, n, &ctx.scales)?;
        let surface = berry_surface(&ctx.path, n, &ctx.scales)?;
        let mut runs = Vec::new();
        let mut prev_err: Option<f64> = None;
        for &t_loop in &periods {
            match traverse(ctx, n, t_loop, &grid) {
                Ok(dec) => {
                    let err = (dec.geometric - gamma).abs();
                    let ratio = prev_err.map(|p| p / err);
                    prev_err = Some(err);
                    runs.push(BerryRun {
                        t: t_loop,
                        status: "ok".into(),
                        total: Some(dec.total),
                        dynamic: Some(dec.dynamic),
                        geometric: Some(dec.geometric),
                        fidelity: Some(dec.fidelity),
                        winding: dec.winding,
                        error_vs_closed_form: Some(err),
                        ratio_vs_previous: ratio,
                    });
                }
                Err(e @ CoreError::AdiabaticityLost { .. }) => {
                    prev_err = None;
                    runs.push(BerryRun {
                        t: t_loop,
                        status: e.to_string(),
                        total: None,
                        dynamic: None,
                        geometric: None,
                        fidelity: None,
                        winding: None,
                        error_vs_closed_form: None,
                        ratio_vs_previous: None,
                    });
                }
                Err(e) => return Err(e.into()),
            }
        }
        levels.push(BerryLevel {
            n,
            closed_form_gamma: gamma,
            surface_gamma: surface,
            runs,
        });
    }

    let report = BerryReport {
        hbar: ctx.scales.hbar,
        kappa_tilde: ctx.scales.kappa_tilde,
        quadrature_points: ctx.path.sample_resolution(),
        levels,
    };
    write!(out, "{}", render::to_json(&report))?;
    Ok(Status::Success)
}

/// One loop traversal at period `t_loop`: eigenstate in, PDE around the
/// loop, phase split against the closed-form dynamic phase.
fn traverse(
    ctx: &Context,
    n: usize,
    t_loop: f64,
    grid: &SpatialGrid64,
) -> Result<PhaseDecomposition64, CoreError> {
    let mut spec = ctx.config.loop_spec.clone();
    spec.period_t = t_loop;
    let path = spec.to_path::<f64>()?;
    let set0 = path.at(0.0);
    let reference = eigenstate(n, &set0, &ctx.scales, grid)?;
    let delta = dynamic_phase(&path, n, &ctx.scales)?;
    let cfg = ctx.config.propagator.build(*grid);
    let result = propagate(
        &reference,
        Drive::Loop(&path),
        (0.0, t_loop),
        &cfg,
        &ctx.scales,
    )?;
    let snapshots = if result.snapshots.is_empty() {
        None
    } else {
        Some(result.snapshots.as_slice())
    };
    extract_geometric_phase(&reference, &result.final_state, -delta, n, snapshots)
}
