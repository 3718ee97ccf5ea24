//! `propagate`: drive the level-`levels[0]` packet (optionally displaced)
//! around the loop with the Crank–Nicolson propagator, writing the final
//! state (CSV + binary), any snapshots, and a run manifest that echoes the
//! full configuration with the propagation diagnostics.

use std::fs;
use std::io::Write;

use serde::Serialize;

use gpberry::ehrenfest::Drive;
use gpberry::germ::floquet_solution;
use gpberry::propagator::propagate;
use gpberry::states::fock_state;

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::{CliError, Status};
use crate::render;

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    config: &'a RunConfig,
    level: usize,
    time_span: f64,
    grid_x_min: f64,
    grid_x_max: f64,
    grid_points: usize,
    diagnostics: DiagnosticsEcho,
    snapshot_times: &'a [f64],
    final_norm: f64,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct DiagnosticsEcho {
    steps: usize,
    norm_drift_max: f64,
    boundary_max: f64,
    energy_initial: f64,
    energy_final: f64,
}

pub fn run(ctx: &Context, out: &mut dyn Write) -> Result<Status, CliError> {
    ctx.validate()?;
    let dir =
        ctx.config.output_dir.clone().ok_or_else(|| {
            CliError::Config("propagate needs output_dir (or --output-dir)".into())
        })?;
    fs::create_dir_all(&dir)?;

    let n = ctx.config.levels[0];
    let grid = ctx.grid(n)?;
    let set0 = ctx.set0();
    let germ0 = floquet_solution(&set0, &ctx.scales, 0.0)?;
    let psi0 = fock_state(
        n,
        &germ0,
        &germ0,
        0.0,
        ctx.config.initial.p,
        ctx.config.initial.x,
        &ctx.scales,
        &grid,
    )?;
    let cfg = ctx.config.propagator.build(grid);
    let result = propagate(
        &psi0,
        Drive::Loop(&ctx.path),
        (0.0, ctx.time_span()),
        &cfg,
        &ctx.scales,
    )?;

    let mut outputs = Vec::new();
    let mut file = fs::File::create(dir.join("final.csv"))?;
    result.final_state.write_csv(&mut file)?;
    outputs.push("final.csv".to_string());
    let mut file = fs::File::create(dir.join("final.wf"))?;
    result.final_state.write_binary(&mut file)?;
    outputs.push("final.wf".to_string());
    for (k, snap) in result.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:04}.wf");
        let mut file = fs::File::create(dir.join(&name))?;
        snap.write_binary(&mut file)?;
        outputs.push(name);
    }

    let manifest = Manifest {
        command: "propagate",
        config: &ctx.config,
        level: n,
        time_span: ctx.time_span(),
        grid_x_min: grid.x_min(),
        grid_x_max: grid.x_max(),
        grid_points: grid.n_points(),
        diagnostics: DiagnosticsEcho {
            steps: result.diagnostics.steps,
            norm_drift_max: result.diagnostics.norm_drift_max,
            boundary_max: result.diagnostics.boundary_max,
            energy_initial: result.diagnostics.energy_initial,
            energy_final: result.diagnostics.energy_final,
        },
        snapshot_times: &result.snapshot_times,
        final_norm: result.final_state.norm(),
        outputs,
    };
    fs::write(dir.join("manifest.json"), render::to_json(&manifest))?;
    writeln!(
        out,
        "wrote {} files and manifest.json to {}",
        manifest.outputs.len(),
        dir.display()
    )?;
    Ok(Status::Success)
}
