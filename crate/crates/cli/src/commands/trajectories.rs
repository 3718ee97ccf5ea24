//! `hes` and `germ`: sampled trajectories of the moment system and of the
//! variations (germ) system along the configured loop, as CSV.

use std::io::Write;

use gpberry::ehrenfest::{closed_form_hes, integrate_hes, Drive, MomentConstants};
use gpberry::germ::{floquet_solution, integrate_variations};

use crate::commands::Context;
use crate::error::{CliError, Status};

/// Moment trajectory from the stationary level-`levels[0]` profile,
/// optionally displaced by `initial`.
pub fn run_hes(ctx: &Context, mut out: &mut dyn Write) -> Result<Status, CliError> {
    ctx.validate()?;
    let set0 = ctx.set0();
    let n = ctx.config.levels[0];
    let consts = MomentConstants::stationary(n, &set0, &ctx.scales)?;
    let mut g0 = closed_form_hes(&consts, &set0, &ctx.scales, 0.0)?;
    g0.p = ctx.config.initial.p;
    g0.x = ctx.config.initial.x;
    let traj = integrate_hes(
        &g0,
        Drive::Loop(&ctx.path),
        (0.0, ctx.time_span()),
        ctx.ode_dt()?,
        &ctx.scales,
    )?;
    traj.write_csv(&mut out)?;
    Ok(Status::Success)
}

/// Germ trajectory from the loop-start Floquet profile.
pub fn run_germ(ctx: &Context, mut out: &mut dyn Write) -> Result<Status, CliError> {
    ctx.validate()?;
    let germ0 = floquet_solution(&ctx.set0(), &ctx.scales, 0.0)?;
    let traj = integrate_variations(
        &germ0,
        Drive::Loop(&ctx.path),
        (0.0, ctx.time_span()),
        ctx.ode_dt()?,
        &ctx.scales,
    )?;
    traj.write_csv(&mut out)?;
    Ok(Status::Success)
}
