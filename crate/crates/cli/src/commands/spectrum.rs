//! `spectrum`: closed-form level energies of the frozen loop-start
//! parameters, each certified on the grid by its Rayleigh quotient and
//! relative residual.

use std::io::Write;

use gpberry::states::{eigenstate, eigenvalue, rayleigh_and_residual};

use crate::commands::Context;
use crate::error::{CliError, Status};

pub fn run(ctx: &Context, out: &mut dyn Write) -> Result<Status, CliError> {
    ctx.validate()?;
    let set = ctx.set0();
    let grid = ctx.grid(ctx.max_level())?;
    writeln!(out, "n,energy,rayleigh,residual")?;
    for &n in &ctx.config.levels {
        let energy = eigenvalue(n, &set, &ctx.scales)?;
        let psi = eigenstate(n, &set, &ctx.scales, &grid)?;
        let (rayleigh, residual) = rayleigh_and_residual(&psi, energy, &set, &ctx.scales)?;
        writeln!(out, "{n},{energy:.16e},{rayleigh:.16e},{residual:.16e}")?;
    }
    Ok(Status::Success)
}
