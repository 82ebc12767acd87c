//! Column-parallel sweep generation. Every column draws from its own
//! random stream, so the result is identical to the serial `run`.

use rayon::prelude::*;
use squidkit_core::cavity::PowerSweep;
use squidkit_core::sweep::{FluxSweep, Sweep2D};

use crate::error::Result;

pub fn flux_sweep(plan: &FluxSweep) -> Result<Sweep2D> {
    plan.validate()?;
    let i_c0 = plan.reference_current();
    let cols = (0..plan.biases.len())
        .into_par_iter()
        .map(|i| plan.column(i, i_c0))
        .collect();
    Ok(plan.assemble(cols)?)
}

pub fn power_sweep(plan: &PowerSweep) -> Result<Sweep2D> {
    plan.validate()?;
    let cols = (0..plan.powers_db.len())
        .into_par_iter()
        .map(|i| plan.column(i))
        .collect::<squidkit_core::Result<Vec<_>>>()?;
    Ok(plan.assemble(cols)?)
}
