//! Kernel conditions of the operators against the configured approximation
//! to the identity, swept over `t` (reported in the `lambda` column).

use sparsedom::kernels::{check_assumption_l1, check_assumption_pointwise, AtiFamily, CompositeSide, KernelOperator};

use super::{Ctx, Task};
use crate::rows::Row;

pub fn sweep(ctx: &Ctx) -> Vec<f64> {
    if ctx.cfg.ati.t.is_empty() {
        AtiFamily::default_sweep(ctx.grid.level())
    } else {
        ctx.cfg.ati.t.clone()
    }
}

fn operators(ctx: &Ctx) -> Vec<(&str, &KernelOperator)> {
    let ops = &ctx.cfg.operators;
    let mut out = vec![(ops.t1.as_str(), &ctx.t1)];
    if ops.t2 != ops.t1 {
        out.push((ops.t2.as_str(), &ctx.t2));
    }
    out
}

pub fn tasks(ctx: &Ctx) -> Vec<Task<'_>> {
    let mut out: Vec<Task<'_>> = Vec::new();
    for (name, op) in operators(ctx) {
        for t in sweep(ctx) {
            out.push(Box::new(move || {
                let case = format!("T={name}");
                let l1 = check_assumption_l1(op, &ctx.ati, t)?;
                let ta = check_assumption_pointwise(op, &ctx.ati, t, CompositeSide::TA)?;
                let dt = check_assumption_pointwise(op, &ctx.ati, t, CompositeSide::DT)?;
                Ok(vec![
                    Row::new("kernel_l1", case.clone(), l1, 1.0).lambda(t),
                    Row::new("kernel_holder_ta", case.clone(), ta.holder, 1.0).lambda(t),
                    Row::new("kernel_holder_dt", case.clone(), dt.holder, 1.0).lambda(t),
                    Row::new("kernel_size_ta", case.clone(), ta.size, 1.0).lambda(t),
                    Row::new("kernel_size_dt", case, dt.size, 1.0).lambda(t),
                ])
            }));
        }
    }
    out
}
