//! Weak-type endpoint estimates: unweighted compositions, `A_1` bounds and
//! the Fefferman–Stein type bounds with Orlicz-maximal weights.

use sparsedom::weights::{superlevel_measure, weighted_norm};
use sparsedom::GridFunction;

use super::{apply, level_set_measure, young_integral, Ctx, Task};
use crate::rows::Row;

/// `T₁T₂T₁…` applied `k` times (innermost first: `T₁` for odd `k`).
pub fn chain(ctx: &Ctx, f: &GridFunction, k: u32) -> anyhow::Result<GridFunction> {
    let mut v = f.clone();
    for j in (0..k).rev() {
        v = apply(if j % 2 == 0 { &ctx.t1 } else { &ctx.t2 }, &v)?;
    }
    Ok(v)
}

fn log_e(x: f64) -> f64 {
    (std::f64::consts::E + x).ln()
}

fn unweighted(ctx: &Ctx) -> Vec<Task<'_>> {
    ctx.functions
        .iter()
        .map(|nf| -> Task<'_> {
            Box::new(move || {
                let f = &nf.f;
                let case = format!("f={}", nf.name);
                let mut rows = Vec::new();
                for &k in &ctx.cfg.sweeps.k {
                    let tk = chain(ctx, f, k)?;
                    let maxes = ctx
                        .cfg
                        .sweeps
                        .beta
                        .iter()
                        .map(|&b| Ok((b, ctx.orlicz_max(&tk, b)?)))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    for &lambda in &ctx.cfg.sweeps.lambda {
                        let lhs = level_set_measure(&tk, lambda);
                        let rhs = young_integral(f, lambda, (k - 1) as f64, None);
                        rows.push(Row::new(format!("weak_unweighted_k{k}"), &case, lhs, rhs).lambda(lambda));
                        for (b, m) in &maxes {
                            let lhs = level_set_measure(m, lambda);
                            let rhs = young_integral(f, lambda, b + k as f64, None);
                            rows.push(
                                Row::new(format!("weak_unweighted_maximal_k{k}_b{b}"), &case, lhs, rhs).lambda(lambda),
                            );
                        }
                    }
                }
                Ok(rows)
            })
        })
        .collect()
}

fn weighted(ctx: &Ctx) -> Vec<Task<'_>> {
    ctx.weights
        .iter()
        .map(|nw| -> Task<'_> {
            Box::new(move || {
                let w = &nw.w;
                let wf = w.function();
                let a1 = w.a1();
                let aw = w.ainf()?;
                let l2 = log_e(aw).powi(2);
                let eps_list = &ctx.cfg.sweeps.eps;
                let m1 = eps_list
                    .iter()
                    .map(|&e| ctx.orlicz_max(wf, 1.0 + e))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                let m2 = eps_list
                    .iter()
                    .map(|&e| ctx.orlicz_max(wf, 2.0 + e))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                let tag = |r: Row| r.constants(None, Some(aw), None).extra("A1", a1);
                let mut rows = Vec::new();
                for nf in &ctx.functions {
                    let f = &nf.f;
                    let case = format!("w={} f={}", nw.name, nf.name);
                    let t1f = apply(&ctx.t1, f)?;
                    let t12f = apply(&ctx.t1, &apply(&ctx.t2, f)?)?;
                    let tsf = if ctx.cfg.operators.truncated {
                        Some(ctx.t1.apply_truncated_maximal(f)?)
                    } else {
                        None
                    };
                    let f_l1w = weighted_norm(f, wf, 1.0)?;
                    for &lambda in &ctx.cfg.sweeps.lambda {
                        let s1 = superlevel_measure(&t1f, wf, lambda)?;
                        let s12 = superlevel_measure(&t12f, wf, lambda)?;
                        let phi1 = young_integral(f, lambda, 1.0, Some(wf));
                        let phi2 = young_integral(f, lambda, 2.0, Some(wf));
                        let row = |id: &str, l: f64, r: f64| tag(Row::new(id, &case, l, r).lambda(lambda));
                        rows.push(row("weak_l1_single", lambda * s1, a1 * aw * l2 * f_l1w));
                        rows.push(row("weak_l1_single_improved", lambda * s1, a1 * aw * log_e(aw) * f_l1w));
                        rows.push(row("weak_llogl_single", s1, a1 * l2 * phi1));
                        if let Some(tsf) = &tsf {
                            rows.push(row("weak_llogl_single_max", superlevel_measure(tsf, wf, lambda)?, a1 * l2 * phi1));
                        }
                        rows.push(row("weak_llogl_composition", s12, a1 * aw * aw * l2 * phi1));
                        rows.push(row("weak_llog2l_composition", s12, a1 * aw * l2 * phi2));
                        for (j, &eps) in eps_list.iter().enumerate() {
                            let e2 = eps.powi(-2);
                            let row = |id: &str, l: f64, r: f64| row(id, l, r).eps(eps);
                            rows.push(row(
                                "weak_fs_composition",
                                s12,
                                e2 * young_integral(f, lambda, 1.0, Some(&m2[j])),
                            ));
                            rows.push(row(
                                "weak_fs_composition_log2",
                                s12,
                                e2 * young_integral(f, lambda, 2.0, Some(&m1[j])),
                            ));
                            rows.push(row("weak_fs_single", lambda * s1, e2 * weighted_norm(f, &m1[j], 1.0)?));
                        }
                    }
                }
                Ok(rows)
            })
        })
        .collect()
}

pub fn tasks(ctx: &Ctx) -> Vec<Task<'_>> {
    let mut out = unweighted(ctx);
    out.extend(weighted(ctx));
    out
}
