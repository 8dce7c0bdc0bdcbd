//! Sparse-form inequalities on the families produced by the composition
//! domination, and the local comparison `‖f‖_{L(log L)^β,I} ≲ ε^{-β}⟨|f|⟩_{1+ε,I}`.

use sparsedom::grid::DyadicTree;
use sparsedom::orlicz::LocalFunctional;
use sparsedom::sparse::sparse_form;
use sparsedom::weights::weighted_norm;

use super::{Ctx, PairConstants, Task};
use crate::rows::Row;

fn weighted(ctx: &Ctx) -> Vec<Task<'_>> {
    let mut out: Vec<Task<'_>> = Vec::new();
    for nw in &ctx.weights {
        for &p in &ctx.cfg.sweeps.p {
            out.push(Box::new(move || {
                let families = ctx.families()?;
                let c = PairConstants::new(&nw.w, p)?;
                let (e1, e2) = (c.eps1, c.eps2);
                let wf = nw.w.function();
                let mut rows = Vec::new();
                for (i, nf) in ctx.functions.iter().enumerate() {
                    let pg = ctx.partner(i);
                    let (f, g) = (&nf.f, &pg.f);
                    let cubes = families[i].cubes();
                    let case = format!("w={} f={} g={}", nw.name, nf.name, pg.name);
                    let norms = weighted_norm(f, wf, p)? * weighted_norm(g, c.sigma.function(), c.p_dual)?;
                    let base = c.core() * norms;
                    let power = sparse_form(cubes, f, g, LocalFunctional::Power(1.0 + e1), LocalFunctional::Power(1.0 + e2))?;
                    let llog2 = sparse_form(cubes, f, g, LocalFunctional::Luxemburg(2.0), LocalFunctional::AVERAGE)?;
                    let llogl = sparse_form(cubes, f, g, LocalFunctional::Luxemburg(1.0), LocalFunctional::Power(1.0 + e2))? / e2;
                    let row = |id: &str, l: f64, r: f64| {
                        let mut r = c.tag(Row::new(id, &case, l, r));
                        r.family_size = Some(cubes.len());
                        r
                    };
                    rows.push(row("sparse_holder", power, base));
                    rows.push(row("sparse_llog2_vs_power", llog2, power / (e1 * e1)));
                    rows.push(row("sparse_llogl_vs_power", llogl, power / (e1 * e2)));
                    rows.push(row("sparse_llog2_weighted", llog2, c.ainf_sigma.powi(2) * base));
                    rows.push(row("sparse_llogl_weighted", llogl, c.ainf_w * c.ainf_sigma * base));
                }
                Ok(rows)
            }));
        }
    }
    out
}

fn local(ctx: &Ctx) -> Vec<Task<'_>> {
    ctx.functions
        .iter()
        .map(|nf| -> Task<'_> {
            Box::new(move || {
                let tree = DyadicTree::new(ctx.grid);
                let cubes: Vec<_> = (0..tree.len()).map(|id| tree.cube(id)).collect();
                let case = format!("f={}", nf.name);
                let mut rows = Vec::new();
                for &beta in &ctx.cfg.sweeps.beta {
                    for &eps in &ctx.cfg.sweeps.eps {
                        let mut worst = (0.0, 0.0);
                        for q in &cubes {
                            let l = LocalFunctional::Luxemburg(beta).eval(&nf.f, q)?;
                            if l == 0.0 {
                                continue;
                            }
                            let r = eps.powf(-beta) * LocalFunctional::Power(1.0 + eps).eval(&nf.f, q)?;
                            if worst.0 == 0.0 || l / r > worst.0 / worst.1 {
                                worst = (l, r);
                            }
                        }
                        rows.push(Row::new(format!("orlicz_vs_power_b{beta}"), &case, worst.0, worst.1).eps(eps));
                    }
                }
                Ok(rows)
            })
        })
        .collect()
}

pub fn tasks(ctx: &Ctx) -> Vec<Task<'_>> {
    let mut out = weighted(ctx);
    out.extend(local(ctx));
    out
}
