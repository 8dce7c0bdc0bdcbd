//! Pointwise maximal-operator comparisons, the weak type of
//! `M_{L(log L)^β}` and the grand maximal bounds.

use sparsedom::maximal::{
    bisublinear_grand_maximal, grand_maximal, grand_maximal_composite, iterated, maximal, weak_type_sides,
    GrandOptions, GrandVariant, MaximalSpec,
};
use sparsedom::sparse::dual_exponent;
use sparsedom::CubeFamily;

use super::{add, apply, worst_cell, Ctx, Task};
use crate::rows::Row;

fn grand_options(ctx: &Ctx) -> GrandOptions {
    GrandOptions {
        dilation: ctx.dilation(),
        inner: CubeFamily::Dyadic,
    }
}

fn pointwise(id: &str, case: &str, lhs: &[f64], rhs: &[f64]) -> Row {
    let (l, r) = worst_cell(lhs, rhs);
    Row::new(id, case, l, r)
}

pub fn tasks(ctx: &Ctx) -> Vec<Task<'_>> {
    (0..ctx.functions.len())
        .map(|i| -> Task<'_> {
            Box::new(move || {
                let nf = &ctx.functions[i];
                let f = &nf.f;
                let fam = ctx.family;
                let opts = grand_options(ctx);
                let case = format!("f={}", nf.name);
                let mut rows = Vec::new();

                let llogl = maximal(f, &MaximalSpec::orlicz(1.0, fam))?;
                let mm = iterated(f, 2, fam)?;
                rows.push(pointwise("maximal_llogl_vs_mm", &case, llogl.values(), mm.values()));
                rows.push(pointwise("maximal_mm_vs_llogl", &case, mm.values(), llogl.values()));

                for &beta in &ctx.cfg.sweeps.beta {
                    for &lambda in &ctx.cfg.sweeps.lambda {
                        let (l, r) = weak_type_sides(f, beta, fam, lambda)?;
                        rows.push(Row::new(format!("orlicz_weak_beta{beta}"), &case, l, r).lambda(lambda));
                    }
                }

                let t1f = apply(&ctx.t1, f)?;
                let t2f = apply(&ctx.t2, f)?;
                let t12f = apply(&ctx.t1, &t2f)?;

                let g = grand_maximal(&ctx.t1, f, &opts)?;
                let rhs = add(&ctx.hl(&t1f)?, &llogl)?;
                rows.push(pointwise("grand_single", &case, g.values(), rhs.values()));

                for &k in &ctx.cfg.sweeps.k {
                    let k = k as f64;
                    let lhs = grand_maximal_composite(&ctx.t1, &ctx.t2, f, GrandVariant::Star(k), &opts)?;
                    let rhs = add(&ctx.orlicz_max(&t1f, k)?, &ctx.orlicz_max(f, k + 1.0)?)?;
                    rows.push(pointwise(&format!("grand_star_k{k}"), &case, lhs.values(), rhs.values()));
                }

                let rhs = add(
                    &add(&ctx.hl(&t12f)?, &ctx.orlicz_max(&t2f, 1.0)?)?,
                    &ctx.orlicz_max(f, 2.0)?,
                )?;
                for (id, variant) in [
                    ("grand_double_star", GrandVariant::DoubleStar),
                    ("grand_double_star_m", GrandVariant::DoubleStarM),
                ] {
                    let lhs = grand_maximal_composite(&ctx.t1, &ctx.t2, f, variant, &opts)?;
                    rows.push(pointwise(id, &case, lhs.values(), rhs.values()));
                }

                let pg = ctx.partner(i);
                let u = add(&ctx.hl(&t2f)?, &llogl)?;
                let lhs = bisublinear_grand_maximal(&ctx.t1, &ctx.t2, f, &pg.f, &opts)?;
                for &q in &ctx.cfg.sweeps.q {
                    let mq = maximal(&pg.f, &MaximalSpec::power(q, fam))?;
                    let qd = dual_exponent(q);
                    let rhs = u.zip_with(&mq, |a, b| qd * a * b)?;
                    let case = format!("{case} g={}", pg.name);
                    rows.push(pointwise("bisublinear", &case, lhs.values(), rhs.values()).q(q));
                }
                Ok(rows)
            })
        })
        .collect()
}
