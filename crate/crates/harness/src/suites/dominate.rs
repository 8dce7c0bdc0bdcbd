//! Sparse domination runs. The `sparse_*` rows compare each side under the
//! algorithm's own stopping constants (ratio ≤ 1 is exact); the `*_form`
//! rows compare against the sparse forms with the constants dropped.

use sparsedom::sparse::{dominate_composition, dominate_maximal_composition, sparse_dominate_single};

use super::{worst_cell, Ctx, Task};
use crate::rows::Row;

pub fn tasks(ctx: &Ctx) -> Vec<Task<'_>> {
    (0..ctx.functions.len())
        .map(|i| -> Task<'_> {
            Box::new(move || {
                let nf = &ctx.functions[i];
                let pg = ctx.partner(i);
                let (f, g) = (&nf.f, &pg.f);
                let opts = ctx.domination_options();
                let case = format!("f={} g={}", nf.name, pg.name);
                let mut rows = Vec::new();

                let dom = dominate_composition(&ctx.t1, &ctx.t2, f, &opts)?;
                let s = dom.evaluate(g)?;
                let n = dom.family.len();
                let eta = dom.family.eta();
                rows.push(
                    Row::new("sparse_composition", &case, s.lhs, s.rhs)
                        .domination(dom.d_max, n)
                        .extra("eta", eta)
                        .extra("c_local", dom.c_local)
                        .extra("flagged", dom.flagged as u8 as f64)
                        .at_most_one(),
                );
                rows.push(
                    Row::new("sparse_composition_form", &case, s.lhs, s.forms[0] + s.forms[1])
                        .domination(dom.d_max, n)
                        .extra("form_llog2_l1", s.forms[0])
                        .extra("form_llogl_llogl", s.forms[1]),
                );

                for &q in &ctx.cfg.sweeps.q {
                    let m = dominate_maximal_composition(&ctx.t1, &ctx.t2, f, g, q, &opts)?;
                    let s = &m.sides;
                    let n = m.family.len();
                    rows.push(
                        Row::new("sparse_maximal_composition", &case, s.lhs, s.rhs)
                            .q(q)
                            .domination(m.d_max, n)
                            .extra("eta", m.family.eta())
                            .extra("flagged", m.flagged as u8 as f64)
                            .at_most_one(),
                    );
                    rows.push(
                        Row::new("sparse_maximal_composition_form", &case, s.lhs, s.forms[0] + s.forms[1])
                            .q(q)
                            .domination(m.d_max, n),
                    );
                }

                let case = format!("f={}", nf.name);
                for &k in &ctx.cfg.sweeps.order {
                    let d = sparse_dominate_single(&ctx.t1, f, k, &opts)?;
                    let n = d.family.len();
                    rows.push(
                        Row::new(format!("sparse_single_k{k}"), &case, d.certified_ratio, 1.0)
                            .domination(d.d_max, n)
                            .extra("eta", d.family.eta())
                            .extra("flagged", d.flagged as u8 as f64)
                            .at_most_one(),
                    );
                    let (l, r) = worst_cell(d.lhs.values(), d.sparse_sum.values());
                    rows.push(Row::new(format!("sparse_single_k{k}_form"), &case, l, r).domination(d.d_max, n));
                }
                Ok(rows)
            })
        })
        .collect()
}
