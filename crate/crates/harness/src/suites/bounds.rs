//! Strong-type weighted bounds and the Fefferman–Stein type inequalities
//! with Orlicz-maximal weights (`u` ranges over the configured weights).

use sparsedom::weights::weighted_norm;
use sparsedom::GridFunction;

use super::{apply, weight_power, Ctx, PairConstants, Task};
use crate::rows::Row;

pub fn tasks(ctx: &Ctx) -> Vec<Task<'_>> {
    let mut out: Vec<Task<'_>> = Vec::new();
    for nw in &ctx.weights {
        for &p in &ctx.cfg.sweeps.p {
            out.push(Box::new(move || {
                let w = &nw.w;
                let c = PairConstants::new(w, p)?;
                let pd = c.p_dual;
                let wf = w.function();
                let core = c.core();
                let (aw, asg) = (c.ainf_w, c.ainf_sigma);
                let truncated = ctx.cfg.operators.truncated;
                // u^{1−p'}
                let u_dual = weight_power(wf, 1.0 - pd);
                let mut orlicz_cache: Vec<(f64, GridFunction)> = Vec::new();
                let mut m_u = |gamma: f64| -> anyhow::Result<GridFunction> {
                    if let Some((_, v)) = orlicz_cache.iter().find(|(g, _)| *g == gamma) {
                        return Ok(v.clone());
                    }
                    let v = ctx.orlicz_max(wf, gamma)?;
                    orlicz_cache.push((gamma, v.clone()));
                    Ok(v)
                };
                let mut rows = Vec::new();
                for nf in &ctx.functions {
                    let f = &nf.f;
                    let case = format!("w={} f={}", nw.name, nf.name);
                    let nf_w = weighted_norm(f, wf, p)?;
                    let t1f = apply(&ctx.t1, f)?;
                    let t2f = apply(&ctx.t2, f)?;
                    let t12f = apply(&ctx.t1, &t2f)?;

                    let rhs = core * asg * nf_w;
                    rows.push(c.tag(Row::new("strong_single", &case, weighted_norm(&t1f, wf, p)?, rhs)));
                    if truncated {
                        let tsf = ctx.t1.apply_truncated_maximal(f)?;
                        rows.push(c.tag(Row::new("strong_single_max", &case, weighted_norm(&tsf, wf, p)?, rhs)));
                    }
                    let rhs = core * (aw + asg) * asg * nf_w;
                    rows.push(c.tag(Row::new("strong_composition", &case, weighted_norm(&t12f, wf, p)?, rhs)));
                    if truncated {
                        let ts2f = ctx.t1.apply_truncated_maximal(&t2f)?;
                        rows.push(c.tag(Row::new(
                            "strong_composition_max",
                            &case,
                            weighted_norm(&ts2f, wf, p)?,
                            rhs,
                        )));
                    }

                    let mt12f = ctx.hl(&t12f)?;
                    let mt1f = ctx.hl(&t1f)?;
                    let f_pd_udual = weighted_norm(f, &u_dual, pd)?;
                    let f_p_udual = weighted_norm(f, &u_dual, p)?;
                    for &eps in &ctx.cfg.sweeps.eps {
                        let k = p * p * (1.0 / eps).powf(1.0 / pd);
                        let lhs = weighted_norm(&t1f, wf, p)?;
                        let rhs = pd * pd * k * weighted_norm(f, &m_u(p - 1.0 + eps)?, p)?;
                        rows.push(c.tag(Row::new("fs_single", &case, lhs, rhs).eps(eps)));

                        let lhs = weighted_norm(&t12f, wf, p)?;
                        let rhs = pd.powi(4) * k * k * weighted_norm(f, &m_u(2.0 * p - 1.0 + eps)?, p)?;
                        rows.push(c.tag(Row::new("fs_composition", &case, lhs, rhs).eps(eps)));

                        let v = weight_power(&m_u(3.0 * p - 1.0 + eps)?, 1.0 - pd);
                        let lhs = weighted_norm(&mt12f, &v, pd)?;
                        let k3 = pd * pd * k.powi(3);
                        rows.push(c.tag(
                            Row::new("fs_maximal_composition_pprime", &case, lhs, k3 * f_pd_udual).eps(eps),
                        ));
                        rows.push(c.tag(Row::new("fs_maximal_composition_p", &case, lhs, k3 * f_p_udual).eps(eps)));

                        let v = weight_power(&m_u(2.0 * p - 1.0 + eps)?, 1.0 - pd);
                        let lhs = weighted_norm(&mt1f, &v, pd)?;
                        rows.push(c.tag(Row::new("fs_maximal_single", &case, lhs, pd * k * k * f_pd_udual).eps(eps)));
                    }
                }
                Ok(rows)
            }));
        }
    }
    out
}
