//! Weight-constant identities and comparisons.

use super::{Ctx, Task};
use crate::rows::Row;

/// Relative tolerance of the duality identity.
pub const DUALITY_TOL: f64 = 1e-8;

pub fn tasks(ctx: &Ctx) -> Vec<Task<'_>> {
    ctx.weights
        .iter()
        .map(|nw| -> Task<'_> {
            Box::new(move || {
                let w = &nw.w;
                let mut rows = Vec::new();
                let a1 = w.a1();
                let ainf = w.ainf()?;
                for &p in &ctx.cfg.sweeps.p {
                    let pd = p / (p - 1.0);
                    let ap = w.ap(p)?;
                    let sigma = w.dual(p)?;
                    let case = format!("w={}", nw.name);
                    rows.push(
                        Row::new("ap_duality", case.clone(), sigma.ap(pd)?, ap.powf(pd - 1.0))
                            .p(p)
                            .constants(Some(ap), Some(ainf), None)
                            .band(1.0 - DUALITY_TOL, 1.0 + DUALITY_TOL),
                    );
                    rows.push(
                        Row::new("ainf_vs_ap", case.clone(), ainf, ap)
                            .p(p)
                            .constants(Some(ap), Some(ainf), None),
                    );
                    rows.push(
                        Row::new("ap_vs_a1", case, ap, a1)
                            .p(p)
                            .constants(Some(ap), Some(ainf), None)
                            .extra("A1", a1)
                            .at_most_one(),
                    );
                }
                Ok(rows)
            })
        })
        .collect()
}
