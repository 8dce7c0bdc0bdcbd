//! Inequality suites. A suite expands the test matrix into independent
//! tasks; each task is pure and emits its rows in a fixed order, and tasks
//! are collected in submission order, so the output does not depend on the
//! thread count.

use std::sync::OnceLock;
use std::time::Instant;

use anyhow::{Context as _, Result};
use rayon::prelude::*;
use sparsedom::kernels::{make_operator, AtiFamily, KernelOperator};
use sparsedom::maximal::{maximal, MaximalSpec};
use sparsedom::orlicz::young;
use sparsedom::sparse::{dominate_composition, DominationOptions, SparseFamily};
use sparsedom::{CubeFamily, DilationMode, Grid, GridFunction, Weight};

use crate::config::Config;
use crate::generators::{self, NamedFunction};
use crate::rows::Row;

pub mod assumptions;
pub mod bounds;
pub mod dominate;
pub mod endpoints;
pub mod forms;
pub mod maximal_ops;
pub mod weights;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Weights,
    Assumptions,
    Maximal,
    Dominate,
    Bounds,
    Endpoints,
    SparseForms,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Weights,
        Suite::Assumptions,
        Suite::Maximal,
        Suite::Dominate,
        Suite::Bounds,
        Suite::Endpoints,
        Suite::SparseForms,
    ];

    pub fn tasks<'a>(&self, ctx: &'a Ctx) -> Vec<Task<'a>> {
        match self {
            Suite::Weights => weights::tasks(ctx),
            Suite::Assumptions => assumptions::tasks(ctx),
            Suite::Maximal => maximal_ops::tasks(ctx),
            Suite::Dominate => dominate::tasks(ctx),
            Suite::Bounds => bounds::tasks(ctx),
            Suite::Endpoints => endpoints::tasks(ctx),
            Suite::SparseForms => forms::tasks(ctx),
        }
    }
}

pub type Task<'a> = Box<dyn Fn() -> Result<Vec<Row>> + Send + Sync + 'a>;

#[derive(Clone, Debug)]
pub struct NamedWeight {
    pub name: String,
    pub w: Weight,
}

/// Everything a task needs, built once per run.
pub struct Ctx {
    pub cfg: Config,
    pub grid: Grid,
    pub seed: u64,
    pub family: CubeFamily,
    pub t1: KernelOperator,
    pub t2: KernelOperator,
    pub ati: AtiFamily,
    pub weights: Vec<NamedWeight>,
    pub functions: Vec<NamedFunction>,
    families: OnceLock<Vec<SparseFamily>>,
}

impl Ctx {
    /// `cfg` must already be validated.
    pub fn new(cfg: Config, seed: u64) -> Result<Self> {
        let g = &cfg.grid;
        let grid = Grid::new(g.dim, g.level, g.periodic)?;
        let family = cfg.family()?;
        let t1 = make_operator(grid, &cfg.operator(&cfg.operators.t1, "operators.t1")?)?;
        let t2 = make_operator(grid, &cfg.operator(&cfg.operators.t2, "operators.t2")?)?;
        let ati = cfg.ati_family()?;
        let wc = &cfg.weights;
        let mut weights = Vec::new();
        for &a in &wc.power {
            weights.push(NamedWeight {
                name: format!("pow({a})"),
                w: Weight::power(grid, a, wc.center)?,
            });
        }
        for &c in &wc.constant {
            weights.push(NamedWeight {
                name: format!("const({c})"),
                w: Weight::constant(grid, c)?,
            });
        }
        for (i, e) in wc.explicit.iter().enumerate() {
            weights.push(NamedWeight {
                name: format!("explicit#{i}"),
                w: Weight::new(GridFunction::new(grid, e.clone())?)?,
            });
        }
        let functions = generators::generate(grid, &cfg.functions, seed);
        Ok(Ctx {
            cfg,
            grid,
            seed,
            family,
            t1,
            t2,
            ati,
            weights,
            functions,
            families: OnceLock::new(),
        })
    }

    pub fn dilation(&self) -> DilationMode {
        if self.grid.periodic() {
            DilationMode::Wrap
        } else {
            DilationMode::Clip
        }
    }

    pub fn domination_options(&self) -> DominationOptions {
        DominationOptions {
            dilation: self.dilation(),
            inner: CubeFamily::Dyadic,
        }
    }

    /// The partner `g` of function `i` in bilinear checks.
    pub fn partner(&self, i: usize) -> &NamedFunction {
        &self.functions[(i + 1) % self.functions.len()]
    }

    /// Sparse families of `T₁T₂` built from each input function.
    pub fn families(&self) -> Result<&[SparseFamily]> {
        if let Some(f) = self.families.get() {
            return Ok(f);
        }
        let opts = self.domination_options();
        let built = self
            .functions
            .iter()
            .map(|nf| Ok(dominate_composition(&self.t1, &self.t2, &nf.f, &opts)?.family))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.families.get_or_init(|| built))
    }

    /// `M_{L(log L)^γ} u` over the configured family.
    pub fn orlicz_max(&self, u: &GridFunction, gamma: f64) -> Result<GridFunction> {
        Ok(maximal(u, &MaximalSpec::orlicz(gamma, self.family))?)
    }

    pub fn hl(&self, f: &GridFunction) -> Result<GridFunction> {
        Ok(maximal(f, &MaximalSpec::hardy_littlewood(self.family))?)
    }
}

/// Evaluate every task of `suites` on `threads` workers (all available when
/// `None`). Each row's runtime is that of the task that produced it.
pub fn run(ctx: &Ctx, suites: &[Suite], threads: Option<usize>, record_timing: bool) -> Result<Vec<Row>> {
    let tasks: Vec<Task> = suites.iter().flat_map(|s| s.tasks(ctx)).collect();
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        b = b.num_threads(k.max(1));
    }
    let pool = b.build().context("building the worker pool")?;
    let chunks: Vec<Result<Vec<Row>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let start = Instant::now();
                let mut rows = t()?;
                let ms = start.elapsed().as_secs_f64() * 1e3;
                for r in &mut rows {
                    r.seed = ctx.seed;
                    r.level = ctx.grid.level();
                    r.runtime_ms = record_timing.then_some(ms);
                }
                Ok(rows)
            })
            .collect()
    });
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Weight constants of a pair `(w, σ = w^{1−p'})` and the derived exponents
/// `τ_w = 2^{11+n}[w]_{A_∞}`, `ε₁ = (p−1)/(2pτ_σ+1)`, `ε₂ = (p'−1)/(2p'τ_w+1)`.
#[derive(Clone, Debug)]
pub struct PairConstants {
    pub p: f64,
    pub p_dual: f64,
    pub sigma: Weight,
    pub ap: f64,
    pub ainf_w: f64,
    pub ainf_sigma: f64,
    pub tau_w: f64,
    pub tau_sigma: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl PairConstants {
    pub fn new(w: &Weight, p: f64) -> Result<Self> {
        let p_dual = p / (p - 1.0);
        let sigma = w.dual(p)?;
        let ap = w.ap(p)?;
        let ainf_w = w.ainf()?;
        let ainf_sigma = sigma.ainf()?;
        let n = w.grid().dim() as i32;
        let (tau_w, tau_sigma) = tau(n, ainf_w, ainf_sigma);
        let (eps1, eps2) = epsilons(p, tau_w, tau_sigma);
        Ok(PairConstants {
            p,
            p_dual,
            sigma,
            ap,
            ainf_w,
            ainf_sigma,
            tau_w,
            tau_sigma,
            eps1,
            eps2,
        })
    }

    /// `[w]_{A_p}^{1/p}([w]_{A_∞}^{1/p'} + [σ]_{A_∞}^{1/p})`.
    pub fn core(&self) -> f64 {
        self.ap.powf(1.0 / self.p) * (self.ainf_w.powf(1.0 / self.p_dual) + self.ainf_sigma.powf(1.0 / self.p))
    }

    /// Attach the constants and derived exponents to a row.
    pub fn tag(&self, row: Row) -> Row {
        row.p(self.p)
            .constants(Some(self.ap), Some(self.ainf_w), Some(self.ainf_sigma))
            .extra("p_dual", self.p_dual)
            .extra("tau_w", self.tau_w)
            .extra("tau_sigma", self.tau_sigma)
            .extra("eps1", self.eps1)
            .extra("eps2", self.eps2)
    }
}

/// `(τ_w, τ_σ)` in dimension `n`.
pub fn tau(n: i32, ainf_w: f64, ainf_sigma: f64) -> (f64, f64) {
    let base = 2f64.powi(11 + n);
    (base * ainf_w, base * ainf_sigma)
}

/// `(ε₁, ε₂)` from `p`, `τ_w`, `τ_σ`.
pub fn epsilons(p: f64, tau_w: f64, tau_sigma: f64) -> (f64, f64) {
    let pd = p / (p - 1.0);
    ((p - 1.0) / (2.0 * p * tau_sigma + 1.0), (pd - 1.0) / (2.0 * pd * tau_w + 1.0))
}

/// `∫ (|f|/λ) log^β(e + |f|/λ) v`, `v ≡ 1` when absent.
pub fn young_integral(f: &GridFunction, lambda: f64, beta: f64, v: Option<&GridFunction>) -> f64 {
    let cm = f.grid().cell_measure();
    let s: f64 = match v {
        None => f.values().iter().map(|&x| young(x.abs() / lambda, beta)).sum(),
        Some(v) => f
            .values()
            .iter()
            .zip(v.values())
            .map(|(&x, &wt)| young(x.abs() / lambda, beta) * wt)
            .sum(),
    };
    s * cm
}

/// `|{|f| > λ}|`.
pub fn level_set_measure(f: &GridFunction, lambda: f64) -> f64 {
    f.values().iter().filter(|x| x.abs() > lambda).count() as f64 * f.grid().cell_measure()
}

/// The cell where `lhs/rhs` is largest, as `(lhs, rhs)` there. A cell with
/// `lhs > 0 = rhs` wins outright; with `lhs ≡ 0` the result is `(0, max rhs)`.
pub fn worst_cell(lhs: &[f64], rhs: &[f64]) -> (f64, f64) {
    let mut best: Option<(f64, f64)> = None;
    for (&l, &r) in lhs.iter().zip(rhs) {
        if l <= 0.0 {
            continue;
        }
        if r <= 0.0 {
            return (l, 0.0);
        }
        match best {
            Some((bl, br)) if l / r <= bl / br => {}
            _ => best = Some((l, r)),
        }
    }
    best.unwrap_or((0.0, rhs.iter().copied().fold(0.0, f64::max)))
}

/// `a + b` cellwise.
pub fn add(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    Ok(a.zip_with(b, |x, y| x + y)?)
}

/// Apply a kernel operator.
pub fn apply(t: &KernelOperator, f: &GridFunction) -> Result<GridFunction> {
    Ok(t.apply(f)?)
}

/// `v^e` cellwise, for weights built from maximal functions.
pub fn weight_power(v: &GridFunction, e: f64) -> GridFunction {
    v.map(|x| x.powf(e))
}
