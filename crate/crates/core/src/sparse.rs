//! Sparse families, sparse forms, and stopping-time sparse domination.
//!
//! The three domination routines share one skeleton. At a dyadic node `Q`
//! a few pointwise "scores" are compared against `D` times a local size of
//! `f`; `D` doubles from 1 until the exceptional set `E` has at most
//! `2^{-(n+2)}|Q|` cells. The children of `Q` are the maximal dyadic `P ⊂ Q`
//! with `|P ∩ E| > 2^{-(n+1)}|P|`, so `Σ|P| ≤ ½|Q|`, and every `P` keeps a
//! point outside `E` where the local scores bound what happens on all of `P`.
//! Recursion stops when `f` vanishes on the relevant dilate of a node.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::cz_set;
use crate::grid::{Cube, CubeFamily, DilationMode, DyadicTree, Grid, GridFunction};
use crate::kernels::{nonzeros, KernelOperator};
use crate::maximal::{
    apply_all, apply_rows, masked_nz, max_abs_on, maximal_values, subtree_chain_max, MaximalSpec,
};
use crate::orlicz::{power_average, LocalFunctional};
use crate::{Error, Result};

/// Stopping constants above this mark a run as suspicious.
pub const D_FLAG: f64 = 1048576.0;
const D_LIMIT: f64 = 1e300;

/// A list of cubes with pairwise disjoint certificate sets `E_Q ⊆ Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseFamily {
    grid: Grid,
    cubes: Vec<Cube>,
    certificates: Vec<Vec<usize>>,
    eta: f64,
}

impl SparseFamily {
    /// Certifies `cubes` with [`verify_sparsity`].
    pub fn new(grid: Grid, cubes: Vec<Cube>) -> Result<Self> {
        let (eta, certificates) = verify_sparsity(grid, &cubes)?;
        Ok(SparseFamily {
            grid,
            cubes,
            certificates,
            eta,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn certificates(&self) -> &[Vec<usize>] {
        &self.certificates
    }

    /// `min_Q |E_Q| / |Q|` (1 for an empty family).
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Sparseness of `{λQ}` with the certificates kept in place.
    pub fn dilated_eta(&self, lambda: usize, mode: DilationMode) -> Result<f64> {
        let dil = self
            .cubes
            .iter()
            .map(|q| q.dilate(lambda, mode))
            .collect::<Result<Vec<_>>>()?;
        certificate_eta(self.grid, &dil, &self.certificates)
    }
}

/// Greedy certificates: cubes claim their still-unclaimed cells, smallest
/// cubes first (ties in list order). Returns the achieved `η` and the
/// certificates aligned with `cubes`.
pub fn verify_sparsity(grid: Grid, cubes: &[Cube]) -> Result<(f64, Vec<Vec<usize>>)> {
    for q in cubes {
        grid.check_same(&q.grid())?;
    }
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    order.sort_by_key(|&i| (cubes[i].cell_count(), i));
    let mut claimed = vec![false; grid.cell_count()];
    let mut certs = vec![Vec::new(); cubes.len()];
    for i in order {
        let cert: Vec<usize> = cubes[i].cells().filter(|&c| !claimed[c]).collect();
        cert.iter().for_each(|&c| claimed[c] = true);
        certs[i] = cert;
    }
    let eta = cubes
        .iter()
        .zip(&certs)
        .map(|(q, e)| e.len() as f64 / q.cell_count() as f64)
        .fold(1.0, f64::min);
    Ok((eta, certs))
}

/// `min |E_Q| / |Q|` after checking that each `E_Q ⊆ Q` and that the sets
/// are pairwise disjoint.
pub fn certificate_eta(grid: Grid, cubes: &[Cube], certs: &[Vec<usize>]) -> Result<f64> {
    if cubes.len() != certs.len() {
        return Err(Error::LengthMismatch {
            expected: cubes.len(),
            found: certs.len(),
        });
    }
    let mut owner = vec![usize::MAX; grid.cell_count()];
    let mut eta = 1.0f64;
    for (i, (q, e)) in cubes.iter().zip(certs).enumerate() {
        for &c in e {
            if c >= owner.len() || !q.contains_cell(c) || owner[c] != usize::MAX {
                return Err(Error::InvalidCertificate(i));
            }
            owner[c] = i;
        }
        eta = eta.min(e.len() as f64 / q.cell_count() as f64);
    }
    Ok(eta)
}

/// `Σ_{Q∈S} |Q| Φ_left(f, Q) Φ_right(g, Q)`.
pub fn sparse_form(
    cubes: &[Cube],
    f: &GridFunction,
    g: &GridFunction,
    left: LocalFunctional,
    right: LocalFunctional,
) -> Result<f64> {
    sparse_form_dilated(cubes, f, g, left, right, 1, DilationMode::Clip)
}

/// As [`sparse_form`] with `Φ_left` taken over `λQ`.
pub fn sparse_form_dilated(
    cubes: &[Cube],
    f: &GridFunction,
    g: &GridFunction,
    left: LocalFunctional,
    right: LocalFunctional,
    lambda: usize,
    mode: DilationMode,
) -> Result<f64> {
    left.validate()?;
    right.validate()?;
    f.grid().check_same(&g.grid())?;
    let mut total = 0.0;
    for q in cubes {
        let b = right.eval(g, q)?;
        if b == 0.0 {
            continue;
        }
        let a = left.eval(f, &q.dilate(lambda, mode)?)?;
        total += q.measure() * a * b;
    }
    Ok(total)
}

/// Knobs shared by the domination routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominationOptions {
    pub dilation: DilationMode,
    /// Family of the maximal operators applied after the singular integrals.
    pub inner: CubeFamily,
}

impl Default for DominationOptions {
    fn default() -> Self {
        DominationOptions {
            dilation: DilationMode::Clip,
            inner: CubeFamily::Dyadic,
        }
    }
}

/// One node of a stopping tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub cube: Cube,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Stopping constant chosen at this node.
    pub d: f64,
    /// `|E| / |Q|` at the chosen `d`.
    pub exceptional: f64,
    /// `Σ |P_j| / |Q|` over the selected children.
    pub children_fraction: f64,
    /// Local sizes of `f` (and `g`) entering the thresholds; meaning depends
    /// on the routine.
    pub sizes: [f64; 3],
}

struct NodeEval {
    /// `(score, base)`: `E ∋ x` iff `score[x] > D · base` for some pair.
    scores: Vec<(Vec<f64>, f64)>,
    sizes: [f64; 3],
}

fn run_stopping(grid: Grid, mut eval: impl FnMut(&Cube, usize) -> Result<Option<NodeEval>>) -> Result<Vec<Node>> {
    let tree = DyadicTree::new(grid);
    let dim = grid.dim() as u32;
    let mut nodes: Vec<Node> = Vec::new();
    let mut queue: VecDeque<(usize, Option<usize>, usize)> = VecDeque::new();
    queue.push_back((0, None, 0));
    while let Some((id, parent, depth)) = queue.pop_front() {
        let q = tree.cube(id);
        let Some(ev) = eval(&q, id)? else { continue };
        let cap = q.cell_count() as f64 / (1u64 << (dim + 2)) as f64;
        let count = |d: f64| {
            q.cells()
                .filter(|&c| ev.scores.iter().any(|(s, b)| s[c] > d * b))
                .count()
        };
        let mut d = 1.0;
        let mut e = count(d);
        while e as f64 > cap {
            d *= 2.0;
            if d > D_LIMIT {
                return Err(Error::StoppingDiverged);
            }
            e = count(d);
        }
        let mut in_set = vec![false; grid.cell_count()];
        for c in q.cells() {
            in_set[c] = ev.scores.iter().any(|(s, b)| s[c] > d * b);
        }
        let children = cz_set(grid, &in_set, 1.0 / (1u64 << (dim + 1)) as f64, &q)?;
        let me = nodes.len();
        nodes.push(Node {
            cube: q,
            parent,
            depth,
            d,
            exceptional: e as f64 / q.cell_count() as f64,
            children_fraction: children.iter().map(Cube::cell_count).sum::<usize>() as f64 / q.cell_count() as f64,
            sizes: ev.sizes,
        });
        for p in children {
            queue.push_back((tree.id_of(&p)?, Some(me), depth + 1));
        }
    }
    Ok(nodes)
}

fn family_of(grid: Grid, nodes: &[Node]) -> Result<SparseFamily> {
    SparseFamily::new(grid, nodes.iter().map(|n| n.cube).collect())
}

fn check_ops(t1: &KernelOperator, t2: &KernelOperator, f: &GridFunction) -> Result<()> {
    t1.grid().check_same(&f.grid())?;
    t2.grid().check_same(&f.grid())
}

fn luxemburg(f: &GridFunction, q: &Cube, beta: f64) -> Result<f64> {
    LocalFunctional::Luxemburg(beta).eval(f, q)
}

/// `max_{P dyadic, ξ ∈ P} Σ_{x ∈ 9P} |T[ξ][x]|`: the largest mass of a
/// row of `T` over the 9-dilate of a dyadic cube containing the row.
pub fn local_row_mass(t: &KernelOperator, mode: DilationMode) -> Result<f64> {
    let grid = t.grid();
    let tree = DyadicTree::new(grid);
    let m = t.matrix();
    let mut best = 0.0f64;
    for id in 0..tree.len() {
        let p = tree.cube(id);
        let p9 = p.dilate(9, mode)?;
        for xi in p.cells() {
            let s: f64 = p9.cells().map(|x| m.entry(xi, x).abs()).sum();
            best = best.max(s);
        }
    }
    Ok(best)
}

/// Output of [`dominate_composition`].
#[derive(Clone, Debug)]
pub struct CompositionDomination {
    pub family: SparseFamily,
    pub nodes: Vec<Node>,
    /// `T₁T₂f`.
    pub tf: GridFunction,
    /// [`local_row_mass`] of `T₁`.
    pub c_local: f64,
    pub d_max: f64,
    /// `d_max` exceeded [`D_FLAG`].
    pub flagged: bool,
    dilation: DilationMode,
    f: GridFunction,
}

/// Both sides of a certified domination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    /// Certified right-hand side, built from the per-node constants.
    pub rhs: f64,
    /// `lhs / rhs` (0 when both vanish).
    pub ratio: f64,
    /// The two sparse forms of the statement on the family, without constants.
    pub forms: [f64; 2],
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Sparse domination of `|∫ g T₁T₂f|`.
///
/// At a node `Q` (sizes over `27Q`): `E₁ = {|T₁T₂(fχ_{27Q})| > D‖f‖_{L(log L)²}}`;
/// `E₂` is where the local grand maximal function
/// `sup_{Q'∋x, Q'⊆Q} max_{9Q'} |T₂(fχ_{27Q∖27Q'})|` exceeds `D⟨|f|⟩`;
/// `E₃` is where `sup_{Q'∋x, Q'⊆Q} max_{Q'} |T₁(χ_{(9Q')^c}T₂(fχ_{27Q∖27Q'}))|`
/// exceeds `D‖f‖_{L log L}`. For any `g` this certifies
/// `|∫ g T₁T₂f| ≤ Σ_Q D_Q ∫_Q|g| (‖f‖_{L(log L)²,27Q} + c⟨|f|⟩_{27Q})`
/// with `c` the [`local_row_mass`] of `T₁`.
pub fn dominate_composition(
    t1: &KernelOperator,
    t2: &KernelOperator,
    f: &GridFunction,
    opts: &DominationOptions,
) -> Result<CompositionDomination> {
    check_ops(t1, t2, f)?;
    let grid = f.grid();
    let tree = DyadicTree::new(grid);
    let mode = opts.dilation;
    let nodes = run_stopping(grid, |q, id| {
        let q27 = q.dilate(27, mode)?;
        let local = masked_nz(f.values(), |c| q27.contains_cell(c));
        if local.is_empty() {
            return Ok(None);
        }
        let a2 = luxemburg(f, &q27, 2.0)?;
        let a1 = luxemburg(f, &q27, 1.0)?;
        let a0 = luxemburg(f, &q27, 0.0)?;
        let u = apply_all(t2, &local);
        let e1: Vec<f64> = apply_rows(t1, &nonzeros(&u), q).iter().map(|x| x.abs()).collect();
        let mut e2 = vec![0.0; tree.len()];
        let mut e3 = vec![0.0; tree.len()];
        for sid in tree.subtree(id) {
            let qp = tree.cube(sid);
            let qp27 = qp.dilate(27, mode)?;
            let far = masked_nz(f.values(), |c| q27.contains_cell(c) && !qp27.contains_cell(c));
            if far.is_empty() {
                continue;
            }
            let qp9 = qp.dilate(9, mode)?;
            let u = apply_all(t2, &far);
            e2[sid] = max_abs_on(&u, &qp9);
            let outside = masked_nz(&u, |c| !qp9.contains_cell(c));
            e3[sid] = max_abs_on(&apply_rows(t1, &outside, &qp), &qp);
        }
        Ok(Some(NodeEval {
            scores: vec![
                (e1, a2),
                (subtree_chain_max(&tree, id, &e2), a0),
                (subtree_chain_max(&tree, id, &e3), a1),
            ],
            sizes: [a2, a1, a0],
        }))
    })?;
    let tf = GridFunction::new(grid, t1.apply_values(&t2.apply_values(f.values())))?;
    let d_max = nodes.iter().map(|n| n.d).fold(0.0, f64::max);
    Ok(CompositionDomination {
        family: family_of(grid, &nodes)?,
        c_local: local_row_mass(t1, mode)?,
        nodes,
        tf,
        d_max,
        flagged: d_max > D_FLAG,
        dilation: mode,
        f: f.clone(),
    })
}

impl CompositionDomination {
    /// Both sides of the domination for a given `g`; forms are
    /// `𝓐_{L(log L)², L¹}` and `𝓐_{L log L, L log L}` over 27-dilates.
    pub fn evaluate(&self, g: &GridFunction) -> Result<Sides> {
        self.tf.grid().check_same(&g.grid())?;
        let cm = g.grid().cell_measure();
        let lhs = self
            .tf
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .abs()
            * cm;
        let mut rhs = 0.0;
        for n in &self.nodes {
            let ig = g.abs().integrate(&n.cube)?;
            rhs += n.d * ig * (n.sizes[0] + self.c_local * n.sizes[2]);
        }
        let cubes = self.family.cubes();
        let forms = [
            sparse_form_dilated(
                cubes,
                &self.f,
                g,
                LocalFunctional::Luxemburg(2.0),
                LocalFunctional::AVERAGE,
                27,
                self.dilation,
            )?,
            sparse_form_dilated(
                cubes,
                &self.f,
                g,
                LocalFunctional::Luxemburg(1.0),
                LocalFunctional::Luxemburg(1.0),
                27,
                self.dilation,
            )?,
        ];
        Ok(Sides {
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            forms,
        })
    }
}

/// Output of [`dominate_maximal_composition`]; tied to the `g` it was built for.
#[derive(Clone, Debug)]
pub struct MaximalCompositionDomination {
    pub family: SparseFamily,
    pub nodes: Vec<Node>,
    pub q: f64,
    /// `q' = q/(q-1)`.
    pub q_dual: f64,
    pub sides: Sides,
    pub d_max: f64,
    pub flagged: bool,
}

/// `q/(q-1)`.
pub fn dual_exponent(q: f64) -> f64 {
    q / (q - 1.0)
}

/// Sparse domination of `∫ |g| M T₁T₂f`, `q ∈ (1, 2]`.
///
/// At a node `Q`: `E₁ = {MT₁T₂(fχ_{27Q}) > D‖f‖_{L(log L)²,27Q}}`;
/// `E₂` is where `sup_{Q'} max_{Q'} MT₁(χ_{(9Q')^c}T₂(fχ_{27Q∖27Q'}))` exceeds
/// the same threshold; `E₃` is where
/// `sup_{Q'} |Q'|^{-1}∫_{Q'} MT₁(χ_{9Q'}T₂(fχ_{27Q∖27Q'}))|g|` exceeds
/// `Dq'‖f‖_{L log L,27Q}⟨|g|⟩_{q,Q}`. This certifies
/// `∫|g| MT₁T₂f ≤ Σ_Q D_Q |Q| (‖f‖_{L(log L)²,27Q}⟨|g|⟩_Q + q'‖f‖_{L log L,27Q}⟨|g|⟩_{q,Q})`.
pub fn dominate_maximal_composition(
    t1: &KernelOperator,
    t2: &KernelOperator,
    f: &GridFunction,
    g: &GridFunction,
    q: f64,
    opts: &DominationOptions,
) -> Result<MaximalCompositionDomination> {
    check_ops(t1, t2, f)?;
    f.grid().check_same(&g.grid())?;
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::param("q", q));
    }
    let q_dual = dual_exponent(q);
    let grid = f.grid();
    let tree = DyadicTree::new(grid);
    let mode = opts.dilation;
    let m = MaximalSpec::hardy_littlewood(opts.inner);
    let absg: Vec<f64> = g.values().iter().map(|x| x.abs()).collect();
    let nodes = run_stopping(grid, |cube, id| {
        let q27 = cube.dilate(27, mode)?;
        let local = masked_nz(f.values(), |c| q27.contains_cell(c));
        if local.is_empty() {
            return Ok(None);
        }
        let a2 = luxemburg(f, &q27, 2.0)?;
        let a1 = luxemburg(f, &q27, 1.0)?;
        let gq = power_average(g, cube, q)?;
        let u = apply_all(t2, &local);
        let e1 = maximal_values(grid, &apply_all(t1, &nonzeros(&u)), &m);
        let mut e2 = vec![0.0; tree.len()];
        let mut e3 = vec![0.0; tree.len()];
        for sid in tree.subtree(id) {
            let qp = tree.cube(sid);
            let qp27 = qp.dilate(27, mode)?;
            let far = masked_nz(f.values(), |c| q27.contains_cell(c) && !qp27.contains_cell(c));
            if far.is_empty() {
                continue;
            }
            let qp9 = qp.dilate(9, mode)?;
            let u = apply_all(t2, &far);
            let outside = masked_nz(&u, |c| !qp9.contains_cell(c));
            let mo = maximal_values(grid, &apply_all(t1, &outside), &m);
            e2[sid] = max_abs_on(&mo, &qp);
            if gq > 0.0 {
                let inside = masked_nz(&u, |c| qp9.contains_cell(c));
                let mi = maximal_values(grid, &apply_all(t1, &inside), &m);
                e3[sid] = qp.cells().map(|c| mi[c] * absg[c]).sum::<f64>() / qp.cell_count() as f64;
            }
        }
        Ok(Some(NodeEval {
            scores: vec![
                (e1, a2),
                (subtree_chain_max(&tree, id, &e2), a2),
                (subtree_chain_max(&tree, id, &e3), q_dual * a1 * gq),
            ],
            sizes: [a2, a1, gq],
        }))
    })?;
    let tf = t1.apply_values(&t2.apply_values(f.values()));
    let mtf = maximal_values(grid, &tf, &m);
    let cm = grid.cell_measure();
    let lhs = mtf.iter().zip(&absg).map(|(a, b)| a * b).sum::<f64>() * cm;
    let mut rhs = 0.0;
    for n in &nodes {
        let g1 = power_average(g, &n.cube, 1.0)?;
        rhs += n.d * n.cube.measure() * (n.sizes[0] * g1 + q_dual * n.sizes[1] * n.sizes[2]);
    }
    let family = family_of(grid, &nodes)?;
    let forms = [
        sparse_form_dilated(
            family.cubes(),
            f,
            g,
            LocalFunctional::Luxemburg(2.0),
            LocalFunctional::AVERAGE,
            27,
            mode,
        )?,
        q_dual
            * sparse_form_dilated(
                family.cubes(),
                f,
                g,
                LocalFunctional::Luxemburg(1.0),
                LocalFunctional::Power(q),
                27,
                mode,
            )?,
    ];
    let d_max = nodes.iter().map(|n| n.d).fold(0.0, f64::max);
    Ok(MaximalCompositionDomination {
        family,
        nodes,
        q,
        q_dual,
        sides: Sides {
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            forms,
        },
        d_max,
        flagged: d_max > D_FLAG,
    })
}

/// Output of [`sparse_dominate_single`].
#[derive(Clone, Debug)]
pub struct SingleDomination {
    pub family: SparseFamily,
    pub nodes: Vec<Node>,
    pub k: u32,
    /// `M_{L(log L)^k} T f`.
    pub lhs: GridFunction,
    /// `Σ_{Q∋x} ‖f‖_{L(log L)^{k+1},9Q}`.
    pub sparse_sum: GridFunction,
    /// `max_x lhs / sparse_sum`.
    pub c_max: f64,
    /// `max_x lhs / Σ_{Q∋x} D_Q ‖f‖_{L(log L)^{k+1},9Q}`; at most 1.
    pub certified_ratio: f64,
    pub d_max: f64,
    pub flagged: bool,
}

/// Pointwise sparse bound for `V = M_{L(log L)^k} ∘ T`, `k ∈ {0, 1, 2}`.
///
/// At a node `Q` with `a = ‖f‖_{L(log L)^{k+1},9Q}`: `E₁ = {V(fχ_{9Q}) > Da}`
/// and `E₂` is where `sup_{Q'∋x, Q'⊆Q} max_{Q'} V(fχ_{9Q∖9Q'})` exceeds `Da`,
/// so that `V f ≤ Σ_Q D_Q a_Q χ_Q` pointwise.
pub fn sparse_dominate_single(
    t: &KernelOperator,
    f: &GridFunction,
    k: u32,
    opts: &DominationOptions,
) -> Result<SingleDomination> {
    t.grid().check_same(&f.grid())?;
    if k > 2 {
        return Err(Error::param("k", k as f64));
    }
    let grid = f.grid();
    let tree = DyadicTree::new(grid);
    let mode = opts.dilation;
    let m = MaximalSpec::orlicz(k as f64, opts.inner);
    let v = |nz: &[(usize, f64)]| maximal_values(grid, &apply_all(t, nz), &m);
    let beta = (k + 1) as f64;
    let nodes = run_stopping(grid, |q, id| {
        let q9 = q.dilate(9, mode)?;
        let local = masked_nz(f.values(), |c| q9.contains_cell(c));
        if local.is_empty() {
            return Ok(None);
        }
        let a = luxemburg(f, &q9, beta)?;
        let e1 = v(&local);
        let mut e2 = vec![0.0; tree.len()];
        for sid in tree.subtree(id) {
            let qp = tree.cube(sid);
            let qp9 = qp.dilate(9, mode)?;
            let far = masked_nz(f.values(), |c| q9.contains_cell(c) && !qp9.contains_cell(c));
            if !far.is_empty() {
                e2[sid] = max_abs_on(&v(&far), &qp);
            }
        }
        Ok(Some(NodeEval {
            scores: vec![(e1, a), (subtree_chain_max(&tree, id, &e2), a)],
            sizes: [a, 0.0, 0.0],
        }))
    })?;
    let lhs = v(&nonzeros(f.values()));
    let mut plain = vec![0.0; grid.cell_count()];
    let mut weighted = vec![0.0; grid.cell_count()];
    for n in &nodes {
        for c in n.cube.cells() {
            plain[c] += n.sizes[0];
            weighted[c] += n.d * n.sizes[0];
        }
    }
    let c_max = crate::maximal::pointwise_ratio(&lhs, &plain)?;
    let certified_ratio = crate::maximal::pointwise_ratio(&lhs, &weighted)?;
    let d_max = nodes.iter().map(|n| n.d).fold(0.0, f64::max);
    Ok(SingleDomination {
        family: family_of(grid, &nodes)?,
        nodes,
        k,
        lhs: GridFunction::new(grid, lhs)?,
        sparse_sum: GridFunction::new(grid, plain)?,
        c_max,
        certified_ratio,
        d_max,
        flagged: d_max > D_FLAG,
    })
}
