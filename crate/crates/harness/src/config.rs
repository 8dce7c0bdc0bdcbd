//! Test-matrix configuration: a TOML document with sections `[grid]`,
//! `[operators]`, `[ati]`, `[weights]`, `[functions]`, `[sweeps]` and an
//! optional `[caps]` table of per-inequality ratio caps.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use sparsedom::kernels::{AtiFamily, AtiKind};
use sparsedom::{CubeFamily, OperatorSpec};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridConfig,
    #[serde(default)]
    pub operators: OperatorConfig,
    #[serde(default)]
    pub ati: AtiConfig,
    #[serde(default)]
    pub weights: WeightConfig,
    #[serde(default)]
    pub functions: FunctionConfig,
    #[serde(default)]
    pub sweeps: SweepConfig,
    #[serde(default)]
    pub caps: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub dim: usize,
    pub level: u32,
    #[serde(default)]
    pub periodic: bool,
    /// Cube family of the maximal operators: `dyadic`, `all` or `pow2`.
    #[serde(default = "dyadic")]
    pub family: String,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// `hilbert`, `riesz0`, `riesz1` or `rough`.
    #[serde(default = "hilbert")]
    pub t1: String,
    #[serde(default = "hilbert")]
    pub t2: String,
    #[serde(default)]
    pub rough_omega: Vec<f64>,
    /// Also evaluate the maximal truncated operator `T₁*`.
    #[serde(default)]
    pub truncated: bool,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            t1: hilbert(),
            t2: hilbert(),
            rough_omega: Vec::new(),
            truncated: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtiConfig {
    /// `heat` or `identity`.
    #[serde(default = "heat")]
    pub kind: String,
    #[serde(default = "two")]
    pub s: f64,
    /// Scales to sweep; empty means `4^{-k}`, `k = 1..L−2`.
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default = "two")]
    pub c1: f64,
    #[serde(default = "two")]
    pub c2: f64,
    #[serde(default = "one_f")]
    pub alpha: f64,
    #[serde(default = "one_f")]
    pub eta: f64,
}

impl Default for AtiConfig {
    fn default() -> Self {
        AtiConfig {
            kind: heat(),
            s: 2.0,
            t: Vec::new(),
            c1: 2.0,
            c2: 2.0,
            alpha: 1.0,
            eta: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    /// Exponents `a` of `|x − center|^a`.
    #[serde(default)]
    pub power: Vec<f64>,
    #[serde(default = "center")]
    pub center: [f64; 2],
    /// Constant weights.
    #[serde(default)]
    pub constant: Vec<f64>,
    /// Explicit weights, one value per cell in row-major order.
    #[serde(default)]
    pub explicit: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    /// Any of `one_cell`, `random_sign`, `haar`, `bump`.
    #[serde(default = "all_kinds")]
    pub kinds: Vec<String>,
    /// Independent draws of the random generators.
    #[serde(default = "one")]
    pub draws: usize,
    #[serde(default)]
    pub seed: u64,
    /// Location of the `one_cell` spike as a fraction of the side.
    #[serde(default = "third")]
    pub cell: f64,
}

impl Default for FunctionConfig {
    fn default() -> Self {
        FunctionConfig {
            kinds: all_kinds(),
            draws: 1,
            seed: 0,
            cell: third(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    /// Exponents of the maximal-composition domination, in `(1, 2]`.
    #[serde(default = "default_q")]
    pub q: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: Vec<f64>,
    /// Composition lengths `k ∈ 1..=3` of the unweighted endpoint sweep.
    #[serde(default = "default_k")]
    pub k: Vec<u32>,
    #[serde(default = "default_beta")]
    pub beta: Vec<f64>,
    /// Orders `k ∈ {0, 1, 2}` of the single-operator domination `M_{L(log L)^k} T`.
    #[serde(default = "default_order")]
    pub order: Vec<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            p: default_p(),
            q: default_q(),
            eps: default_eps(),
            lambda: default_lambda(),
            k: default_k(),
            beta: default_beta(),
            order: default_order(),
        }
    }
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn third() -> f64 {
    1.0 / 3.0
}
fn dyadic() -> String {
    "dyadic".into()
}
fn hilbert() -> String {
    "hilbert".into()
}
fn heat() -> String {
    "heat".into()
}
fn center() -> [f64; 2] {
    [0.5, 0.5]
}
fn all_kinds() -> Vec<String> {
    ["one_cell", "random_sign", "haar", "bump"].map(String::from).to_vec()
}
fn default_p() -> Vec<f64> {
    vec![2.0]
}
fn default_q() -> Vec<f64> {
    vec![2.0]
}
fn default_eps() -> Vec<f64> {
    vec![1.0, 0.5]
}
fn default_lambda() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_k() -> Vec<u32> {
    vec![1, 2]
}
fn default_beta() -> Vec<f64> {
    vec![0.0, 1.0]
}
fn default_order() -> Vec<u32> {
    vec![0, 1]
}

/// A configuration problem, located in the source text when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            column: None,
            field: Some(field.into()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config error")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l}, column {c}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// Line and column of the key behind a dotted field such as `sweeps.p[1]`
/// (the section header when the key is absent from the text).
fn locate(text: &str, field: &str) -> Option<(usize, usize)> {
    let (section, key) = field.split_once('.')?;
    let key = key.split(['[', '.']).next()?;
    let header = format!("[{section}]");
    let mut in_section = None;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.starts_with('[') {
            if in_section.is_some() {
                break;
            }
            if trimmed.trim_end() == header {
                in_section = Some(i + 1);
            }
            continue;
        }
        if in_section.is_some() {
            let name = trimmed.split('=').next().unwrap_or("").trim();
            if name == key {
                return Some((i + 1, line.len() - trimmed.len() + 1));
            }
        }
    }
    in_section.map(|l| (l, 1))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(s) => {
                    let (l, c) = line_col(text, s.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError {
                line,
                column,
                field: None,
                message: e.message().trim().to_string(),
            }
        })?;
        cfg.validate().map_err(|mut e| {
            if let Some((l, c)) = e.field.as_deref().and_then(|f| locate(text, f)) {
                e.line = Some(l);
                e.column = Some(c);
            }
            e
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|e| ConfigError {
            line: None,
            column: None,
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|e| ConfigError {
            line: None,
            column: None,
            field: None,
            message: format!("{} is not UTF-8: {e}", path.display()),
        })?;
        Ok((Self::from_toml(text)?, bytes))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if !(1..=2).contains(&g.dim) {
            return Err(ConfigError::field("grid.dim", format!("{} is not 1 or 2", g.dim)));
        }
        let max_level = if g.dim == 1 { 12 } else { 6 };
        if g.level == 0 || g.level > max_level {
            return Err(ConfigError::field(
                "grid.level",
                format!("{} is outside 1..={max_level} for dim {}", g.level, g.dim),
            ));
        }
        self.family()?;
        self.operator(&self.operators.t1, "operators.t1")?;
        self.operator(&self.operators.t2, "operators.t2")?;
        self.ati_family()?;
        for (i, &t) in self.ati.t.iter().enumerate() {
            positive(&format!("ati.t[{i}]"), t)?;
        }

        let w = &self.weights;
        for (i, &a) in w.power.iter().enumerate() {
            if !a.is_finite() || a <= -(g.dim as f64) {
                return Err(ConfigError::field(
                    format!("weights.power[{i}]"),
                    format!("{a} is not locally integrable (need a > -{})", g.dim),
                ));
            }
        }
        for (i, &c) in w.constant.iter().enumerate() {
            positive(&format!("weights.constant[{i}]"), c)?;
        }
        let cells = 1usize << (g.level as usize * g.dim);
        for (i, e) in w.explicit.iter().enumerate() {
            if e.len() != cells {
                return Err(ConfigError::field(
                    format!("weights.explicit[{i}]"),
                    format!("has {} values, the grid has {cells} cells", e.len()),
                ));
            }
            if let Some(j) = e.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
                return Err(ConfigError::field(
                    format!("weights.explicit[{i}][{j}]"),
                    "weights must be positive and finite",
                ));
            }
        }

        let fc = &self.functions;
        for (i, k) in fc.kinds.iter().enumerate() {
            if !matches!(k.as_str(), "one_cell" | "random_sign" | "haar" | "bump") {
                return Err(ConfigError::field(
                    format!("functions.kinds[{i}]"),
                    format!("unknown generator `{k}` (one_cell, random_sign, haar, bump)"),
                ));
            }
        }
        if fc.kinds.is_empty() {
            return Err(ConfigError::field("functions.kinds", "at least one generator is required"));
        }
        if !(0.0..1.0).contains(&fc.cell) {
            return Err(ConfigError::field("functions.cell", format!("{} is outside [0, 1)", fc.cell)));
        }

        let s = &self.sweeps;
        for (i, &p) in s.p.iter().enumerate() {
            if !(p.is_finite() && p > 1.0) {
                return Err(ConfigError::field(format!("sweeps.p[{i}]"), format!("{p} must exceed 1")));
            }
        }
        for (i, &q) in s.q.iter().enumerate() {
            if !(q > 1.0 && q <= 2.0) {
                return Err(ConfigError::field(format!("sweeps.q[{i}]"), format!("{q} is outside (1, 2]")));
            }
        }
        for (i, &e) in s.eps.iter().enumerate() {
            if !(e > 0.0 && e <= 1.0) {
                return Err(ConfigError::field(format!("sweeps.eps[{i}]"), format!("{e} is outside (0, 1]")));
            }
        }
        if s.lambda.is_empty() {
            return Err(ConfigError::field("sweeps.lambda", "the λ sweep must be nonempty"));
        }
        for (i, &l) in s.lambda.iter().enumerate() {
            positive(&format!("sweeps.lambda[{i}]"), l)?;
        }
        for (i, &k) in s.k.iter().enumerate() {
            if !(1..=3).contains(&k) {
                return Err(ConfigError::field(format!("sweeps.k[{i}]"), format!("{k} is outside 1..=3")));
            }
        }
        for (i, &b) in s.beta.iter().enumerate() {
            if !(b.is_finite() && b >= 0.0) {
                return Err(ConfigError::field(format!("sweeps.beta[{i}]"), format!("{b} must be ≥ 0")));
            }
        }
        for (i, &k) in s.order.iter().enumerate() {
            if k > 2 {
                return Err(ConfigError::field(format!("sweeps.order[{i}]"), format!("{k} is outside 0..=2")));
            }
        }
        for (id, &c) in &self.caps {
            positive(&format!("caps.{id}"), c)?;
        }
        Ok(())
    }

    pub fn family(&self) -> Result<CubeFamily, ConfigError> {
        match self.grid.family.as_str() {
            "dyadic" => Ok(CubeFamily::Dyadic),
            "all" => Ok(CubeFamily::All),
            "pow2" => Ok(CubeFamily::PowerOfTwoSides),
            other => Err(ConfigError::field(
                "grid.family",
                format!("unknown family `{other}` (dyadic, all, pow2)"),
            )),
        }
    }

    pub fn operator(&self, name: &str, field: &str) -> Result<OperatorSpec, ConfigError> {
        let dim = self.grid.dim;
        let need = |d: usize| {
            if dim == d {
                Ok(())
            } else {
                Err(ConfigError::field(field, format!("`{name}` needs dim = {d}")))
            }
        };
        match name {
            "hilbert" => need(1).map(|_| OperatorSpec::Hilbert),
            "riesz0" => need(2).map(|_| OperatorSpec::Riesz2d { component: 0 }),
            "riesz1" => need(2).map(|_| OperatorSpec::Riesz2d { component: 1 }),
            "rough" => {
                let om = &self.operators.rough_omega;
                if om.is_empty() || (dim == 1 && om.len() != 2) || om.iter().any(|v| !v.is_finite()) {
                    return Err(ConfigError::field(
                        "operators.rough_omega",
                        "needs [Ω(+1), Ω(−1)] in one dimension or one finite value per sector in two",
                    ));
                }
                Ok(OperatorSpec::Rough { omega: om.clone() })
            }
            other => Err(ConfigError::field(
                field,
                format!("unknown operator `{other}` (hilbert, riesz0, riesz1, rough)"),
            )),
        }
    }

    pub fn ati_family(&self) -> Result<AtiFamily, ConfigError> {
        let a = &self.ati;
        let kind = match a.kind.as_str() {
            "heat" => AtiKind::Heat,
            "identity" => AtiKind::Identity,
            other => {
                return Err(ConfigError::field("ati.kind", format!("unknown kind `{other}` (heat, identity)")));
            }
        };
        let fam = AtiFamily {
            kind,
            s: a.s,
            eta: a.eta,
            c1: a.c1,
            c2: a.c2,
            alpha: a.alpha,
        };
        fam.validate().map_err(|e| ConfigError::field("ati", e.to_string()))?;
        Ok(fam)
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::field(field, format!("{v} must be positive and finite")))
    }
}
