//! Report rows and their CSV / JSON / plot-data renderings.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Fixed column order of `rows.csv`.
pub const COLUMNS: [&str; 16] = [
    "inequality_id",
    "p",
    "q",
    "eps",
    "lambda",
    "Ap",
    "Ainf_w",
    "Ainf_sigma",
    "lhs",
    "rhs_core",
    "ratio",
    "D",
    "family_size",
    "seed",
    "L",
    "runtime_ms",
];

/// Slack on exact (non-cap) assertions.
pub const EXACT_SLACK: f64 = 1e-12;

/// One evaluated inequality instance. `rhs_core` is the right-hand side with
/// the implicit constant dropped; `ratio = lhs / rhs_core` unless
/// `rhs_core = 0`, in which case the row is flagged and the ratio left empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub id: String,
    pub case: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub eps: Option<f64>,
    pub lambda: Option<f64>,
    pub ap: Option<f64>,
    pub ainf_w: Option<f64>,
    pub ainf_sigma: Option<f64>,
    pub lhs: f64,
    pub rhs_core: f64,
    pub ratio: Option<f64>,
    pub d: Option<f64>,
    pub family_size: Option<usize>,
    pub seed: u64,
    pub level: u32,
    pub runtime_ms: Option<f64>,
    /// Derived constants (`τ_w`, `ε₁`, …); JSON only.
    pub extras: BTreeMap<String, f64>,
    /// Built-in acceptance band for the ratio, if the inequality is exact.
    #[serde(skip)]
    pub band: Option<(f64, f64)>,
}

impl Row {
    pub fn new(id: impl Into<String>, case: impl Into<String>, lhs: f64, rhs_core: f64) -> Self {
        let ratio = if rhs_core == 0.0 {
            None
        } else if lhs == 0.0 {
            Some(0.0)
        } else {
            Some(lhs / rhs_core)
        };
        Row {
            id: id.into(),
            case: case.into(),
            p: None,
            q: None,
            eps: None,
            lambda: None,
            ap: None,
            ainf_w: None,
            ainf_sigma: None,
            lhs,
            rhs_core,
            ratio,
            d: None,
            family_size: None,
            seed: 0,
            level: 0,
            runtime_ms: None,
            extras: BTreeMap::new(),
            band: None,
        }
    }

    pub fn p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }
    pub fn q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }
    pub fn eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }
    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }
    pub fn constants(mut self, ap: Option<f64>, ainf_w: Option<f64>, ainf_sigma: Option<f64>) -> Self {
        self.ap = ap;
        self.ainf_w = ainf_w;
        self.ainf_sigma = ainf_sigma;
        self
    }
    pub fn domination(mut self, d: f64, family_size: usize) -> Self {
        self.d = Some(d);
        self.family_size = Some(family_size);
        self
    }
    pub fn extra(mut self, key: &str, v: f64) -> Self {
        self.extras.insert(key.to_string(), v);
        self
    }
    /// Require `ratio ≤ 1`.
    pub fn at_most_one(mut self) -> Self {
        self.band = Some((0.0, 1.0 + EXACT_SLACK));
        self
    }
    pub fn band(mut self, lo: f64, hi: f64) -> Self {
        self.band = Some((lo, hi));
        self
    }

    /// `rhs_core = 0` (the ratio was never formed).
    pub fn flagged(&self) -> bool {
        self.ratio.is_none()
    }

    /// Why the row fails, given an optional cap on its ratio.
    pub fn failure(&self, cap: Option<f64>) -> Option<String> {
        let Some(r) = self.ratio else {
            return (self.lhs != 0.0).then(|| format!("rhs_core = 0 but lhs = {}", self.lhs));
        };
        if !r.is_finite() || r < 0.0 {
            return Some(format!("ratio {r} is not finite and nonnegative"));
        }
        if let Some((lo, hi)) = self.band {
            if r < lo || r > hi {
                return Some(format!("ratio {r} outside [{lo}, {hi}]"));
            }
        }
        match cap {
            Some(c) if r > c => Some(format!("ratio {r} exceeds cap {c}")),
            _ => None,
        }
    }

    fn record(&self) -> [String; 16] {
        [
            self.id.clone(),
            opt(self.p),
            opt(self.q),
            opt(self.eps),
            opt(self.lambda),
            opt(self.ap),
            opt(self.ainf_w),
            opt(self.ainf_sigma),
            num(self.lhs),
            num(self.rhs_core),
            opt(self.ratio),
            opt(self.d),
            self.family_size.map_or(String::new(), |n| n.to_string()),
            self.seed.to_string(),
            self.level.to_string(),
            opt(self.runtime_ms),
        ]
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), num)
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        Ok(Some(s.parse().with_context(|| format!("bad number `{s}`"))?))
    }
}

/// Serialize rows to CSV text (header always present).
pub fn to_csv(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    Ok(w.into_inner()?)
}

/// Read rows back from CSV (JSON-only fields come back empty).
pub fn from_csv(text: &[u8]) -> Result<Vec<Row>> {
    let mut rd = csv::Reader::from_reader(text);
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != COLUMNS {
        anyhow::bail!("unexpected CSV header {header:?}");
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let ctx = || format!("row {}", i + 2);
        let lhs = rec[8].parse().with_context(ctx)?;
        let rhs = rec[9].parse().with_context(ctx)?;
        let mut row = Row::new(&rec[0], "", lhs, rhs);
        row.p = parse_opt(&rec[1]).with_context(ctx)?;
        row.q = parse_opt(&rec[2]).with_context(ctx)?;
        row.eps = parse_opt(&rec[3]).with_context(ctx)?;
        row.lambda = parse_opt(&rec[4]).with_context(ctx)?;
        row.ap = parse_opt(&rec[5]).with_context(ctx)?;
        row.ainf_w = parse_opt(&rec[6]).with_context(ctx)?;
        row.ainf_sigma = parse_opt(&rec[7]).with_context(ctx)?;
        row.ratio = parse_opt(&rec[10]).with_context(ctx)?;
        row.d = parse_opt(&rec[11]).with_context(ctx)?;
        row.family_size = if rec[12].is_empty() {
            None
        } else {
            Some(rec[12].parse().with_context(ctx)?)
        };
        row.seed = rec[13].parse().with_context(ctx)?;
        row.level = rec[14].parse().with_context(ctx)?;
        row.runtime_ms = parse_opt(&rec[15]).with_context(ctx)?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Serialize, PartialEq)]
pub struct IdSummary {
    pub rows: usize,
    pub flagged: usize,
    pub max_ratio: f64,
    pub cap: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub row: usize,
    pub id: String,
    pub case: String,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub config_sha256: Option<String>,
    pub summary: BTreeMap<String, IdSummary>,
    pub failures: Vec<Failure>,
    pub rows: &'a [Row],
}

/// Per-row failures under the given caps.
pub fn failures(rows: &[Row], caps: &BTreeMap<String, f64>) -> Vec<Failure> {
    rows.iter()
        .enumerate()
        .filter_map(|(i, r)| {
            r.failure(caps.get(&r.id).copied()).map(|reason| Failure {
                row: i,
                id: r.id.clone(),
                case: r.case.clone(),
                reason,
            })
        })
        .collect()
}

/// Max ratio per inequality id.
pub fn max_ratios(rows: &[Row]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for r in rows {
        let e = out.entry(r.id.clone()).or_insert(0.0f64);
        if let Some(x) = r.ratio {
            *e = e.max(x);
        }
    }
    out
}

pub fn summarize<'a>(rows: &'a [Row], caps: &BTreeMap<String, f64>, config_sha256: Option<String>) -> Report<'a> {
    let failures = failures(rows, caps);
    let mut summary: BTreeMap<String, IdSummary> = BTreeMap::new();
    for r in rows {
        let s = summary.entry(r.id.clone()).or_insert(IdSummary {
            rows: 0,
            flagged: 0,
            max_ratio: 0.0,
            cap: caps.get(&r.id).copied(),
            failures: 0,
        });
        s.rows += 1;
        s.flagged += r.flagged() as usize;
        if let Some(x) = r.ratio {
            s.max_ratio = s.max_ratio.max(x);
        }
    }
    for f in &failures {
        if let Some(s) = summary.get_mut(&f.id) {
            s.failures += 1;
        }
    }
    Report {
        config_sha256,
        summary,
        failures,
        rows,
    }
}

/// Write `rows.csv`, `report.json` and `plotdata/<id>.csv` under `dir`.
pub fn write_outputs(dir: &Path, rows: &[Row], report: &Report) -> Result<()> {
    fs::create_dir_all(dir.join("plotdata")).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("rows.csv"), to_csv(rows)?)?;
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    fs::write(dir.join("report.json"), json)?;
    let mut by_id: BTreeMap<&str, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        by_id.entry(&r.id).or_default().push(r);
    }
    for (id, rs) in by_id {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["case", "p", "q", "eps", "lambda", "lhs", "rhs_core", "ratio", "L"])?;
        for r in rs {
            w.write_record([
                r.case.clone(),
                opt(r.p),
                opt(r.q),
                opt(r.eps),
                opt(r.lambda),
                num(r.lhs),
                num(r.rhs_core),
                opt(r.ratio),
                r.level.to_string(),
            ])?;
        }
        fs::write(dir.join("plotdata").join(format!("{id}.csv")), w.into_inner()?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_is_flagged_not_divided() {
        let r = Row::new("x", "", 0.0, 0.0);
        assert!(r.flagged());
        assert_eq!(r.failure(None), None);
        let bad = Row::new("x", "", 1.0, 0.0);
        assert!(bad.failure(None).is_some());
    }

    #[test]
    fn caps_and_bands() {
        let r = Row::new("x", "", 2.0, 1.0);
        assert_eq!(r.ratio, Some(2.0));
        assert!(r.failure(Some(1.5)).is_some());
        assert!(r.failure(Some(2.5)).is_none());
        assert!(r.clone().at_most_one().failure(None).is_some());
    }

    #[test]
    fn csv_round_trip() {
        let mut r = Row::new("strong_single", "w=1", 0.3, 0.7).p(2.0).domination(16.0, 3);
        r.seed = 5;
        r.level = 4;
        let text = to_csv(&[r.clone()]).unwrap();
        let back = from_csv(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].ratio, r.ratio);
        assert_eq!(back[0].p, Some(2.0));
        assert_eq!(back[0].family_size, Some(3));
        assert_eq!(to_csv(&back).unwrap(), text);
    }

    #[test]
    fn empty_csv_is_header_only() {
        let text = String::from_utf8(to_csv(&[]).unwrap()).unwrap();
        assert_eq!(text.trim_end(), COLUMNS.join(","));
        assert!(from_csv(text.as_bytes()).unwrap().is_empty());
    }
}
