//! Golden ratio caps, stored as `<dir>/<sha256 of the config>.json` with one
//! cap table per grid level.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::rows::{max_ratios, Row};

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Golden {
    pub config_sha256: String,
    /// Level → inequality id → cap on the max ratio.
    pub caps: BTreeMap<u32, BTreeMap<String, f64>>,
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn path_for(dir: &Path, hash: &str) -> PathBuf {
    dir.join(format!("{hash}.json"))
}

/// The golden file for `hash`, if one exists.
pub fn load(dir: &Path, hash: &str) -> Result<Option<Golden>> {
    let path = path_for(dir, hash);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let g: Golden = serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(g))
}

/// Round up to two significant digits.
pub fn round_up(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return x;
    }
    let e = x.log10().floor() as i32 - 1;
    let (r, step) = if e >= 0 {
        let s = 10f64.powi(e);
        ((x / s).ceil() * s, s)
    } else {
        let m = 10f64.powi(-e);
        ((x * m).ceil() / m, 1.0 / m)
    };
    if r < x {
        r + step
    } else {
        r
    }
}

/// Record the observed max ratio of each id, rounded up, as the caps for
/// `level`.
pub fn freeze(golden: &mut Golden, level: u32, rows: &[Row]) {
    let caps = max_ratios(rows)
        .into_iter()
        .map(|(id, m)| (id, round_up(m)))
        .collect();
    golden.caps.insert(level, caps);
}

pub fn store(dir: &Path, golden: &Golden) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = path_for(dir, &golden.config_sha256);
    let mut text = serde_json::to_vec_pretty(golden)?;
    text.push(b'\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
