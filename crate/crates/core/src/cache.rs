//! Append-only disk cache for Kloosterman tables.
//!
//! One CSV file per (group, multiplier hash, cusp, n, k); records are lines
//! `c,j,i,re,im` with 17-significant-digit floats, so a cache hit re-reads
//! bit-identically. The cache directory comes from `RADSUM_CACHE` (the CLI
//! defaults it to `./.radsum-cache`).

use crate::error::Result;
use crate::linalg::CMat;
use num::complex::Complex64;
use num::rational::Rational64;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "RADSUM_CACHE";

#[derive(Clone, Debug)]
pub struct KloostermanCache {
    dir: PathBuf,
}

/// Identity of one cached table (fixed pole exponent n and target k).
#[derive(Clone, Debug)]
pub struct TableKey {
    pub group: String,
    pub multiplier: String,
    pub cusp: String,
    pub n: Rational64,
    pub k: Rational64,
}

fn rat_tag(r: Rational64) -> String {
    let s = format!("{}over{}", r.numer(), r.denom());
    s.replace('-', "m")
}

impl TableKey {
    pub fn file_name(&self) -> String {
        format!(
            "{}__{}__{}__n{}__k{}.csv",
            self.group,
            self.multiplier,
            self.cusp,
            rat_tag(self.n),
            rat_tag(self.k)
        )
        .replace(['(', ')', '+'], "_")
    }
}

impl KloostermanCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(KloostermanCache { dir: dir.as_ref().to_path_buf() })
    }

    /// Cache rooted at `RADSUM_CACHE`, when that variable is set.
    pub fn from_env() -> Option<Self> {
        std::env::var(CACHE_ENV).ok().and_then(|d| Self::new(d).ok())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &TableKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// Load every cached S(c) for this key. A c is considered covered once
    /// any record for it exists (writers always emit all dim² entries).
    pub fn load(&self, key: &TableKey, dim: usize) -> Result<BTreeMap<i64, CMat>> {
        let mut out = BTreeMap::new();
        let path = self.path(key);
        if !path.exists() {
            return Ok(out);
        }
        let text = fs::read_to_string(&path)?;
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let c: i64 = parts.next().unwrap_or("").trim().parse().map_err(bad_line)?;
            let j: usize = parts.next().unwrap_or("").trim().parse().map_err(bad_line)?;
            let i: usize = parts.next().unwrap_or("").trim().parse().map_err(bad_line)?;
            let re: f64 = parts.next().unwrap_or("").trim().parse().map_err(bad_line)?;
            let im: f64 = parts.next().unwrap_or("").trim().parse().map_err(bad_line)?;
            let mat = out.entry(c).or_insert_with(|| CMat::zeros(dim));
            if j < dim && i < dim {
                mat.set(j, i, Complex64::new(re, im));
            }
        }
        Ok(out)
    }

    /// Append records for newly computed c values (one line per (c, j, i)).
    pub fn append(&self, key: &TableKey, rows: &BTreeMap<i64, CMat>) -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.path(key))?;
        let mut buf = String::new();
        for (&c, mat) in rows {
            for j in 0..mat.dim {
                for i in 0..mat.dim {
                    let z = mat.get(j, i);
                    buf.push_str(&format!("{c},{j},{i},{},{}\n", fmt17(z.re), fmt17(z.im)));
                }
            }
        }
        file.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Names and sizes of every cache file (for `cache inspect`).
    pub fn inspect(&self) -> Result<Vec<(String, u64)>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let entry = entry?;
            if entry.path().extension().and_then(|e| e.to_str()) == Some("csv") {
                out.push((
                    entry.file_name().to_string_lossy().into_owned(),
                    entry.metadata()?.len(),
                ));
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn clear(&self) -> Result<usize> {
        let mut n = 0;
        for entry in fs::read_dir(&self.dir)? {
            let entry = entry?;
            if entry.path().extension().and_then(|e| e.to_str()) == Some("csv") {
                fs::remove_file(entry.path())?;
                n += 1;
            }
        }
        Ok(n)
    }
}

fn bad_line<E: std::fmt::Display>(e: E) -> crate::error::RadError {
    crate::error::RadError::Invalid(format!("malformed cache record: {e}"))
}

/// 17 significant digits: round-trips every f64 exactly and reproducibly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
