//! Job configuration: JSON in, JSON out, with exact rationals as "p/q"
//! strings. Emission is canonical so configs round-trip byte-identically.

use num::complex::Complex64;
use num::rational::Rational64;
use radsum_core::group::{cusp_list, CuspData, GroupSpec};
use radsum_core::linalg::CMat;
use radsum_core::multiplier::MultiplierSystem;
use radsum_core::specfun::{Accumulation, PrecisionPolicy};
use radsum_core::{RadError, Result};
use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub group: GroupSpec,
    pub weight: Rational64,
    pub multiplier: MultiplierSpec,
    pub cusp: String,
    pub component: usize,
    pub exponent: Rational64,
    pub c_max: i64,
    pub k_max: Rational64,
    pub rect_k: i64,
    pub precision: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MultiplierSpec {
    Preset { name: String, power: i32 },
    Explicit { weight: Rational64, s: Vec<Vec<Complex64>>, t: Vec<Vec<Complex64>> },
    DirectSum(Vec<MultiplierSpec>),
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            group: GroupSpec::Full,
            weight: Rational64::new(0, 1),
            multiplier: MultiplierSpec::Preset { name: "trivial".into(), power: 0 },
            cusp: "inf".into(),
            component: 1,
            exponent: Rational64::new(-1, 1),
            c_max: 1000,
            k_max: Rational64::new(10, 1),
            rect_k: 40,
            precision: "standard".into(),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = num.parse().map_err(|_| bad(format!("bad rational {s:?}")))?;
    let d: i64 = den.parse().map_err(|_| bad(format!("bad rational {s:?}")))?;
    if d == 0 {
        return Err(bad(format!("bad rational {s:?}: zero denominator")));
    }
    Ok(Rational64::new(n, d))
}

pub fn fmt_rational(r: Rational64) -> String {
    if *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn bad(msg: String) -> RadError {
    RadError::Invalid(msg)
}

fn get<'v>(map: &'v Map<String, Value>, key: &str) -> Option<&'v Value> {
    map.get(key)
}

fn as_obj<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(format!("{what} must be a JSON object")))
}

impl JobConfig {
    pub fn from_json(v: &Value) -> Result<Self> {
        let mut cfg = JobConfig::default();
        let root = as_obj(v, "config")?;
        if let Some(g) = get(root, "group") {
            let g = as_obj(g, "group")?;
            let family = g.get("family").and_then(Value::as_str).unwrap_or("full");
            cfg.group = match family {
                "full" => GroupSpec::Full,
                "gamma0" => {
                    let level = g
                        .get("level")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| bad("gamma0 needs a level".into()))?;
                    GroupSpec::Gamma0(level as u32)
                }
                other => return Err(bad(format!("unknown group family {other:?}"))),
            };
        }
        if let Some(w) = get(root, "weight") {
            cfg.weight = parse_rational(w.as_str().ok_or_else(|| bad("weight must be a string".into()))?)?;
        }
        if let Some(m) = get(root, "multiplier") {
            cfg.multiplier = MultiplierSpec::from_json(m)?;
        }
        if let Some(p) = get(root, "pole") {
            let p = as_obj(p, "pole")?;
            if let Some(c) = p.get("cusp").and_then(Value::as_str) {
                cfg.cusp = c.to_string();
            }
            if let Some(c) = p.get("component").and_then(Value::as_u64) {
                cfg.component = c as usize;
            }
            if let Some(e) = p.get("exponent").and_then(Value::as_str) {
                cfg.exponent = parse_rational(e)?;
            }
        }
        if let Some(t) = get(root, "truncation") {
            let t = as_obj(t, "truncation")?;
            if let Some(c) = t.get("c_max").and_then(Value::as_i64) {
                cfg.c_max = c;
            }
            if let Some(k) = t.get("k_max").and_then(Value::as_str) {
                cfg.k_max = parse_rational(k)?;
            }
            if let Some(k) = t.get("rect_k").and_then(Value::as_i64) {
                cfg.rect_k = k;
            }
            if let Some(p) = t.get("precision").and_then(Value::as_str) {
                cfg.precision = p.to_string();
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Value {
        let group = match self.group {
            GroupSpec::Full => json!({"family": "full"}),
            GroupSpec::Gamma0(n) => json!({"family": "gamma0", "level": n}),
        };
        json!({
            "group": group,
            "weight": fmt_rational(self.weight),
            "multiplier": self.multiplier.to_json(),
            "pole": {
                "cusp": self.cusp,
                "component": self.component,
                "exponent": fmt_rational(self.exponent),
            },
            "truncation": {
                "c_max": self.c_max,
                "k_max": fmt_rational(self.k_max),
                "rect_k": self.rect_k,
                "precision": self.precision,
            },
        })
    }

    pub fn policy(&self) -> Result<PrecisionPolicy> {
        match self.precision.as_str() {
            "standard" => Ok(PrecisionPolicy::default()),
            "double-double" | "double_double" => Ok(PrecisionPolicy {
                accumulation: Accumulation::DoubleDouble,
                ..PrecisionPolicy::default()
            }),
            other => Err(bad(format!("unknown precision mode {other:?}"))),
        }
    }

    pub fn build_multiplier(&self) -> Result<MultiplierSystem> {
        self.multiplier.build(self.group, self.weight)
    }

    /// Resolve the pole cusp against the group's cusp list.
    pub fn find_cusp(&self) -> Result<CuspData> {
        if self.cusp == "inf" || self.cusp == "infinity" {
            return Ok(CuspData::infinity(&self.group));
        }
        let r = parse_rational(&self.cusp)?;
        cusp_list(&self.group)
            .into_iter()
            .find(|c| !c.is_infinity() && Rational64::new(c.numer, c.denom) == r)
            .ok_or_else(|| {
                RadError::Unsupported(format!(
                    "cusp {} is not among the representatives of {}",
                    self.cusp,
                    self.group.label()
                ))
            })
    }
}

impl MultiplierSpec {
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = as_obj(v, "multiplier")?;
        if let Some(name) = obj.get("preset").and_then(Value::as_str) {
            let power = obj.get("power").and_then(Value::as_i64).unwrap_or(0) as i32;
            return Ok(MultiplierSpec::Preset { name: name.to_string(), power });
        }
        if let Some(ex) = obj.get("explicit") {
            let ex = as_obj(ex, "explicit")?;
            let weight = parse_rational(
                ex.get("weight")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("explicit multiplier needs a weight".into()))?,
            )?;
            let s = parse_matrix(ex.get("s").ok_or_else(|| bad("explicit needs s".into()))?)?;
            let t = parse_matrix(ex.get("t").ok_or_else(|| bad("explicit needs t".into()))?)?;
            return Ok(MultiplierSpec::Explicit { weight, s, t });
        }
        if let Some(parts) = obj.get("direct_sum").and_then(Value::as_array) {
            let specs: Result<Vec<_>> = parts.iter().map(MultiplierSpec::from_json).collect();
            return Ok(MultiplierSpec::DirectSum(specs?));
        }
        Err(bad("multiplier must have preset, explicit, or direct_sum".into()))
    }

    pub fn to_json(&self) -> Value {
        match self {
            MultiplierSpec::Preset { name, power } => {
                if *power == 0 {
                    json!({"preset": name})
                } else {
                    json!({"preset": name, "power": power})
                }
            }
            MultiplierSpec::Explicit { weight, s, t } => json!({
                "explicit": {
                    "weight": fmt_rational(*weight),
                    "s": emit_matrix(s),
                    "t": emit_matrix(t),
                }
            }),
            MultiplierSpec::DirectSum(parts) => {
                json!({"direct_sum": parts.iter().map(|p| p.to_json()).collect::<Vec<_>>()})
            }
        }
    }

    pub fn build(&self, group: GroupSpec, weight: Rational64) -> Result<MultiplierSystem> {
        match self {
            MultiplierSpec::Preset { name, power } => match name.as_str() {
                "trivial" => MultiplierSystem::trivial(group, weight),
                "eta" => Ok(MultiplierSystem::eta_power(group, 1)),
                "conjugate-eta" | "conj-eta" => Ok(MultiplierSystem::eta_power(group, -1)),
                "eta_power" => Ok(MultiplierSystem::eta_power(group, *power)),
                other => Err(bad(format!("unknown preset {other:?}"))),
            },
            MultiplierSpec::Explicit { weight, s, t } => {
                let sm = rows_to_cmat(s)?;
                let tm = rows_to_cmat(t)?;
                MultiplierSystem::explicit(group, *weight, sm, tm)
            }
            MultiplierSpec::DirectSum(parts) => {
                let built: Result<Vec<_>> =
                    parts.iter().map(|p| p.build(group, weight)).collect();
                MultiplierSystem::direct_sum(built?)
            }
        }
    }
}

fn parse_matrix(v: &Value) -> Result<Vec<Vec<Complex64>>> {
    let rows = v.as_array().ok_or_else(|| bad("matrix must be an array of rows".into()))?;
    rows.iter()
        .map(|row| {
            let row = row.as_array().ok_or_else(|| bad("matrix row must be an array".into()))?;
            row.iter()
                .map(|z| {
                    let pair = z.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                        bad("matrix entry must be a [re, im] pair".into())
                    })?;
                    Ok(Complex64::new(
                        pair[0].as_f64().unwrap_or(f64::NAN),
                        pair[1].as_f64().unwrap_or(f64::NAN),
                    ))
                })
                .collect()
        })
        .collect()
}

fn emit_matrix(rows: &[Vec<Complex64>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                Value::Array(row.iter().map(|z| json!([z.re, z.im])).collect())
            })
            .collect(),
    )
}

fn rows_to_cmat(rows: &[Vec<Complex64>]) -> Result<CMat> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(bad("generator images must be square".into()));
    }
    Ok(CMat::from_rows(rows))
}
