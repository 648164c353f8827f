//! Moment-scaling functionals `Gamma` evaluated on degree profiles.
//!
//! A profile is a multiset of positive integers; it is canonicalized to
//! non-increasing order before evaluation.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A non-negative time, possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Time {
    Finite(f64),
    Infinite,
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Time::Finite(t) => s.serialize_f64(*t),
            Time::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Time;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Time, E> {
                Ok(Time::Finite(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Time, E> {
                Ok(Time::Finite(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Time, E> {
                Ok(Time::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Time, E> {
                match v {
                    "inf" | "infinity" | "+inf" => Ok(Time::Infinite),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GammaVariant {
    /// `Gamma == 1`: delocalized, non-unit-norm sparse vectors.
    Unit,
    /// Localized-to-delocalized interpolation at time `t`.
    Interpolation(Time),
    /// Truncated Pareto tails with index `alpha` cut at `b * a_N`.
    HeavyTailTrunc { alpha: f64, b: f64 },
    /// `prod c_{2 n_l}`; `c[n - 1]` holds `c_{2n}`.
    ProductSequence(Vec<f64>),
    Tabulated(BTreeMap<Vec<u32>, f64>),
}

/// A `Gamma` functional together with its declared properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GammaConfig", into = "GammaConfig")]
pub struct GammaSpec {
    variant: GammaVariant,
    unit_norm: bool,
    root_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabEntry {
    pub profile: Vec<u32>,
    pub value: f64,
}

/// JSON shape of a [`GammaSpec`], e.g. `{"variant": "interpolation", "t": 1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaConfig {
    Unit,
    Interpolation {
        t: Time,
    },
    HeavyTail {
        alpha: f64,
        #[serde(rename = "B")]
        b: f64,
    },
    Product {
        c: Vec<f64>,
    },
    Tabulated {
        entries: Vec<TabEntry>,
        #[serde(default)]
        unit_norm: bool,
    },
}

impl TryFrom<GammaConfig> for GammaSpec {
    type Error = Error;

    fn try_from(c: GammaConfig) -> Result<Self> {
        match c {
            GammaConfig::Unit => Ok(GammaSpec::unit()),
            GammaConfig::Interpolation { t: Time::Finite(t) } => GammaSpec::interpolation(t),
            GammaConfig::Interpolation { t: Time::Infinite } => Ok(GammaSpec::free_limit()),
            GammaConfig::HeavyTail { alpha, b } => GammaSpec::heavy_tail(alpha, b),
            GammaConfig::Product { c } => GammaSpec::product(c),
            GammaConfig::Tabulated { entries, unit_norm } => {
                let table = entries.into_iter().map(|e| (e.profile, e.value)).collect();
                GammaSpec::tabulated(table, unit_norm)
            }
        }
    }
}

impl From<GammaSpec> for GammaConfig {
    fn from(s: GammaSpec) -> Self {
        match s.variant {
            GammaVariant::Unit => GammaConfig::Unit,
            GammaVariant::Interpolation(t) => GammaConfig::Interpolation { t },
            GammaVariant::HeavyTailTrunc { alpha, b } => GammaConfig::HeavyTail { alpha, b },
            GammaVariant::ProductSequence(c) => GammaConfig::Product { c },
            GammaVariant::Tabulated(table) => GammaConfig::Tabulated {
                entries: table
                    .into_iter()
                    .map(|(profile, value)| TabEntry { profile, value })
                    .collect(),
                unit_norm: s.unit_norm,
            },
        }
    }
}

impl GammaSpec {
    pub fn unit() -> Self {
        GammaSpec {
            variant: GammaVariant::Unit,
            unit_norm: false,
            root_floor: 1.0,
        }
    }

    pub fn interpolation(t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("interpolation time must be finite and >= 0, got {t}")));
        }
        Ok(GammaSpec {
            variant: GammaVariant::Interpolation(Time::Finite(t)),
            unit_norm: true,
            root_floor: (-t).exp(),
        })
    }

    /// The `t -> infinity` endpoint: indicator of all-ones profiles.
    pub fn free_limit() -> Self {
        GammaSpec {
            variant: GammaVariant::Interpolation(Time::Infinite),
            unit_norm: true,
            root_floor: 0.0,
        }
    }

    pub fn heavy_tail(alpha: f64, b: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!("truncation B must be positive, got {b}")));
        }
        // inf_n (alpha / (2n - alpha))^(1/n) B^(2 - alpha/n); the terms tend to B^2.
        let root_floor = (1..=2000)
            .map(|n| {
                let n = n as f64;
                (alpha / (2.0 * n - alpha)).powf(1.0 / n) * b.powf(2.0 - alpha / n)
            })
            .fold(b * b, f64::min);
        Ok(GammaSpec {
            variant: GammaVariant::HeavyTailTrunc { alpha, b },
            unit_norm: false,
            root_floor,
        })
    }

    /// `c` lists `c_2, c_4, c_6, ...`.
    pub fn product(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() || !(c[0] > 0.0) {
            return Err(Error::invalid("product sequence needs c_2 > 0"));
        }
        if c.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("product sequence entries must be finite and >= 0"));
        }
        let root_floor = c
            .iter()
            .enumerate()
            .map(|(i, x)| x.powf(1.0 / (i + 1) as f64))
            .fold(f64::INFINITY, f64::min);
        Ok(GammaSpec {
            variant: GammaVariant::ProductSequence(c),
            unit_norm: false,
            root_floor,
        })
    }

    /// Keys are canonicalized to non-increasing order.
    pub fn tabulated(table: BTreeMap<Vec<u32>, f64>, unit_norm: bool) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (mut key, v) in table {
            if key.is_empty() || key.contains(&0) {
                return Err(Error::invalid("tabulated profiles must be non-empty and positive"));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("tabulated values must be finite and >= 0"));
            }
            key.sort_unstable_by(|a, b| b.cmp(a));
            clean.insert(key, v);
        }
        let root_floor = clean
            .iter()
            .filter(|(k, _)| k.len() == 1)
            .map(|(k, v)| v.powf(1.0 / k[0] as f64))
            .fold(f64::INFINITY, f64::min);
        Ok(GammaSpec {
            variant: GammaVariant::Tabulated(clean),
            unit_norm,
            root_floor: if root_floor.is_finite() { root_floor } else { 0.0 },
        })
    }

    pub fn variant(&self) -> &GammaVariant {
        &self.variant
    }

    /// True when the underlying vectors have squared norm exactly `N`.
    pub fn unit_norm(&self) -> bool {
        self.unit_norm
    }

    /// `inf_n Gamma(n)^(1/n)`.
    pub fn root_floor(&self) -> f64 {
        self.root_floor
    }

    /// A constant `C` with `Gamma(profile) <= C^(sum profile)`.
    pub fn growth_constant(&self) -> f64 {
        match &self.variant {
            GammaVariant::Unit => 1.0,
            GammaVariant::Interpolation(_) => 2.0,
            // Per entry: B^(2n - alpha) alpha / (2n - alpha) <= (max(1, B^2) max(1, alpha / (2 - alpha)))^n.
            GammaVariant::HeavyTailTrunc { alpha, b } => {
                (b * b).max(1.0) * (alpha / (2.0 - alpha)).max(1.0)
            }
            GammaVariant::ProductSequence(c) => {
                let s = c
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x.powf(1.0 / (2 * (i + 1)) as f64))
                    .fold(0.0, f64::max);
                (s * s).max(1.0)
            }
            GammaVariant::Tabulated(t) => t
                .iter()
                .map(|(k, v)| v.powf(1.0 / k.iter().sum::<u32>() as f64))
                .fold(1.0, f64::max),
        }
    }

    /// Stable identity string, used as part of memo keys.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(self).expect("gamma specs serialize")
    }

    /// Evaluates on a profile in any order.
    pub fn eval(&self, profile: &[u32]) -> Result<f64> {
        if profile.is_empty() {
            return Err(Error::invalid("empty profile"));
        }
        if profile.contains(&0) {
            return Err(Error::invalid("profile entries must be positive"));
        }
        let mut p = profile.to_vec();
        p.sort_unstable_by(|a, b| b.cmp(a));
        self.eval_sorted(&p)
    }

    /// Evaluates on a non-empty, positive, non-increasing profile.
    pub(crate) fn eval_sorted(&self, p: &[u32]) -> Result<f64> {
        Ok(match &self.variant {
            GammaVariant::Unit => 1.0,
            GammaVariant::Interpolation(t) => interpolation_value(*t, p),
            GammaVariant::HeavyTailTrunc { alpha, b } => p
                .iter()
                .map(|&n| {
                    let e = 2.0 * n as f64 - alpha;
                    b.powf(e) * alpha / e
                })
                .product(),
            GammaVariant::ProductSequence(c) => {
                let mut acc = 1.0;
                for &n in p {
                    acc *= c.get(n as usize - 1).copied().ok_or_else(|| {
                        Error::invalid(format!("product sequence has no c_{}", 2 * n))
                    })?;
                }
                acc
            }
            GammaVariant::Tabulated(t) => *t
                .get(p)
                .ok_or_else(|| Error::invalid(format!("no tabulated value for profile {p:?}")))?,
        })
    }
}

fn interpolation_value(t: Time, p: &[u32]) -> f64 {
    let big = p.iter().filter(|&&n| n >= 2).count();
    let ones = (p.len() - big) as i32;
    match t {
        Time::Infinite => {
            if big == 0 {
                1.0
            } else {
                0.0
            }
        }
        Time::Finite(t) => {
            let q = -(-t).exp_m1();
            let e = (-t).exp();
            match big {
                0 => q.powi(ones) + ones as f64 * e * q.powi(ones - 1),
                1 => (-(p[0] as f64) * t).exp() * q.powi(ones),
                _ => 0.0,
            }
        }
    }
}

/// Outcome of the norm-consistency recursion check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub passed: bool,
    pub profiles_checked: usize,
    /// First violated profile with both sides of the recursion.
    pub first_violation: Option<(Vec<u32>, f64, f64)>,
}

/// Non-increasing multisets of positive integers with total `<= k_max`.
pub fn profiles_up_to(k_max: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for n in (1..=max.min(rest)).rev() {
            cur.push(n);
            rec(rest - n, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for s in 1..=k_max as u32 {
        rec(s, s, &mut Vec::new(), &mut out);
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Checks `Gamma(1) = 1` and
/// `Gamma(n_1..n_k) = sum_j Gamma(.., n_j + 1, ..) + Gamma(n_1..n_k, 1)`
/// on every profile of total `<= k_max`, without the unit-norm precondition.
pub fn recursion_check(spec: &GammaSpec, k_max: usize) -> Result<ConsistencyReport> {
    let g1 = spec.eval(&[1])?;
    if !close(g1, 1.0) {
        return Ok(ConsistencyReport {
            passed: false,
            profiles_checked: 0,
            first_violation: Some((vec![1], g1, 1.0)),
        });
    }
    let profiles = profiles_up_to(k_max);
    for (i, p) in profiles.iter().enumerate() {
        let lhs = spec.eval(p)?;
        let mut rhs = 0.0;
        for j in 0..p.len() {
            let mut q = p.clone();
            q[j] += 1;
            rhs += spec.eval(&q)?;
        }
        let mut q = p.clone();
        q.push(1);
        rhs += spec.eval(&q)?;
        if !close(lhs, rhs) {
            return Ok(ConsistencyReport {
                passed: false,
                profiles_checked: i + 1,
                first_violation: Some((p.clone(), lhs, rhs)),
            });
        }
    }
    Ok(ConsistencyReport {
        passed: true,
        profiles_checked: profiles.len(),
        first_violation: None,
    })
}

/// [`recursion_check`] for specs declared unit-norm; others are a contract error.
pub fn gamma_consistency_check(spec: &GammaSpec, k_max: usize) -> Result<ConsistencyReport> {
    if !spec.unit_norm {
        return Err(Error::contract(
            "the norm recursion only applies to unit-norm vector models",
        ));
    }
    recursion_check(spec, k_max)
}
