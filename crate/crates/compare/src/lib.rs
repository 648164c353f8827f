//! Empirical spectra against limit moments and reference laws.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use specmix_core::moments::MomentTable;
use specmix_core::{Error, Result};
use specmix_lab::{c64, SpectralSample};

/// Default gate on `|z|`.
pub const DEFAULT_GATE: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: usize,
    pub analytic: f64,
    pub empirical: f64,
    pub se: f64,
    pub z: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyPoint {
    pub z: [f64; 2],
    pub value: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label: String,
    pub gate: f64,
    pub rows: Vec<MomentRow>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy_transform: Option<Vec<CauchyPoint>>,
}

/// `z_k = (mean_k - m_k) / SE_k` for every `k` both sides hold; passes iff
/// every `|z_k| <= gate`.
pub fn compare_moments(s: &SpectralSample, m: &MomentTable, gate: f64) -> Result<ComparisonReport> {
    if !(gate > 0.0) {
        return Err(Error::invalid(format!("gate must be positive, got {gate}")));
    }
    let k_max = s.k_max().min(m.k_max());
    if k_max == 0 {
        return Err(Error::invalid("sample and table share no moment order"));
    }
    let em = s.empirical_moments(k_max)?;
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let analytic = m.moment(k);
        let (empirical, se) = (em.mean[k], em.se[k]);
        let diff = empirical - analytic;
        let z = if se > 0.0 {
            diff / se
        } else if diff.abs() <= 1e-12 * analytic.abs().max(1.0) {
            0.0
        } else {
            return Err(Error::Degenerate(format!("k = {k}: zero standard error but mean {empirical} vs {analytic}")));
        };
        rows.push(MomentRow { k, analytic, empirical, se, z, passed: z.abs() <= gate });
    }
    let passed = rows.iter().all(|r| r.passed);
    Ok(ComparisonReport { label: String::new(), gate, rows, passed, histogram: None, cauchy_transform: None })
}

fn check_grid(grid: &[c64]) -> Result<()> {
    match grid.iter().find(|z| !(z.im > 0.0)) {
        Some(z) => Err(Error::invalid(format!("Cauchy transform point {z} is not in the upper half-plane"))),
        None => Ok(()),
    }
}

/// `G(z) = mean over all pooled eigenvalues of 1 / (z - lambda)`.
pub fn empirical_cauchy_transform(s: &SpectralSample, grid: &[c64]) -> Result<Vec<c64>> {
    check_grid(grid)?;
    let count: usize = s.eigenvalues.iter().map(Vec::len).sum();
    if count == 0 {
        return Err(Error::invalid("sample holds no eigenvalues"));
    }
    Ok(grid
        .iter()
        .map(|&z| s.eigenvalues.iter().flatten().map(|&x| 1.0 / (z - x)).sum::<c64>() / count as f64)
        .collect())
}

/// Cauchy transform of the semicircle law of variance `v`.
pub fn semicircle_transform(v: f64, z: c64) -> c64 {
    let s = (z * z - 4.0 * v).sqrt();
    let g = (z - s) / (2.0 * v);
    // the branch with Im G < 0 on the upper half-plane
    if g.im <= 0.0 {
        g
    } else {
        (z + s) / (2.0 * v)
    }
}

/// Absolutely continuous part of the Marchenko-Pastur law with ratio `lambda`
/// and unit scale. For `lambda < 1` there is also an atom `1 - lambda` at 0.
pub fn mp_density(lambda: f64, x: f64) -> f64 {
    let a = (1.0 - lambda.sqrt()).powi(2);
    let b = (1.0 + lambda.sqrt()).powi(2);
    if x <= a || x >= b || x <= 0.0 {
        return 0.0;
    }
    ((b - x) * (x - a)).sqrt() / (2.0 * std::f64::consts::PI * x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangePolicy {
    /// From the smallest to the largest eigenvalue.
    Full,
    /// From the `1 - q` to the `q` quantile; the rest is overflow.
    Quantile(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Normalized over the in-range mass, so `sum density * width = 1`.
    pub densities: Vec<f64>,
    /// Fraction of eigenvalues outside the range.
    pub overflow_mass: f64,
    pub policy: RangePolicy,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Density histogram pooling all repetitions.
pub fn histogram(s: &SpectralSample, bins: usize, policy: RangePolicy) -> Result<Histogram> {
    if s.repetitions() == 0 || bins == 0 {
        return Err(Error::invalid("need at least one repetition and one bin"));
    }
    let mut all: Vec<f64> = s.eigenvalues.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::invalid("sample holds no eigenvalues"));
    }
    all.sort_by(f64::total_cmp);
    let (lo, hi) = match policy {
        RangePolicy::Full => (all[0], all[all.len() - 1]),
        RangePolicy::Quantile(q) => {
            if !(q > 0.5 && q <= 1.0) {
                return Err(Error::invalid(format!("quantile must lie in (0.5, 1], got {q}")));
            }
            (quantile(&all, 1.0 - q), quantile(&all, q))
        }
    };
    let total = all.len() as f64;
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        // a point mass: one unit-width bin around it
        let inside = all.iter().filter(|&&x| x >= lo && x <= hi).count();
        return Ok(Histogram {
            edges: vec![lo - 0.5, lo + 0.5],
            densities: vec![1.0],
            overflow_mass: 1.0 - inside as f64 / total,
            policy,
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut inside = 0usize;
    for &x in &all {
        if x < lo || x > hi {
            continue;
        }
        inside += 1;
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
    let densities = counts.iter().map(|&c| c as f64 / (inside as f64 * width)).collect();
    Ok(Histogram { edges, densities, overflow_mass: 1.0 - inside as f64 / total, policy })
}

impl Histogram {
    /// `sum density * width`, which is 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.densities.iter().zip(self.edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum()
    }

    /// `edge_lo,edge_hi,density` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("edge_lo,edge_hi,density\n");
        for (d, e) in self.densities.iter().zip(self.edges.windows(2)) {
            let _ = writeln!(s, "{:e},{:e},{:e}", e[0], e[1], d);
        }
        s
    }

    /// Two whitespace-separated columns, bin centre and density.
    pub fn to_gnuplot(&self) -> String {
        let mut s = String::from("# centre density\n");
        for (d, e) in self.densities.iter().zip(self.edges.windows(2)) {
            let _ = writeln!(s, "{:e} {:e}", 0.5 * (e[0] + e[1]), d);
        }
        s
    }

    /// `max over bins |density - mean of f over the bin|`, with the bin mean
    /// of `f` by composite Simpson.
    pub fn sup_deviation(&self, f: impl Fn(f64) -> f64) -> f64 {
        const PANELS: usize = 64;
        let mut worst = 0.0f64;
        for (d, e) in self.densities.iter().zip(self.edges.windows(2)) {
            let h = (e[1] - e[0]) / PANELS as f64;
            let mut acc = f(e[0]) + f(e[1]);
            for i in 1..PANELS {
                acc += f(e[0] + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let avg = acc * h / 3.0 / (e[1] - e[0]);
            worst = worst.max((d - avg).abs());
        }
        worst
    }
}

/// Fraction of pooled eigenvalues within `radius` of an integer.
pub fn mass_near_integers(s: &SpectralSample, radius: f64) -> f64 {
    let count: usize = s.eigenvalues.iter().map(Vec::len).sum();
    let near = s.eigenvalues.iter().flatten().filter(|x| (*x - x.round()).abs() <= radius).count();
    near as f64 / count.max(1) as f64
}
