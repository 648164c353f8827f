//! Moments of the Brownian sphere model against their large-N limits.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specmix_core::{Error, Result};

use crate::rng::stream;
use crate::sample::mean_se;
use crate::vectors::VectorKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianConfig {
    pub n: usize,
    pub t: f64,
    pub steps: usize,
    pub draws: usize,
    #[serde(default)]
    pub seed: u64,
    /// Orders `n` of `N^{1-n} E|U(1)|^{2n}`, each in `{2, 3, 4}`.
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
}

fn default_orders() -> Vec<u32> {
    vec![2, 3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub order: u32,
    pub estimate: f64,
    pub se: f64,
    /// `e^{-nt}`.
    pub target: f64,
    /// The same quantity at this `N` from the exact moment ODE.
    pub finite_n_exact: f64,
    /// `3 SE + 5/N`.
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRow {
    /// `N^2 E[gamma_t(1,1,2,2)]`.
    pub estimate: f64,
    pub se: f64,
    pub finite_n_exact: f64,
    /// `11 t / N + 3 SE`.
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub profile: Vec<u32>,
    pub estimate: f64,
    pub se: f64,
    /// Large-N value of `Gamma_t` at this profile.
    pub target: f64,
    pub finite_n_exact: f64,
    /// Against `target`; this is what the gate reads.
    pub z: f64,
    /// Against `finite_n_exact`, which separates sampling and time-step error
    /// from the `O(1/N)` gap to the limit.
    pub z_finite_n: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianReport {
    pub config: BrownianConfig,
    pub orders: Vec<OrderRow>,
    pub cross: CrossRow,
    pub gamma: Vec<GammaRow>,
    pub passed: bool,
}

/// Exact expectations of the monomials `gamma_t(k_1..k_n) = N^{-n} prod |U(k_j)|^2`
/// that the checks need, from the linear ODE system they satisfy at finite `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactMoments {
    /// `e[n] = E[gamma_t(1,...,1)]` with `n` ones, `n = 0..=4`.
    pub single: [f64; 5],
    /// `E[gamma_t(1,2)]`.
    pub g12: f64,
    /// `E[gamma_t(1,1,2)]`.
    pub g112: f64,
    /// `E[gamma_t(1,1,2,2)]`.
    pub g1122: f64,
}

/// Integrates the moment ODE from the canonical-basis start with RK4.
pub fn exact_moments(n: usize, t: f64) -> ExactMoments {
    let nf = n as f64;
    // state: e1..e4, g12, g112, g1122 (e0 = 1)
    let rhs = |y: &[f64; 7]| -> [f64; 7] {
        let e = [1.0, y[0], y[1], y[2], y[3]];
        let mut d = [0.0; 7];
        for k in 1..=4usize {
            let kf = k as f64;
            d[k - 1] = -kf * (1.0 + (kf - 1.0) / nf) * e[k] + kf * kf / nf * e[k - 1];
        }
        let (g12, g112, g1122) = (y[4], y[5], y[6]);
        d[4] = -2.0 * (1.0 + 1.0 / nf) * g12 + 2.0 / nf * e[1];
        d[5] = -3.0 * (1.0 + 2.0 / nf) * g112 + (4.0 * g12 + e[2]) / nf;
        d[6] = -4.0 * (1.0 + 3.0 / nf) * g1122 + 8.0 / nf * g112;
        d
    };
    let mut y = [1.0 / nf, 1.0 / nf, 1.0 / nf, 1.0 / nf, 0.0, 0.0, 0.0];
    let steps = ((t * 2000.0).ceil() as usize).max(1);
    let h = t / steps as f64;
    let add = |a: &[f64; 7], b: &[f64; 7], s: f64| -> [f64; 7] { std::array::from_fn(|i| a[i] + s * b[i]) };
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&add(&y, &k1, h / 2.0));
        let k3 = rhs(&add(&y, &k2, h / 2.0));
        let k4 = rhs(&add(&y, &k3, h));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    ExactMoments { single: [1.0, y[0], y[1], y[2], y[3]], g12: y[4], g112: y[5], g1122: y[6] }
}

/// `Gamma_t` at the profiles `(1,...,1)` and `(n, 1, ..., 1)`, zero otherwise.
pub fn gamma_t(profile: &[u32], t: f64) -> f64 {
    let q = -(-t).exp_m1();
    let big: Vec<u32> = profile.iter().copied().filter(|&x| x >= 2).collect();
    let ones = (profile.len() - big.len()) as i32;
    match big.len() {
        0 => q.powi(ones) + ones as f64 * (-t).exp() * q.powi(ones - 1),
        1 => (-(big[0] as f64) * t).exp() * q.powi(ones),
        _ => 0.0,
    }
}

/// Per-draw statistics, averaged over coordinates by exchangeability.
struct DrawStats {
    /// `N^{1-n} |U(i)|^{2n}` averaged over `i`, indexed by `n = 0..=4`.
    single: [f64; 5],
    /// `N^{-2} |U(i)|^4 |U(j)|^4` over disjoint pairs.
    cross: f64,
    /// `|U(i)|^2 |U(j)|^2` over disjoint pairs.
    pair: f64,
}

fn draw_stats(u: &[c64]) -> DrawStats {
    let nf = u.len() as f64;
    let mut single = [0.0; 5];
    for x in u {
        let a = x.norm_sqr();
        let mut p = 1.0;
        for (k, s) in single.iter_mut().enumerate().skip(1) {
            p *= a;
            *s += p / nf.powi(k as i32 - 1);
        }
    }
    single.iter_mut().for_each(|s| *s /= nf);
    single[0] = 1.0;
    let pairs = u.len() / 2;
    let (mut cross, mut pair) = (0.0, 0.0);
    for c in u.chunks_exact(2) {
        let (a, b) = (c[0].norm_sqr(), c[1].norm_sqr());
        cross += a * a * b * b / (nf * nf);
        pair += a * b;
    }
    DrawStats { single, cross: cross / pairs as f64, pair: pair / pairs as f64 }
}

/// `diff / se`, with a zero standard error giving 0 or infinity.
fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn brownian_moment_check(cfg: &BrownianConfig, strict: bool) -> Result<BrownianReport> {
    if cfg.n < 2 || cfg.draws < 2 {
        return Err(Error::invalid("need N >= 2 and at least 2 draws"));
    }
    if let Some(bad) = cfg.orders.iter().find(|o| !(2..=4).contains(*o)) {
        return Err(Error::invalid(format!("order {bad} is outside 2..=4")));
    }
    let kind = VectorKind::BrownianSphere { t: cfg.t, steps: cfg.steps };
    kind.check(strict)?;
    let stats: Vec<DrawStats> = (0..cfg.draws as u64)
        .into_par_iter()
        .map(|d| {
            let mut u = vec![c64::new(0.0, 0.0); cfg.n];
            kind.sample(&mut stream(cfg.seed, d), &mut u);
            draw_stats(&u)
        })
        .collect();
    let nf = cfg.n as f64;
    let exact = exact_moments(cfg.n, cfg.t);
    let mut passed = true;
    let mut orders = Vec::new();
    for &o in &cfg.orders {
        let xs: Vec<f64> = stats.iter().map(|s| s.single[o as usize]).collect();
        let (estimate, se) = mean_se(&xs);
        let target = (-(o as f64) * cfg.t).exp();
        let tolerance = 3.0 * se + 5.0 / nf;
        let ok = (estimate - target).abs() <= tolerance;
        passed &= ok;
        orders.push(OrderRow { order: o, estimate, se, target, finite_n_exact: nf * exact.single[o as usize], tolerance, passed: ok });
    }
    let xs: Vec<f64> = stats.iter().map(|s| s.cross).collect();
    let (estimate, se) = mean_se(&xs);
    let bound = 11.0 * cfg.t / nf + 3.0 * se;
    let cross = CrossRow { estimate, se, finite_n_exact: nf * nf * exact.g1122, bound, passed: estimate <= bound };
    passed &= cross.passed;
    // N^{k - sum n} E[prod |U(i)|^{2 n_i}] for (2) and (1,1)
    let g2: Vec<f64> = stats.iter().map(|s| s.single[2]).collect();
    let g11: Vec<f64> = stats.iter().map(|s| s.pair).collect();
    let mut gamma = Vec::new();
    for (profile, xs, exact_value) in [(vec![2u32], g2, nf * exact.single[2]), (vec![1, 1], g11, nf * nf * exact.g12)] {
        let (estimate, se) = mean_se(&xs);
        let target = gamma_t(&profile, cfg.t);
        let z = z_score(estimate - target, se);
        let z_finite_n = z_score(estimate - exact_value, se);
        let ok = z.abs() <= 3.0;
        passed &= ok;
        gamma.push(GammaRow { profile, estimate, se, target, finite_n_exact: exact_value, z, z_finite_n, passed: ok });
    }
    Ok(BrownianReport { config: cfg.clone(), orders, cross, gamma, passed })
}
