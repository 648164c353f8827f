//! Rank of the perturbation made by truncating heavy-tailed columns.
//!
//! Truncation at `B a_N` changes a column with probability
//! `q_N = 1 - P(|Y| <= B a_N)^N -> 1 - exp(-B^-alpha)`, and each changed
//! column moves the matrix by a perturbation of rank at most two.

use faer::linalg::matmul::matmul;
use faer::{c64, Accum, Mat, Par, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specmix_core::{Error, Result};

use crate::rng::stream;
use crate::vectors::{pareto, phase, Field};

fn real() -> Field {
    Field::Real
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankChannelConfig {
    pub n: usize,
    /// `p / N`.
    pub ratio: f64,
    pub alpha: f64,
    pub b: f64,
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "real")]
    pub field: Field,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankRun {
    pub changed_columns: usize,
    pub rank_difference: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankChannelReport {
    pub config: RankChannelConfig,
    pub p: usize,
    /// `4 p (1 - exp(-B^-alpha))`.
    pub channel: f64,
    pub runs: Vec<RankRun>,
    pub fraction_below: f64,
    /// Every run had rank at most twice its changed-column count.
    pub rank_bound_held: bool,
    pub passed: bool,
}

/// Required fraction of runs below the channel.
pub const RANK_FRACTION: f64 = 0.95;

/// Relative eigenvalue floor of the column Gram matrix.
const RANK_TOL: f64 = 1e-10;

/// Rank of `M - M_hat` for one draw.
///
/// With `V_j = V_hat_j + E_j`, the difference is `W T W^*` for
/// `W = [V_hat_j, E_j]` over changed columns and an invertible `T`, so its
/// rank equals the rank of `W` whenever `W` has full column rank and is at
/// most that otherwise. The rank of `W` is read off the Gram matrix of its
/// normalized columns, which sidesteps the huge dynamic range of the raw
/// entries.
fn one_run(cfg: &RankChannelConfig, p: usize, run: u64) -> Result<RankRun> {
    let n = cfg.n;
    let cut = cfg.b * (n as f64).powf(1.0 / cfg.alpha);
    let mut rng = stream(cfg.seed, run);
    let mut cols: Vec<Vec<c64>> = Vec::new();
    let mut changed = 0;
    let mut kept = vec![c64::new(0.0, 0.0); n];
    let mut cut_off = vec![c64::new(0.0, 0.0); n];
    for _ in 0..p {
        let mut any = false;
        for i in 0..n {
            let y = pareto(&mut rng, cfg.alpha);
            let v = phase(&mut rng, cfg.field) * y;
            if y > cut {
                any = true;
                kept[i] = c64::new(0.0, 0.0);
                cut_off[i] = v;
            } else {
                kept[i] = v;
                cut_off[i] = c64::new(0.0, 0.0);
            }
        }
        if !any {
            continue;
        }
        changed += 1;
        for c in [&kept, &cut_off] {
            let norm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                cols.push(c.iter().map(|x| x / norm).collect());
            }
        }
    }
    let m = cols.len();
    if m == 0 {
        return Ok(RankRun { changed_columns: 0, rank_difference: 0 });
    }
    let ev = match cfg.field {
        Field::Real => {
            let w = Mat::from_fn(n, m, |i, j| cols[j][i].re);
            let mut g = Mat::<f64>::zeros(m, m);
            matmul(g.as_mut(), Accum::Replace, w.transpose(), w.as_ref(), 1.0, Par::Seq);
            g.self_adjoint_eigenvalues(Side::Lower)
        }
        Field::Complex => {
            let w = Mat::from_fn(n, m, |i, j| cols[j][i]);
            let mut g = Mat::<c64>::zeros(m, m);
            matmul(g.as_mut(), Accum::Replace, w.adjoint(), w.as_ref(), c64::new(1.0, 0.0), Par::Seq);
            g.self_adjoint_eigenvalues(Side::Lower)
        }
    }
    .map_err(|e| Error::contract(format!("eigensolver failed: {e:?}")))?;
    let top = ev.iter().cloned().fold(0.0f64, f64::max);
    let rank = ev.iter().filter(|&&x| x > RANK_TOL * top).count();
    Ok(RankRun { changed_columns: changed, rank_difference: rank })
}

pub fn rank_channel(cfg: &RankChannelConfig) -> Result<RankChannelReport> {
    if cfg.n < 2 || !(cfg.ratio > 0.0) || cfg.runs == 0 {
        return Err(Error::invalid("need N >= 2, ratio > 0 and at least one run"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 2.0) || !(cfg.b > 0.0) {
        return Err(Error::invalid("need alpha in (0, 2) and B > 0"));
    }
    faer::set_global_parallelism(Par::Seq);
    let p = (cfg.ratio * cfg.n as f64).round() as usize;
    let channel = 4.0 * p as f64 * -(-cfg.b.powf(-cfg.alpha)).exp_m1();
    let runs = (0..cfg.runs as u64)
        .into_par_iter()
        .map(|r| one_run(cfg, p, r))
        .collect::<Result<Vec<_>>>()?;
    let below = runs.iter().filter(|r| (r.rank_difference as f64) < channel).count();
    let fraction_below = below as f64 / runs.len() as f64;
    let rank_bound_held = runs.iter().all(|r| r.rank_difference <= 2 * r.changed_columns);
    Ok(RankChannelReport {
        config: cfg.clone(),
        p,
        channel,
        runs,
        fraction_below,
        rank_bound_held,
        passed: fraction_below >= RANK_FRACTION && rank_bound_held,
    })
}
