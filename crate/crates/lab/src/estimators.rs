//! Finite-N estimates of `Gamma(n_1..n_k) ~ N^{k - sum n} E[prod |U(i)|^{2 n_i}]`.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specmix_core::partition::enumerate_partitions;
use specmix_core::{Error, Result};

use crate::rng::stream;
use crate::sample::mean_se;
use crate::vectors::VectorKind;

/// Longest profile accepted; the tuple sum enumerates its set partitions.
pub const MAX_PROFILE_LEN: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub profile: Vec<u32>,
    pub mean: f64,
    pub se: f64,
    pub draws: usize,
}

/// `sum over distinct (i_1..i_k) of prod_j a_{i_j}^{n_j}` from the power sums
/// `p[m] = sum_i a_i^m`, by Mobius inversion over set partitions of the
/// positions: `sum_sigma mu(sigma) prod_{B in sigma} p[sum_{j in B} n_j]`.
fn distinct_tuple_sum(p: &[f64], profile: &[u32]) -> Result<f64> {
    let mut total = 0.0;
    for sigma in enumerate_partitions(profile.len())? {
        let mut term = 1.0;
        for block in sigma.blocks() {
            let m: u32 = block.iter().map(|&j| profile[j]).sum();
            let size = block.len();
            // (-1)^(|B| - 1) (|B| - 1)!
            let mu = (1..size).fold(1.0, |acc, i| -acc * i as f64);
            term *= mu * p[m as usize];
        }
        total += term;
    }
    Ok(total)
}

/// Estimates each profile from the same `draws` vectors of dimension `n`.
///
/// Within a draw the statistic is averaged over all ordered tuples of
/// distinct coordinates, which is unbiased by exchangeability and keeps rare
/// large entries (as in sparse models) from being missed; draws are i.i.d.,
/// so the standard error is taken across draws.
pub fn gamma_hat(kind: &VectorKind, n: usize, profiles: &[Vec<u32>], draws: usize, seed: u64) -> Result<Vec<GammaEstimate>> {
    kind.check(false)?;
    if draws < 2 {
        return Err(Error::invalid("need at least 2 draws"));
    }
    for p in profiles {
        if p.is_empty() || p.len() > n || p.contains(&0) || p.len() > MAX_PROFILE_LEN {
            return Err(Error::invalid(format!(
                "profile {p:?} must be non-empty with positive entries and at most min(N, {MAX_PROFILE_LEN}) long"
            )));
        }
    }
    let top = profiles.iter().map(|p| p.iter().sum::<u32>()).max().unwrap_or(0) as usize;
    let nf = n as f64;
    let per_draw: Vec<Result<Vec<f64>>> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let mut u = vec![c64::new(0.0, 0.0); n];
            kind.sample(&mut stream(seed, d), &mut u);
            let mut power = vec![0.0; top + 1];
            for x in &u {
                let a = x.norm_sqr();
                let mut q = 1.0;
                for slot in power.iter_mut() {
                    *slot += q;
                    q *= a;
                }
            }
            profiles
                .iter()
                .map(|p| {
                    let k = p.len();
                    let total: u32 = p.iter().sum();
                    let tuples: f64 = (0..k).map(|i| nf - i as f64).product();
                    Ok(nf.powi(k as i32 - total as i32) * distinct_tuple_sum(&power, p)? / tuples)
                })
                .collect()
        })
        .collect();
    let per_draw = per_draw.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(profiles
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let xs: Vec<f64> = per_draw.iter().map(|d| d[j]).collect();
            let (mean, se) = mean_se(&xs);
            GammaEstimate { profile: p.clone(), mean, se, draws }
        })
        .collect())
}
