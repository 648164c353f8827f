//! Mean resolvents of the Cauchy ensemble.
//!
//! With `X_i` Cauchy and `U` satisfying `E[U U^*] = Gamma(1) I`, the mean
//! resolvent `E[(z - M)^{-1}]` is `(z + i Gamma(1) t)^{-1} I` in the limit of
//! fine triangular arrays.

use faer::linalg::matmul::matmul;
use faer::{c64, Accum, Mat, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specmix_core::levy::IdLaw;
use specmix_core::{Error, Result};

use crate::ensemble::{EnsembleKind, EnsembleSpec};
use crate::rng::stream;
use crate::sample::mean_se;
use crate::vectors::{Field, VectorKind};

fn check_grid(z: &[c64]) -> Result<()> {
    match z.iter().find(|z| !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite()) {
        Some(bad) => Err(Error::invalid(format!("resolvent point {bad} is not in the upper half-plane"))),
        None => Ok(()),
    }
}

/// Entrywise Monte Carlo mean of `(z I - M)^{-1}` for each `z`.
pub fn resolvent_mean(spec: &EnsembleSpec, z: &[c64], repetitions: usize) -> Result<Vec<Mat<c64>>> {
    check_grid(z)?;
    spec.validate(false)?;
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    let n = spec.n;
    let mut acc = vec![Mat::<c64>::zeros(n, n); z.len()];
    for rep in 0..repetitions as u64 {
        let (ev, v) = spec.sample(rep)?.eigen()?;
        for (zi, out) in z.iter().zip(acc.iter_mut()) {
            let scaled = Mat::from_fn(n, n, |i, k| v[(i, k)] / (zi - ev[k]));
            matmul(out.as_mut(), Accum::Add, scaled.as_ref(), v.adjoint(), c64::new(1.0, 0.0), Par::Seq);
        }
    }
    let r = 1.0 / repetitions as f64;
    for m in acc.iter_mut() {
        *m = Mat::from_fn(n, n, |i, j| m[(i, j)] * r);
    }
    Ok(acc)
}

fn default_refinement() -> usize {
    128
}

fn default_gate() -> f64 {
    4.0
}

fn real() -> Field {
    Field::Real
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub vector_scale: f64,
    pub repetitions: usize,
    /// Points `[re, im]` with `im > 0`.
    pub z_grid: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    pub n: usize,
    pub t: f64,
    pub z: Vec<[f64; 2]>,
    pub repetitions: usize,
    #[serde(default = "default_refinement")]
    pub refinement: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "real")]
    pub field: Field,
    /// Gate on `|mean - prediction| / SE` for each real and imaginary part.
    #[serde(default = "default_gate")]
    pub gate: f64,
    #[serde(default)]
    pub fit: Option<FitConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventPoint {
    pub z: [f64; 2],
    pub predicted: [f64; 2],
    /// Mean of the diagonal entries, `(1/N) Tr G`.
    pub diag_mean: [f64; 2],
    pub diag_se: [f64; 2],
    /// Mean of the off-diagonal entries, `(1^T G 1 - Tr G) / (N (N - 1))`.
    pub offdiag_mean: [f64; 2],
    pub offdiag_se: [f64; 2],
    pub max_abs_z: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub vector_scale: f64,
    /// `Gamma(1) t` with `Gamma(1) = vector_scale^2`.
    pub expected_t: f64,
    pub fitted_t: f64,
    pub per_point: Vec<f64>,
    pub relative_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub config: CauchyConfig,
    pub points: Vec<ResolventPoint>,
    pub fit: Option<FitReport>,
    pub passed: bool,
}

/// Tolerance on the fitted scale, relative.
pub const FIT_TOL: f64 = 0.05;

fn cauchy_spec(cfg: &CauchyConfig, scale: f64) -> EnsembleSpec {
    EnsembleSpec {
        n: cfg.n,
        seed: cfg.seed,
        vector_scale: scale,
        kind: EnsembleKind::TriangularArrayId {
            law: IdLaw::Cauchy { t: cfg.t },
            refinement: cfg.refinement,
            vectors: VectorKind::UniformSphere { field: cfg.field },
        },
    }
}

/// Per repetition and per `z`: the diagonal and off-diagonal entry means.
fn aggregates(spec: &EnsembleSpec, z: &[c64], repetitions: usize, seed_offset: u64) -> Result<Vec<Vec<(c64, c64)>>> {
    let n = spec.n as f64;
    (0..repetitions as u64)
        .into_par_iter()
        .map(|rep| {
            let m = spec.sample_with(&mut stream(spec.seed, rep + seed_offset))?;
            let (ev, v) = m.eigen()?;
            // |1^T v_k|^2 for each eigenvector
            let ones: Vec<f64> = (0..ev.len())
                .map(|k| (0..ev.len()).map(|i| v[(i, k)]).sum::<c64>().norm_sqr())
                .collect();
            Ok(z
                .iter()
                .map(|&zi| {
                    let mut tr = c64::new(0.0, 0.0);
                    let mut all = c64::new(0.0, 0.0);
                    for (&lam, &o) in ev.iter().zip(&ones) {
                        let g = 1.0 / (zi - lam);
                        tr += g;
                        all += g * o;
                    }
                    (tr / n, (all - tr) / (n * (n - 1.0)))
                })
                .collect())
        })
        .collect()
}

fn stats(xs: impl Iterator<Item = c64> + Clone) -> ([f64; 2], [f64; 2]) {
    let re: Vec<f64> = xs.clone().map(|x| x.re).collect();
    let im: Vec<f64> = xs.map(|x| x.im).collect();
    let (mr, sr) = mean_se(&re);
    let (mi, si) = mean_se(&im);
    ([mr, mi], [sr, si])
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Runs the resolvent check at `cfg.z` and, if configured, the scale fit.
pub fn cauchy_check(cfg: &CauchyConfig) -> Result<CauchyReport> {
    if !(cfg.t > 0.0) || cfg.repetitions < 2 {
        return Err(Error::invalid("need t > 0 and at least 2 repetitions"));
    }
    let z: Vec<c64> = cfg.z.iter().map(|p| c64::new(p[0], p[1])).collect();
    check_grid(&z)?;
    let spec = cauchy_spec(cfg, 1.0);
    spec.validate(false)?;
    faer::set_global_parallelism(Par::Seq);
    let per_rep = aggregates(&spec, &z, cfg.repetitions, 0)?;
    let mut passed = true;
    let mut points = Vec::new();
    for (j, &zj) in z.iter().enumerate() {
        let pred = 1.0 / (zj + c64::new(0.0, cfg.t));
        let (dm, ds) = stats(per_rep.iter().map(|r| r[j].0));
        let (om, os) = stats(per_rep.iter().map(|r| r[j].1));
        let zs = [
            z_score(dm[0] - pred.re, ds[0]),
            z_score(dm[1] - pred.im, ds[1]),
            z_score(om[0], os[0]),
            z_score(om[1], os[1]),
        ];
        let max_abs_z = zs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let ok = max_abs_z <= cfg.gate;
        passed &= ok;
        points.push(ResolventPoint {
            z: cfg.z[j],
            predicted: [pred.re, pred.im],
            diag_mean: dm,
            diag_se: ds,
            offdiag_mean: om,
            offdiag_se: os,
            max_abs_z,
            passed: ok,
        });
    }
    let fit = match &cfg.fit {
        None => None,
        Some(f) => {
            let grid: Vec<c64> = f.z_grid.iter().map(|p| c64::new(p[0], p[1])).collect();
            check_grid(&grid)?;
            if f.repetitions < 1 || grid.is_empty() {
                return Err(Error::invalid("fit needs repetitions and a non-empty grid"));
            }
            let spec = cauchy_spec(cfg, f.vector_scale);
            spec.validate(false)?;
            // fresh streams, disjoint from the main run
            let per_rep = aggregates(&spec, &grid, f.repetitions, 1 << 32)?;
            let per_point: Vec<f64> = grid
                .iter()
                .enumerate()
                .map(|(j, &zj)| {
                    let g = per_rep.iter().map(|r| r[j].0).sum::<c64>() / per_rep.len() as f64;
                    // 1/G = z + i t'
                    (1.0 / g - zj).im
                })
                .collect();
            let fitted_t = per_point.iter().sum::<f64>() / per_point.len() as f64;
            let expected_t = f.vector_scale * f.vector_scale * cfg.t;
            let relative_error = (fitted_t - expected_t).abs() / expected_t;
            let ok = relative_error <= FIT_TOL;
            passed &= ok;
            Some(FitReport { vector_scale: f.vector_scale, expected_t, fitted_t, per_point, relative_error, passed: ok })
        }
    };
    Ok(CauchyReport { config: cfg.clone(), points, fit, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_resolvent_is_one_over_z() {
        let spec = EnsembleSpec {
            n: 6,
            seed: 0,
            vector_scale: 1.0,
            kind: EnsembleKind::TriangularArrayId {
                law: IdLaw::Dirac { gamma: 0.0 },
                refinement: 2,
                vectors: VectorKind::UniformSphere { field: Field::Complex },
            },
        };
        let z = c64::new(0.5, 2.0);
        let g = &resolvent_mean(&spec, &[z], 2).unwrap()[0];
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 / z } else { c64::new(0.0, 0.0) };
                assert!((g[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lower_half_plane_is_rejected() {
        let cfg = CauchyConfig {
            n: 4,
            t: 1.0,
            z: vec![[1.0, 0.0]],
            repetitions: 2,
            refinement: 2,
            seed: 0,
            field: Field::Real,
            gate: 4.0,
            fit: None,
        };
        assert!(matches!(cauchy_check(&cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn aggregates_agree_with_full_mean() {
        let cfg = CauchyConfig {
            n: 8,
            t: 1.0,
            z: vec![[0.0, 2.0]],
            repetitions: 3,
            refinement: 4,
            seed: 5,
            field: Field::Real,
            gate: 4.0,
            fit: None,
        };
        let spec = cauchy_spec(&cfg, 1.0);
        let z = c64::new(0.0, 2.0);
        let full = &resolvent_mean(&spec, &[z], 3).unwrap()[0];
        let agg = aggregates(&spec, &[z], 3, 0).unwrap();
        let diag = agg.iter().map(|r| r[0].0).sum::<c64>() / 3.0;
        let off = agg.iter().map(|r| r[0].1).sum::<c64>() / 3.0;
        let want_diag = (0..8).map(|i| full[(i, i)]).sum::<c64>() / 8.0;
        let want_off = ((0..8).flat_map(|i| (0..8).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| full[(i, j)]).sum::<c64>()) / 56.0;
        assert!((diag - want_diag).norm() < 1e-12);
        assert!((off - want_off).norm() < 1e-12);
    }
}
