//! Repeated spectra of one ensemble and their empirical moments.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specmix_core::{Error, Result};

use crate::ensemble::EnsembleSpec;
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub ensemble: EnsembleSpec,
    pub seed: u64,
    pub repetitions: usize,
    /// Real dimension of the scalar field.
    pub beta: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    /// Ascending eigenvalues, one list per repetition.
    pub eigenvalues: Vec<Vec<f64>>,
    /// `moments[r][k] = (1/N) sum_i lambda_i^k` for repetition `r`, `k = 0..=k_max`.
    pub moments: Vec<Vec<f64>>,
    pub meta: SampleMeta,
}

/// Means and standard errors of the per-repetition moments, `k = 0..=k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

pub(crate) fn power_moments(ev: &[f64], k_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    for &x in ev {
        let mut p = 1.0;
        for slot in out.iter_mut() {
            *slot += p;
            p *= x;
        }
    }
    let n = ev.len().max(1) as f64;
    out.iter_mut().for_each(|m| *m /= n);
    out
}

/// Mean and standard error of `xs`. Values are summed in sorted order, so the
/// result does not depend on the order of `xs`.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let xs = &sorted[..];
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl SpectralSample {
    /// Builds a sample from given spectra, sorting each and computing moments.
    pub fn from_spectra(mut eigenvalues: Vec<Vec<f64>>, k_max: usize, meta: SampleMeta) -> Self {
        for ev in eigenvalues.iter_mut() {
            ev.sort_by(f64::total_cmp);
        }
        let moments = eigenvalues.iter().map(|ev| power_moments(ev, k_max)).collect();
        SpectralSample { eigenvalues, moments, meta }
    }

    pub fn repetitions(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn k_max(&self) -> usize {
        self.moments.first().map_or(0, |m| m.len() - 1)
    }

    pub fn empirical_moments(&self, k_max: usize) -> Result<EmpiricalMoments> {
        if self.repetitions() < 2 {
            return Err(Error::invalid("standard errors need at least 2 repetitions"));
        }
        if k_max > self.k_max() {
            return Err(Error::invalid(format!("sample holds moments up to {}, asked for {k_max}", self.k_max())));
        }
        let mut mean = Vec::with_capacity(k_max + 1);
        let mut se = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let xs: Vec<f64> = self.moments.iter().map(|m| m[k]).collect();
            let (m, s) = mean_se(&xs);
            mean.push(m);
            se.push(s);
        }
        Ok(EmpiricalMoments { mean, se })
    }

    /// One row per eigenvalue: `repetition,index,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("repetition,index,value\n");
        for (r, ev) in self.eigenvalues.iter().enumerate() {
            for (i, x) in ev.iter().enumerate() {
                let _ = writeln!(s, "{r},{i},{x:e}");
            }
        }
        s
    }

    /// Moments, standard errors and metadata, without the raw spectra.
    pub fn summary(&self) -> Result<serde_json::Value> {
        let em = self.empirical_moments(self.k_max())?;
        Ok(serde_json::json!({
            "meta": self.meta,
            "moments": em.mean,
            "standard_errors": em.se,
        }))
    }
}

/// Samples `repetitions` matrices of `spec` and keeps their spectra.
///
/// Repetitions run in parallel on the ambient rayon pool; each uses its own
/// stream and runs its linear algebra single-threaded, and results are
/// collected in repetition order, so the output does not depend on the
/// thread count.
pub fn simulate(spec: &EnsembleSpec, repetitions: usize, k_max: usize) -> Result<SpectralSample> {
    spec.validate(false)?;
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    faer::set_global_parallelism(faer::Par::Seq);
    let spectra: Vec<Result<Vec<f64>>> = (0..repetitions as u64)
        .into_par_iter()
        .map(|rep| spec.sample_with(&mut stream(spec.seed, rep))?.eigenvalues())
        .collect();
    let eigenvalues = spectra.into_iter().collect::<Result<Vec<_>>>()?;
    let meta = SampleMeta { ensemble: spec.clone(), seed: spec.seed, repetitions, beta: spec.field().beta() };
    Ok(SpectralSample::from_spectra(eigenvalues, k_max, meta))
}
