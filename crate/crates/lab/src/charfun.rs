//! `E[exp(i Tr(A M))]` by simulation against `exp(N E_U[Psi(U^* A U / N)])`.

use faer::c64;
use serde::{Deserialize, Serialize};
use specmix_core::levy::IdLaw;
use specmix_core::{Error, Result};

use crate::ensemble::{EnsembleKind, EnsembleSpec};
use crate::matrix::HermitianMatrix;
use crate::rng::stream;
use crate::sample::mean_se;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharFunReport {
    pub monte_carlo: [f64; 2],
    pub monte_carlo_se: f64,
    pub analytic: [f64; 2],
    /// Delta-method error of the inner Monte Carlo average.
    pub analytic_se: f64,
    pub discrepancy: f64,
    /// `discrepancy / sqrt(se_mc^2 + se_analytic^2)`.
    pub z: f64,
}

/// `u^* A u`.
fn quad_form(a: &HermitianMatrix, u: &[c64]) -> f64 {
    let n = u.len();
    let mut s = c64::new(0.0, 0.0);
    for j in 0..n {
        if u[j].norm_sqr() == 0.0 {
            continue;
        }
        let col: c64 = u.iter().enumerate().map(|(i, ui)| ui.conj() * a.get(i, j)).sum();
        s += col * u[j];
    }
    s.re
}

/// Complex mean and its standard error, `sqrt(se_re^2 + se_im^2)`.
fn complex_mean(xs: &[c64]) -> (c64, f64) {
    let re: Vec<f64> = xs.iter().map(|x| x.re).collect();
    let im: Vec<f64> = xs.iter().map(|x| x.im).collect();
    let (mr, sr) = mean_se(&re);
    let (mi, si) = mean_se(&im);
    (c64::new(mr, mi), sr.hypot(si))
}

/// Supports compound Poisson matrices, whose identity is exact at every `N`,
/// and triangular arrays of a Dirac law.
pub fn characteristic_functional(spec: &EnsembleSpec, a: &HermitianMatrix, repetitions: usize) -> Result<CharFunReport> {
    spec.validate(false)?;
    a.check()?;
    if a.n() != spec.n {
        return Err(Error::invalid(format!("A is {}x{}, ensemble has N = {}", a.n(), a.n(), spec.n)));
    }
    if repetitions < 2 {
        return Err(Error::invalid("need at least 2 repetitions"));
    }
    let (law, vectors) = match &spec.kind {
        EnsembleKind::CompoundPoissonMatrix { lambda, jumps, vectors } => {
            (IdLaw::CompoundPoisson { lambda: *lambda, jumps: jumps.clone() }, vectors)
        }
        EnsembleKind::TriangularArrayId { law: law @ IdLaw::Dirac { .. }, vectors, .. } => (law.clone(), vectors),
        _ => return Err(Error::Unsupported("characteristic functional needs a compound Poisson or Dirac ensemble".into())),
    };
    let nf = spec.n as f64;
    // Left side: Tr(A M) = (1/N) sum_i X_i U_i^* A U_i, from the rank-one terms.
    let mut lhs = Vec::with_capacity(repetitions);
    for rep in 0..repetitions as u64 {
        let mut tr = 0.0;
        spec.for_each_term(&mut stream(spec.seed, rep), |w, u| tr += w * quad_form(a, u) / nf)?;
        lhs.push(c64::new(0.0, tr).exp());
    }
    let (mc, mc_se) = complex_mean(&lhs);
    // Right side: inner expectation over fresh vectors.
    let mut rng = stream(spec.seed, 1 << 40);
    let mut u = vec![c64::new(0.0, 0.0); spec.n];
    let mut psi = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        vectors.sample(&mut rng, &mut u);
        if spec.vector_scale != 1.0 {
            u.iter_mut().for_each(|x| *x *= spec.vector_scale);
        }
        psi.push(law.levy_exponent(quad_form(a, &u) / nf));
    }
    let (psi_mean, psi_se) = complex_mean(&psi);
    let analytic = (psi_mean * nf).exp();
    let analytic_se = analytic.norm() * nf * psi_se;
    let discrepancy = (mc - analytic).norm();
    let se = mc_se.hypot(analytic_se);
    let z = if se > 0.0 { discrepancy / se } else if discrepancy == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(CharFunReport {
        monte_carlo: [mc.re, mc.im],
        monte_carlo_se: mc_se,
        analytic: [analytic.re, analytic.im],
        analytic_se,
        discrepancy,
        z,
    })
}
