//! Matrix ensembles `(1/N) sum_i X_i U_i U_i^*` and their samplers.

use faer::c64;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use specmix_core::levy::{IdLaw, Jump};
use specmix_core::{Error, Result};

use crate::matrix::{HermitianMatrix, RankOneSum};
use crate::rng::{stream, Rng};
use crate::vectors::{normal, Field, VectorKind};

fn one() -> f64 {
    1.0
}

fn default_refinement() -> usize {
    64
}

/// Entry law of an `N x p` matrix `X` in `(1/N) X X^*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryFamily {
    /// `sqrt(N) B e^{i theta}`, `B` Bernoulli(1/N): `E|X|^k / N^(k/2-1) = 1`.
    SparseBernoulliPhase,
    /// Standard Gaussian entries: only `c_2 = 1` survives.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleKind {
    /// Poisson(`N lambda`) many terms with weights drawn from `jumps`.
    CompoundPoissonMatrix { lambda: f64, jumps: Vec<Jump>, vectors: VectorKind },
    /// `N * refinement` terms with weights from the `refinement`-th
    /// convolution root of `law`.
    TriangularArrayId {
        law: IdLaw,
        #[serde(default = "default_refinement")]
        refinement: usize,
        vectors: VectorKind,
    },
    /// `p = round(ratio N)` terms; weights from `weights`, or 1 when absent.
    CovarianceMatrix {
        ratio: f64,
        #[serde(default)]
        weights: Option<Vec<Jump>>,
        vectors: VectorKind,
    },
    /// `(1/N) X X^*` for an `N x round(ratio N)` matrix of i.i.d. entries.
    ExplodingCovariance {
        entries: EntryFamily,
        ratio: f64,
        #[serde(default)]
        field: Field,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Every vector is multiplied by this, so `Gamma(1)` becomes its square.
    #[serde(default = "one")]
    pub vector_scale: f64,
    pub kind: EnsembleKind,
}

fn check_jumps(jumps: &[Jump]) -> Result<()> {
    if jumps.is_empty() {
        return Err(Error::invalid("jump law has no atoms"));
    }
    let total: f64 = jumps.iter().map(|j| j.p).sum();
    if jumps.iter().any(|j| !(j.p >= 0.0) || !j.x.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("jump law must have finite atoms and probabilities summing to 1"));
    }
    Ok(())
}

fn draw_jump(rng: &mut Rng, jumps: &[Jump]) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for j in jumps {
        acc += j.p;
        if u < acc {
            return j.x;
        }
    }
    jumps[jumps.len() - 1].x
}

fn poisson(rng: &mut Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// A sampler for `mu^{*1/n}`.
#[derive(Clone, Debug)]
enum Root {
    Constant(f64),
    Gaussian { mean: f64, sd: f64 },
    Cauchy { scale: f64 },
    /// Drift plus Gaussian plus compound Poisson with the given rate and jumps.
    Mixed { drift: f64, sd: f64, rate: f64, jumps: Vec<Jump> },
}

impl Root {
    fn new(law: &IdLaw, n: usize) -> Result<Root> {
        law.validate()?;
        let nf = n as f64;
        Ok(match law {
            IdLaw::Dirac { gamma } => Root::Constant(gamma / nf),
            IdLaw::GaussianStd => Root::Gaussian { mean: 0.0, sd: (1.0 / nf).sqrt() },
            IdLaw::Cauchy { t } => Root::Cauchy { scale: t / nf },
            IdLaw::CompoundPoisson { lambda, jumps } => Root::Mixed { drift: 0.0, sd: 0.0, rate: lambda / nf, jumps: jumps.clone() },
            IdLaw::LevyPair { gamma, sigma } => {
                // Psi = i gamma xi - w_0 xi^2 / 2
                //     + sum_t w (e^{i t xi} - 1 - i t xi / (1 + t^2)) (1 + t^2) / t^2
                let mut drift = *gamma;
                let mut var = 0.0;
                let mut rates = Vec::new();
                for a in sigma {
                    if a.t == 0.0 {
                        var += a.w;
                    } else if a.w > 0.0 {
                        drift -= a.w / a.t;
                        rates.push((a.t, a.w * (1.0 + a.t * a.t) / (a.t * a.t)));
                    }
                }
                let rate: f64 = rates.iter().map(|r| r.1).sum();
                let jumps = rates.iter().map(|&(x, r)| Jump { x, p: r / rate }).collect();
                Root::Mixed { drift: drift / nf, sd: (var / nf).sqrt(), rate: rate / nf, jumps }
            }
        })
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            Root::Constant(c) => *c,
            Root::Gaussian { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
            Root::Cauchy { scale } => {
                let v: f64 = rng.random();
                scale * (std::f64::consts::PI * (v - 0.5)).tan()
            }
            Root::Mixed { drift, sd, rate, jumps } => {
                let mut x = *drift;
                if *sd > 0.0 {
                    x += sd * rng.sample::<f64, _>(StandardNormal);
                }
                for _ in 0..poisson(rng, *rate) {
                    x += draw_jump(rng, jumps);
                }
                x
            }
        }
    }
}

impl EnsembleSpec {
    pub fn field(&self) -> Field {
        match &self.kind {
            EnsembleKind::CompoundPoissonMatrix { vectors, .. }
            | EnsembleKind::TriangularArrayId { vectors, .. }
            | EnsembleKind::CovarianceMatrix { vectors, .. } => vectors.field(),
            EnsembleKind::ExplodingCovariance { field, .. } => *field,
        }
    }

    pub fn vectors(&self) -> Option<&VectorKind> {
        match &self.kind {
            EnsembleKind::CompoundPoissonMatrix { vectors, .. }
            | EnsembleKind::TriangularArrayId { vectors, .. }
            | EnsembleKind::CovarianceMatrix { vectors, .. } => Some(vectors),
            EnsembleKind::ExplodingCovariance { .. } => None,
        }
    }

    /// `round(ratio N)` for the covariance kinds.
    pub fn sample_count(&self) -> Option<usize> {
        match &self.kind {
            EnsembleKind::CovarianceMatrix { ratio, .. } | EnsembleKind::ExplodingCovariance { ratio, .. } => {
                Some((ratio * self.n as f64).round() as usize)
            }
            _ => None,
        }
    }

    /// Checks every parameter. Returns warnings that `strict` did not escalate.
    pub fn validate(&self, strict: bool) -> Result<Vec<String>> {
        if self.n < 2 {
            return Err(Error::invalid(format!("N must be at least 2, got {}", self.n)));
        }
        if !(self.vector_scale > 0.0) || !self.vector_scale.is_finite() {
            return Err(Error::invalid("vector_scale must be positive"));
        }
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be positive, got {x}")))
            }
        };
        match &self.kind {
            EnsembleKind::CompoundPoissonMatrix { lambda, jumps, vectors } => {
                if !(*lambda >= 0.0) || !lambda.is_finite() {
                    return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
                }
                check_jumps(jumps)?;
                vectors.check(strict)
            }
            EnsembleKind::TriangularArrayId { law, refinement, vectors } => {
                if *refinement == 0 {
                    return Err(Error::invalid("refinement must be at least 1"));
                }
                Root::new(law, *refinement)?;
                vectors.check(strict)
            }
            EnsembleKind::CovarianceMatrix { ratio, weights, vectors } => {
                positive(*ratio, "ratio")?;
                if let Some(w) = weights {
                    check_jumps(w)?;
                }
                vectors.check(strict)
            }
            EnsembleKind::ExplodingCovariance { ratio, .. } => {
                positive(*ratio, "ratio")?;
                Ok(Vec::new())
            }
        }
    }

    /// Feeds every rank-one term `(X_i, U_i)` of one draw to `visit`.
    pub fn for_each_term(&self, rng: &mut Rng, mut visit: impl FnMut(f64, &[c64])) -> Result<()> {
        let mut u = vec![c64::new(0.0, 0.0); self.n];
        let s = self.vector_scale;
        let mut emit = |w: f64, u: &mut [c64]| {
            if s != 1.0 {
                u.iter_mut().for_each(|x| *x *= s);
            }
            visit(w, u);
        };
        match &self.kind {
            EnsembleKind::CompoundPoissonMatrix { lambda, jumps, vectors } => {
                for _ in 0..poisson(rng, lambda * self.n as f64) {
                    let w = draw_jump(rng, jumps);
                    vectors.sample(rng, &mut u);
                    emit(w, &mut u);
                }
            }
            EnsembleKind::TriangularArrayId { law, refinement, vectors } => {
                let root = Root::new(law, *refinement)?;
                for _ in 0..self.n * refinement {
                    let w = root.sample(rng);
                    vectors.sample(rng, &mut u);
                    emit(w, &mut u);
                }
            }
            EnsembleKind::CovarianceMatrix { weights, vectors, .. } => {
                for _ in 0..self.sample_count().unwrap_or(0) {
                    let w = weights.as_deref().map_or(1.0, |j| draw_jump(rng, j));
                    vectors.sample(rng, &mut u);
                    emit(w, &mut u);
                }
            }
            EnsembleKind::ExplodingCovariance { entries, field, .. } => {
                let sparse = VectorKind::SparseBernoulliPhase { field: *field };
                for _ in 0..self.sample_count().unwrap_or(0) {
                    match entries {
                        EntryFamily::SparseBernoulliPhase => sparse.sample(rng, &mut u),
                        EntryFamily::Gaussian => u.iter_mut().for_each(|x| *x = normal(rng, *field)),
                    }
                    emit(1.0, &mut u);
                }
            }
        }
        Ok(())
    }

    /// One draw of the matrix from `rng`.
    pub fn sample_with(&self, rng: &mut Rng) -> Result<HermitianMatrix> {
        let mut acc = RankOneSum::new(self.n, self.field());
        self.for_each_term(rng, |w, u| acc.push(w, u))?;
        Ok(acc.finish())
    }

    /// Draw number `rep` of the run seeded by `self.seed`.
    pub fn sample(&self, rep: u64) -> Result<HermitianMatrix> {
        self.sample_with(&mut stream(self.seed, rep))
    }
}
