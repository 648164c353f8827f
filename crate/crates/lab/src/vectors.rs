//! Random vector models `U_N`, all exchangeable across coordinates.

use faer::c64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use specmix_core::{Error, Result, Time};

use crate::rng::Rng;

/// Scalar field of the vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    #[default]
    Complex,
}

impl Field {
    /// Real dimension of the field.
    pub fn beta(self) -> u32 {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorKind {
    /// Uniform on the sphere of radius `sqrt(N)`.
    UniformSphere {
        #[serde(default)]
        field: Field,
    },
    /// `sqrt(N) e^{-t/2} e_J + sqrt(1 - e^{-t}) G` with standard Gaussian `G`.
    GaussianInterp {
        t: Time,
        #[serde(default)]
        field: Field,
    },
    /// As `GaussianInterp` with unit-modulus entries in place of Gaussians.
    UniformPhaseInterp {
        t: Time,
        #[serde(default)]
        field: Field,
    },
    /// `sqrt(N) Y / a_N` with `P(|Y| >= s) = s^-alpha` for `s >= 1`, random
    /// sign or phase, and `a_N = N^(1/alpha)`. With a truncation `B`, entries
    /// with `|Y| > B a_N` are set to zero. For `alpha > 1` the empirical mean
    /// of the vector is subtracted unless `recenter` is false.
    HeavyTailPareto {
        alpha: f64,
        #[serde(default)]
        truncation: Option<f64>,
        #[serde(default)]
        field: Field,
        #[serde(default = "yes")]
        recenter: bool,
    },
    /// `sqrt(N) B_i phase_i` with `B_i` Bernoulli(1/N).
    SparseBernoulliPhase {
        #[serde(default)]
        field: Field,
    },
    /// Brownian motion on the complex sphere of radius `sqrt(N)` at time `t`,
    /// started uniformly on the canonical basis.
    BrownianSphere { t: f64, steps: usize },
}

impl VectorKind {
    pub fn field(&self) -> Field {
        match self {
            VectorKind::UniformSphere { field }
            | VectorKind::GaussianInterp { field, .. }
            | VectorKind::UniformPhaseInterp { field, .. }
            | VectorKind::HeavyTailPareto { field, .. }
            | VectorKind::SparseBernoulliPhase { field } => *field,
            VectorKind::BrownianSphere { .. } => Field::Complex,
        }
    }

    /// Validates parameters. Returns warnings that `strict` did not escalate.
    pub fn check(&self, strict: bool) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        match self {
            VectorKind::UniformSphere { .. } | VectorKind::SparseBernoulliPhase { .. } => {}
            VectorKind::GaussianInterp { t, .. } | VectorKind::UniformPhaseInterp { t, .. } => {
                if let Time::Finite(t) = t {
                    if !(*t >= 0.0) || !t.is_finite() {
                        return Err(Error::invalid(format!("t must be >= 0, got {t}")));
                    }
                }
            }
            VectorKind::HeavyTailPareto { alpha, truncation, .. } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::invalid(format!("alpha must lie in (0, 2), got {alpha}")));
                }
                if let Some(b) = truncation {
                    if !(*b > 0.0) || !b.is_finite() {
                        return Err(Error::invalid(format!("truncation must be positive, got {b}")));
                    }
                }
            }
            VectorKind::BrownianSphere { t, steps } => {
                if !(*t >= 0.0) || !t.is_finite() {
                    return Err(Error::invalid(format!("t must be >= 0, got {t}")));
                }
                let need = (100.0 * t).ceil() as usize;
                if *steps == 0 || *steps < need {
                    let msg = format!("brownian sphere with t = {t} uses {steps} steps, fewer than {need}");
                    if strict || *steps == 0 {
                        return Err(Error::invalid(msg));
                    }
                    warnings.push(msg);
                }
            }
        }
        Ok(warnings)
    }

    /// Draws one vector of dimension `out.len()` into `out`. Real-field
    /// models leave the imaginary parts at zero.
    pub fn sample(&self, rng: &mut Rng, out: &mut [c64]) {
        let n = out.len();
        let nf = n as f64;
        match self {
            VectorKind::UniformSphere { field } => {
                let mut norm2 = 0.0;
                for x in out.iter_mut() {
                    *x = normal(rng, *field);
                    norm2 += x.norm_sqr();
                }
                let s = (nf / norm2).sqrt();
                for x in out.iter_mut() {
                    *x *= s;
                }
            }
            VectorKind::GaussianInterp { t, field } | VectorKind::UniformPhaseInterp { t, field } => {
                let gaussian = matches!(self, VectorKind::GaussianInterp { .. });
                let (spike, noise) = match t {
                    Time::Finite(t) => ((-t / 2.0).exp() * nf.sqrt(), (-(-t).exp_m1()).sqrt()),
                    Time::Infinite => (0.0, 1.0),
                };
                for x in out.iter_mut() {
                    let g = if gaussian { normal(rng, *field) } else { phase(rng, *field) };
                    *x = g * noise;
                }
                let j = rng.random_range(0..n);
                out[j] += spike;
            }
            VectorKind::HeavyTailPareto { alpha, truncation, field, recenter } => {
                let a_n = nf.powf(1.0 / alpha);
                let cut = truncation.map(|b| b * a_n);
                let scale = nf.sqrt() / a_n;
                for x in out.iter_mut() {
                    let y = pareto(rng, *alpha);
                    let ph = phase(rng, *field);
                    *x = match cut {
                        Some(c) if y > c => c64::new(0.0, 0.0),
                        _ => ph * (scale * y),
                    };
                }
                if *alpha > 1.0 && *recenter {
                    let mean = out.iter().sum::<c64>() / nf;
                    for x in out.iter_mut() {
                        *x -= mean;
                    }
                }
            }
            VectorKind::SparseBernoulliPhase { field } => {
                let p = 1.0 / nf;
                for x in out.iter_mut() {
                    *x = if rng.random::<f64>() < p {
                        phase(rng, *field) * nf.sqrt()
                    } else {
                        c64::new(0.0, 0.0)
                    };
                }
            }
            VectorKind::BrownianSphere { t, steps } => brownian_sphere(rng, *t, *steps, out),
        }
    }
}

/// Standard normal with `E|g|^2 = 1`.
pub(crate) fn normal(rng: &mut Rng, field: Field) -> c64 {
    match field {
        Field::Real => c64::new(rng.sample(StandardNormal), 0.0),
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            c64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
        }
    }
}

/// Uniform on the unit circle of the field, `{-1, 1}` for the reals.
pub(crate) fn phase(rng: &mut Rng, field: Field) -> c64 {
    match field {
        Field::Real => c64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
        Field::Complex => c64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU),
    }
}

/// `|Y|` with `P(|Y| >= s) = s^-alpha`, `s >= 1`, by inversion.
pub(crate) fn pareto(rng: &mut Rng, alpha: f64) -> f64 {
    let v = 1.0 - rng.random::<f64>();
    v.powf(-1.0 / alpha)
}

/// Euler-Maruyama for `dU = dK U - U dt / 2` with exact renormalization.
///
/// For `||U||^2 = N` the increment `dK U` is Gaussian with covariance `dt I`
/// and pseudo-covariance `dt U U^T / N`, which is what
/// `i sqrt(dt) (P w + s U / sqrt(N))` has for `w` standard complex,
/// `P` the projection orthogonal to `U` and `s` standard real. That costs
/// `O(N)` per step instead of an `N x N` skew-Hermitian draw.
fn brownian_sphere(rng: &mut Rng, t: f64, steps: usize, out: &mut [c64]) {
    let n = out.len();
    let nf = n as f64;
    out.fill(c64::new(0.0, 0.0));
    out[rng.random_range(0..n)] = c64::new(nf.sqrt(), 0.0);
    if t == 0.0 {
        return;
    }
    let dt = t / steps as f64;
    let sdt = dt.sqrt();
    let mut w = vec![c64::new(0.0, 0.0); n];
    for _ in 0..steps {
        // <U/sqrt(N), w>
        let mut proj = c64::new(0.0, 0.0);
        for (wi, ui) in w.iter_mut().zip(out.iter()) {
            *wi = normal(rng, Field::Complex);
            proj += ui.conj() * *wi;
        }
        let s: f64 = rng.sample(StandardNormal);
        let coef = (c64::new(s, 0.0) - proj / nf.sqrt()) / nf.sqrt();
        let i_sdt = c64::new(0.0, sdt);
        let mut norm2 = 0.0;
        for (ui, wi) in out.iter_mut().zip(w.iter()) {
            let inc = i_sdt * (*wi + coef * *ui);
            *ui = *ui * (1.0 - 0.5 * dt) + inc;
            norm2 += ui.norm_sqr();
        }
        let r = (nf / norm2).sqrt();
        for ui in out.iter_mut() {
            *ui *= r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn draw(kind: &VectorKind, n: usize, seed: u64) -> Vec<c64> {
        let mut v = vec![c64::new(0.0, 0.0); n];
        kind.sample(&mut stream(seed, 0), &mut v);
        v
    }

    fn norm2(v: &[c64]) -> f64 {
        v.iter().map(|x| x.norm_sqr()).sum()
    }

    #[test]
    fn gaussian_interp_at_zero_is_a_spike() {
        let v = draw(&VectorKind::GaussianInterp { t: Time::Finite(0.0), field: Field::Real }, 50, 1);
        let nz: Vec<_> = v.iter().filter(|x| x.norm() > 0.0).collect();
        assert_eq!(nz.len(), 1);
        assert!((nz[0].re - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sphere_norms_are_exact() {
        for field in [Field::Real, Field::Complex] {
            let v = draw(&VectorKind::UniformSphere { field }, 300, 2);
            assert!((norm2(&v) - 300.0).abs() < 1e-10);
        }
        for t in [0.0, 0.3, 2.0] {
            let v = draw(&VectorKind::BrownianSphere { t, steps: 200 }, 100, 3);
            assert!((norm2(&v) - 100.0).abs() <= 1e-12 * 100.0);
        }
    }

    #[test]
    fn real_models_stay_real() {
        for kind in [
            VectorKind::UniformSphere { field: Field::Real },
            VectorKind::SparseBernoulliPhase { field: Field::Real },
            VectorKind::HeavyTailPareto { alpha: 1.5, truncation: Some(2.0), field: Field::Real, recenter: true },
        ] {
            assert!(draw(&kind, 200, 4).iter().all(|x| x.im == 0.0));
        }
    }

    #[test]
    fn truncation_caps_entries() {
        let n = 400;
        let kind = VectorKind::HeavyTailPareto { alpha: 0.5, truncation: Some(4.0), field: Field::Complex, recenter: true };
        for seed in 0..20 {
            let v = draw(&kind, n, seed);
            // |U| = sqrt(N) |Y| / a_N <= sqrt(N) B
            assert!(v.iter().all(|x| x.norm() <= (n as f64).sqrt() * 4.0 * (1.0 + 1e-12)));
            assert!(v.iter().all(|x| x.norm() == 0.0 || x.norm() >= (n as f64).sqrt() / (n as f64).powi(2) * 0.999));
        }
    }

    #[test]
    fn strict_mode_rejects_coarse_brownian_steps() {
        let kind = VectorKind::BrownianSphere { t: 1.0, steps: 50 };
        assert_eq!(kind.check(false).unwrap().len(), 1);
        assert!(kind.check(true).is_err());
        assert!(VectorKind::BrownianSphere { t: 1.0, steps: 100 }.check(true).unwrap().is_empty());
        assert!(VectorKind::HeavyTailPareto { alpha: 2.0, truncation: None, field: Field::Real, recenter: true }
            .check(false)
            .is_err());
    }

    #[test]
    fn gaussian_interp_mean_norm() {
        let kind = VectorKind::GaussianInterp { t: Time::Finite(1.0), field: Field::Complex };
        let n = 64;
        let draws = 4000;
        let mut rng = stream(9, 0);
        let mut v = vec![c64::new(0.0, 0.0); n];
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..draws {
            kind.sample(&mut rng, &mut v);
            let x = norm2(&v);
            s += x;
            s2 += x * x;
        }
        let mean = s / draws as f64;
        let se = ((s2 / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((mean - n as f64).abs() < 4.0 * se, "{mean} {se}");
    }

    #[test]
    fn json_shape() {
        let k: VectorKind = serde_json::from_str(r#"{"model":"gaussian_interp","t":"inf"}"#).unwrap();
        assert_eq!(k, VectorKind::GaussianInterp { t: Time::Infinite, field: Field::Complex });
        let k: VectorKind = serde_json::from_str(r#"{"model":"heavy_tail_pareto","alpha":0.5,"truncation":4}"#).unwrap();
        assert_eq!(k.field(), Field::Complex);
        assert!(serde_json::from_str::<VectorKind>(r#"{"model":"uniform_sphere","bogus":1}"#).is_err());
    }
}
