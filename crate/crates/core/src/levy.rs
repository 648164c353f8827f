//! Infinitely divisible laws with finitely many atoms, their classical
//! cumulants and the classical moment-cumulant transform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{enumerate_partitions_capped, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaAtom {
    pub t: f64,
    pub w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jump {
    pub x: f64,
    pub p: f64,
}

/// An infinitely divisible law. Construct through the checked constructors or
/// call [`IdLaw::validate`] after deserializing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdLaw {
    /// Drift `gamma` and a finite atomic measure `sigma`.
    LevyPair { gamma: f64, sigma: Vec<SigmaAtom> },
    /// Poisson(`lambda`) many i.i.d. jumps drawn from `jumps`.
    CompoundPoisson { lambda: f64, jumps: Vec<Jump> },
    Dirac { gamma: f64 },
    GaussianStd,
    Cauchy { t: f64 },
}

impl IdLaw {
    pub fn poisson(lambda: f64) -> Result<Self> {
        IdLaw::compound_poisson(lambda, &[(1.0, 1.0)])
    }

    /// `jumps` holds `(x, p)` pairs.
    pub fn compound_poisson(lambda: f64, jumps: &[(f64, f64)]) -> Result<Self> {
        let law = IdLaw::CompoundPoisson {
            lambda,
            jumps: jumps.iter().map(|&(x, p)| Jump { x, p }).collect(),
        };
        law.validate()?;
        Ok(law)
    }

    /// `atoms` holds `(t, w)` pairs.
    pub fn levy_pair(gamma: f64, atoms: &[(f64, f64)]) -> Result<Self> {
        let law = IdLaw::LevyPair {
            gamma,
            sigma: atoms.iter().map(|&(t, w)| SigmaAtom { t, w }).collect(),
        };
        law.validate()?;
        Ok(law)
    }

    pub fn cauchy(t: f64) -> Result<Self> {
        let law = IdLaw::Cauchy { t };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be finite")))
            }
        };
        match self {
            IdLaw::LevyPair { gamma, sigma } => {
                finite(*gamma, "drift")?;
                for a in sigma {
                    finite(a.t, "atom position")?;
                    if !(a.w > 0.0 && a.w.is_finite()) {
                        return Err(Error::invalid("sigma masses must be positive and finite"));
                    }
                }
            }
            IdLaw::CompoundPoisson { lambda, jumps } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::invalid("rate lambda must be positive and finite"));
                }
                if jumps.is_empty() {
                    return Err(Error::invalid("jump law needs at least one atom"));
                }
                for j in jumps {
                    finite(j.x, "jump")?;
                    if !(j.p > 0.0) {
                        return Err(Error::invalid("jump probabilities must be positive"));
                    }
                }
                let total: f64 = jumps.iter().map(|j| j.p).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!("jump probabilities sum to {total}, not 1")));
                }
            }
            IdLaw::Dirac { gamma } => finite(*gamma, "drift")?,
            IdLaw::GaussianStd => {}
            IdLaw::Cauchy { t } => {
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(Error::invalid("Cauchy scale must be positive and finite"));
                }
            }
        }
        Ok(())
    }

    /// The Levy pair of a compound Poisson law:
    /// `sigma(dt) = lambda t^2/(1+t^2) nu(dt)`, `gamma = lambda int t/(1+t^2) nu(dt)`.
    pub fn to_levy_pair(&self) -> Result<IdLaw> {
        match self {
            IdLaw::CompoundPoisson { lambda, jumps } => {
                let gamma = lambda * jumps.iter().map(|j| j.p * j.x / (1.0 + j.x * j.x)).sum::<f64>();
                let sigma = jumps
                    .iter()
                    .filter(|j| j.x != 0.0)
                    .map(|j| SigmaAtom {
                        t: j.x,
                        w: lambda * j.p * j.x * j.x / (1.0 + j.x * j.x),
                    })
                    .collect();
                Ok(IdLaw::LevyPair { gamma, sigma })
            }
            IdLaw::LevyPair { .. } => Ok(self.clone()),
            _ => Err(Error::Unsupported("only compound Poisson laws convert to Levy pairs here".into())),
        }
    }

    /// Convolution of two compound Poisson laws, merging their jump laws.
    pub fn convolve(&self, other: &IdLaw) -> Result<IdLaw> {
        match (self, other) {
            (
                IdLaw::CompoundPoisson { lambda: l1, jumps: j1 },
                IdLaw::CompoundPoisson { lambda: l2, jumps: j2 },
            ) => {
                let lambda = l1 + l2;
                let jumps = j1
                    .iter()
                    .map(|j| Jump { x: j.x, p: j.p * l1 / lambda })
                    .chain(j2.iter().map(|j| Jump { x: j.x, p: j.p * l2 / lambda }))
                    .collect();
                Ok(IdLaw::CompoundPoisson { lambda, jumps })
            }
            _ => Err(Error::Unsupported("convolution is implemented for compound Poisson laws".into())),
        }
    }

    /// Levy exponent `Psi` with `E[exp(i xi X)] = exp(Psi(xi))`.
    pub fn levy_exponent(&self, xi: f64) -> Complex64 {
        let i = Complex64::i();
        match self {
            IdLaw::CompoundPoisson { lambda, jumps } => {
                *lambda * jumps.iter().map(|j| j.p * ((i * j.x * xi).exp() - 1.0)).sum::<Complex64>()
            }
            IdLaw::Dirac { gamma } => i * gamma * xi,
            IdLaw::GaussianStd => Complex64::new(-0.5 * xi * xi, 0.0),
            IdLaw::Cauchy { t } => Complex64::new(-t * xi.abs(), 0.0),
            IdLaw::LevyPair { gamma, sigma } => {
                let mut acc = i * gamma * xi;
                for a in sigma {
                    if a.t == 0.0 {
                        acc += -0.5 * a.w * xi * xi;
                    } else {
                        let t = a.t;
                        let kernel = (i * t * xi).exp() - 1.0 - i * t * xi / (1.0 + t * t);
                        acc += a.w * kernel * (1.0 + t * t) / (t * t);
                    }
                }
                acc
            }
        }
    }
}

/// Classical cumulants `c_1..c_kmax`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantSeq(pub Vec<f64>);

impl CumulantSeq {
    /// `c_n`, 1-based.
    pub fn c(&self, n: usize) -> f64 {
        self.0[n - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn cumulants(law: &IdLaw, k_max: usize) -> Result<CumulantSeq> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let c = (1..=k_max as i32)
        .map(|n| match law {
            IdLaw::LevyPair { gamma, sigma } => {
                if n == 1 {
                    gamma + sigma.iter().map(|a| a.w * a.t).sum::<f64>()
                } else {
                    sigma
                        .iter()
                        .map(|a| a.w * a.t.powi(n - 2) * (1.0 + a.t * a.t))
                        .sum()
                }
            }
            IdLaw::CompoundPoisson { lambda, jumps } => {
                lambda * jumps.iter().map(|j| j.p * j.x.powi(n)).sum::<f64>()
            }
            IdLaw::Dirac { gamma } => {
                if n == 1 {
                    *gamma
                } else {
                    0.0
                }
            }
            IdLaw::GaussianStd => {
                if n == 2 {
                    1.0
                } else {
                    0.0
                }
            }
            IdLaw::Cauchy { .. } => f64::NAN,
        })
        .collect();
    if let IdLaw::Cauchy { .. } = law {
        return Err(Error::Unsupported("Cauchy laws have no moments".into()));
    }
    Ok(CumulantSeq(c))
}

/// `prod_{J in pi} c_{|J|}`.
pub fn c_pi(c: &CumulantSeq, pi: &Partition) -> f64 {
    pi.block_sizes().iter().map(|&s| c.c(s)).product()
}

/// `m_k = sum_{pi in Part(k)} c_pi` for `k = 1..=k_max`.
pub fn cumulants_to_moments(c: &CumulantSeq, k_max: usize) -> Result<Vec<f64>> {
    if k_max > c.len() {
        return Err(Error::invalid(format!(
            "need {k_max} cumulants, have {}",
            c.len()
        )));
    }
    (1..=k_max)
        .map(|k| Ok(enumerate_partitions_capped(k, k_max.max(1))?.map(|p| c_pi(c, &p)).sum()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulant_examples() {
        let c = cumulants(&IdLaw::poisson(2.5).unwrap(), 6).unwrap();
        assert!(c.0.iter().all(|&x| x == 2.5));
        let c = cumulants(&IdLaw::levy_pair(0.5, &[(1.0, 0.5)]).unwrap(), 6).unwrap();
        assert!(c.0.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let c = cumulants(&IdLaw::GaussianStd, 4).unwrap();
        assert_eq!(c.0, vec![0.0, 1.0, 0.0, 0.0]);
        let c = cumulants(&IdLaw::levy_pair(0.0, &[(0.0, 2.0)]).unwrap(), 4).unwrap();
        assert_eq!(c.0, vec![0.0, 2.0, 0.0, 0.0]);
        assert!(matches!(
            cumulants(&IdLaw::cauchy(1.0).unwrap(), 3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn moment_examples() {
        let ones = CumulantSeq(vec![1.0; 5]);
        assert_eq!(cumulants_to_moments(&ones, 5).unwrap(), vec![1.0, 2.0, 5.0, 15.0, 52.0]);
        let g = cumulants(&IdLaw::GaussianStd, 6).unwrap();
        assert_eq!(
            cumulants_to_moments(&g, 6).unwrap(),
            vec![0.0, 1.0, 0.0, 3.0, 0.0, 15.0]
        );
        let d = cumulants(&IdLaw::Dirac { gamma: 1.5 }, 4).unwrap();
        let m = cumulants_to_moments(&d, 4).unwrap();
        for (k, mk) in m.iter().enumerate() {
            assert!((mk - 1.5f64.powi(k as i32 + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn c_pi_examples() {
        let c = cumulants(&IdLaw::poisson(3.0).unwrap(), 10).unwrap();
        assert_eq!(c_pi(&c, &"{1,2,3}".parse().unwrap()), 3.0);
        assert_eq!(c_pi(&c, &"{1,8,10}{2,4}{3,5}{6,7,9}".parse().unwrap()), 81.0);
        let c = CumulantSeq(vec![2.0, 5.0]);
        assert_eq!(c_pi(&c, &Partition::discrete(3)), 8.0);
    }

    #[test]
    fn validation() {
        assert!(IdLaw::compound_poisson(1.0, &[(1.0, 0.5)]).is_err());
        assert!(IdLaw::compound_poisson(0.0, &[(1.0, 1.0)]).is_err());
        assert!(IdLaw::levy_pair(0.0, &[(1.0, -1.0)]).is_err());
        assert!(IdLaw::cauchy(0.0).is_err());
    }

    #[test]
    fn json_forms() {
        let law: IdLaw =
            serde_json::from_str(r#"{"form":"compound_poisson","lambda":2.0,"jumps":[{"x":1.0,"p":1.0}]}"#)
                .unwrap();
        assert_eq!(law, IdLaw::poisson(2.0).unwrap());
        let law: IdLaw =
            serde_json::from_str(r#"{"form":"levy_pair","gamma":0.0,"sigma":[{"t":0.0,"w":1.0}]}"#).unwrap();
        law.validate().unwrap();
        let law: IdLaw = serde_json::from_str(r#"{"form":"cauchy","t":1.0}"#).unwrap();
        assert_eq!(law, IdLaw::Cauchy { t: 1.0 });
        let law: IdLaw = serde_json::from_str(r#"{"form":"gaussian_std"}"#).unwrap();
        assert_eq!(law, IdLaw::GaussianStd);
    }

    #[test]
    fn levy_exponent_matches_forms() {
        let cp = IdLaw::compound_poisson(1.3, &[(0.5, 0.25), (-2.0, 0.75)]).unwrap();
        let lp = cp.to_levy_pair().unwrap();
        for xi in [-1.7, -0.2, 0.0, 0.4, 3.0] {
            let a = cp.levy_exponent(xi);
            let b = lp.levy_exponent(xi);
            assert!((a - b).norm() < 1e-12, "{xi}: {a} vs {b}");
        }
    }
}
