//! `f_Gamma(pi)` and the limit moments `m_k = sum_pi f_Gamma(pi) c_pi`.

use std::collections::HashMap;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{GammaSpec, Time};
use crate::levy::{c_pi, cumulants, IdLaw};
use crate::partition::{
    connected_components, enumerate_pairings, enumerate_partitions_capped, kappa, thin, Partition,
};
use crate::quotient::{profiles_unchecked, quotient_cycle, visit_acyclic_edge_partitions};

/// Default cap on the moment order.
pub const K_MOMENT_MAX: usize = 9;

/// Partitions per parallel work item; fixed so the reduction order is too.
const CHUNK: usize = 256;

/// `sum_tau prod_J Gamma(profile_J)` over acyclic `tau`, by direct enumeration.
///
/// No component splitting and no thinning: this is the reference definition.
pub fn f_gamma_direct(pi: &Partition, spec: &GammaSpec) -> Result<f64> {
    let g = quotient_cycle(pi);
    let mut total = 0.0;
    let mut failure = None;
    visit_acyclic_edge_partitions(&g, |tau, colours| {
        if failure.is_some() {
            return;
        }
        let mut term = 1.0;
        for p in profiles_unchecked(&g, tau, colours) {
            match spec.eval_sorted(p.counts()) {
                Ok(v) => term *= v,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
            if term == 0.0 {
                break;
            }
        }
        total += term;
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `exp(-kappa(pi) t)`, with the `t = infinity` limit taken exactly.
pub fn f_gamma_kappa(pi: &Partition, t: Time) -> f64 {
    let k = kappa(pi);
    match t {
        Time::Finite(t) => (-(k as f64) * t).exp(),
        Time::Infinite => {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Evaluates `f_Gamma` for one spec, memoizing connected components up to
/// rotation. Shareable across threads.
#[derive(Debug)]
pub struct MomentEngine {
    spec: GammaSpec,
    cap: usize,
    memo: RwLock<HashMap<Partition, f64>>,
}

impl MomentEngine {
    pub fn new(spec: GammaSpec) -> Self {
        MomentEngine::with_cap(spec, K_MOMENT_MAX)
    }

    pub fn with_cap(spec: GammaSpec, cap: usize) -> Self {
        MomentEngine {
            spec,
            cap,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &GammaSpec {
        &self.spec
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    fn check_cap(&self, k: usize) -> Result<()> {
        if k > self.cap {
            return Err(Error::Bounds {
                what: "k",
                value: k,
                cap_name: "K_MOMENT_MAX",
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// `f_Gamma(pi)`: thinned first for unit-norm specs, then factored over
    /// connected components.
    pub fn f_gamma(&self, pi: &Partition) -> Result<f64> {
        self.check_cap(pi.k())?;
        self.reduced(pi)
    }

    fn reduced(&self, pi: &Partition) -> Result<f64> {
        if self.spec.unit_norm() {
            let t = thin(pi);
            if t.len() < pi.k() {
                return self.reduced(t.partition());
            }
        }
        let comps = connected_components(pi);
        if comps.len() == 1 {
            return self.connected(pi);
        }
        let mut acc = 1.0;
        for c in comps {
            acc *= self.reduced(c.partition())?;
            if acc == 0.0 {
                break;
            }
        }
        Ok(acc)
    }

    fn connected(&self, pi: &Partition) -> Result<f64> {
        let key = pi.min_rotation();
        if let Some(&v) = self.memo.read().unwrap().get(&key) {
            return Ok(v);
        }
        let v = f_gamma_direct(&key, &self.spec)?;
        self.memo.write().unwrap().entry(key).or_insert(v);
        Ok(v)
    }

    /// `f_Gamma(pi)` summed over acyclic edge partitions of the whole of `pi`.
    pub fn f_gamma_unfactored(&self, pi: &Partition) -> Result<f64> {
        self.check_cap(pi.k())?;
        f_gamma_direct(pi, &self.spec)
    }

    /// `m_k = sum_{pi in Part(k)} f_Gamma(pi) c_pi` for `k = 1..=k_max`.
    pub fn limit_moments(&self, law: &IdLaw, k_max: usize) -> Result<MomentTable> {
        self.check_cap(k_max)?;
        let c = cumulants(law, k_max.max(1))?;
        let mut m = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let parts: Vec<Partition> = enumerate_partitions_capped(k, self.cap)?.collect();
            let partial: Vec<f64> = parts
                .par_chunks(CHUNK)
                .map(|chunk| -> Result<f64> {
                    let mut s = 0.0;
                    for pi in chunk {
                        let w = c_pi(&c, pi);
                        if w != 0.0 {
                            s += self.reduced(pi)? * w;
                        }
                    }
                    Ok(s)
                })
                .collect::<Result<Vec<f64>>>()?;
            m.push(partial.iter().sum());
        }
        Ok(MomentTable {
            k: (1..=k_max).collect(),
            m,
            gamma: self.spec.clone(),
            law: law.clone(),
            kappa_convention: KAPPA_CONVENTION.to_string(),
        })
    }
}

/// How `kappa` reads a component that is not an interval.
pub const KAPPA_CONVENTION: &str = "induced-cyclic-order";

/// Limit moments `m_1..m_kmax` with their inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub k: Vec<usize>,
    pub m: Vec<f64>,
    pub gamma: GammaSpec,
    pub law: IdLaw,
    pub kappa_convention: String,
}

impl MomentTable {
    pub fn k_max(&self) -> usize {
        self.m.len()
    }

    /// `m_k`, 1-based.
    pub fn moment(&self, k: usize) -> f64 {
        self.m[k - 1]
    }
}

pub fn limit_moments(law: &IdLaw, spec: &GammaSpec, k_max: usize) -> Result<MomentTable> {
    MomentEngine::new(spec.clone()).limit_moments(law, k_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportRow {
    pub k: usize,
    /// `min over pairings of f_Gamma(pi) / floor^k`.
    pub min_pairing_ratio: f64,
    pub moment: f64,
    /// `floor^k (k-1)!! c_2^(k/2)`.
    pub lower_bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportReport {
    pub root_floor: f64,
    pub rows: Vec<SupportRow>,
    pub passed: bool,
}

/// Checks the pairing lower bounds `f_Gamma(pi) >= eps^k` and
/// `m_k >= eps^k (k-1)!! c_2^(k/2)` for even `k <= k_max`, `eps = root_floor`.
pub fn support_growth_check(engine: &MomentEngine, law: &IdLaw, k_max: usize) -> Result<SupportReport> {
    let eps = engine.spec().root_floor();
    if !(eps > 0.0) {
        return Err(Error::contract("support witness needs a positive root floor"));
    }
    if k_max < 2 || k_max % 2 == 1 {
        return Err(Error::invalid(format!("k_max must be even and >= 2, got {k_max}")));
    }
    let c = cumulants(law, k_max)?;
    if c.0.iter().any(|&x| x < 0.0) || !(c.c(2) > 0.0) {
        return Err(Error::contract(
            "support witness needs non-negative cumulants and c_2 > 0",
        ));
    }
    let table = engine.limit_moments(law, k_max)?;
    let slack = 1.0 - 1e-12;
    let mut rows = Vec::new();
    for k in (2..=k_max).step_by(2) {
        let floor_k = eps.powi(k as i32);
        let mut min_ratio = f64::INFINITY;
        for pi in enumerate_pairings(k)? {
            min_ratio = min_ratio.min(engine.f_gamma(&pi)? / floor_k);
        }
        let double_factorial: f64 = (1..k).step_by(2).map(|j| j as f64).product();
        let lower_bound = floor_k * double_factorial * c.c(2).powi(k as i32 / 2);
        let moment = table.moment(k);
        rows.push(SupportRow {
            k,
            min_pairing_ratio: min_ratio,
            moment,
            lower_bound,
            passed: min_ratio >= slack && moment >= lower_bound * slack,
        });
    }
    Ok(SupportReport {
        root_floor: eps,
        passed: rows.iter().all(|r| r.passed),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{enumerate_partitions, is_noncrossing};

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn f_gamma_examples() {
        let t = 0.8;
        let e = MomentEngine::new(GammaSpec::interpolation(t).unwrap());
        let v = e.f_gamma(&p("{1,3}{2,4}")).unwrap();
        assert!((v - (-4.0 * t).exp()).abs() < 1e-15);
        assert_eq!(e.f_gamma(&p("{1,4}{2,3}")).unwrap(), 1.0);

        let h = GammaSpec::heavy_tail(0.5, 4.0).unwrap();
        let g1 = h.eval(&[1]).unwrap();
        let e = MomentEngine::new(h);
        let v = e.f_gamma(&Partition::discrete(5)).unwrap();
        assert!((v - g1.powi(5)).abs() < 1e-12 * v);
    }

    #[test]
    fn single_pair_is_consistent_with_zero_kappa() {
        // One loop vertex with two loop edges: one colour gives e^{-2t},
        // two colours give 1 - e^{-2t}.
        let t = 1.3;
        let v = f_gamma_direct(&Partition::one_block(2), &GammaSpec::interpolation(t).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kappa_identity_small() {
        for t in [0.3, 1.0, 2.5] {
            let e = MomentEngine::new(GammaSpec::interpolation(t).unwrap());
            for k in 1..=5 {
                for pi in enumerate_partitions(k).unwrap() {
                    let want = f_gamma_kappa(&pi, Time::Finite(t));
                    let direct = e.f_gamma_unfactored(&pi).unwrap();
                    let fast = e.f_gamma(&pi).unwrap();
                    assert!((direct - want).abs() <= 1e-12 * want, "{pi} {direct} {want}");
                    assert!((fast - want).abs() <= 1e-12 * want, "{pi}");
                }
            }
        }
    }

    #[test]
    fn endpoints() {
        let law = IdLaw::poisson(1.0).unwrap();
        let m = limit_moments(&law, &GammaSpec::interpolation(0.0).unwrap(), 6).unwrap();
        assert_eq!(m.m, vec![1.0, 2.0, 5.0, 15.0, 52.0, 203.0]);
        let m = limit_moments(&law, &GammaSpec::free_limit(), 6).unwrap();
        assert_eq!(m.m, vec![1.0, 2.0, 5.0, 14.0, 42.0, 132.0]);
    }

    #[test]
    fn free_limit_counts_noncrossing() {
        let e = MomentEngine::new(GammaSpec::free_limit());
        for pi in enumerate_partitions(6).unwrap() {
            let want = if is_noncrossing(&pi) { 1.0 } else { 0.0 };
            assert_eq!(e.f_gamma(&pi).unwrap(), want, "{pi}");
        }
    }

    #[test]
    fn caps() {
        let e = MomentEngine::new(GammaSpec::unit());
        assert!(matches!(
            e.f_gamma(&Partition::discrete(10)),
            Err(Error::Bounds { cap: 9, .. })
        ));
        let law = IdLaw::cauchy(1.0).unwrap();
        assert!(matches!(e.limit_moments(&law, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn support_check() {
        let law = IdLaw::poisson(1.0).unwrap();
        let e = MomentEngine::new(GammaSpec::interpolation(1.0).unwrap());
        let r = support_growth_check(&e, &law, 6).unwrap();
        assert!(r.passed);
        assert!((r.root_floor - (-1f64).exp()).abs() < 1e-15);
        let r = support_growth_check(&MomentEngine::new(GammaSpec::unit()), &law, 6).unwrap();
        assert!(r.passed && r.root_floor == 1.0);
        assert!(matches!(
            support_growth_check(&MomentEngine::new(GammaSpec::free_limit()), &law, 6),
            Err(Error::Contract(_))
        ));
    }
}
