use proptest::prelude::*;

use specmix_core::gamma::{profiles_up_to, GammaSpec};
use specmix_core::levy::{cumulants, IdLaw};
use specmix_core::moments::{f_gamma_direct, limit_moments, MomentEngine};
use specmix_core::partition::{
    connected_components, cyclic_block_changes, enumerate_partitions, is_connected, is_noncrossing,
    kappa, nc_closure, thin, Partition,
};
use specmix_core::quotient::{cycle_search_oracle, cyclomatic_number, is_acyclic, quotient_cycle, Hypergraph};

fn arb_partition(max_k: usize) -> impl Strategy<Value = Partition> {
    (1..=max_k)
        .prop_flat_map(|k| prop::collection::vec(0..k, k))
        .prop_map(|tags| Partition::canonical(&tags))
}

fn arb_hypergraph() -> impl Strategy<Value = Hypergraph> {
    (1usize..=8).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::btree_set(0..n, 1..=n.min(4)), 1..=6).prop_map(
            move |edges| Hypergraph::new(n, edges.into_iter().map(|e| e.into_iter().collect()).collect()).unwrap(),
        )
    })
}

fn arb_spec() -> impl Strategy<Value = GammaSpec> {
    prop_oneof![
        Just(GammaSpec::unit()),
        (0.0f64..3.0).prop_map(|t| GammaSpec::interpolation(t).unwrap()),
        Just(GammaSpec::free_limit()),
        (0.05f64..1.95, 0.2f64..5.0).prop_map(|(a, b)| GammaSpec::heavy_tail(a, b).unwrap()),
        prop::collection::vec(0.0f64..3.0, 12).prop_map(|mut c| {
            c[0] += 0.1;
            GammaSpec::product(c).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_hypergraphs_agree_with_search(h in arb_hypergraph()) {
        prop_assert!(cyclomatic_number(&h) >= 0);
        prop_assert_eq!(is_acyclic(&h), cycle_search_oracle(&h).unwrap());
    }
}

proptest! {
    #[test]
    fn gamma_is_symmetric(spec in arb_spec(), profile in prop::collection::vec(1u32..=4, 1..=4), seed in any::<u64>()) {
        let mut shuffled = profile.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = spec.eval(&profile).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, spec.eval(&shuffled).unwrap());
    }

    #[test]
    fn gamma_growth_bound(spec in arb_spec()) {
        let c = spec.growth_constant();
        for p in profiles_up_to(12) {
            let s: u32 = p.iter().sum();
            prop_assert!(spec.eval(&p).unwrap() <= c.powi(s as i32) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn thin_is_idempotent_and_keeps_kappa(pi in arb_partition(10)) {
        let t = thin(&pi);
        let tt = thin(t.partition());
        prop_assert_eq!(tt.partition(), t.partition());
        prop_assert_eq!(kappa(&pi), kappa(t.partition()));
    }

    #[test]
    fn closure_is_idempotent(pi in arb_partition(10)) {
        let c = nc_closure(&pi);
        prop_assert!(pi.refines(&c));
        prop_assert!(is_noncrossing(&c));
        prop_assert_eq!(nc_closure(&c), c);
    }

    #[test]
    fn f_gamma_is_rotation_invariant(pi in arb_partition(7), shift in 0usize..7, spec in arb_spec()) {
        let a = f_gamma_direct(&pi, &spec).unwrap();
        let b = f_gamma_direct(&pi.rotated(shift % pi.k()), &spec).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
    }

    #[test]
    fn convolution_adds_cumulants(
        l1 in 0.1f64..3.0, l2 in 0.1f64..3.0,
        x in prop::collection::vec(-2.0f64..2.0, 1..=3),
        y in prop::collection::vec(-2.0f64..2.0, 1..=3),
    ) {
        let even = |v: &[f64]| v.iter().map(|&x| (x, 1.0 / v.len() as f64)).collect::<Vec<_>>();
        let a = IdLaw::compound_poisson(l1, &even(&x)).unwrap();
        let b = IdLaw::compound_poisson(l2, &even(&y)).unwrap();
        let ab = a.convolve(&b).unwrap();
        let (ca, cb, cab) = (cumulants(&a, 8).unwrap(), cumulants(&b, 8).unwrap(), cumulants(&ab, 8).unwrap());
        for n in 1..=8 {
            let s = ca.c(n) + cb.c(n);
            prop_assert!((cab.c(n) - s).abs() <= 1e-12 * s.abs().max(1.0));
        }
    }

    #[test]
    fn levy_pair_form_reproduces_cumulants(
        lambda in 0.1f64..3.0,
        atoms in prop::collection::vec((-3.0f64..3.0, 0.1f64..1.0), 1..=3),
    ) {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let jumps: Vec<(f64, f64)> = atoms.iter().map(|&(x, p)| (x, p / total)).collect();
        let cp = IdLaw::compound_poisson(lambda, &jumps).unwrap();
        let lp = cp.to_levy_pair().unwrap();
        let (a, b) = (cumulants(&cp, 8).unwrap(), cumulants(&lp, 8).unwrap());
        for n in 1..=8 {
            prop_assert!((a.c(n) - b.c(n)).abs() <= 1e-12 * a.c(n).abs().max(1.0));
        }
    }
}

#[test]
fn partition_invariants_exhaustive() {
    for k in 1..=7 {
        for pi in enumerate_partitions(k).unwrap() {
            let c = nc_closure(&pi);
            assert!(pi.refines(&c) && is_noncrossing(&c) && nc_closure(&c) == c);
            let comps = connected_components(&pi);
            let mut covered: Vec<usize> = comps.iter().flat_map(|c| c.support().to_vec()).collect();
            covered.sort_unstable();
            assert_eq!(covered, (0..k).collect::<Vec<_>>());
            let kap = kappa(&pi);
            assert_eq!(kap, kappa(thin(&pi).partition()), "{pi}");
            let by_comp: usize = comps.iter().map(|c| kappa(c.partition())).sum();
            assert_eq!(kap, by_comp);
            assert_eq!(kap == 0, is_noncrossing(&pi), "{pi}");
            let t = thin(&pi);
            let tp = t.partition();
            if is_connected(tp) && t.len() > 1 {
                assert_eq!(cyclic_block_changes(tp), t.len(), "{pi}");
                assert_eq!(kappa(tp), t.len(), "{pi}");
            }
            assert_eq!(quotient_cycle(&pi).edge_count(), k);
        }
    }
}

#[test]
fn factorization_and_thinning_exhaustive() {
    let specs = [
        GammaSpec::interpolation(0.6).unwrap(),
        GammaSpec::heavy_tail(0.5, 4.0).unwrap(),
        GammaSpec::product(vec![1.0, 2.0, 0.5, 3.0, 1.0, 1.0]).unwrap(),
        GammaSpec::unit(),
        GammaSpec::free_limit(),
    ];
    for spec in &specs {
        let e = MomentEngine::new(spec.clone());
        for k in 1..=6 {
            for pi in enumerate_partitions(k).unwrap() {
                let fast = e.f_gamma(&pi).unwrap();
                let direct = f_gamma_direct(&pi, spec).unwrap();
                assert!((fast - direct).abs() <= 1e-12 * direct.abs().max(1e-300), "{spec:?} {pi}");
                if spec.unit_norm() {
                    let thinned = f_gamma_direct(thin(&pi).partition(), spec).unwrap();
                    assert!((thinned - direct).abs() <= 1e-12 * direct.abs().max(1e-300), "{pi}");
                }
            }
        }
    }
}

#[test]
fn noncrossing_partitions_have_f_one_for_consistent_specs() {
    for spec in [GammaSpec::interpolation(1.7).unwrap(), GammaSpec::free_limit()] {
        let e = MomentEngine::new(spec);
        for k in 1..=7 {
            for pi in enumerate_partitions(k).unwrap().filter(is_noncrossing) {
                assert!((e.f_gamma(&pi).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn dirac_maps_to_dirac() {
    let gamma = 1.3;
    let law = IdLaw::Dirac { gamma };
    for spec in [
        GammaSpec::heavy_tail(0.5, 4.0).unwrap(),
        GammaSpec::interpolation(0.4).unwrap(),
        GammaSpec::unit(),
    ] {
        let g1 = spec.eval(&[1]).unwrap();
        let m = limit_moments(&law, &spec, 7).unwrap();
        for k in 1..=7 {
            let want = (gamma * g1).powi(k as i32);
            assert!((m.moment(k) - want).abs() <= 1e-12 * want);
        }
    }
}

#[test]
fn moment_growth_smoke() {
    // Compactly supported sigma: moments grow at most like (C k)^k, so the
    // exponential moment series has a positive radius of convergence.
    let law = IdLaw::compound_poisson(2.0, &[(1.0, 0.5), (-0.5, 0.5)]).unwrap();
    let m = limit_moments(&law, &GammaSpec::interpolation(1.0).unwrap(), 9).unwrap();
    for k in 1..=9 {
        let root = m.moment(k).abs().powf(1.0 / k as f64);
        assert!(root.is_finite() && root <= 4.0 * k as f64, "k={k} root={root}");
    }
}

#[test]
fn moments_at_cap_are_deterministic() {
    let law = IdLaw::poisson(2.0).unwrap();
    let spec = GammaSpec::interpolation(1.0).unwrap();
    let a = limit_moments(&law, &spec, 9).unwrap();
    let b = limit_moments(&law, &spec, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    // Direct formula m_k = sum_pi exp(-kappa t) lambda^|pi| for small k.
    for k in 1..=6 {
        let want: f64 = enumerate_partitions(k)
            .unwrap()
            .map(|pi| (-(kappa(&pi) as f64)).exp() * 2f64.powi(pi.block_count() as i32))
            .sum();
        assert!((a.moment(k) - want).abs() <= 1e-12 * want);
    }
}
