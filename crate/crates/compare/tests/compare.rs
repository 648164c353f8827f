use specmix_compare::*;
use specmix_core::levy::IdLaw;
use specmix_core::moments::{limit_moments, MomentTable, KAPPA_CONVENTION};
use specmix_core::{Error, GammaSpec, Time};
use specmix_lab::c64;
use specmix_lab::sample::{mean_se, SampleMeta};
use specmix_lab::{simulate, EnsembleKind, EnsembleSpec, Field, SpectralSample, VectorKind};

fn covariance(n: usize, seed: u64, ratio: f64, vectors: VectorKind) -> EnsembleSpec {
    EnsembleSpec { n, seed, vector_scale: 1.0, kind: EnsembleKind::CovarianceMatrix { ratio, weights: None, vectors } }
}

fn meta(n: usize, reps: usize) -> SampleMeta {
    SampleMeta { ensemble: covariance(n, 0, 1.0, VectorKind::UniformSphere { field: Field::Real }), seed: 0, repetitions: reps, beta: 1 }
}

fn table(m: Vec<f64>) -> MomentTable {
    MomentTable {
        k: (1..=m.len()).collect(),
        m,
        gamma: GammaSpec::unit(),
        law: IdLaw::poisson(1.0).unwrap(),
        kappa_convention: KAPPA_CONVENTION.into(),
    }
}

#[test]
fn table_equal_to_the_empirical_means_gives_zero_z() {
    let s = SpectralSample::from_spectra(vec![vec![0.5, 1.0, 3.0], vec![0.25, 2.0, 2.5], vec![1.0, 1.0, 1.5]], 3, meta(3, 3));
    let em = s.empirical_moments(3).unwrap();
    let r = compare_moments(&s, &table(em.mean[1..].to_vec()), 3.0).unwrap();
    assert!(r.passed);
    assert!(r.rows.iter().all(|row| row.z.abs() < 1e-12));
}

#[test]
fn zero_se_with_a_discrepancy_is_degenerate() {
    let s = SpectralSample::from_spectra(vec![vec![1.0, 1.0]; 4], 2, meta(2, 4));
    assert!(compare_moments(&s, &table(vec![1.0, 1.0]), 3.0).unwrap().passed);
    let e = compare_moments(&s, &table(vec![1.0, 2.0]), 3.0);
    assert!(matches!(e, Err(Error::Degenerate(_))));
}

#[test]
fn report_ignores_repetition_order() {
    let spectra = vec![vec![0.5, 1.0, 3.0], vec![0.25, 2.0, 2.5], vec![1.0, 1.0, 1.5], vec![0.0, 0.1, 4.0]];
    let mut reversed = spectra.clone();
    reversed.reverse();
    let t = table(vec![1.5, 4.0, 15.0]);
    let a = compare_moments(&SpectralSample::from_spectra(spectra, 3, meta(3, 4)), &t, 3.0).unwrap();
    let b = compare_moments(&SpectralSample::from_spectra(reversed, 3, meta(3, 4)), &t, 3.0).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn zero_matrices() {
    let s = SpectralSample::from_spectra(vec![vec![0.0; 5]; 3], 2, meta(5, 3));
    let z = [c64::new(0.0, 1.0), c64::new(-2.0, 0.5)];
    let g = empirical_cauchy_transform(&s, &z).unwrap();
    for (g, z) in g.iter().zip(z) {
        assert!((g - 1.0 / z).norm() < 1e-15);
    }
    let h = histogram(&s, 10, RangePolicy::Full).unwrap();
    assert_eq!(h.densities, vec![1.0]);
    assert!(h.edges[0] < 0.0 && h.edges[1] > 0.0);
    assert_eq!(h.overflow_mass, 0.0);
}

#[test]
fn real_axis_is_rejected() {
    let s = SpectralSample::from_spectra(vec![vec![0.0; 2]; 2], 2, meta(2, 2));
    assert!(empirical_cauchy_transform(&s, &[c64::new(1.0, 0.0)]).is_err());
    assert!(empirical_cauchy_transform(&s, &[c64::new(1.0, -1.0)]).is_err());
}

#[test]
fn histogram_mass_is_one_under_every_policy() {
    let spec = covariance(
        150,
        3,
        1.0,
        VectorKind::HeavyTailPareto { alpha: 0.8, truncation: None, field: Field::Real, recenter: true },
    );
    let s = simulate(&spec, 2, 2).unwrap();
    for policy in [RangePolicy::Full, RangePolicy::Quantile(0.99), RangePolicy::Quantile(0.9)] {
        let h = histogram(&s, 40, policy).unwrap();
        assert!((h.mass() - 1.0).abs() < 1e-9, "{policy:?}: {}", h.mass());
        assert!(h.overflow_mass >= 0.0 && h.overflow_mass < 0.25);
    }
    assert!(histogram(&s, 40, RangePolicy::Quantile(0.3)).is_err());
}

#[test]
fn marchenko_pastur_histogram() {
    let s = simulate(&covariance(2000, 11, 2.0, VectorKind::UniformSphere { field: Field::Real }), 1, 2).unwrap();
    let h = histogram(&s, 60, RangePolicy::Full).unwrap();
    let dev = h.sup_deviation(|x| mp_density(2.0, x));
    assert!(dev < 0.05, "sup deviation {dev}");
    let csv = h.to_csv();
    assert!(csv.starts_with("edge_lo,edge_hi,density\n"));
    assert_eq!(csv.lines().count(), 61);
    assert_eq!(h.to_gnuplot().lines().count(), 61);
}

#[test]
fn mp_density_integrates_to_one_above_ratio_one() {
    let (a, b) = ((1.0 - 2f64.sqrt()).powi(2), (1.0 + 2f64.sqrt()).powi(2));
    let n = 200_000;
    let h = (b - a) / n as f64;
    let mass: f64 = (0..n).map(|i| mp_density(2.0, a + h * (i as f64 + 0.5)) * h).sum();
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}

#[test]
fn semicircle_transform_at_two_i() {
    let n = 200;
    let spec = EnsembleSpec {
        n,
        seed: 5,
        vector_scale: 1.0,
        kind: EnsembleKind::TriangularArrayId {
            law: IdLaw::GaussianStd,
            refinement: 16,
            vectors: VectorKind::UniformSphere { field: Field::Complex },
        },
    };
    let s = simulate(&spec, 20, 2).unwrap();
    let z = c64::new(0.0, 2.0);
    let per_rep: Vec<f64> = s
        .eigenvalues
        .iter()
        .map(|ev| ev.iter().map(|&x| (1.0 / (z - x)).im).sum::<f64>() / n as f64)
        .collect();
    let (mean, se) = mean_se(&per_rep);
    let g = empirical_cauchy_transform(&s, &[z]).unwrap()[0];
    assert!((g.im - mean).abs() < 1e-12);
    let want = semicircle_transform(1.0, z);
    // G(2i) = -i (sqrt 2 - 1) for unit variance
    assert!((want - c64::new(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-14);
    assert!(g.re.abs() < 1e-2);
    assert!((mean - want.im).abs() < 4.0 * se + 2.0 / n as f64, "{mean} vs {} (se {se})", want.im);
}

#[test]
fn integer_mass_drifts_away_with_time() {
    let run = |t: f64| {
        let spec = covariance(400, 7, 2.0, VectorKind::GaussianInterp { t: Time::Finite(t), field: Field::Complex });
        mass_near_integers(&simulate(&spec, 2, 2).unwrap(), 0.15)
    };
    let (early, late) = (run(0.01), run(1.0));
    assert!(early > late + 0.1, "t = 0.01: {early}, t = 1: {late}");
}

#[test]
fn wrong_rate_fails_the_gate() {
    let spec = covariance(300, 9, 2.0, VectorKind::GaussianInterp { t: Time::Finite(1.0), field: Field::Complex });
    let s = simulate(&spec, 16, 3).unwrap();
    let g = GammaSpec::interpolation(1.0).unwrap();
    let wrong = limit_moments(&IdLaw::poisson(2.2).unwrap(), &g, 3).unwrap();
    assert!(!compare_moments(&s, &wrong, DEFAULT_GATE).unwrap().passed);
}

/// With 4x the repetitions on a correct pairing, the standard errors halve
/// while the z-scores stay of order one.
#[test]
fn more_repetitions_shrink_the_standard_errors() {
    let g = GammaSpec::interpolation(1.0).unwrap();
    let m = limit_moments(&IdLaw::poisson(2.0).unwrap(), &g, 2).unwrap();
    let mut ratios = Vec::new();
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let spec = |reps_seed: u64| covariance(120, reps_seed, 2.0, VectorKind::GaussianInterp { t: Time::Finite(1.0), field: Field::Complex });
        let small = compare_moments(&simulate(&spec(100 + trial), 8, 2).unwrap(), &m, 3.0).unwrap();
        let large = compare_moments(&simulate(&spec(200 + trial), 32, 2).unwrap(), &m, 3.0).unwrap();
        ratios.push(large.rows[1].se / small.rows[1].se);
        worst = worst.max(large.rows[0].z.abs()).max(small.rows[0].z.abs());
    }
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[4] + ratios[5]);
    assert!((median - 0.5).abs() < 0.15, "median SE ratio {median}");
    assert!(worst < 6.0, "largest |z| {worst}");
}
