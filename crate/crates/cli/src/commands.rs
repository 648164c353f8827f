//! One function per subcommand, each returning a deterministic summary.

use serde_json::{json, Value};
use specmix_compare::{
    compare_moments, empirical_cauchy_transform, histogram, CauchyPoint, RangePolicy,
};
use specmix_core::gamma::gamma_consistency_check;
use specmix_core::moments::{f_gamma_kappa, support_growth_check, KAPPA_CONVENTION};
use specmix_core::partition::{
    connected_components, cyclic_block_changes, enumerate_partitions, kappa, linear_run_count, thin,
};
use specmix_core::quotient::{
    build_hypergraph, cycle_search_oracle, cyclomatic_number, enumerate_acyclic_edge_partitions, is_acyclic,
    quotient_cycle,
};
use specmix_core::{Error, GammaSpec, IdLaw, MomentEngine, Partition, Time};
use specmix_lab::brownian::{brownian_moment_check, BrownianConfig};
use specmix_lab::resolvent::{cauchy_check, CauchyConfig};
use specmix_lab::{c64, simulate, EnsembleKind, VectorKind};

use crate::config::{load, moment_cap, CompareConfig, GammaFile, MomentsConfig, SimulateConfig};
use crate::{Cli, CliError, Command};

pub struct Outcome {
    pub summary: Value,
    /// The config after defaults and overrides, echoed into the manifest.
    pub resolved: Value,
    pub passed: bool,
    /// Extra files for `--out`, as (name, contents).
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn new(summary: Value, resolved: Value, passed: bool) -> Self {
        Outcome { summary, resolved, passed, files: Vec::new() }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("config types serialize")
}

pub fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Kappa { partition } => cmd_kappa(partition),
        Command::FGamma { partition, t } => {
            let gamma = match (t, cfg) {
                (Some(t), None) => GammaSpec::interpolation(*t)?,
                (None, Some(_)) => load::<GammaFile>(cfg)?.gamma,
                _ => return Err(CliError::Config("f-gamma needs exactly one of --t and --config".into())),
            };
            cmd_f_gamma(partition, gamma)
        }
        Command::Moments => cmd_moments(load(cfg)?),
        Command::Simulate => {
            let mut c: SimulateConfig = load(cfg)?;
            if let Some(s) = cli.seed {
                c.ensemble.seed = s;
            }
            cmd_simulate(c, cli.strict)
        }
        Command::Compare => {
            let mut c: CompareConfig = load(cfg)?;
            if let Some(s) = cli.seed {
                c.cases.iter_mut().for_each(|case| case.ensemble.seed = s);
            }
            cmd_compare(c, cli.strict)
        }
        Command::CauchyCheck => {
            let mut c: CauchyConfig = load(cfg)?;
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            let r = cauchy_check(&c)?;
            Ok(Outcome::new(to_value(&r), to_value(&c), r.passed))
        }
        Command::BrownianCheck => {
            let mut c: BrownianConfig = load(cfg)?;
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            let r = brownian_moment_check(&c, cli.strict)?;
            Ok(Outcome::new(to_value(&r), to_value(&c), r.passed))
        }
        Command::Selftest => cmd_selftest(),
    }
}

fn cmd_kappa(s: &str) -> Result<Outcome, CliError> {
    let pi: Partition = s.parse()?;
    let components: Vec<Value> = connected_components(&pi)
        .iter()
        .map(|c| json!({ "blocks": c.to_string(), "block_changes": cyclic_block_changes(c.partition()) }))
        .collect();
    let k = kappa(&pi);
    let linear = linear_run_count(&pi);
    let mut summary = json!({
        "partition": pi.to_string(),
        "kappa": k,
        "components": components,
        "thin": thin(&pi).to_string(),
        "convention": KAPPA_CONVENTION,
        "linear_run_count": linear,
    });
    if linear != k {
        summary["note"] = json!(
            "kappa counts block changes around each component read cyclically; reading components linearly, \
             without the wrap-around, counts runs instead and gives linear_run_count"
        );
    }
    Ok(Outcome::new(summary, json!({ "partition": s }), true))
}

fn cmd_f_gamma(s: &str, gamma: GammaSpec) -> Result<Outcome, CliError> {
    let pi: Partition = s.parse()?;
    let engine = MomentEngine::with_cap(gamma.clone(), moment_cap()?);
    let f = engine.f_gamma(&pi)?;
    let mut summary = json!({ "partition": pi.to_string(), "gamma": gamma, "f_gamma": f, "kappa": kappa(&pi) });
    if let specmix_core::GammaVariant::Interpolation(t) = gamma.variant() {
        summary["exp_minus_kappa_t"] = json!(f_gamma_kappa(&pi, *t));
    }
    Ok(Outcome::new(summary, json!({ "partition": s, "gamma": gamma }), true))
}

fn cmd_moments(c: MomentsConfig) -> Result<Outcome, CliError> {
    c.law.validate()?;
    let table = MomentEngine::with_cap(c.gamma.clone(), moment_cap()?).limit_moments(&c.law, c.k_max)?;
    Ok(Outcome::new(to_value(&table), to_value(&c), true))
}

fn cmd_simulate(c: SimulateConfig, strict: bool) -> Result<Outcome, CliError> {
    for w in c.ensemble.validate(strict)? {
        eprintln!("{}", json!({ "warning": w }));
    }
    let s = simulate(&c.ensemble, c.repetitions, c.k_max)?;
    let summary = s.summary()?;
    let mut out = Outcome::new(summary, to_value(&c), true);
    out.files.push(("spectra.csv".into(), s.to_csv()));
    Ok(out)
}

fn heavy_tailed(kind: &EnsembleKind) -> bool {
    matches!(
        kind,
        EnsembleKind::CompoundPoissonMatrix { vectors: VectorKind::HeavyTailPareto { .. }, .. }
            | EnsembleKind::TriangularArrayId { vectors: VectorKind::HeavyTailPareto { .. }, .. }
            | EnsembleKind::CovarianceMatrix { vectors: VectorKind::HeavyTailPareto { .. }, .. }
    )
}

fn cmd_compare(c: CompareConfig, strict: bool) -> Result<Outcome, CliError> {
    if c.cases.is_empty() {
        return Err(CliError::Config("compare needs at least one case".into()));
    }
    // Validate everything before any sampling starts.
    let mut labels = std::collections::BTreeSet::new();
    for case in &c.cases {
        if !labels.insert(case.label.as_str()) || case.label.is_empty() {
            return Err(CliError::Config(format!("case labels must be unique and non-empty: {:?}", case.label)));
        }
        case.law.validate()?;
        for w in case.ensemble.validate(strict)? {
            eprintln!("{}", json!({ "case": case.label, "warning": w }));
        }
        if let Some(grid) = &case.cauchy_grid {
            if let Some(z) = grid.iter().find(|z| !(z[1] > 0.0)) {
                return Err(Error::invalid(format!("case {}: grid point {z:?} is not above the real axis", case.label)).into());
            }
        }
    }
    let cap = moment_cap()?;
    let mut reports = Vec::new();
    let mut files = Vec::new();
    let mut passed = true;
    for case in &c.cases {
        let table = MomentEngine::with_cap(case.gamma.clone(), cap).limit_moments(&case.law, case.k_max)?;
        let s = simulate(&case.ensemble, case.repetitions, case.k_max)?;
        let mut r = compare_moments(&s, &table, case.gate)?;
        r.label = case.label.clone();
        if let Some(h) = &case.histogram {
            let policy = h.range.unwrap_or(if heavy_tailed(&case.ensemble.kind) {
                RangePolicy::Quantile(0.99)
            } else {
                RangePolicy::Full
            });
            let hist = histogram(&s, h.bins, policy)?;
            files.push((format!("{}_histogram.csv", case.label), hist.to_csv()));
            files.push((format!("{}_histogram.dat", case.label), hist.to_gnuplot()));
            r.histogram = Some(hist);
        }
        if let Some(grid) = &case.cauchy_grid {
            let zs: Vec<c64> = grid.iter().map(|z| c64::new(z[0], z[1])).collect();
            let g = empirical_cauchy_transform(&s, &zs)?;
            r.cauchy_transform =
                Some(grid.iter().zip(g).map(|(z, g)| CauchyPoint { z: *z, value: [g.re, g.im] }).collect());
        }
        passed &= r.passed;
        reports.push(r);
    }
    let summary = json!({ "passed": passed, "reports": reports });
    let mut out = Outcome::new(summary, to_value(&c), passed);
    out.files = files;
    Ok(out)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> Result<String, String>) -> Check {
    match run() {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

/// The exact suites at small sizes; a failure here is a bug, so it maps to
/// the contract-violation exit code.
fn cmd_selftest() -> Result<Outcome, CliError> {
    let lib = |e: Error| e.to_string();
    let checks = [
        check("kappa_identity", || {
            let mut n = 0;
            for t in [0.3, 1.0, 2.5] {
                let engine = MomentEngine::new(GammaSpec::interpolation(t).map_err(lib)?);
                for k in 1..=6 {
                    for pi in enumerate_partitions(k).map_err(lib)? {
                        let got = engine.f_gamma_unfactored(&pi).map_err(lib)?;
                        let want = f_gamma_kappa(&pi, Time::Finite(t));
                        if (got - want).abs() > 1e-12 * want.abs().max(f64::MIN_POSITIVE) {
                            return Err(format!("{pi} at t = {t}: {got} vs {want}"));
                        }
                        n += 1;
                    }
                }
            }
            Ok(format!("{n} partitions"))
        }),
        check("bell_and_catalan_endpoints", || {
            let law = IdLaw::poisson(1.0).map_err(lib)?;
            let bell = [1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0];
            let catalan = [1.0, 2.0, 5.0, 14.0, 42.0, 132.0, 429.0, 1430.0];
            for (spec, want) in [(GammaSpec::interpolation(0.0).map_err(lib)?, bell), (GammaSpec::free_limit(), catalan)] {
                let m = MomentEngine::new(spec).limit_moments(&law, 8).map_err(lib)?.m;
                if m.iter().zip(want).any(|(a, b)| (a - b).abs() > 1e-9 * b) {
                    return Err(format!("got {m:?}, want {want:?}"));
                }
            }
            Ok("k <= 8".into())
        }),
        check("tau_counts", || {
            let d = enumerate_acyclic_edge_partitions(&Partition::discrete(4)).len();
            let p = enumerate_acyclic_edge_partitions(&"{1}{2,4}{3}".parse().map_err(lib)?).len();
            if (d, p) != (1, 2) {
                return Err(format!("got {d} and {p}, want 1 and 2"));
            }
            Ok("1 and 2".into())
        }),
        check("acyclicity_criterion", || {
            let mut n = 0;
            for k in 1..=4 {
                for pi in enumerate_partitions(k).map_err(lib)? {
                    let g = quotient_cycle(&pi);
                    for tau in enumerate_partitions(k).map_err(lib)? {
                        let h = build_hypergraph(&g, &tau).map_err(lib)?;
                        if cyclomatic_number(&h) < 0 || is_acyclic(&h) != cycle_search_oracle(&h).map_err(lib)? {
                            return Err(format!("pi = {pi}, tau = {tau}"));
                        }
                        n += 1;
                    }
                }
            }
            Ok(format!("{n} pairs"))
        }),
        check("support_growth", || {
            let engine = MomentEngine::new(GammaSpec::interpolation(1.0).map_err(lib)?);
            let r = support_growth_check(&engine, &IdLaw::poisson(1.0).map_err(lib)?, 8).map_err(lib)?;
            if r.passed { Ok(format!("{} rows", r.rows.len())) } else { Err(format!("{r:?}")) }
        }),
        check("gamma_consistency", || {
            for t in [0.0, 0.5, 2.0] {
                let r = gamma_consistency_check(&GammaSpec::interpolation(t).map_err(lib)?, 6).map_err(lib)?;
                if !r.passed {
                    return Err(format!("t = {t}: {:?}", r.first_violation));
                }
            }
            Ok("k <= 6".into())
        }),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let rows: Vec<Value> =
        checks.iter().map(|c| json!({ "check": c.name, "passed": c.passed, "detail": c.detail })).collect();
    let summary = json!({ "passed": passed, "checks": rows });
    if !passed {
        eprintln!("{summary}");
        return Err(Error::contract("selftest found a failing invariant").into());
    }
    Ok(Outcome::new(summary, json!({}), true))
}
