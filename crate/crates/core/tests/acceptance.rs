//! Acceptance suite. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits non-zero when any criterion fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use queuetion::bounds::{gsp_revenue_upper, own_rate_sum, revenue_bounds, vcg_revenue_lower_dp, vcg_revenue_upper};
use queuetion::cli::main_with_args;
use queuetion::equilibrium::{
    deviation_report_with_order, is_equilibrium_with_order, near_sorted_check, window_check_with_order,
    EquilibriumProfile,
};
use queuetion::fixtures::i3;
use queuetion::generate::{random_instance, Distribution};
use queuetion::mechanisms::{outcome, outcome_with_order, rank_by_bids};
use queuetion::model::{smith_order, total_weighted_waiting};
use queuetion::oracle::{enumerate_equilibria, extremes_of, oracle_optimal_ordering, OracleLimits};
use queuetion::{BidProfile, Exact, Instance, MechanismKind, Scalar};

/// Relative tolerance for float-mode comparisons.
const FLOAT_REL_TOL: f64 = 1e-9;
const CRITERION1_BUDGET: Duration = Duration::from_secs(10);
/// Largest acceptable fitted exponent of DP running time in N.
const DP_EXPONENT_LIMIT: f64 = 2.3;
const DP_SIZES: [usize; 3] = [100, 1_000, 10_000];
/// Oracle suite shared by criteria 4 to 8.
const SUITE_SIZE: u64 = 60;
const SUITE_MAX_N: usize = 5;

struct Verdict {
    pass: bool,
    detail: String,
}

fn dist(seed: u64) -> Distribution {
    if seed.is_multiple_of(2) {
        Distribution::Uniform
    } else {
        Distribution::Lognormal
    }
}

fn exact(n: usize, seed: u64) -> Instance<Exact> {
    random_instance(n, seed, dist(seed)).unwrap()
}

fn zero() -> Exact {
    Exact::default_tolerance()
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FLOAT_REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn criterion1() -> Verdict {
    let limits = OracleLimits::default();
    let start = Instant::now();
    let mut failures = 0;
    for seed in 0..200u64 {
        let n = 1 + (seed % 8) as usize;
        let e = exact(n, seed);
        let (_, best) = oracle_optimal_ordering(&e, &limits).unwrap();
        if total_weighted_waiting(&e, &smith_order(&e)).unwrap() != best {
            failures += 1;
        }
        let f: Instance<f64> = random_instance(n, seed, dist(seed)).unwrap();
        let (_, best) = oracle_optimal_ordering(&f, &limits).unwrap();
        let got = total_weighted_waiting(&f, &smith_order(&f)).unwrap();
        if !(got <= best || rel_close(got, best)) {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: failures == 0 && elapsed < CRITERION1_BUDGET,
        detail: format!(
            "smith order vs exhaustive minimum, 200 instances N<=8 exact+float: {failures} mismatches, {:.2}s (budget {}s)",
            elapsed.as_secs_f64(),
            CRITERION1_BUDGET.as_secs()
        ),
    }
}

/// Bids from zero, the value rates, their pairwise midpoints and one value
/// above the top, so ties and window boundaries are frequent.
fn random_bids(inst: &Instance<Exact>, rng: &mut ChaCha8Rng) -> Vec<Exact> {
    let v = inst.value_rates();
    let mut pool = vec![Exact::from_int(0)];
    pool.extend(v.iter().cloned());
    for a in &v {
        for b in &v {
            pool.push((a.clone() + b.clone()).half());
        }
    }
    let top = v.iter().cloned().reduce(|a, b| if b > a { b } else { a }).unwrap();
    pool.push(top + Exact::from_int(1));
    (0..inst.len()).map(|_| pool.choose(rng).unwrap().clone()).collect()
}

fn window_equivalence(kind: MechanismKind) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(kind as u64 + 11);
    let (mut disagreements, mut equilibria) = (0, 0);
    for seed in 0..500u64 {
        let inst = exact(1 + (seed % 6) as usize, 1_000 + seed);
        let profile = BidProfile::new(kind, random_bids(&inst, &mut rng)).unwrap();
        let order = rank_by_bids(profile.bids());
        let dev = deviation_report_with_order(&inst, &profile, &order, &zero()).unwrap();
        let win = window_check_with_order(&inst, &profile, &order, &zero()).unwrap();
        if dev.equilibrium != win.satisfied {
            disagreements += 1;
        }
        equilibria += usize::from(dev.equilibrium);
    }
    Verdict {
        pass: disagreements == 0,
        detail: format!(
            "{} window check vs deviation enumeration, 500 profiles N<=6 exact: {disagreements} disagreements ({equilibria} equilibria, {} non-equilibria)",
            kind.name().to_uppercase(),
            500 - equilibria
        ),
    }
}

struct SuiteRow {
    inst: Instance<Exact>,
    vcg_min: Exact,
    vcg_eff_max: Exact,
    vcg_max: Exact,
    gsp_eff_max: Exact,
    near_sorted_violations: usize,
    vcg_equilibria: usize,
}

fn suite() -> Vec<SuiteRow> {
    let limits = OracleLimits::default();
    (0..SUITE_SIZE)
        .map(|seed| {
            let n = 2 + (seed as usize % (SUITE_MAX_N - 1));
            let inst = exact(n, 5_000 + seed);
            let vcg = enumerate_equilibria(&inst, MechanismKind::Vcg, 1, &limits).unwrap();
            let gsp = enumerate_equilibria(&inst, MechanismKind::Gsp, 1, &limits).unwrap();
            let near_sorted_violations =
                vcg.entries.iter().filter(|e| !near_sorted_check(&inst, &e.order)).count();
            let vx = extremes_of(&vcg).unwrap();
            let gx = extremes_of(&gsp).unwrap();
            SuiteRow {
                vcg_equilibria: vcg.entries.len(),
                near_sorted_violations,
                vcg_min: vx.overall.min,
                vcg_eff_max: vx.efficient.max,
                vcg_max: vx.overall.max,
                gsp_eff_max: gx.efficient.max,
                inst,
            }
        })
        .collect()
}

fn criterion4(rows: &[SuiteRow]) -> Verdict {
    let bad: usize = rows.iter().map(|r| r.near_sorted_violations).sum();
    let total: usize = rows.iter().map(|r| r.vcg_equilibria).sum();
    Verdict {
        pass: bad == 0,
        detail: format!(
            "near-sorted check over {total} VCG oracle equilibria on {} instances N<=5: {bad} violations",
            rows.len()
        ),
    }
}

fn criterion5(rows: &[SuiteRow]) -> Verdict {
    let mismatches = rows.iter().filter(|r| vcg_revenue_upper(&r.inst).revenue != r.vcg_eff_max).count();
    let differs = rows.iter().filter(|r| own_rate_sum(&r.inst) != vcg_revenue_upper(&r.inst).revenue).count();
    let beyond = rows.iter().filter(|r| r.vcg_max > r.vcg_eff_max).count();
    let inst = i3();
    let (construction, formula) = (vcg_revenue_upper(&inst).revenue, own_rate_sum(&inst));
    Verdict {
        pass: mismatches == 0 && construction == Exact::from_int(12) && formula == Exact::from_int(7),
        detail: format!(
            "VCG upper vs oracle max on efficient orders, {} instances: {mismatches} mismatches; \
             I3 construction {construction} vs own-rate formula {formula}; formula differs on {differs}/{}; \
             oracle max over all orders exceeds the efficient max on {beyond}/{}",
            rows.len(),
            rows.len(),
            rows.len()
        ),
    }
}

fn fitted_exponent(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Seconds per DP call, repeated until at least 50ms have been measured.
fn time_dp(inst: &Instance<f64>) -> f64 {
    let mut reps = 0u32;
    let start = Instant::now();
    while reps == 0 || start.elapsed() < Duration::from_millis(50) {
        std::hint::black_box(vcg_revenue_lower_dp(std::hint::black_box(inst)));
        reps += 1;
    }
    start.elapsed().as_secs_f64() / f64::from(reps)
}

/// Two tied groups of half the participants each (value rates 2 and 1).
/// Every member of the second group can be lent to the first and every
/// remaining member can close the group, so the DP does quadratic work.
fn two_groups(n: usize) -> Instance<f64> {
    Instance::new((0..n).map(|i| {
        let t = 1.0 + (i % 97) as f64 / 8.0;
        let v = if i < n / 2 { 2.0 } else { 1.0 };
        (format!("P{}", i + 1), t, v * t)
    }))
    .unwrap()
}

fn criterion6(rows: &[SuiteRow]) -> Verdict {
    let mismatches = rows.iter().filter(|r| vcg_revenue_lower_dp(&r.inst).revenue != r.vcg_min).count();
    let series = |label: &str, make: &dyn Fn(usize) -> Instance<f64>| {
        let points: Vec<(f64, f64)> = DP_SIZES.iter().map(|&n| (n as f64, time_dp(&make(n)))).collect();
        let exponent = fitted_exponent(&points);
        let timings: Vec<String> = points.iter().map(|(n, t)| format!("N={n}: {:.3}ms", t * 1e3)).collect();
        (exponent, format!("{label} {} -> exponent {exponent:.2}", timings.join(", ")))
    };
    let (e_random, random) = series("random", &|n| random_instance(n, 9, Distribution::Uniform).unwrap());
    let (e_tied, tied) = series("two tied halves", &two_groups);
    Verdict {
        pass: mismatches == 0 && e_random < DP_EXPONENT_LIMIT && e_tied < DP_EXPONENT_LIMIT,
        detail: format!(
            "DP lower bound vs oracle min, {} instances: {mismatches} mismatches; timing {random}; {tied} (limit {DP_EXPONENT_LIMIT})",
            rows.len()
        ),
    }
}

fn criterion7(rows: &[SuiteRow]) -> Verdict {
    let closed_form = (0..200u64)
        .filter(|&seed| {
            let inst = exact(1 + (seed % 12) as usize, 7_000 + seed);
            gsp_revenue_upper(&inst).revenue != vcg_revenue_upper(&inst).revenue
        })
        .count();
    let oracle = rows.iter().filter(|r| gsp_revenue_upper(&r.inst).revenue != r.gsp_eff_max).count();
    Verdict {
        pass: closed_form == 0 && oracle == 0,
        detail: format!(
            "GSP upper = VCG upper on 200 instances N<=12: {closed_form} mismatches; GSP upper vs GSP oracle max on efficient orders, {} instances: {oracle} mismatches",
            rows.len()
        ),
    }
}

fn witness_sound(inst: &Instance<Exact>, witness: &EquilibriumProfile<Exact>, revenue: &Exact) -> bool {
    let p = &witness.profile;
    is_equilibrium_with_order(p.kind, inst, p.bids(), &witness.order, &zero())
        && outcome_with_order(inst, p, &witness.order).map(|o| o.revenue == *revenue).unwrap_or(false)
}

fn criterion8(rows: &[SuiteRow]) -> Verdict {
    let limits = OracleLimits::default();
    let mut checked = 0;
    let mut bad = 0;
    for r in rows {
        for kind in [MechanismKind::Vcg, MechanismKind::Gsp] {
            let b = revenue_bounds(&r.inst, kind, &limits).unwrap();
            for bound in [&b.lower, &b.upper] {
                checked += 1;
                bad += usize::from(!witness_sound(&r.inst, &bound.witness, &bound.revenue));
            }
        }
    }
    Verdict {
        pass: bad == 0,
        detail: format!("{checked} bound witnesses (both mechanisms, lower and upper): {bad} unsound"),
    }
}

fn criterion9(rows: &[SuiteRow]) -> Verdict {
    let mut insts: Vec<Instance<Exact>> = rows.iter().map(|r| r.inst.clone()).collect();
    insts.extend((0..200u64).map(|seed| exact(1 + (seed % 12) as usize, 7_000 + seed)));
    let bad = insts
        .iter()
        .filter(|inst| {
            let truthful = BidProfile::new(MechanismKind::Vcg, inst.value_rates()).unwrap();
            let rev = outcome(inst, &truthful).unwrap().revenue;
            !(vcg_revenue_lower_dp(inst).revenue <= rev && rev <= vcg_revenue_upper(inst).revenue)
        })
        .count();
    Verdict {
        pass: bad == 0,
        detail: format!("lower <= truthful VCG revenue <= upper on {} instances: {bad} violations", insts.len()),
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with_args(std::iter::once("queuetion").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn criterion10() -> Verdict {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests");
    let data = |f: &str| root.join("data").join(f).to_string_lossy().into_owned();
    let mut golden_checked = 0;
    let mut golden_bad = Vec::new();
    let mut cases: Vec<(String, Vec<String>)> = Vec::new();
    for inst in ["i1", "i2", "i3"] {
        cases.push((format!("order_{inst}.json"), vec!["order".into(), data(&format!("{inst}.json"))]));
        for mech in ["vcg", "gsp"] {
            cases.push((
                format!("bounds_{inst}_{mech}.json"),
                vec!["bounds".into(), data(&format!("{inst}.json")), "--mechanism".into(), mech.into()],
            ));
        }
    }
    for (inst, bids) in [
        ("i1", "i1_vcg"),
        ("i2", "i2_truthful"),
        ("i2", "i2_gsp"),
        ("i3", "i3_truthful"),
        ("i3", "i3_gsp_max"),
    ] {
        for cmd in ["run", "verify"] {
            cases.push((
                format!("{cmd}_{bids}.json"),
                vec![cmd.into(), data(&format!("{inst}.json")), data(&format!("{bids}.json"))],
            ));
        }
    }
    for (golden, args) in &cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, out) = cli(&args);
        golden_checked += 1;
        let expected = fs::read_to_string(root.join("golden").join(golden)).unwrap_or_default();
        if code != 0 || out != expected {
            golden_bad.push(golden.clone());
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{").unwrap();
    let big = dir.path().join("big.json");
    let (big_code, _) = cli(&["gen", "--n", "9", "--seed", "1", "--out", big.to_str().unwrap()]);
    let exits: Vec<(Vec<String>, i32)> = vec![
        (vec!["order".into(), garbage.to_string_lossy().into_owned()], 2),
        (vec!["order".into(), data("zero_t.json"), "--bogus".into()], 2),
        (vec!["order".into(), data("zero_t.json")], 3),
        (vec!["run".into(), data("i2.json"), data("i2_three_bids.json")], 3),
        (vec!["oracle".into(), big.to_string_lossy().into_owned(), "--mechanism".into(), "vcg".into()], 5),
    ];
    let mut exit_bad = usize::from(big_code != 0);
    for (args, code) in &exits {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        exit_bad += usize::from(cli(&args).0 != *code);
    }
    // internal-consistency failures (exit 4) cannot be provoked through a
    // correct build; the class mapping is checked directly instead
    let internal = queuetion::cli::exit_code(&queuetion::Error::Internal(String::new()));
    exit_bad += usize::from(internal != 4);

    let a = cli(&["gen", "--n", "4", "--seed", "7"]);
    let b = cli(&["gen", "--n", "4", "--seed", "7"]);
    let deterministic = a.0 == 0 && a == b;

    Verdict {
        pass: golden_bad.is_empty() && exit_bad == 0 && deterministic,
        detail: format!(
            "golden files {}/{golden_checked} match{}; exit codes 2/3/4/5: {exit_bad} wrong; gen deterministic: {deterministic}",
            golden_checked - golden_bad.len(),
            if golden_bad.is_empty() { String::new() } else { format!(" (differ: {})", golden_bad.join(", ")) }
        ),
    }
}

fn main() {
    // `cargo test -- --list` and filters are passed through; there is only
    // one suite here, so run it unless asked to list
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let start = Instant::now();
    let rows = suite();
    println!(
        "oracle suite: {} exact instances, N in 2..={SUITE_MAX_N}, built in {:.2}s",
        rows.len(),
        start.elapsed().as_secs_f64()
    );
    let criteria: Vec<(u32, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, Box::new(criterion1)),
        (2, Box::new(|| window_equivalence(MechanismKind::Vcg))),
        (3, Box::new(|| window_equivalence(MechanismKind::Gsp))),
        (4, Box::new(|| criterion4(&rows))),
        (5, Box::new(|| criterion5(&rows))),
        (6, Box::new(|| criterion6(&rows))),
        (7, Box::new(|| criterion7(&rows))),
        (8, Box::new(|| criterion8(&rows))),
        (9, Box::new(|| criterion9(&rows))),
        (10, Box::new(criterion10)),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let v = run();
        failed += usize::from(!v.pass);
        println!("criterion {id:>2}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
