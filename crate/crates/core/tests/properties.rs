use proptest::prelude::*;

use queuetion::bounds::{gsp_revenue_upper, own_rate_sum, revenue_bounds, vcg_revenue_lower_dp, vcg_revenue_upper};
use queuetion::equilibrium::{
    deviation_report_with_order, is_equilibrium_with_order, max_equilibrium_bids_gsp,
    max_equilibrium_bids_vcg, min_equilibrium_bids_vcg, near_sorted_check, window_check_with_order,
    EquilibriumProfile,
};
use queuetion::generate::{generate, Distribution, Precision};
use queuetion::mechanisms::{outcome, outcome_with_order, rank_by_bids};
use queuetion::model::{smith_order, total_weighted_waiting};
use queuetion::numeric::ratio;
use queuetion::oracle::{enumerate_equilibria, oracle_optimal_ordering, oracle_revenue_extremes, OracleLimits};
use queuetion::{BidProfile, Exact, Instance, MechanismKind, QueueOrder, Scalar};

fn exact_tol() -> Exact {
    Exact::default_tolerance()
}

fn build(params: &[(i64, i64)]) -> Instance<Exact> {
    Instance::new(
        params
            .iter()
            .enumerate()
            .map(|(i, &(t, w))| (format!("P{}", i + 1), Exact::from_int(t), Exact::from_int(w))),
    )
    .unwrap()
}

/// Small integer parameters, so value rates tie often.
fn instance(max_n: usize) -> impl Strategy<Value = Instance<Exact>> {
    prop::collection::vec((1i64..=4, 1i64..=8), 1..=max_n).prop_map(|p| build(&p))
}

/// Bids drawn from zero, the value rates, midpoints between them and a
/// value above all of them, so boundary cases come up often.
fn instance_and_bids(max_n: usize) -> impl Strategy<Value = (Instance<Exact>, Vec<Exact>)> {
    instance(max_n).prop_flat_map(|inst| {
        let mut pool = vec![Exact::from_int(0)];
        let v = inst.value_rates();
        pool.extend(v.iter().cloned());
        for a in &v {
            for b in &v {
                pool.push((a.clone() + b.clone()).half());
            }
        }
        let top = v.iter().cloned().fold(Exact::from_int(0), |a, b| if b > a { b } else { a });
        pool.push(top + Exact::from_int(1));
        pool.push(ratio(1, 3));
        let n = inst.len();
        (Just(inst), prop::collection::vec(prop::sample::select(pool), n))
    })
}

fn kind() -> impl Strategy<Value = MechanismKind> {
    prop_oneof![Just(MechanismKind::Vcg), Just(MechanismKind::Gsp)]
}

fn witness_ok(inst: &Instance<Exact>, w: &EquilibriumProfile<Exact>) -> bool {
    is_equilibrium_with_order(w.profile.kind, inst, w.profile.bids(), &w.order, &exact_tol())
}

fn revenue_with_order(inst: &Instance<Exact>, w: &EquilibriumProfile<Exact>) -> Exact {
    outcome_with_order(inst, &w.profile, &w.order).unwrap().revenue
}

fn scaled(inst: &Instance<Exact>, ct: &Exact, cw: &Exact) -> Instance<Exact> {
    Instance::new(
        inst.participants()
            .iter()
            .map(|p| (p.id.clone(), p.t.clone() * ct.clone(), p.w.clone() * cw.clone())),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smith_order_is_optimal(inst in instance(7)) {
        let (_, best) = oracle_optimal_ordering(&inst, &OracleLimits::default()).unwrap();
        prop_assert_eq!(total_weighted_waiting(&inst, &smith_order(&inst)).unwrap(), best);
    }

    #[test]
    fn adjacent_swap_changes_cost_by_exchange_term(inst in instance(7), seed in any::<u64>()) {
        let n = inst.len();
        prop_assume!(n >= 2);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let k = (seed as usize) % (n - 1);
        let (a, b) = (perm[k], perm[k + 1]);
        let before = total_weighted_waiting(&inst, &QueueOrder::new(perm.clone()).unwrap()).unwrap();
        perm.swap(k, k + 1);
        let after = total_weighted_waiting(&inst, &QueueOrder::new(perm).unwrap()).unwrap();
        // b jumps ahead of a: b stops waiting t_a, a starts waiting t_b
        prop_assert_eq!(after - before, inst.w(a) * inst.t(b) - inst.w(b) * inst.t(a));
    }

    #[test]
    fn window_matches_deviation((inst, bids) in instance_and_bids(6), kind in kind()) {
        let profile = BidProfile::new(kind, bids).unwrap();
        let order = rank_by_bids(profile.bids());
        let dev = deviation_report_with_order(&inst, &profile, &order, &exact_tol()).unwrap();
        let win = window_check_with_order(&inst, &profile, &order, &exact_tol()).unwrap();
        prop_assert_eq!(dev.equilibrium, win.satisfied, "violations {:?} failures {:?}", dev.violations, win.failed_constraints);
    }

    #[test]
    fn constructors_are_equilibria(inst in instance(8)) {
        let vmax = max_equilibrium_bids_vcg(&inst);
        let vmin = min_equilibrium_bids_vcg(&inst);
        let gmax = max_equilibrium_bids_gsp(&inst);
        prop_assert!(witness_ok(&inst, &vmax));
        prop_assert!(witness_ok(&inst, &vmin));
        prop_assert!(witness_ok(&inst, &gmax));
    }

    #[test]
    fn bound_witnesses_reproduce_bounds(inst in instance(8)) {
        for bound in [vcg_revenue_upper(&inst), gsp_revenue_upper(&inst), vcg_revenue_lower_dp(&inst)] {
            prop_assert!(witness_ok(&inst, &bound.witness));
            prop_assert_eq!(revenue_with_order(&inst, &bound.witness), bound.revenue);
        }
    }

    #[test]
    fn upper_bounds_coincide(inst in instance(8)) {
        prop_assert_eq!(vcg_revenue_upper(&inst).revenue, gsp_revenue_upper(&inst).revenue);
    }

    #[test]
    fn truthful_vcg_is_sandwiched(inst in instance(8)) {
        let truthful = BidProfile::new(MechanismKind::Vcg, inst.value_rates()).unwrap();
        let revenue = outcome(&inst, &truthful).unwrap().revenue;
        prop_assert!(vcg_revenue_lower_dp(&inst).revenue <= revenue);
        prop_assert!(revenue <= vcg_revenue_upper(&inst).revenue);
    }

    #[test]
    fn own_rate_sum_never_exceeds_construction(inst in instance(8)) {
        prop_assert!(own_rate_sum(&inst) <= vcg_revenue_upper(&inst).revenue);
    }

    #[test]
    fn bounds_are_homogeneous(inst in instance(6), ct in 1i64..=5, cw in 1i64..=5, den in 1i64..=3) {
        let ct = ratio(ct, den);
        let cw = ratio(cw, den);
        let lim = OracleLimits::default();
        let base = revenue_bounds(&inst, MechanismKind::Vcg, &lim).unwrap();
        let by_w = revenue_bounds(&scaled(&inst, &Exact::from_int(1), &cw), MechanismKind::Vcg, &lim).unwrap();
        let by_t = revenue_bounds(&scaled(&inst, &ct, &Exact::from_int(1)), MechanismKind::Vcg, &lim).unwrap();
        for (b, c) in [(&by_w, &cw), (&by_t, &ct)] {
            prop_assert_eq!(&b.lower.revenue, &(base.lower.revenue.clone() * c.clone()));
            prop_assert_eq!(&b.upper.revenue, &(base.upper.revenue.clone() * c.clone()));
            prop_assert_eq!(&b.own_rate_sum, &(base.own_rate_sum.clone() * c.clone()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dp_matches_oracle_minimum(inst in instance(4)) {
        let ex = oracle_revenue_extremes(&inst, MechanismKind::Vcg, 1, &OracleLimits::default()).unwrap();
        prop_assert_eq!(vcg_revenue_lower_dp(&inst).revenue, ex.overall.min);
        prop_assert_eq!(vcg_revenue_upper(&inst).revenue, ex.efficient.max);
    }

    #[test]
    fn gsp_upper_matches_oracle(inst in instance(4)) {
        let ex = oracle_revenue_extremes(&inst, MechanismKind::Gsp, 1, &OracleLimits::default()).unwrap();
        prop_assert_eq!(gsp_revenue_upper(&inst).revenue, ex.efficient.max);
    }

    #[test]
    fn vcg_oracle_equilibria_are_near_sorted(inst in instance(4)) {
        let set = enumerate_equilibria(&inst, MechanismKind::Vcg, 1, &OracleLimits::default()).unwrap();
        prop_assert!(!set.entries.is_empty());
        for e in &set.entries {
            prop_assert!(near_sorted_check(&inst, &e.order), "{:?}", e.order);
        }
    }

    #[test]
    fn refining_the_grid_only_adds_equilibria(inst in instance(3), kind in kind()) {
        let lim = OracleLimits::default();
        let coarse = enumerate_equilibria(&inst, kind, 1, &lim).unwrap();
        let fine = enumerate_equilibria(&inst, kind, 2, &lim).unwrap();
        for e in &coarse.entries {
            prop_assert!(fine.entries.iter().any(|f| f.order == e.order && f.bids == e.bids));
        }
    }

    #[test]
    fn float_bounds_track_exact(inst in instance(6)) {
        let float = inst.map(|x| x.to_f64()).unwrap();
        let pairs = [
            (vcg_revenue_upper(&inst).revenue.to_f64(), vcg_revenue_upper(&float).revenue),
            (vcg_revenue_lower_dp(&inst).revenue.to_f64(), vcg_revenue_lower_dp(&float).revenue),
            (gsp_revenue_upper(&inst).revenue.to_f64(), gsp_revenue_upper(&float).revenue),
        ];
        for (e, f) in pairs {
            prop_assert!((e - f).abs() <= 1e-9 * e.abs().max(1.0), "{} vs {}", e, f);
        }
    }

    #[test]
    fn generation_is_deterministic(n in 1usize..=12, seed in any::<u64>()) {
        for dist in [Distribution::Uniform, Distribution::Lognormal] {
            for precision in [Precision::Exact, Precision::Float] {
                prop_assert_eq!(generate(n, seed, dist, precision), generate(n, seed, dist, precision));
            }
        }
    }
}

#[test]
fn gsp_equilibria_need_not_be_near_sorted() {
    // v = (1, 1, 3/2): the fast participant can sit last under GSP
    let inst = build(&[(1, 1), (1, 1), (2, 3)]);
    let set = enumerate_equilibria(&inst, MechanismKind::Gsp, 1, &OracleLimits::default()).unwrap();
    let outlier = set
        .entries
        .iter()
        .find(|e| !near_sorted_check(&inst, &e.order))
        .expect("a GSP equilibrium with a long-range inversion");
    assert_eq!(outlier.order.as_slice(), &[0, 1, 2]);
    let profile = BidProfile::new(MechanismKind::Gsp, outlier.bids.clone()).unwrap();
    let report = deviation_report_with_order(&inst, &profile, &outlier.order, &exact_tol()).unwrap();
    assert!(report.equilibrium);
}
