use std::collections::BTreeSet;

use fairdiv::allocation::Allocation;
use fairdiv::envy_graph::{build_graph, resolve_cycles};
use fairdiv::exact::{int, FairRatio, Q};
use fairdiv::fairness::{efx_ratio, mu2, pmms_ratio, tefx_ratio, DEFAULT_MU2_CAP};
use fairdiv::labase::{meets_efx_factor, run_labase, Branch, Eta, EtaMode, LaBaseConfig};
use fairdiv::oracle::mu2_naive;
use fairdiv::pmms::{pmms_factor, run_pmms, DEFAULT_PRECISION_BITS};
use fairdiv::scaling::{apply_scaling, lp_feasible, max_range_scaling, Feasibility};
use fairdiv::tefx::{meets_tefx_factor, run_tefx, TefxVariant};
use fairdiv::{Instance, TieBreakPolicy, Valuations};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Raw matrix patched so that every good and every agent has a positive entry.
fn instance_strategy(max_n: usize, max_m: usize, max_v: i64) -> impl Strategy<Value = Instance> {
    (2..=max_n, 1..=max_m).prop_flat_map(move |(n, m)| {
        proptest::collection::vec(proptest::collection::vec(0..=max_v, m), n).prop_map(
            move |mut rows| {
                for g in 0..m {
                    if rows.iter().all(|r| r[g] == 0) {
                        rows[g % n][g] = 1;
                    }
                }
                for i in 0..n {
                    if rows[i].iter().all(|&v| v == 0) {
                        rows[i][i % m] = 1;
                    }
                }
                Instance::from_integers(&rows).unwrap()
            },
        )
    })
}

fn policy_strategy() -> impl Strategy<Value = TieBreakPolicy> {
    prop_oneof![
        Just(TieBreakPolicy::lowest()),
        Just(TieBreakPolicy::highest()),
        Just(TieBreakPolicy::appendix_a()),
    ]
}

/// Instance plus a random partial allocation of it.
fn partial_strategy() -> impl Strategy<Value = (Instance, Allocation)> {
    instance_strategy(5, 8, 12).prop_flat_map(|inst| {
        let (n, m) = (inst.n(), inst.m());
        proptest::collection::vec(0..=n, m).prop_map(move |owners| {
            let mut bundles = vec![Vec::new(); n];
            for (g, &o) in owners.iter().enumerate() {
                if o < n {
                    bundles[o].push(g);
                }
            }
            (inst.clone(), Allocation::from_bundles(bundles, m).unwrap())
        })
    })
}

fn values(inst: &Instance, alloc: &Allocation) -> Vec<Q> {
    (0..inst.n()).map(|i| inst.bundle_value(i, alloc.bundle(i))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn range_data_identities(inst in instance_strategy(5, 8, 30)) {
        let gamma = inst.range_parameter();
        for g in 0..inst.m() {
            let s = inst.good_stats(g);
            prop_assert_eq!(&s.min_positive, &(&s.gamma * &s.max));
            prop_assert_eq!(&s.base_sq, &(&s.min_positive * &s.max));
            for i in 0..inst.n() {
                let v = inst.value_ref(i, g);
                if v.is_positive() {
                    let v2 = v * v;
                    prop_assert!(&gamma * &s.base_sq <= v2);
                    prop_assert!(&v2 * &gamma <= s.base_sq);
                }
            }
        }
        let mut rows = inst.rows().to_vec();
        rows.reverse();
        for r in &mut rows {
            r.reverse();
        }
        prop_assert_eq!(Instance::new(rows).unwrap().range_parameter(), gamma);
    }

    #[test]
    fn cycle_elimination_is_monotone_and_acyclic((inst, alloc) in partial_strategy()) {
        let everyone: Vec<usize> = (0..inst.n()).collect();
        let res = resolve_cycles(&inst, &alloc, &everyone).unwrap();
        prop_assert!(build_graph(&inst, &res.allocation, &everyone).is_acyclic());
        for (before, after) in values(&inst, &alloc).iter().zip(values(&inst, &res.allocation)) {
            prop_assert!(&after >= before);
        }
        prop_assert_eq!(res.allocation.bundle_multiset(), alloc.bundle_multiset());
    }

    #[test]
    fn look_ahead_invariants(inst in instance_strategy(5, 9, 20), policy in policy_strategy()) {
        let config = LaBaseConfig { policy, trace: true, ..Default::default() };
        let run = run_labase(&inst, &config).unwrap();
        let gamma = inst.range_parameter();
        let eta = Eta::resolve(&EtaMode::Default, &gamma).unwrap();
        let trace = run.trace.unwrap();
        let mut prev = vec![int(0); inst.n()];
        for step in &trace {
            let alloc = Allocation::from_bundles(step.bundles.clone(), inst.m()).unwrap();
            // empty-handed agents see at most one valued good per bundle
            for i in (0..inst.n()).filter(|&i| alloc.bundle(i).is_empty()) {
                for j in 0..inst.n() {
                    let seen = alloc.bundle(j).iter().filter(|&&g| inst.is_positive(i, g)).count();
                    prop_assert!(seen <= 1);
                }
            }
            match &step.branch {
                Branch::FirstGood { agent, good, .. } => {
                    let fv = inst.value_ref(*agent, *good);
                    for &g in &step.unassigned {
                        let vg = inst.value_ref(*agent, g);
                        if vg.is_positive() {
                            prop_assert!(fv.is_positive());
                            prop_assert!(eta.at_least(&(&gamma * vg / fv)));
                        }
                        prop_assert!(eta.squared_at_most(&(inst.base_sq(*good) / inst.base_sq(g))));
                    }
                }
                Branch::EnvyGraph { .. } => {
                    for &g in &step.unassigned {
                        prop_assert!(inst.base_sq(step.selected) >= inst.base_sq(g));
                    }
                }
            }
            let now = values(&inst, &alloc);
            for (a, b) in prev.iter().zip(&now) {
                prop_assert!(b >= a);
            }
            prev = now;
        }
        prop_assert!(run.allocation.is_complete(inst.m()));
        let alpha = efx_ratio(&inst, &run.allocation).unwrap().alpha;
        prop_assert!(meets_efx_factor(&gamma, &alpha).unwrap());
    }

    #[test]
    fn envy_cycle_tefx_guarantee(inst in instance_strategy(5, 9, 20), policy in policy_strategy()) {
        let run = run_tefx(&inst, &policy).unwrap();
        let order: Vec<Q> = run.steps.iter().map(|s| inst.base_sq(s.good)).collect();
        prop_assert!(order.windows(2).all(|w| w[0] >= w[1]));
        let gamma = inst.range_parameter();
        let alpha = tefx_ratio(&inst, &run.allocation).unwrap().alpha;
        prop_assert!(meets_tefx_factor(&gamma, TefxVariant::EnvyCycle, &alpha).unwrap());
        if gamma >= Q::new(1.into(), 2.into()) {
            prop_assert!(alpha >= FairRatio::one());
        }
    }

    #[test]
    fn pmms_pipeline_invariants(inst in instance_strategy(4, 9, 12), policy in policy_strategy()) {
        let run = run_pmms(&inst, &policy, DEFAULT_PRECISION_BITS).unwrap();
        let order: Vec<&Q> = run.steps.iter().map(|s| run.reduced.base_sq(s.good)).collect();
        prop_assert!(order.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..inst.n() {
            prop_assert!(run.allocation.bundle(i).iter().all(|&g| inst.is_positive(i, g)));
        }
        let gamma = inst.range_parameter();
        let alpha = pmms_ratio(&inst, &run.allocation, DEFAULT_MU2_CAP).unwrap().alpha;
        prop_assert!(alpha.is_at_least(&pmms_factor(&gamma)), "alpha {} gamma {}", alpha, gamma);
        // reduced-instance share never exceeds the proportional share
        let r = &run.reduced;
        for i in 0..inst.n() {
            for j in (0..inst.n()).filter(|&j| j != i) {
                let items: Vec<Q> = run.allocation.bundle(i).iter()
                    .chain(run.allocation.bundle(j))
                    .map(|&g| r.value(i, g))
                    .collect();
                let total: Q = items.iter().sum();
                prop_assert!(mu2(&items, DEFAULT_MU2_CAP).unwrap() * int(2) <= total);
            }
        }
    }

    #[test]
    fn ratios_are_scale_invariant(
        (inst, alloc) in partial_strategy(),
        agent in 0usize..5,
        num in 1i64..50,
        den in 1i64..50,
    ) {
        let agent = agent % inst.n();
        let mut factors = vec![int(1); inst.n()];
        factors[agent] = Q::new(num.into(), den.into());
        let scaled = apply_scaling(&inst, &factors).unwrap();
        let pick = |r: fairdiv::FairnessReport| {
            r.pairs.into_iter().filter(|p| p.agent == agent).map(|p| p.ratio).collect::<Vec<_>>()
        };
        prop_assert_eq!(pick(efx_ratio(&inst, &alloc).unwrap()), pick(efx_ratio(&scaled, &alloc).unwrap()));
        prop_assert_eq!(pick(tefx_ratio(&inst, &alloc).unwrap()), pick(tefx_ratio(&scaled, &alloc).unwrap()));
        prop_assert_eq!(
            pick(pmms_ratio(&inst, &alloc, DEFAULT_MU2_CAP).unwrap()),
            pick(pmms_ratio(&scaled, &alloc, DEFAULT_MU2_CAP).unwrap())
        );
    }

    #[test]
    fn mu2_matches_naive(items in proptest::collection::vec(0i64..40, 0..=12)) {
        let qs: Vec<Q> = items.iter().map(|&v| int(v)).collect();
        let fast = mu2(&qs, DEFAULT_MU2_CAP).unwrap();
        prop_assert_eq!(&fast, &mu2_naive(&qs).unwrap());
        let total: Q = qs.iter().sum();
        prop_assert!(&fast * int(2) <= total);
        let mut padded = qs.clone();
        padded.push(Q::zero());
        prop_assert_eq!(&mu2(&padded, DEFAULT_MU2_CAP).unwrap(), &fast);
        padded.push(int(7));
        prop_assert!(mu2(&padded, DEFAULT_MU2_CAP).unwrap() >= fast);
    }

    #[test]
    fn scaling_factors_satisfy_every_constraint(inst in instance_strategy(4, 6, 20)) {
        let eps = Q::new(1.into(), 1000.into());
        let res = max_range_scaling(&inst, &eps).unwrap();
        prop_assert!(res.gamma >= inst.range_parameter());
        prop_assert!(res.factors.iter().all(|s| s.is_positive() && s <= &int(1)));
        let scaled = apply_scaling(&inst, &res.factors).unwrap();
        prop_assert!(scaled.range_parameter() >= res.gamma);
        for g in 0..inst.m() {
            for i in 0..inst.n() {
                for j in 0..inst.n() {
                    if inst.is_positive(i, g) && inst.is_positive(j, g) {
                        prop_assert!(scaled.value_ref(j, g) >= &(&res.gamma * scaled.value_ref(i, g)));
                    }
                }
            }
        }
        // monotone: everything below is feasible, the bracket top is not
        let half = &res.gamma / int(2);
        prop_assert!(lp_feasible(&inst, &half).unwrap().is_feasible());
        if let Some(cert) = &res.certificate {
            prop_assert!(cert.product < int(1));
            let above = &cert.gamma + (int(1) - &cert.gamma) / int(2);
            prop_assert!(!lp_feasible(&inst, &above).unwrap().is_feasible());
            match lp_feasible(&inst, &cert.gamma).unwrap() {
                Feasibility::Infeasible { product, .. } => prop_assert!(product < int(1)),
                Feasibility::Feasible(_) => prop_assert!(false, "certificate gamma became feasible"),
            }
        }
    }

    #[test]
    fn allocation_json_round_trip((_, alloc) in partial_strategy()) {
        let text = serde_json::to_string(&alloc).unwrap();
        let back: Allocation = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, alloc);
    }

    #[test]
    fn instance_text_round_trip(inst in instance_strategy(4, 6, 30)) {
        let csv = inst.to_csv();
        prop_assert_eq!(fairdiv::instance::parse_instance(&csv).unwrap(), inst.clone());
        let json = inst.to_json().to_string();
        prop_assert_eq!(fairdiv::instance::parse_instance(&json).unwrap(), inst);
    }
}

#[test]
fn bundle_order_survives_rotation() {
    let inst = Instance::from_integers(&[vec![1, 1, 5], vec![5, 5, 1]]).unwrap();
    let alloc = Allocation::from_bundles(vec![vec![1, 0], vec![2]], 3).unwrap();
    let res = resolve_cycles(&inst, &alloc, &[0, 1]).unwrap();
    assert_eq!(res.allocation.bundle(1), &[1, 0]);
    let owners: BTreeSet<usize> = (0..3).filter_map(|g| res.allocation.owner(g)).collect();
    assert_eq!(owners, BTreeSet::from([0, 1]));
}
