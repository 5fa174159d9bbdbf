mod common;

use std::collections::VecDeque;

use pdpt_core::constructive::{clarke_wright, greedy_construct, multistart, transship_improve, transship_until_stable};
use pdpt_core::cost::stops_cost;
use pdpt_core::genetic::{
    decode, encode, fitness, is_simple, minkowski_distance, random_chromosome, shift_mutation, sus_select_weights,
    taboo_replace, uniform_crossover, Chromosome, TabooConfig,
};
use pdpt_core::grasp::{grasp_run, GraspParams};
use pdpt_core::local_search::{
    alns, mix_vnd_alns, sample_move, selection_probabilities, simulated_annealing, update_weight, vnd, AlnsParams,
    MixParams, SaSchedule, Strategy as Descent,
};
use pdpt_core::oracle::{solve_exact, OracleLimits};
use pdpt_core::{
    check_feasibility, propagate_schedule, rng, route_cost, solution_cost, Action, Constraint, Instance, Route,
    Solution, Stop, Vehicle,
};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn with_transfers(inst: &Instance) -> Solution {
    transship_until_stable(inst, &greedy_construct(inst).unwrap(), 10).0
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn idle_fleet_costs_depot_legs(inst in common::instance(4, 3, 1)) {
        let expect: f64 = inst.vehicles().iter().map(|v| inst.dist(v.start_depot, v.end_depot)).sum();
        prop_assert_eq!(solution_cost(&inst, &Solution::empty(&inst)), expect);
    }

    #[test]
    fn checker_is_pure(inst in common::instance(5, 3, 2)) {
        let sol = with_transfers(&inst);
        prop_assert_eq!(check_feasibility(&inst, &sol), check_feasibility(&inst, &sol));
        let empty = Solution::empty(&inst);
        prop_assert_eq!(check_feasibility(&inst, &empty), check_feasibility(&inst, &empty));
    }

    #[test]
    fn schedule_respects_travel_and_transfer_waits(inst in common::instance(6, 3, 2)) {
        let sol = with_transfers(&inst);
        let sched = propagate_schedule(&inst, &sol).unwrap();
        for (k, route) in sol.routes.iter().enumerate() {
            for s in 1..route.stops.len() {
                let travel = inst.dist(route.stops[s - 1].node, route.stops[s].node);
                prop_assert!(sched.departure[k][s] + 1e-9 >= sched.departure[k][s - 1] + travel);
            }
        }
        let find = |want: &dyn Fn(Action) -> bool| {
            sol.routes.iter().enumerate().find_map(|(k, r)| r.stops.iter().position(|s| want(s.action)).map(|p| (k, p)))
        };
        for r in 0..inst.num_requests() {
            let drop = find(&|a| matches!(a, Action::TransferDrop { request, .. } if request == r));
            let pick = find(&|a| matches!(a, Action::TransferPick { request, .. } if request == r));
            if let (Some((k1, p1)), Some((k2, p2))) = (drop, pick) {
                prop_assert!(sched.departure[k2][p2] + 1e-9 >= sched.departure[k1][p1]);
            }
        }
    }

    #[test]
    fn missing_pickup_is_infeasible(inst in common::instance(5, 2, 0), pick in 0usize..5) {
        let mut sol = greedy_construct(&inst).unwrap();
        let r = pick % inst.num_requests();
        for route in &mut sol.routes {
            route.stops.retain(|s| s.action != Action::Pickup(r));
        }
        let report = check_feasibility(&inst, &sol);
        prop_assert!(!report.feasible);
        prop_assert!(report.has(Constraint::Assign) || report.has(Constraint::Visit));
    }

    #[test]
    fn vehicle_relabeling_is_symmetric(inst in common::instance(5, 3, 1)) {
        let sol = with_transfers(&inst);
        let nv = inst.num_vehicles();
        let flip = |k: usize| nv - 1 - k;
        let mut vehicles: Vec<Vehicle> = inst.vehicles().to_vec();
        vehicles.reverse();
        for (k, v) in vehicles.iter_mut().enumerate() {
            v.id = k;
        }
        let relabeled = Instance::new(
            inst.nodes().to_vec(),
            inst.requests().to_vec(),
            vehicles,
            inst.transfer_points().to_vec(),
        ).unwrap();
        let mut routes: Vec<Route> = sol.routes.clone();
        routes.reverse();
        for r in &mut routes {
            r.vehicle = flip(r.vehicle);
        }
        let moved = Solution::from_routes(&relabeled, routes);
        prop_assert!((solution_cost(&inst, &sol) - solution_cost(&relabeled, &moved)).abs() < 1e-9);
        prop_assert_eq!(check_feasibility(&inst, &sol).feasible, check_feasibility(&relabeled, &moved).feasible);
    }

    #[test]
    fn extra_stop_never_shortens_a_route(inst in common::instance(5, 2, 2), at in 1usize..20, node in 0usize..40) {
        let sol = greedy_construct(&inst).unwrap();
        for route in &sol.routes {
            let mut stops = route.stops.clone();
            let pos = 1 + at % (stops.len() - 1);
            let extra = node % inst.num_nodes();
            stops.insert(pos, Stop::new(extra, Action::ArriveDepot));
            prop_assert!(stops_cost(&inst, &stops) + 1e-9 >= route_cost(&inst, route));
        }
    }

    #[test]
    fn constructors_are_feasible(inst in common::instance(6, 3, 2), seed in any::<u64>()) {
        let greedy = greedy_construct(&inst).unwrap();
        let grasp = grasp_run(&inst, &GraspParams { iterations: 4, seed, ..GraspParams::default() }, None).unwrap().solution;
        for sol in [greedy.clone(), clarke_wright(&inst).unwrap(), multistart(&inst, 3, seed).unwrap(), grasp] {
            let report = check_feasibility(&inst, &sol);
            prop_assert!(report.feasible, "{}", report);
        }
        let improved = transship_improve(&inst, &greedy);
        prop_assert!(check_feasibility(&inst, &improved).feasible);
        prop_assert!(solution_cost(&inst, &improved) <= solution_cost(&inst, &greedy) + 1e-9);
    }

    #[test]
    fn oversized_requests_fail_every_constructor(inst in common::instance(3, 2, 1)) {
        let heavy: Vec<_> = inst.requests().iter().map(|r| { let mut r = r.clone(); r.quantity = 50; r }).collect();
        let inst = Instance::new(inst.nodes().to_vec(), heavy, inst.vehicles().to_vec(), inst.transfer_points().to_vec()).unwrap();
        prop_assert!(greedy_construct(&inst).is_err());
        prop_assert!(clarke_wright(&inst).is_err());
        prop_assert!(multistart(&inst, 2, 0).is_err());
        prop_assert!(grasp_run(&inst, &GraspParams::default(), None).is_err());
    }

    #[test]
    fn move_apply_revert_is_identity(inst in common::instance(6, 3, 1), seed in any::<u64>()) {
        let sol = with_transfers(&inst);
        let mut rng = rng::seeded(seed);
        for _ in 0..10 {
            let Some(m) = sample_move(&inst, &sol, &mut rng) else { break };
            let mut s = sol.clone();
            m.apply(&inst, &mut s);
            prop_assert!(check_feasibility(&inst, &s).feasible);
            prop_assert!((solution_cost(&inst, &s) - solution_cost(&inst, &sol) - m.delta_cost).abs() < 1e-6);
            m.revert(&inst, &mut s);
            prop_assert_eq!(&s, &sol);
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn local_searches_never_worsen(inst in common::instance(8, 3, 2), seed in any::<u64>()) {
        let start = with_transfers(&inst);
        let c0 = solution_cost(&inst, &start);
        let mut ap = AlnsParams::for_instance(&inst, seed);
        ap.iterations = 100;
        let mut mp = MixParams::for_instance(&inst, seed);
        mp.alns.iterations = 100;
        let sched = SaSchedule { iterations: 200, ..SaSchedule::for_cost(c0, seed) };
        let outs = [
            vnd(&inst, &start, Descent::First),
            vnd(&inst, &start, Descent::Best),
            alns(&inst, &start, &ap).unwrap(),
            simulated_annealing(&inst, &start, &sched).unwrap(),
            mix_vnd_alns(&inst, &start, &mp).unwrap(),
        ];
        for out in outs {
            prop_assert!(check_feasibility(&inst, &out.solution).feasible);
            prop_assert!(solution_cost(&inst, &out.solution) <= c0 + 1e-9);
            prop_assert!(out.trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        }
    }

    #[test]
    fn oracle_bounds_heuristics(inst in common::instance(3, 2, 1)) {
        let (opt_sol, opt) = solve_exact(&inst, &OracleLimits::default()).unwrap();
        prop_assert!(check_feasibility(&inst, &opt_sol).feasible);
        let greedy = greedy_construct(&inst).unwrap();
        let improved = vnd(&inst, &transship_improve(&inst, &greedy), Descent::First).solution;
        for sol in [greedy, clarke_wright(&inst).unwrap(), improved] {
            prop_assert!(solution_cost(&inst, &sol) >= opt - 1e-6);
        }
        // Dropping the transfer point can only shrink the feasible set.
        let bare = Instance::new(inst.nodes().to_vec(), inst.requests().to_vec(), inst.vehicles().to_vec(), vec![]).unwrap();
        let (_, without) = solve_exact(&bare, &OracleLimits::default()).unwrap();
        prop_assert!(opt <= without + 1e-6);
    }

    #[test]
    fn chromosome_round_trip(inst in common::instance(8, 3, 2), seed in any::<u64>()) {
        let grasp = grasp_run(&inst, &GraspParams { iterations: 2, seed, ..GraspParams::default() }, None).unwrap();
        let sol = transship_improve(&inst, &grasp.solution);
        let back = decode(&inst, &encode(&inst, &sol));
        // Simple routes always survive; a revisited node never does.
        prop_assert_eq!(back.is_some(), is_simple(&sol));
        if let Some(back) = back {
            prop_assert!((solution_cost(&inst, &back) - solution_cost(&inst, &sol)).abs() < 1e-9);
            prop_assert!(check_feasibility(&inst, &back).feasible);
            prop_assert_eq!(encode(&inst, &back), encode(&inst, &sol));
        }
        // Direct-only constructions are always simple.
        prop_assert!(is_simple(&grasp.solution));
    }

    #[test]
    fn fitness_is_infinite_exactly_when_infeasible(inst in common::instance(4, 2, 1), seed in any::<u64>()) {
        let mut rng = rng::seeded(seed);
        for _ in 0..20 {
            let c = random_chromosome(&inst, 0.05, &mut rng);
            let f = fitness(&inst, &c);
            match decode(&inst, &c) {
                Some(s) if check_feasibility(&inst, &s).feasible => prop_assert_eq!(f, solution_cost(&inst, &s)),
                _ => prop_assert!(f.is_infinite()),
            }
        }
    }
}

fn chromosome() -> impl Strategy<Value = Chromosome> {
    prop::collection::btree_map(0usize..200, 0.0f64..1.0, 0..30).prop_map(|m| {
        let mut c = Chromosome::new(10, 2);
        for (s, v) in m {
            c.set_slot(s, v).unwrap();
        }
        c
    })
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn sus_copies_within_floor_and_ceil(weights in prop::collection::vec(0.0f64..10.0, 1..12), count in 1usize..40, seed in any::<u64>()) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 0.0);
        let picks = sus_select_weights(&weights, count, &mut rng::seeded(seed)).unwrap();
        prop_assert_eq!(picks.len(), count);
        for (i, w) in weights.iter().enumerate() {
            let expect = count as f64 * w / total;
            let copies = picks.iter().filter(|&&p| p == i).count() as f64;
            prop_assert!(copies >= (expect - 1e-9).floor() && copies <= (expect + 1e-9).ceil(), "{i}: {copies} vs {expect}");
        }
    }

    #[test]
    fn variation_keeps_entries_positive(a in chromosome(), b in chromosome(), seed in any::<u64>()) {
        let mut rng = rng::seeded(seed);
        let child = uniform_crossover(&a, &b, &mut rng).unwrap();
        let mutated = shift_mutation(&child, 1.0, &mut rng);
        for c in [&child, &mutated] {
            prop_assert!(c.entries().iter().all(|e| e.1 > 0.0));
        }
        for &(s, v) in child.entries() {
            prop_assert!(v == a.get_slot(s) || v == b.get_slot(s));
        }
    }

    #[test]
    fn minkowski_is_a_metric(a in chromosome(), b in chromosome(), c in chromosome(), p in 1.0f64..4.0) {
        let ab = minkowski_distance(&a, &b, p).unwrap();
        prop_assert!((ab - minkowski_distance(&b, &a, p).unwrap()).abs() < 1e-12);
        prop_assert_eq!(minkowski_distance(&a, &a, p).unwrap(), 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
        let via = minkowski_distance(&a, &c, p).unwrap() + minkowski_distance(&c, &b, p).unwrap();
        prop_assert!(ab <= via + 1e-12);
    }

    #[test]
    fn taboo_never_admits_near_candidates(
        members in prop::collection::vec(chromosome(), 1..6),
        candidates in prop::collection::vec((chromosome(), 1.0f64..100.0), 1..10),
        delta in 0.05f64..1.0,
    ) {
        let cfg = TabooConfig { p: 2.0, delta, tenure: 3 };
        let mut members = members;
        let mut fit: Vec<f64> = (0..members.len()).map(|i| 10.0 + i as f64).collect();
        let mut taboo = VecDeque::new();
        for (cand, f) in candidates {
            let near = members.iter().chain(taboo.iter()).any(|m| minkowski_distance(&cand, m, 2.0).unwrap() < delta);
            let size = members.len();
            let accepted = taboo_replace(&mut members, &mut fit, &cand, f, &mut taboo, &cfg).unwrap();
            prop_assert_eq!(accepted, !near);
            prop_assert_eq!(members.len(), size);
            prop_assert!(taboo.len() <= cfg.tenure);
        }
    }

    #[test]
    fn alns_weights_stay_positive(weights in prop::collection::vec(1e-6f64..10.0, 1..6), scores in prop::collection::vec(0u8..4, 1..50), rho in 0.0f64..1.0) {
        let mut w = weights;
        for (i, s) in scores.iter().enumerate() {
            let j = i % w.len();
            w[j] = update_weight(w[j], f64::from(*s), rho);
            prop_assert!(w.iter().all(|x| *x > 0.0));
            let probs = selection_probabilities(&w).unwrap();
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
