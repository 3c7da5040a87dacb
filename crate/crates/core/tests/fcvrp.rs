use fairbnp::branching::Window;
use fairbnp::colgen::{Column, PricingRequest, Pricer};
use fairbnp::engine::{BranchDecision, BranchingScheme, NodeColumn, ProblemPlugin, SolveConfig};
use fairbnp::fcvrp::*;
use fairbnp::objective::{gini_weights, OrderWeights};
use fairbnp::oracle::{brute_force_optimum, enumerate_routes, FairObjective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// d(0,1)=1, d(0,2)=2, d(1,2)=1, unit demands, Q=2, K=2, c=p.
fn toy() -> CvrpInstance {
    let d = vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]];
    CvrpInstance::from_matrices("toy", vec![(0.0, 0.0); 3], vec![0, 1, 1], 2, 2, d.clone(), d).unwrap()
}

fn rc(p: &FcvrpProblem, col: &Column, duals: &[f64], scale: f64) -> f64 {
    scale * p.column_obj(col) - p.column_coefs(col).iter().map(|&(r, a)| duals[r] * a).sum::<f64>()
}

fn request<'a>(duals: &'a [f64], windows: &'a [Window<f64>], cap: usize) -> PricingRequest<'a> {
    PricingRequest {
        duals,
        windows,
        decisions: &[],
        cap,
        obj_scale: 1.0,
        threshold: -1e-9,
    }
}

#[test]
fn master_row_counts() {
    let opts = FcvrpOptions::default();
    let v = FcvrpProblem::new(toy(), Formulation::Vehicle, Some(10), opts.clone());
    assert_eq!(v.num_rows(), 2 + 1 + 2 + 2 + 2);
    let c = FcvrpProblem::new(toy(), Formulation::Customer, Some(10), opts.clone());
    assert_eq!(c.num_rows(), 2 + 1 + 1 + 2 + 2);
    let o = FcvrpProblem::new(toy(), Formulation::Order(gini_weights(2).unwrap()), Some(10), opts.clone());
    // cover, budget, convexity, link, one ordering row
    assert_eq!(o.num_rows(), 2 + 1 + 2 + 2 + 1);
    assert_eq!(o.master_spec().rows.len(), o.num_rows());
}

#[test]
fn toy_pricing_single_dual() {
    let p = FcvrpProblem::new(toy(), Formulation::Vehicle, None, FcvrpOptions::default());
    let mut duals = vec![0.0; p.num_rows()];
    duals[0] = 3.0;
    let w = vec![Window::unbounded(); 2];
    let cols = p.price(0, &request(&duals, &w, 20));
    let single = cols.iter().find(|c| c.payload == vec![1]).expect("route (0,1,0) returned");
    assert!((rc(&p, single, &duals, 1.0) + 3.0).abs() < 1e-9);
    for c in &cols {
        assert!(rc(&p, c, &duals, 1.0) < -1e-9);
    }
}

#[test]
fn toy_pricing_window() {
    let p = FcvrpProblem::new(toy(), Formulation::Vehicle, None, FcvrpOptions::default());
    let mut duals = vec![0.0; p.num_rows()];
    duals[0] = 3.0;
    duals[1] = 3.0;
    let w = vec![Window { lo: 4.0, hi: 4.0 }; 2];
    let mut got: Vec<Vec<usize>> = p.price(0, &request(&duals, &w, 20)).into_iter().map(|c| c.payload).collect();
    got.sort();
    assert_eq!(got, vec![vec![1, 2], vec![2], vec![2, 1]]);
}

#[test]
fn zero_duals_price_nothing() {
    let p = FcvrpProblem::new(toy(), Formulation::Vehicle, None, FcvrpOptions::default());
    let duals = vec![0.0; p.num_rows()];
    let w = vec![Window::unbounded(); 2];
    for sub in 0..2 {
        assert!(p.price(sub, &request(&duals, &w, 20)).is_empty());
    }
}

#[test]
fn symmetry_breaking_at_root() {
    let inst = CvrpInstance::generate(7, 3, 4);
    let p = FcvrpProblem::new(inst, Formulation::Vehicle, None, FcvrpOptions::default());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let duals: Vec<f64> = (0..p.num_rows()).map(|r| if r < 7 { rng.gen_range(0.0..80.0) } else { 0.0 }).collect();
    let w = vec![Window::unbounded(); 3];
    for k in 0..3 {
        for c in p.price(k, &request(&duals, &w, 50)) {
            assert!(c.payload.iter().all(|&i| i > k), "vehicle {k} route {:?}", c.payload);
        }
    }
}

/// Minimum reduced cost over all elementary routes of one subproblem.
fn enumerated_min(p: &FcvrpProblem, inst: &CvrpInstance, sub: usize, by_last: bool, duals: &[f64], w: Window<f64>) -> Option<f64> {
    let u = enumerate_routes(inst).unwrap();
    u.routes
        .iter()
        .filter(|r| w.contains(r.dist as f64))
        .filter(|r| !by_last || (*r.seq.last().unwrap() == sub + 1 && r.seq[0] <= sub + 1))
        .map(|r| rc(p, &p.make_column(sub, r.seq.clone()), duals, 1.0))
        .min_by(f64::total_cmp)
}

#[test]
fn labeling_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for draw in 0..40 {
        let n = 5 + draw % 3;
        let inst = CvrpInstance::generate(n, 2, 100 + draw as u64);
        for (form, by_last) in [(Formulation::Vehicle, false), (Formulation::Customer, true)] {
            for mode in [LabelingMode::Mono, LabelingMode::Bidirectional] {
                let opts = FcvrpOptions {
                    mode,
                    symmetry_breaking: false,
                    ..FcvrpOptions::default()
                };
                let p = FcvrpProblem::new(inst.clone(), form.clone(), Some(10_000), opts);
                let duals: Vec<f64> = (0..p.num_rows())
                    .map(|r| if r < n { rng.gen_range(0.0..120.0) } else { rng.gen_range(-0.3..0.0) })
                    .collect();
                let lo = if rng.gen_bool(0.5) { rng.gen_range(0.0..150.0) } else { 0.0 };
                let hi = if rng.gen_bool(0.5) { lo + rng.gen_range(0.0..150.0) } else { f64::INFINITY };
                let w = Window { lo, hi };
                let sub = rng.gen_range(0..p.num_subproblems());
                let windows = vec![w; p.num_subproblems()];
                let got = p
                    .price(sub, &request(&duals, &windows, 1000))
                    .iter()
                    .map(|c| rc(&p, c, &duals, 1.0))
                    .min_by(f64::total_cmp);
                let want = enumerated_min(&p, &inst, sub, by_last, &duals, w).filter(|&v| v < -1e-9);
                match (got, want) {
                    (None, None) => {}
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-6, "draw {draw} {mode:?}: {a} vs {b}"),
                    _ => panic!("draw {draw} {mode:?} {}: {got:?} vs {want:?}", form.name()),
                }
            }
        }
    }
}

#[test]
fn dominance_clauses() {
    let base = Label {
        v: 1,
        rc: -2.0,
        load: 3,
        dist: 10,
        memory: [1usize].into_iter().collect(),
    };
    let none = Window::unbounded();
    let upper = Window { lo: 0.0, hi: 20.0 };
    let both = Window { lo: 5.0, hi: 20.0 };
    assert!(dominates(&base, &base, &none));
    assert!(dominates(&base, &base, &both));
    let longer = Label { dist: 12, ..base.clone() };
    assert!(dominates(&longer, &base, &none));
    assert!(!dominates(&longer, &base, &upper));
    assert!(dominates(&base, &longer, &upper));
    // past the lower end, only the upper clause binds
    assert!(dominates(&base, &longer, &both));
    let short = Label { dist: 3, ..base.clone() };
    assert!(!dominates(&short, &base, &both));
    assert!(dominates(&short, &base, &upper));
    let other_vertex = Label { v: 2, ..base.clone() };
    assert!(!dominates(&other_vertex, &base, &none));
}

#[test]
fn arc_and_aggregate_branching() {
    let p = FcvrpProblem::new(toy(), Formulation::Vehicle, None, FcvrpOptions::default());
    let a = p.make_column(0, vec![1, 2]);
    let b = p.make_column(0, vec![1]);
    let c = p.make_column(1, vec![2]);
    let cols = [
        NodeColumn { id: 0, col: &a, value: 0.5 },
        NodeColumn { id: 1, col: &b, value: 0.5 },
        NodeColumn { id: 2, col: &c, value: 0.5 },
    ];
    let (l, r) = p.branch(&cols, &[]).unwrap();
    assert!(matches!(l, BranchDecision::CustomerVehicle { customer: 2, forced: true, .. }), "{l:?}");
    assert!(matches!(r, BranchDecision::CustomerVehicle { customer: 2, forced: false, .. }));

    let d = p.make_column(0, vec![2, 1]);
    let cols = [NodeColumn { id: 0, col: &a, value: 0.5 }, NodeColumn { id: 1, col: &d, value: 0.5 }];
    let (l, _) = p.branch(&cols, &[]).unwrap();
    assert!(matches!(l, BranchDecision::Arc { forced: true, .. }), "{l:?}");

    let force = [BranchDecision::Arc { from: 1, to: 2, forced: true }];
    assert!(p.column_allowed(&a, &force));
    assert!(!p.column_allowed(&b, &force));
    assert!(!p.column_allowed(&d, &force));
    assert!(!p.column_allowed(&p.make_column(1, vec![2]), &force));
    let forbid = [BranchDecision::Arc { from: 1, to: 2, forced: false }];
    assert!(!p.column_allowed(&a, &forbid));
    assert!(p.column_allowed(&b, &forbid));
}

#[test]
fn tsp_postprocess_examples() {
    let inst = toy();
    let pp = tsp_postprocess(&inst, &[vec![2, 1]]).unwrap();
    assert_eq!(pp.distance_after, vec![4]);
    assert_eq!(pp.tsp_optimal, vec![true]);
    let pp = tsp_postprocess(&inst, &[vec![1]]).unwrap();
    assert_eq!(pp.routes, vec![vec![1]]);

    // customers on a line at x = 1, 2, 3: visiting 2 first costs a detour
    let coords = vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)];
    let line = CvrpInstance::from_coords("line", coords, vec![0, 1, 1, 1], 3, 1).unwrap();
    let pp = tsp_postprocess(&line, &[vec![2, 1, 3]]).unwrap();
    assert_eq!(pp.distance_before, vec![8]);
    assert_eq!(pp.distance_after, vec![6]);
    assert!(!pp.tsp_optimal[0]);
    let perms = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
    let best = perms.iter().map(|r| line.route_distance(r)).min().unwrap();
    assert_eq!(best, 6);
}

#[test]
fn tsp_size_cap() {
    let inst = CvrpInstance::generate(16, 1, 3);
    let route: Vec<usize> = (1..=16).collect();
    assert!(matches!(tsp_postprocess(&inst, &[route]), Err(TspError::TooLarge(16))));
}

#[test]
fn budget_and_delta() {
    assert_eq!(budget_from_pct(1000, 110), 1100);
    assert_eq!(budget_from_pct(1001, 110), 1102);
    assert!((delta_pct(2170.0, 1601.0) - 26.22).abs() < 0.01);
}

#[test]
fn fair_solve_matches_oracle_and_budget() {
    for seed in 0..4u64 {
        let inst = CvrpInstance::generate(6, 2, 40 + seed);
        let u = enumerate_routes(&inst).unwrap();
        let cost = brute_force_optimum(&u, 6, 2, None, &FairObjective::Cost).unwrap().value;
        let b = budget_from_pct(cost, 110);
        let want = brute_force_optimum(&u, 6, 2, Some(b), &FairObjective::Range).unwrap().value;
        let cfg = SolveConfig {
            scheme: BranchingScheme::Range,
            ..Default::default()
        };
        let out = solve_fair(&inst, Formulation::Customer, 110, &FcvrpOptions::default(), &cfg).unwrap().unwrap();
        assert_eq!(out.baseline.cost, cost);
        assert_eq!(out.budget, b);
        assert_eq!(out.report.incumbent as i64, want);
        inst.check_solution(&out.routes, Some(b)).unwrap();
        for r in &out.routes {
            let mut s = r.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), r.len(), "non-elementary route {r:?}");
        }
    }
}

#[test]
fn gini_order_branching_matches_oracle() {
    let inst = CvrpInstance::generate(6, 3, 9);
    let u = enumerate_routes(&inst).unwrap();
    let cost = brute_force_optimum(&u, 6, 3, None, &FairObjective::Cost).unwrap().value;
    let b = budget_from_pct(cost, 110);
    let w: OrderWeights<f64> = gini_weights(3).unwrap();
    let iv: Vec<i64> = w.v.iter().map(|&x| x as i64).collect();
    let want = brute_force_optimum(&u, 6, 3, Some(b), &FairObjective::Weights(iv)).unwrap().value;
    let cfg = SolveConfig {
        scheme: BranchingScheme::Order,
        ..Default::default()
    };
    let out = solve_fair(&inst, Formulation::Order(w), 110, &FcvrpOptions::default(), &cfg).unwrap().unwrap();
    assert_eq!(out.report.incumbent.round() as i64, want);
}

#[test]
fn seeded_runs_are_deterministic() {
    let inst = CvrpInstance::generate(7, 2, 5);
    let cfg = SolveConfig {
        scheme: BranchingScheme::Range,
        alpha: 0.025,
        ..Default::default()
    };
    let a = solve_fair(&inst, Formulation::Vehicle, 110, &FcvrpOptions::default(), &cfg).unwrap().unwrap();
    let b = solve_fair(&inst, Formulation::Vehicle, 110, &FcvrpOptions::default(), &cfg).unwrap().unwrap();
    assert_eq!(a.routes, b.routes);
    assert_eq!(a.report.nodes, b.report.nodes);
    assert_eq!(a.report.incumbent, b.report.incumbent);
    assert_eq!(CvrpInstance::generate(7, 2, 5).to_tsplib(), inst.to_tsplib());
}

#[test]
fn tsplib_round_trip() {
    let inst = CvrpInstance::generate(8, 3, 2);
    let back = CvrpInstance::parse_tsplib(&inst.to_tsplib()).unwrap();
    assert_eq!(back.dist, inst.dist);
    assert_eq!(back.demand, inst.demand);
    assert_eq!(back.capacity, inst.capacity);
    assert!(CvrpInstance::parse_tsplib("NAME : x\nEOF\n").is_err());
}
