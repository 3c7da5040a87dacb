use fairbnp::branching::Window;
use fairbnp::colgen::{Column, PricingRequest, Pricer};
use fairbnp::engine::{BranchDecision, BranchingScheme, ProblemPlugin, SolveConfig};
use fairbnp::fgap::*;
use fairbnp::oracle::enumerate_assignments;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rc(p: &FgapProblem, col: &Column, duals: &[f64]) -> f64 {
    p.column_obj(col) - p.column_coefs(col).iter().map(|&(r, a)| duals[r] * a).sum::<f64>()
}

fn subsets_best(values: &[f64], weights: &[usize], lo: usize, hi: usize) -> Option<f64> {
    let k = values.len();
    (0u32..1 << k)
        .filter_map(|mask| {
            let items: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
            let w: usize = items.iter().map(|&i| weights[i]).sum();
            (lo..=hi).contains(&w).then(|| items.iter().map(|&i| values[i]).sum::<f64>())
        })
        .max_by(f64::total_cmp)
}

#[test]
fn knapsack_examples() {
    let (v, w) = ([3.0, 4.0], [2, 3]);
    assert_eq!(best_subset(&v, &w, 0, 5), Some((vec![0, 1], 7.0)));
    assert_eq!(best_subset(&v, &w, 4, 4), None);
    assert_eq!(best_subset(&v, &w, 0, 2), Some((vec![0], 3.0)));
    let t = DpTable::build(&v, &w, 5);
    assert_eq!(t.value(0, 0), Some(0.0));
    assert_eq!(t.value(0, 3), None);
    assert_eq!(t.value(2, 4), None);
}

#[test]
fn knapsack_matches_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let k = rng.gen_range(1..=10);
        let values: Vec<f64> = (0..k).map(|_| rng.gen_range(-5i32..=20) as f64).collect();
        let weights: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=9)).collect();
        let hi = rng.gen_range(0..=40);
        let lo = if rng.gen_bool(0.5) { rng.gen_range(0..=hi) } else { 0 };
        let got = best_subset(&values, &weights, lo, hi);
        let want = subsets_best(&values, &weights, lo, hi);
        assert_eq!(got.as_ref().map(|g| g.1), want);
        if let Some((items, val)) = got {
            let w: usize = items.iter().map(|&i| weights[i]).sum();
            assert!((lo..=hi).contains(&w));
            assert_eq!(items.iter().map(|&i| values[i]).sum::<f64>(), val);
        }
    }
}

#[test]
fn master_row_counts() {
    let g = GapInstance::new("t", vec![vec![1, 2], vec![3, 4]], vec![vec![1, 1], vec![1, 1]], vec![2, 2]).unwrap();
    let p = FgapProblem::new(g.clone(), GapMode::Range { profit_floor: 0 });
    assert_eq!(p.num_rows(), 1 + 2 + 2 + 2 + 2);
    assert_eq!(p.master_spec().rows.len(), 9);
    let q = FgapProblem::new(g, GapMode::MaxProfit);
    assert_eq!(q.num_rows(), 4);
}

#[test]
fn pricing_matches_assignment_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for draw in 0..60 {
        let inst = GapInstance::generate(3, 8, draw);
        let p = FgapProblem::new(inst.clone(), GapMode::Range { profit_floor: 100 });
        let duals: Vec<f64> = (0..p.num_rows()).map(|_| rng.gen_range(-3.0..6.0)).collect();
        let agent = rng.gen_range(0..3);
        let cap = inst.capacity[agent] as f64;
        let lo = if rng.gen_bool(0.5) { rng.gen_range(0.0..cap) } else { 0.0 };
        let hi = if rng.gen_bool(0.5) { rng.gen_range(lo..cap + 5.0) } else { f64::INFINITY };
        let w = vec![Window { lo, hi }; 3];
        let req = PricingRequest {
            duals: &duals,
            windows: &w,
            decisions: &[],
            cap: 1,
            obj_scale: 1.0,
            threshold: -1e-9,
        };
        let got = p.price(agent, &req);
        let want = enumerate_assignments(&inst, agent)
            .unwrap()
            .into_iter()
            .map(|jobs| p.make_column(agent, jobs))
            .filter(|c| w[agent].contains(c.payoff))
            .map(|c| rc(&p, &c, &duals))
            .filter(|&v| v < -1e-9)
            .min_by(f64::total_cmp);
        assert!(got.len() <= 1);
        match (got.first(), want) {
            (None, None) => {}
            (Some(c), Some(v)) => {
                assert!((rc(&p, c, &duals) - v).abs() < 1e-9, "draw {draw}");
                assert!(w[agent].contains(c.payoff));
            }
            (g, v) => panic!("draw {draw}: {g:?} vs {v:?}"),
        }
    }
}

#[test]
fn job_fixings_reach_the_pricer() {
    let inst = GapInstance::new("f", vec![vec![1, 1, 1], vec![1, 1, 1]], vec![vec![2, 3, 4], vec![2, 3, 4]], vec![9, 9]).unwrap();
    let p = FgapProblem::new(inst, GapMode::Range { profit_floor: 0 });
    let mut duals = vec![0.0; p.num_rows()];
    // reward covering jobs 0 and 2 only
    duals[1] = 5.0;
    duals[3] = 5.0;
    duals[2] = -5.0;
    let w = vec![Window::unbounded(); 2];
    let mk = |d: &'static [BranchDecision]| PricingRequest {
        duals: &duals,
        windows: &w,
        decisions: d,
        cap: 1,
        obj_scale: 1.0,
        threshold: -1e-9,
    };
    assert_eq!(p.price(0, &mk(&[]))[0].payload, vec![0, 2]);
    const FORCE: [BranchDecision; 1] = [BranchDecision::JobAgent { job: 1, agent: 0, forced: true }];
    assert_eq!(p.price(0, &mk(&FORCE))[0].payload, vec![0, 1, 2]);
    assert!(p.price(1, &mk(&FORCE)).iter().all(|c| !c.payload.contains(&1)));
    const FORBID: [BranchDecision; 1] = [BranchDecision::JobAgent { job: 2, agent: 0, forced: false }];
    assert_eq!(p.price(0, &mk(&FORBID))[0].payload, vec![0]);
    assert_eq!(p.price(1, &mk(&FORBID))[0].payload, vec![0, 2]);
}

#[test]
fn compact_oracle_examples() {
    let g = GapInstance::new("d", vec![vec![0, 0], vec![0, 0]], vec![vec![1, 2], vec![2, 1]], vec![2, 2]).unwrap();
    let o = solve_compact_oracle(&g, 0).unwrap().unwrap();
    assert_eq!((o.value, o.assign), (0, vec![0, 1]));
    assert_eq!(solve_compact_oracle(&g, 1).unwrap(), None);
    let big = GapInstance::generate(2, 13, 1);
    assert!(matches!(solve_compact_oracle(&big, 0), Err(CompactError::TooLarge(13))));
}

#[test]
fn engine_matches_compact_oracle() {
    let mut checked = 0;
    for seed in 0..40u64 {
        let inst = GapInstance::generate(2, 7, seed);
        let Some(pm) = max_profit_oracle(&inst).unwrap() else { continue };
        let floor = profit_floor(pm.value, 0.01);
        let want = solve_compact_oracle(&inst, floor).unwrap().unwrap().value;
        for scheme in [BranchingScheme::Classical, BranchingScheme::Range] {
            let cfg = SolveConfig {
                scheme,
                cap: 1,
                evict_after: 30,
                ..Default::default()
            };
            let out = solve_fair_gap(&inst, 0.01, &cfg).unwrap().unwrap();
            assert_eq!(out.baseline.profit, pm.value);
            assert_eq!(out.floor, floor);
            assert_eq!(out.report.incumbent.round() as i64, want, "seed {seed} {scheme:?}");
            let assign = &out.assign;
            let p = FgapProblem::new(inst.clone(), GapMode::Range { profit_floor: floor });
            let inc = p.incumbent_from_assignment(assign).expect("feasible assignment");
            assert_eq!(inc.objective.round() as i64, want);
        }
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} feasible instances");
}

#[test]
fn orlib_round_trip() {
    let g = GapInstance::generate(3, 5, 8);
    let back = GapInstance::parse_orlib("x", &g.to_orlib()).unwrap();
    assert_eq!((back.profit, back.weight, back.capacity), (g.profit.clone(), g.weight.clone(), g.capacity.clone()));
    let two = format!("2\n{}{}", g.to_orlib(), g.to_orlib());
    assert_eq!(GapInstance::parse_orlib_collection("c", &two).unwrap().len(), 2);
    assert!(GapInstance::parse_orlib("x", "2 2 1 2").is_err());
    assert!(GapInstance::parse_orlib("x", &format!("{} 7", g.to_orlib())).is_err());
}
