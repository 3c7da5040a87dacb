use fairbnp::selection::SelectionProblem;
use fairbnp::simplex_lp::{ColSpec, LpModel, LpStatus, Sense};
use proptest::prelude::*;

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

#[derive(Debug, Clone)]
struct Dense {
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rows: Vec<(Vec<f64>, Sense, f64)>,
}

fn feasible(d: &Dense, x: &[f64]) -> bool {
    let eps = 1e-7;
    x.iter().zip(&d.lo).all(|(v, l)| *v >= l - eps)
        && x.iter().zip(&d.hi).all(|(v, h)| *v <= h + eps)
        && d.rows.iter().all(|(a, s, b)| {
            let act: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            match s {
                Sense::Le => act <= b + eps,
                Sense::Ge => act >= b - eps,
                Sense::Eq => (act - b).abs() <= eps,
            }
        })
}

/// Minimum over all basic solutions of the tight-constraint systems.
fn vertex_oracle(d: &Dense) -> Option<f64> {
    let n = d.c.len();
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, _, b) in &d.rows {
        cons.push((a.clone(), *b));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cons.push((e.clone(), d.lo[j]));
        cons.push((e, d.hi[j]));
    }
    let mut best: Option<f64> = None;
    let m = cons.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| cons[i].0.clone()).collect();
        let b = idx.iter().map(|&i| cons[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(d, &x) {
                let v: f64 = d.c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(v, |w| w.min(v)));
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for k in i + 1..n {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn to_model(d: &Dense) -> LpModel<f64> {
    let mut lp = LpModel::new();
    for (_, s, b) in &d.rows {
        lp.add_row(*s, *b);
    }
    for j in 0..d.c.len() {
        let coefs = d
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.0[j] != 0.0)
            .map(|(i, r)| (i, r.0[j]))
            .collect();
        lp.add_column(ColSpec::new(d.c[j], d.lo[j], d.hi[j], coefs)).unwrap();
    }
    lp
}

fn dense_strategy() -> impl Strategy<Value = Dense> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(n, m)| {
        let coef = -5i32..=5;
        (
            prop::collection::vec(coef.clone(), n),
            prop::collection::vec((-3i32..=0, 0i32..=3), n),
            prop::collection::vec((prop::collection::vec(coef, n), 0u8..3, -6i32..=6), m),
        )
            .prop_map(|(c, bounds, rows)| Dense {
                c: c.into_iter().map(f64::from).collect(),
                lo: bounds.iter().map(|b| f64::from(b.0)).collect(),
                hi: bounds.iter().map(|b| f64::from(b.1)).collect(),
                rows: rows
                    .into_iter()
                    .map(|(a, s, b)| {
                        let sense = match s {
                            0 => Sense::Le,
                            1 => Sense::Ge,
                            _ => Sense::Eq,
                        };
                        (a.into_iter().map(f64::from).collect(), sense, f64::from(b))
                    })
                    .collect(),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_vertex_enumeration(d in dense_strategy()) {
        let lp = to_model(&d);
        let sol = lp.solve(None);
        match vertex_oracle(&d) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - v).abs() <= 1e-6, "lp {} oracle {}", sol.objective, v);
                prop_assert!(lp.max_violation(&sol.x) <= 1e-7);
                let dual = lp.dual_objective(&sol);
                prop_assert!((dual - sol.objective).abs() <= 1e-7 * (1.0 + sol.objective.abs()));
            }
        }
    }

    #[test]
    fn warm_start_agrees(d in dense_strategy(), j in 0usize..6, hi in 0i32..3) {
        let mut lp = to_model(&d);
        let first = lp.solve(None);
        prop_assume!(first.status == LpStatus::Optimal);
        let j = j % lp.num_cols();
        let lo = lp.col(j).lo;
        let hi = f64::from(hi).min(lp.col(j).hi).max(lo);
        lp.set_variable_bounds(j, lo, hi).unwrap();
        let cold = lp.solve(None);
        let warm = lp.solve(first.basis.as_ref());
        prop_assert_eq!(cold.status, warm.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((cold.objective - warm.objective).abs() <= 1e-7 * (1.0 + cold.objective.abs()));
            prop_assert!(cold.objective >= first.objective - 1e-7);
        }
    }

    #[test]
    fn adding_a_column_never_hurts(d in dense_strategy(), c in -5i32..=5) {
        let mut lp = to_model(&d);
        let before = lp.solve(None);
        prop_assume!(before.status == LpStatus::Optimal);
        let coefs = (0..lp.num_rows()).map(|i| (i, ((i as i32 * 7 + c) % 5) as f64)).collect();
        lp.add_column(ColSpec::new(f64::from(c), 0.0, 2.0, coefs)).unwrap();
        let after = lp.solve(before.basis.as_ref());
        prop_assert_eq!(after.status, LpStatus::Optimal);
        prop_assert!(after.objective <= before.objective + 1e-7);
    }
}

#[test]
fn box_and_knapsack_row() {
    let mut lp = LpModel::<f64>::new();
    let r = lp.add_row(Sense::Le, 1.0);
    lp.add_column(ColSpec::new(-1.0, 0.0, 1.0, vec![(r, 1.0)])).unwrap();
    lp.add_column(ColSpec::new(-1.0, 0.0, 1.0, vec![(r, 1.0)])).unwrap();
    let sol = lp.solve(None);
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 1.0).abs() < 1e-9);
    assert!((sol.duals[0] + 1.0).abs() < 1e-9);
}

#[test]
fn bound_contradiction_is_infeasible() {
    let mut lp = LpModel::<f64>::new();
    let r = lp.add_row(Sense::Eq, 2.0);
    lp.add_column(ColSpec::new(0.0, 0.0, 1.0, vec![(r, 1.0)])).unwrap();
    assert_eq!(lp.solve(None).status, LpStatus::Infeasible);
}

#[test]
fn unbounded_is_reported() {
    let mut lp = LpModel::<f64>::new();
    let r = lp.add_row(Sense::Ge, 1.0);
    lp.add_column(ColSpec::new(-1.0, 0.0, f64::INFINITY, vec![(r, 1.0)])).unwrap();
    assert_eq!(lp.solve(None).status, LpStatus::Unbounded);
}

#[test]
fn add_column_ids_and_duplicates() {
    let mut lp = LpModel::<f64>::new();
    let r = lp.add_row(Sense::Ge, 1.0);
    let a = lp.add_column(ColSpec::new(2.0, 0.0, 1.0, vec![(r, 1.0)])).unwrap();
    assert_eq!(a, 0);
    let v0 = lp.solve(None).objective;
    let b = lp.add_column(ColSpec::new(2.0, 0.0, 1.0, vec![(r, 1.0)])).unwrap();
    assert_eq!(b, 1);
    assert!((lp.solve(None).objective - v0).abs() < 1e-12);
    assert!(lp.add_column(ColSpec::new(f64::NAN, 0.0, 1.0, vec![])).is_err());
    assert!(lp.add_column(ColSpec::new(1.0, 0.0, 1.0, vec![(3, 1.0)])).is_err());
    assert!(lp.set_variable_bounds(0, 2.0, 1.0).is_err());
}

#[test]
fn improving_column_and_its_fixing() {
    // min 3a + 2b s.t. a + b >= 1, a + 2b >= 1.
    let mut lp = LpModel::<f64>::new();
    let r0 = lp.add_row(Sense::Ge, 1.0);
    let r1 = lp.add_row(Sense::Ge, 1.0);
    lp.add_column(ColSpec::new(3.0, 0.0, 1.0, vec![(r0, 1.0), (r1, 1.0)])).unwrap();
    lp.add_column(ColSpec::new(2.0, 0.0, 1.0, vec![(r0, 1.0), (r1, 2.0)])).unwrap();
    let base = lp.solve(None);
    // A column covering both rows at cost 1 prices at 1 - (y0 + y1) < 0.
    let rc = 1.0 - base.duals[0] - base.duals[1];
    assert!(rc <= -1.0 + 1e-9);
    let c = lp.add_column(ColSpec::new(1.0, 0.0, 1.0, vec![(r0, 1.0), (r1, 1.0)])).unwrap();
    let improved = lp.solve(base.basis.as_ref());
    assert!(improved.objective < base.objective - 1e-9);
    lp.set_variable_bounds(c, 0.0, 0.0).unwrap();
    assert!((lp.solve(None).objective - base.objective).abs() < 1e-9);
    lp.set_variable_bounds(c, 0.0, 1.0).unwrap();
    assert!((lp.solve(None).objective - improved.objective).abs() < 1e-9);
}

#[test]
fn example_model_lp() {
    let p = SelectionProblem::example();
    let mut lp = p.full_lp();
    let sol = lp.solve(None);
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(sol.objective.abs() < 1e-9);
    assert!(lp.max_violation(&[0.5, 1.0, 0.5, 2.0, 2.0]) <= 1e-12);
    lp.set_variable_bounds(2, 0.0, 0.0).unwrap();
    let fixed = lp.solve(sol.basis.as_ref());
    assert!((fixed.objective - 1.0).abs() < 1e-9);
}

#[test]
fn single_precision_model() {
    let mut lp = LpModel::<f32>::new();
    let r = lp.add_row(Sense::Le, 1.0);
    lp.add_column(ColSpec::new(-1.0, 0.0, 1.0, vec![(r, 1.0)])).unwrap();
    lp.add_column(ColSpec::new(-2.0, 0.0, 1.0, vec![(r, 1.0)])).unwrap();
    let sol = lp.solve(None);
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 2.0).abs() < 1e-5);
}

#[test]
fn lp_text_dump() {
    let lp = SelectionProblem::example().full_lp();
    let text = lp.to_lp_string();
    assert!(text.starts_with("Minimize"));
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with('r')).count(), lp.num_rows());
}
