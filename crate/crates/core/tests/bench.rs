use std::process::Command;

use fairbnp::bench::*;
use fairbnp::engine::BranchingScheme;
use fairbnp::fcvrp::CvrpInstance;

fn row() -> SummaryRow {
    SummaryRow {
        instance: "toy".into(),
        size: "5".into(),
        formulation: "vehicle".into(),
        branching: "range".into(),
        solved: true,
        time_s: 0.12345,
        gap_pct: 0.0,
        nodes: 7,
        delta_pct: 26.2211,
        lb: 12.0,
        ub: 12.0,
        status: "optimal".into(),
    }
}

#[test]
fn summary_csv_golden() {
    let mut buf = Vec::new();
    write_summary(&mut buf, &[row()]).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "instance,size,formulation,branching,solved,time_s,gap_pct,nodes,delta_pct,lb,ub,status\n\
         toy,5,vehicle,range,1,0.123,0.00,7,26.22,12.000,12.000,optimal\n"
    );
    let mut empty = Vec::new();
    write_summary(&mut empty, &[]).unwrap();
    assert_eq!(String::from_utf8(empty).unwrap().trim_end(), SUMMARY_HEADER);
}

#[test]
fn tsp_csv_golden() {
    let r = TspRow {
        instance: "a".into(),
        range_general: 10,
        range_post: 12,
        delta_r_pct: 100.0 * 2.0 / 12.0,
        lb: 10.0,
        tsp_optimal: false,
        routes_changed: 1,
    };
    let mut buf = Vec::new();
    write_tsp_report(&mut buf, &[r]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{TSP_HEADER}\na,10,12,16.67,10.000,0,1\n"));
}

#[test]
fn trajectory_must_be_monotone() {
    use fairbnp::engine::TrajectoryPoint;
    let good = [
        TrajectoryPoint { time: 0.0, lb: 1.0, ub: 9.0 },
        TrajectoryPoint { time: 0.5, lb: 2.0, ub: 5.0 },
    ];
    let mut buf = Vec::new();
    write_trajectory(&mut buf, &good).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "time_s,lb,ub\n0.000000,1.000000,9.000000\n0.500000,2.000000,5.000000\n"
    );
    let bad = [good[1], good[0]];
    assert!(write_trajectory(Vec::new(), &bad).is_err());
}

fn base() -> CvrpInstance {
    CvrpInstance::generate(30, 3, 77)
}

#[test]
fn derive_is_deterministic() {
    let a = derive_subinstances(&base(), &[15], 20, 7, 5).unwrap();
    let b = derive_subinstances(&base(), &[15], 20, 7, 5).unwrap();
    assert_eq!(a.len(), 20);
    assert!(a.iter().all(|i| i.num_vertices() == 16 && i.vehicles == 5));
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let p1 = write_instances(&a, d1.path()).unwrap();
    let p2 = write_instances(&b, d2.path()).unwrap();
    for (x, y) in p1.iter().zip(&p2) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let other = derive_subinstances(&base(), &[15], 1, 8, 5).unwrap();
    assert_ne!(other[0].coords, a[0].coords);
    assert!(derive_subinstances(&base(), &[31], 1, 7, 5).is_err());
}

#[test]
fn tsp_report_flags() {
    let inst = CvrpInstance::from_coords(
        "line",
        vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (0.0, 3.0)],
        vec![0, 1, 1, 1, 1],
        3,
        2,
    )
    .unwrap();
    // (2,1,3) has distance 8, its shortest tour 6; (4) has distance 6
    let r = tsp_report(&inst, &[vec![2, 1, 3], vec![4]], None, 0.0).unwrap();
    assert_eq!((r.range_general, r.range_post), (2, 0));
    assert_eq!(r.routes_changed, 1);
    assert!(r.tsp_optimal);
    assert!(r.delta_r_pct == 0.0);
    let r = tsp_report(&inst, &[vec![1, 2, 3], vec![4]], None, 0.0).unwrap();
    assert_eq!(r.routes_changed, 0);
    assert!(tsp_report(&inst, &[vec![1, 2, 3], vec![4]], None, 1.0).is_err());
}

#[test]
fn matrix_rows_agree_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let src = InstanceSource::RandomCvrp {
        customers: 6,
        vehicles: 2,
        seed: 3,
    };
    let mut cfgs = Vec::new();
    for f in [FormulationKind::Vehicle, FormulationKind::Customer] {
        for s in [BranchingScheme::Classical, BranchingScheme::Range] {
            cfgs.push(RunConfig::cvrp(src.clone(), f, s));
        }
    }
    let a = run_matrix(&cfgs, dir.path()).unwrap();
    let b = run_matrix(&cfgs, dir.path()).unwrap();
    let ub = a[0].row.ub;
    for (x, y) in a.iter().zip(&b) {
        assert!(x.row.solved);
        assert_eq!(x.row.ub, ub);
        let strip = |r: &SummaryRow| SummaryRow { time_s: 0.0, ..r.clone() };
        assert_eq!(strip(&x.row), strip(&y.row));
    }
    let text = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(std::fs::read_dir(dir.path().join("trajectories")).unwrap().count(), 4);
}

#[test]
fn failing_run_becomes_a_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::cvrp(
        InstanceSource::File(dir.path().join("missing.vrp")),
        FormulationKind::Vehicle,
        BranchingScheme::Range,
    );
    let out = run_matrix(&[cfg], dir.path()).unwrap();
    assert!(!out[0].row.solved);
    assert!(out[0].row.status.starts_with("error"));
}

#[test]
fn cli_rejects_bad_configuration() {
    let exe = env!("CARGO_BIN_EXE_fairbnp");
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| Command::new(exe).args(args).arg("--out").arg(dir.path()).output().unwrap();
    let bad = run(&["run", "--problem", "cvrp", "--branching", "order", "--random-count", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = run(&["run", "--problem", "cvrp", "--budget-pct", "90", "--random-count", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = run(&["run", "--problem", "gap", "--theta", "1.5", "--random-count", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let ok = run(&[
        "run", "--problem", "cvrp", "--random-count", "1", "--random-size", "5", "--random-fleet", "2",
    ]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("summary.csv").exists());
}
