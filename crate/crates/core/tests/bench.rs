use tsetlin_index::bench::{
    emit_report, rank_correlation, read_csv, render_markdown, run_experiment, write_csv,
    Experiment, Phase, ReportFormat, Workload,
};
use tsetlin_index::data::synthetic::noisy_xor;
use tsetlin_index::index::direct_visits;
use tsetlin_index::Backend;

fn xor_workload(o: usize) -> Workload {
    Workload::new(
        format!("xor{o}"),
        noisy_xor(400, o, 0.1, 3).unwrap(),
        noisy_xor(200, o, 0.0, 4).unwrap(),
    )
    .unwrap()
}

fn small_experiment(clauses: Vec<usize>, epochs: usize) -> Experiment {
    Experiment {
        clauses,
        epochs,
        repetitions: 2,
        seed: 11,
        ..Experiment::default()
    }
}

#[test]
fn backends_share_accuracy_curves() {
    let report = run_experiment(&small_experiment(vec![20], 4), &[xor_workload(12)]).unwrap();
    assert_eq!(report.curves.len(), 4);
    for rep in 0..2 {
        let curve = |b| {
            report
                .curves
                .iter()
                .find(|c| c.backend == b && c.repetition == rep)
                .unwrap()
                .accuracy
                .clone()
        };
        let direct = curve(Backend::Direct);
        assert_eq!(direct.len(), 4);
        assert_eq!(direct, curve(Backend::Indexed));
    }
    for phase in [Phase::Train, Phase::Test] {
        for backend in [Backend::Direct, Backend::Indexed] {
            let r = report.record("xor12", 20, backend, phase).unwrap();
            assert!(r.speedup.is_some());
            assert!(r.epoch_s_mean > 0.0);
        }
    }
}

#[test]
fn direct_inference_work_is_full_scan() {
    let report = run_experiment(&small_experiment(vec![10, 40], 0), &[xor_workload(6)]).unwrap();
    assert!(report.records.iter().all(|r| r.phase == Phase::Test));
    for n in [10, 40] {
        let r = report
            .record("xor6", n, Backend::Direct, Phase::Test)
            .unwrap();
        assert_eq!(r.literal_visits, direct_visits(2, n, 6) * 200);
        // a fresh machine has no includes, so the index walks nothing
        let r = report
            .record("xor6", n, Backend::Indexed, Phase::Test)
            .unwrap();
        assert_eq!(r.literal_visits, 0);
    }
}

#[test]
fn direct_cost_grows_with_clause_count() {
    let grid = vec![10, 20, 40, 80];
    let report = run_experiment(
        &Experiment {
            backends: vec![Backend::Direct],
            ..small_experiment(grid.clone(), 1)
        },
        &[xor_workload(12)],
    )
    .unwrap();
    let visits: Vec<f64> = grid
        .iter()
        .map(|&n| {
            report
                .record("xor12", n, Backend::Direct, Phase::Test)
                .unwrap()
                .literal_visits as f64
        })
        .collect();
    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    assert!(rank_correlation(&ns, &visits).unwrap() > 0.99);
    assert!(report.records.iter().all(|r| r.speedup.is_none()));
}

#[test]
fn csv_round_trip_and_markdown() {
    let report = run_experiment(
        &small_experiment(vec![10], 1),
        &[xor_workload(6), xor_workload(8)],
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&report.records, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with(
        "dataset,features,clauses,backend,phase,epoch_s_mean,epoch_s_std,literal_visits,speedup\n"
    ));
    assert_eq!(text.lines().count(), 1 + report.records.len());
    assert_eq!(read_csv(buf.as_slice()).unwrap(), report.records);

    let md = render_markdown(&report);
    assert!(md.contains("| Clauses | Train | Test | Train | Test |"));
    assert!(md.contains("| 10 |"));
    assert!(md.contains("xor6, xor8"));
    let mut out = Vec::new();
    emit_report(&report, ReportFormat::Markdown, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), md);
}

#[test]
fn invalid_grids_are_rejected() {
    assert!(run_experiment(&small_experiment(vec![], 1), &[xor_workload(6)]).is_err());
    assert!(run_experiment(&small_experiment(vec![7], 1), &[xor_workload(6)]).is_err());
    let mut e = small_experiment(vec![10], 1);
    e.repetitions = 0;
    assert!(run_experiment(&e, &[xor_workload(6)]).is_err());
}

#[test]
fn spearman_oracle() {
    assert_eq!(
        rank_correlation(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]),
        Some(1.0)
    );
    assert_eq!(
        rank_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]),
        Some(-1.0)
    );
    // ranks x = 1,2,3,4 ; y = 1,3,2,4 -> 1 - 6*2/(4*15) = 0.8
    let r = rank_correlation(&[1.0, 2.0, 3.0, 4.0], &[1.0, 5.0, 3.0, 9.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);
    assert_eq!(rank_correlation(&[1.0], &[1.0]), None);
}
