use mec_core::harness::*;
use mec_core::ScenarioConfig;

fn tiny() -> ScenarioConfig {
    ScenarioConfig::load(format!("{}/../../scenarios/tiny.toml", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn opts() -> RunOptions {
    RunOptions { workers: 2, ..RunOptions::default() }
}

fn csv_bytes(rows: &[ResultRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).unwrap();
    buf
}

#[test]
fn every_method_runs_on_the_tiny_scenario() {
    let rows = run_methods(&tiny(), &Method::ALL, 2, &opts()).unwrap();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert!(r.is_ok(), "{r:?}");
        assert_eq!(r.seed, 7 + r.rep as u64);
        assert!(r.total.is_finite() && r.total > 0.0);
        assert_eq!(r.z.len(), 3);
        assert_eq!(r.maied_average.is_none(), r.method == Method::Dae);
    }
    let dae = rows.iter().find(|r| r.method == Method::Dae).unwrap();
    assert_eq!((dae.z.as_str(), dae.budget_ok), ("111", false));
}

#[test]
fn csv_round_trips() {
    let rows = run_methods(&tiny(), &[Method::Spjeso, Method::Dae], 1, &opts()).unwrap();
    let back = read_csv(csv_bytes(&rows).as_slice()).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!((a.method, &a.z, a.rep, a.seed, &a.status), (b.method, &b.z, b.rep, b.seed, &b.status));
        assert!((a.total - b.total).abs() <= 1e-8 * a.total.abs());
        assert_eq!(a.maied_average.is_some(), b.maied_average.is_some());
    }
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn output_is_byte_identical_across_runs_and_worker_counts() {
    let spec = SweepSpec { param: SweepParam::V, values: vec![10.0, 100.0], repetitions: 2, methods: Method::ALL.to_vec() };
    let a = csv_bytes(&run_sweep(&tiny(), &spec, &opts()).unwrap());
    let b = csv_bytes(&run_sweep(&tiny(), &spec, &RunOptions { workers: 1, ..RunOptions::default() }).unwrap());
    assert_eq!(a, b);
    assert!(!String::from_utf8(a).unwrap().contains("runtime_s"));
}

#[test]
fn sweep_covers_every_combination() {
    let spec = SweepSpec {
        param: SweepParam::InteractionFrequency,
        values: vec![0.2, 0.4, 0.6, 0.8, 1.0],
        repetitions: 2,
        methods: Method::ALL.to_vec(),
    };
    let rows = run_sweep(&tiny(), &spec, &opts()).unwrap();
    assert_eq!(rows.len(), 4 * 5 * 2);
    assert!(rows.iter().all(|r| r.is_ok() && r.param == "interactionFrequency"));
    let mut sorted = rows.clone();
    sort_rows(&mut sorted);
    assert_eq!(sorted, rows);
}

#[test]
fn failing_points_become_error_rows() {
    let spec = SweepSpec { param: SweepParam::EsCount, values: vec![2.0, 2.5], repetitions: 1, methods: vec![Method::Dae] };
    let rows = run_sweep(&tiny(), &spec, &opts()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].is_ok());
    assert!(rows[1].status.starts_with("error:"), "{}", rows[1].status);
    assert!(rows[1].total.is_nan());
    let text = String::from_utf8(csv_bytes(&rows)).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(summarize(&rows).failed_rows, 1);
}

#[test]
fn bad_sweeps_are_rejected() {
    let spec = SweepSpec { param: SweepParam::V, values: vec![], repetitions: 1, methods: vec![Method::Dae] };
    assert!(run_sweep(&tiny(), &spec, &opts()).is_err());
    let spec = SweepSpec { param: SweepParam::V, values: vec![1.0], repetitions: 0, methods: vec![Method::Dae] };
    assert!(run_sweep(&tiny(), &spec, &opts()).is_err());
}

#[test]
fn runtime_column_is_opt_in() {
    let rows = run_methods(&tiny(), &[Method::Dae], 1, &RunOptions { runtime: true, ..opts() }).unwrap();
    let text = String::from_utf8(csv_bytes(&rows)).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",runtime_s"));
    assert_eq!(read_csv(text.as_bytes()).unwrap().len(), 1);
}

#[test]
fn traces_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let o = RunOptions { trace_dir: Some(dir.path().to_path_buf()), ..opts() };
    run_methods(&tiny(), &[Method::Spjeso, Method::Dae], 1, &o).unwrap();
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["dae_base_0_rep0_spco.csv", "spjeso_base_0_rep0_maied.csv", "spjeso_base_0_rep0_spco.csv"]);
}

fn row(method: Method, value: f64, total: f64) -> ResultRow {
    ResultRow {
        method,
        param: "V".into(),
        value,
        rep: 0,
        seed: 1,
        z: "1".into(),
        deployed: 1,
        budget_ok: true,
        total,
        deploy: 0.0,
        maintain: 0.0,
        place: 0.0,
        operation: 0.0,
        ue_delay: 0.0,
        energy: 0.0,
        tactical: 0.0,
        mean_backlog: 0.0,
        maied_average: None,
        status: "ok".into(),
        runtime_s: None,
    }
}

#[test]
fn summary_reports_the_largest_reduction() {
    let rows = vec![
        row(Method::Spjeso, 1.0, 80.0),
        row(Method::Dae, 1.0, 100.0),
        row(Method::Spjeso, 2.0, 90.0),
        row(Method::Dae, 2.0, 180.0),
    ];
    let s = summarize(&rows);
    assert_eq!(s.param, "V");
    assert_eq!(s.methods["dae"].mean_total, 140.0);
    assert_eq!(s.methods["spjeso"].points.len(), 2);
    let imp = &s.improvement["dae"];
    assert_eq!((imp.max_percent, imp.at_value), (50.0, 2.0));
    assert!(!s.improvement.contains_key("spjeso"));
}

#[test]
fn theorem_suite_passes_its_hard_checks() {
    let reports = theorem_suite(1, 4, 3).unwrap();
    assert_eq!(reports.len(), 4 * 5 + 9);
    assert!(reports.iter().filter(|r| r.theorem != 2).all(|r| r.pass));
}
