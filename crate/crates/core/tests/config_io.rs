use std::path::Path;

use dlra_trt::config::{load_config, parse_config, parse_config_with, parse_override, ConfigError};
use dlra_trt::diagnostics::History;
use dlra_trt::io::{
    history_from_csv, history_to_csv, read_history, read_snapshot_1d, read_snapshot_2d, write_history,
    write_snapshot_1d, write_snapshot_2d, Snapshot1d, Snapshot2d,
};
use dlra_trt::{Error, ProblemKind, SolverKind, TruncationStrategy};
use proptest::prelude::*;

fn problem() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("plane_source"), Just("su_olson"), Just("beam_2d")]
}

fn solver() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("full"), Just("dlra"), Just("naive")]
}

proptest! {
    #[test]
    fn text_round_trip(
        p in problem(),
        s in solver(),
        n_x in 3usize..5000,
        cfl in 1e-3..1.0f64,
        t_end in 0.0..20.0f64,
        sigma in 0.0..10.0f64,
        theta in 0.0..1.0f64,
        r_min in 1usize..5,
        extra in 0usize..50,
        times in prop::collection::vec(0.0..1.0f64, 0..4),
        standard in any::<bool>(),
    ) {
        let mut times: Vec<f64> = times.iter().map(|f| f * t_end).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let times: Vec<String> = times.iter().map(|t| format!("{t:?}")).collect();
        let text = format!(
            "problem = {p}\nsolver = {s}\n[{p}]\nn_x = {n_x}\ncfl = {cfl:?}\nt_end = {t_end:?}\nsigma = {sigma:?}\n\
             theta_rel = {theta:?}\nr_min = {r_min}\nr_start = {}\nr_max = {}\nsnapshot_times = {}\ntruncation = {}\n",
            r_min + extra / 2,
            r_min + extra,
            times.join(","),
            if standard { "standard" } else { "conservative" },
        );
        let c = parse_config(&text).unwrap();
        prop_assert_eq!(c.n_x, n_x);
        prop_assert_eq!(c.cfl, cfl);
        prop_assert_eq!(c.t_end, t_end);
        let again = parse_config(&c.to_text()).unwrap();
        prop_assert_eq!(again, c);
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn snapshot_round_trip(rows in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>(), any::<f64>()), 0..50)) {
        let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
        let s = Snapshot1d {
            x: rows.iter().map(|r| finite(r.0)).collect(),
            phi: rows.iter().map(|r| finite(r.1)).collect(),
            temperature: rows.iter().map(|r| finite(r.2)).collect(),
            b: rows.iter().map(|r| finite(r.3)).collect(),
        };
        let back = Snapshot1d::from_csv(&s.to_csv().unwrap(), Path::new("mem")).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn csv_readers_never_panic(text in "\\PC{0,200}") {
        let _ = Snapshot1d::from_csv(&text, Path::new("f"));
        let _ = Snapshot2d::from_csv(&text, Path::new("f"));
        let _ = history_from_csv(&text, Path::new("f"));
    }
}

#[test]
fn sections_only_apply_to_their_problem() {
    let text = "n_x = 300\n[su_olson]\nn_x = 40\n[plane_source]\nn_moments = 7\n";
    let plane = parse_config(text).unwrap();
    assert_eq!((plane.problem, plane.n_x, plane.n_moments), (ProblemKind::PlaneSource, 300, 7));
    let su = parse_config(&format!("problem = su_olson\n{text}")).unwrap();
    assert_eq!((su.n_x, su.n_moments, su.b0), (40, 500, 50.0));
}

#[test]
fn overrides_win() {
    let ov = vec![
        parse_override("problem=beam_2d").unwrap(),
        parse_override(" n_pn = 3 ").unwrap(),
        parse_override("solver=naive").unwrap(),
    ];
    let c = parse_config_with("problem = su_olson\nn_x = 20\n", &ov).unwrap();
    assert_eq!((c.problem, c.solver, c.n_pn, c.n_x), (ProblemKind::Beam2d, SolverKind::Naive, 3, 20));
    assert_eq!(c.moment_count(), 16);
    assert!(matches!(parse_override("n_x"), Err(ConfigError::Syntax { .. })));
    assert!(matches!(parse_override("nx=3"), Err(ConfigError::UnknownKey(_))));
}

#[test]
fn problem_defaults() {
    let beam = parse_config("problem = beam_2d").unwrap();
    assert_eq!((beam.n_x, beam.n_y, beam.n_pn, beam.r_start), (500, 500, 29, 100));
    assert_eq!((beam.cfl, beam.t_end, beam.sigma, beam.theta_rel), (0.7, 0.5, 0.5, 5e-4));
    assert_eq!(beam.cell_count(), 250_000);
    let su = parse_config("problem = su_olson").unwrap();
    assert_eq!((su.t_end, su.b0, su.theta_rel), (3.16, 50.0, 1e-2));
    assert_eq!(su.truncation, TruncationStrategy::Conservative);
}

#[test]
fn validation_errors() {
    let bad = [
        "n_x = 2",
        "cfl = 1.5",
        "cfl = -1",
        "t_end = -1",
        "r_min = 0",
        "r_min = 5\nr_max = 4",
        "theta_rel = -0.1",
        "sigma = -1",
        "a_rad = 0",
        "x_min = 1\nx_max = 1",
        "snapshot_times = 1, 99",
        "snapshot_times = 1, x",
        "solver = fast",
        "truncation = lazy",
        "n_x = 3.5",
    ];
    for text in bad {
        assert!(parse_config(text).is_err(), "accepted `{text}`");
    }
    assert!(parse_config("cfl = 1.5\nallow_large_dt = true").is_ok());
    let err = parse_config("cfl = 2").unwrap_err().to_string();
    assert!(err.contains("dt <= dx"), "{err}");
}

#[test]
fn syntax_errors_carry_lines() {
    match parse_config("solver = full\n\nbogus line\n") {
        Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    match parse_config("n_x = 10\nn_x = 20\n") {
        Err(ConfigError::DuplicateKey { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_config("[moon]\n"), Err(ConfigError::UnknownSection(_))));
    assert!(matches!(parse_config("colour = red\n"), Err(ConfigError::UnknownKey(_))));
    assert!(matches!(parse_config("[plane_source\n"), Err(ConfigError::Syntax { .. })));
    assert!(matches!(parse_config("[su_olson]\nproblem = su_olson\n"), Err(ConfigError::Syntax { .. })));
    assert!(parse_config("# only a comment\n  \nn_x = 10 # trailing\n").is_ok());
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = Snapshot1d {
        x: vec![-1.0, 0.0, 1.0],
        phi: vec![0.1, 0.2, 1.0 / 3.0],
        temperature: vec![1.0, 2.0, 3.0],
        b: vec![1e-300, 5e300, -0.0],
    };
    let p1 = dir.path().join("nested/a.csv");
    write_snapshot_1d(&p1, &s1).unwrap();
    assert_eq!(read_snapshot_1d(&p1).unwrap(), s1);

    let s2 = Snapshot2d {
        x1: vec![0.5, 1.5],
        x2: vec![0.5, 0.5],
        phi: vec![3.0, 4.0],
        temperature: vec![1.0, 1.1],
    };
    let p2 = dir.path().join("b.csv");
    write_snapshot_2d(&p2, &s2).unwrap();
    assert_eq!(read_snapshot_2d(&p2).unwrap(), s2);

    let mut h = History::default();
    h.record(0.0, 20, 2.5, 1.0, 0.0);
    h.record(0.1, 7, 2.5 + 1e-15, 0.9, 0.01);
    let p3 = dir.path().join("h.csv");
    write_history(&p3, &h).unwrap();
    assert_eq!(read_history(&p3).unwrap(), h);
    assert!(history_to_csv(&h).starts_with("t,rank,mass,energy,rel_mass_err,wall_s\n"));

    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "problem = su_olson\nn_x = 64\n").unwrap();
    let c = load_config(&cfg_path, &[("n_moments".into(), "9".into())]).unwrap();
    assert_eq!((c.n_x, c.n_moments), (64, 9));
    assert!(matches!(load_config(&dir.path().join("missing"), &[]), Err(Error::Io { .. })));
    assert!(matches!(read_history(&dir.path().join("missing")), Err(Error::Io { .. })));
}

#[test]
fn wrong_header_is_rejected() {
    let err = Snapshot2d::from_csv("x,phi,T,B\n1,2,3,4\n", Path::new("s.csv")).unwrap_err();
    match err {
        Error::Parse { line, path, .. } => {
            assert_eq!(line, 1);
            assert_eq!(path, Path::new("s.csv"));
        }
        other => panic!("{other:?}"),
    }
    assert!(history_from_csv("t,rank,mass,energy,rel_mass_err,wall_s\n0,1,2,3,4\n", Path::new("h")).is_err());
}
