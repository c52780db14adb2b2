use std::process::{Command, Output};

fn decay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decay")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn survival_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = decay(&["survival", "--eta", "5", "--t-max", "4", "--t-points", "41", "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("t,re_A,im_A,S,ln_S\n"));
    assert_eq!(text.lines().count(), 42);
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# resonance run\nmodel = resonance\npole_re = 3\npole_im = -0.05\nt_max = 2\nt_points = 5\n").unwrap();
    let o = decay(&["survival", "--config", cfg.to_str().unwrap(), "--t-points", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["survival", "--model", "delta", "--v0", "1"],
        vec!["survival", "--model", "resonance"],
        vec!["decompose", "--eta", "5"],
        vec!["survival", "--eta", "five"],
        vec!["survival", "--no-such-flag"],
        vec!["survival", "--config", "/nonexistent/run.cfg"],
        vec!["validate", "--tol", "sum_identity"],
    ] {
        let o = decay(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn decompose_emits_all_columns() {
    let o = decay(&["decompose", "--model", "resonance", "--pole-re", "3", "--pole-im", "-0.05", "--T", "10", "--t-points", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,pp,interference,qq,total,consistency_metric"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[2], 0.0);
    assert_eq!(first[3], 0.0);
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn nonescape_truncation_failure_exits_with_one() {
    let o = decay(&["nonescape", "--T", "3", "--t-points", "3", "--basis-size", "2", "--nonescape-tolerance", "1e-8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("basis_size"));
}

#[test]
fn poles_lists_requested_count() {
    let o = decay(&["poles", "--eta", "5", "--pole-count", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("resonance,1,2.7"));
}

#[test]
fn sweep_reports_crossover_for_hermitian_case() {
    let o = decay(&["detector-sweep", "--eta", "5", "--v0-values", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
    assert!(row[1].parse::<f64>().unwrap() > 3.0);
    assert!((row[2].parse::<f64>().unwrap() - 1.93).abs() < 0.04);
}

#[test]
fn validate_names_a_check_failed_by_a_perturbed_tolerance() {
    let o = decay(&["validate", "--tol", "closed_form_vs_contour=1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("closed_form_vs_contour,FAIL,")));
    assert!(text.lines().filter(|l| l.contains(",FAIL,")).count() == 1, "{text}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("closed_form_vs_contour"));
}
