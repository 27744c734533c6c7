use std::path::PathBuf;
use std::process::{Command, Output};

fn pipefold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pipefold")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn temp_file(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("pipefold-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn cycle_time_prints_expression_and_value() {
    let o = pipefold(&["cycle-time", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("27/8·T_loop + 2·T_1q + 4·T_2q + T_meas = 3150 ns"), "{}", stdout(&o));
}

#[test]
fn verify_all_passes_at_three() {
    let o = pipefold(&["verify", "--d", "3", "--gate", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn factory_report() {
    let o = pipefold(&["--format", "json", "factory", "--variant", "folded"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["schema_version"], 1);
    let data = &j["sections"][0]["data"];
    let runtime = pipefold::rational::parse_q(data["runtime"].as_str().unwrap()).unwrap();
    let runtime_us = pipefold::rational::to_f64(&runtime) / 1000.0;
    assert!((runtime_us - 216.0).abs() <= 1.0, "{runtime_us}");
    assert_eq!(data["cultivation_cycles"], 22);
    let text = stdout(&pipefold(&["factory", "--variant", "folded"]));
    assert!(text.contains("2.8e-13"), "{text}");
}

#[test]
fn json_quantities_reevaluate() {
    let o = pipefold(&["--format", "json", "gate-times"]);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = pipefold::TimingParams::silicon();
    let mut seen = 0;
    for q in j["sections"][0]["quantities"].as_array().unwrap() {
        let e = pipefold::expr::Expr::parse(q["expr"].as_str().unwrap()).unwrap();
        let d = q["d"].as_u64().unwrap_or(0) as usize;
        let v = e.eval(&p, d).unwrap();
        assert_eq!(format!("{} ns", pipefold::rational::fmt_q(&v)), q["value"].as_str().unwrap());
        seen += 1;
    }
    assert!(seen > 10);
}

#[test]
fn identical_runs_are_identical() {
    for args in [&["table1"][..], &["--format", "json", "worst-case", "--protocol", "rearrange", "--n", "6"], &["verify", "--d", "3", "--gate", "S"]] {
        let a = pipefold(args);
        let b = pipefold(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn layout_fixtures_match_their_verdicts() {
    for f in ["hallway.toml", "checkerboard.toml"] {
        let o = pipefold(&["layout", "--fixture", &fixture(f)]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stdout(&o));
    }
    let o = pipefold(&["layout", "--fixture", &fixture("checkerboard.toml")]);
    assert!(stdout(&o).contains("minimal swaps           4"), "{}", stdout(&o));
}

#[test]
fn config_file_changes_the_numbers() {
    let cfg = temp_file("fast.toml", "t_loop_ns = 200\nt_1q_ns = 200\nt_2q_ns = 100\nt_meas_ns = 1000\n");
    let o = pipefold(&["--config", &cfg, "cycle-time"]);
    assert_eq!(o.status.code(), Some(0));
    // 27/8 * 200 + 400 + 400 + 1000
    assert!(stdout(&o).contains("= 2475 ns"), "{}", stdout(&o));
}

#[test]
fn failing_check_exits_one() {
    // A fixture whose recorded verdict is wrong.
    let text = std::fs::read_to_string(fixture("checkerboard.toml")).unwrap().replace("min_swaps = 4", "min_swaps = 3");
    let f = temp_file("wrong.toml", &text);
    let o = pipefold(&["layout", "--fixture", &f]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn distinct_error_statuses() {
    let bad_cfg = temp_file("neg.toml", "t_loop_ns = -400\nt_1q_ns = 200\nt_2q_ns = 100\nt_meas_ns = 1000\n");
    assert_eq!(pipefold(&["--config", &bad_cfg, "table1"]).status.code(), Some(3));
    let missing = temp_file("missing.toml", "t_loop_ns = 400\n");
    assert_eq!(pipefold(&["--config", &missing, "table1"]).status.code(), Some(3));
    let bad_fixture = temp_file("fixture.toml", "name = 'x'\nwidth = 2\n");
    assert_eq!(pipefold(&["layout", "--fixture", &bad_fixture]).status.code(), Some(4));
    assert_eq!(pipefold(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pipefold(&["worst-case", "--protocol", "cnot-stack", "--n", "2"]).status.code(), Some(5));
}
