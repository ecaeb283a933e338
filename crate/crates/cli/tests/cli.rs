//! End-to-end tests of the `cics` binary and the library entry points on the checked-in
//! instance files.

use std::path::PathBuf;
use std::process::{Command, Output};

use cics_cli::{canon, commands, load, InstanceFile};
use cics_core::{mdp_curve, Mode};
use proptest::prelude::*;
use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name)
}

fn cics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cics")).args(args).output().unwrap()
}

fn stdout_json(args: &[&str]) -> Value {
    let out = cics(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn run_file(cmd: &str, file: &str, extra: &[&str]) -> Value {
    let path = instance(file);
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    stdout_json(&args)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

const INSTANCES: &[&str] = &[
    "lookahead.json",
    "two_boxes.json",
    "two_actions.json",
    "optional_inspection.json",
    "peek_gap.json",
    "weighing_uniform.json",
];

#[test]
fn instance_files_are_canonical() {
    for name in INSTANCES {
        let text = std::fs::read_to_string(instance(name)).unwrap();
        let file = InstanceFile::parse(&text).unwrap();
        assert_eq!(file.to_canonical(), text, "{name}");
        let again = InstanceFile::parse(&file.to_canonical()).unwrap();
        assert_eq!(again, file);
    }
}

#[test]
fn curve_table_reparses_to_the_curve() {
    for (name, alts) in [
        ("two_actions.json", 1),
        ("lookahead.json", 2),
        ("peek_gap.json", 2),
        ("optional_inspection.json", 2),
    ] {
        let l = load(&instance(name)).unwrap();
        for alt in 0..alts {
            let csv = commands::curve_csv(&l, alt).unwrap();
            let f = mdp_curve(&l.alternative(alt).unwrap().mdp().unwrap(), l.mode());
            let mut lines = csv.lines();
            assert_eq!(lines.next(), Some("y,f,slope"));
            let rows: Vec<[f64; 3]> = lines
                .map(|line| {
                    let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
                    [cells[0], cells[1], cells[2]]
                })
                .collect();
            assert!(!rows.is_empty());
            for w in rows.windows(2) {
                assert!(w[0][0] < w[1][0], "{name}: breakpoints not increasing");
                // The slope to the right of a breakpoint carries the curve to the next one.
                let predicted = w[0][1] + w[0][2] * (w[1][0] - w[0][0]);
                assert!(
                    close(predicted, w[1][1]),
                    "{name} alt {alt}: {predicted} vs {}",
                    w[1][1]
                );
            }
            for r in &rows {
                assert!(close(r[1], f.eval(r[0])), "{name} alt {alt} at {}", r[0]);
            }
        }
    }
}

#[test]
fn curve_out_writes_the_same_table() {
    let path = instance("two_actions.json");
    let dir = std::env::temp_dir().join(format!("cics-curve-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("two_actions.csv");
    let status = cics(&[
        "curve",
        path.to_str().unwrap(),
        "--alt",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let piped = cics(&["curve", path.to_str().unwrap(), "--alt", "0"]);
    assert_eq!(std::fs::read(&out).unwrap(), piped.stdout);
    assert_eq!(
        String::from_utf8(piped.stdout).unwrap(),
        "y,f,slope\n1,1,0.75\n2.5,2.125,0.25\n4,2.5,0\n"
    );
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn opt_and_gap_on_the_lookahead_instance() {
    let opt = run_file("opt", "lookahead.json", &[]);
    assert!(close(num(&opt["value"]), 4.5));
    let gap = run_file("gap", "lookahead.json", &[]);
    assert!(close(num(&gap["gap"]), 1.0));
}

#[test]
fn partial_inspection_gap_is_sixteen_fifteenths() {
    let gap = run_file("gap", "peek_gap.json", &[]);
    assert!(close(num(&gap["opt"]), 1.875));
    assert!(close(num(&gap["committed"]), 2.0));
    assert!(close(num(&gap["gap"]), 16.0 / 15.0));
}

#[test]
fn surrogate_of_the_single_decision_mdp() {
    let s = run_file("surrogate", "two_actions.json", &["--alt", "0"]);
    let atoms: Vec<(f64, f64)> = s.as_array().unwrap().iter().map(|a| (num(&a[0]), num(&a[1]))).collect();
    let want = [(1.0, 0.25), (2.5, 0.5), (4.0, 0.25)];
    assert_eq!(atoms.len(), want.len());
    for (a, w) in atoms.iter().zip(want) {
        assert!(close(a.0, w.0) && close(a.1, w.1), "{atoms:?}");
    }
}

#[test]
fn chain_indices_and_exact_eval() {
    let idx = run_file("index", "two_boxes.json", &[]);
    let alts = idx["alternatives"].as_array().unwrap();
    assert!(close(num(&alts[0]["index"]), 2.0));
    assert!(close(num(&alts[1]["index"]), 1.0));
    let e = run_file("eval", "two_boxes.json", &[]);
    assert!(close(num(&e["value"]), 31.0 / 16.0));
}

#[test]
fn monte_carlo_eval_is_seeded_and_near_exact() {
    let a = run_file("eval", "two_boxes.json", &["--mc", "7,20000"]);
    let b = run_file("eval", "two_boxes.json", &["--mc", "7,20000"]);
    assert_eq!(a, b);
    assert!((num(&a["value"]) - 31.0 / 16.0).abs() < 0.1);
}

#[test]
fn weighing_scale_parameters_without_the_full_tree() {
    let idx = run_file("index", "weighing_uniform.json", &[]);
    let a = &idx["alternatives"][0];
    assert!(close(num(&a["g"]), 2.0));
    assert!(close(num(&a["h"]), 8.0));
    assert!(close(num(&a["mu"]), 5.0));
    let e = run_file("eval", "weighing_uniform.json", &[]);
    assert!(num(&e["value"]) >= 2.0);
}

#[test]
fn optional_inspection_commands() {
    let idx = run_file("index", "optional_inspection.json", &[]);
    let a = &idx["alternatives"][0];
    assert!(close(num(&a["mu"]), 2.75));
    assert!(close(num(&a["g"]), 4.0));
    let opt = num(&run_file("opt", "optional_inspection.json", &[])["value"]);
    let comp = num(&run_file("compose-semilocal", "optional_inspection.json", &["--beta", "0.1"])["value"]);
    assert!(comp <= opt + 1e-9);
    let v = run_file(
        "verify",
        "optional_inspection.json",
        &["--alt", "0", "--alpha", "0.6", "--semilocal", "0.1,0.3"],
    );
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn explicit_commitments_are_applied() {
    let path = instance("two_actions.json");
    let p = path.to_str().unwrap();
    // Alone, each action costs 2.5 in expectation: 1 + 3/4 * 2/3 + 1/4 * 4 and
    // 1/8 + 1/4 * 1/2 + 3/4 * 3.
    for label in ["1", "2"] {
        let e = stdout_json(&["eval", p, "--commit", &format!(r#"[{{"0": "{label}"}}]"#)]);
        assert_eq!(e["commitments"][0][0], label);
        assert!(close(num(&e["value"]), 2.5));
    }
    let out = cics(&["eval", p, "--commit", r#"[{"0": "3"}]"#]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn local_check_reports_a_witness_on_failure() {
    let v = run_file("verify", "two_actions.json", &["--alt", "0", "--alpha", "1"]);
    assert_eq!(v["pass"], Value::Bool(false));
    assert!(v["witness_y"].is_number());
    let v = run_file("verify", "two_actions.json", &["--alt", "0", "--alpha", "2"]);
    assert_eq!(v["pass"], Value::Bool(true));
}

fn error_of(out: &Output) -> Value {
    assert!(out.stdout.is_empty());
    serde_json::from_slice::<Value>(&out.stderr).unwrap()["error"].clone()
}

#[test]
fn exit_codes_and_error_json() {
    let dir = std::env::temp_dir().join(format!("cics-errors-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"version\": 1, \"mode\": \"min\"").unwrap();
    let out = cics(&["index", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "parse");

    let unknown = dir.join("unknown.json");
    std::fs::write(
        &unknown,
        r#"{"version": 1, "mode": "min", "matroid": {"type": "uniform", "params": {"k": 1}}, "alternatives": [], "extra": 0}"#,
    )
    .unwrap();
    assert_eq!(cics(&["index", unknown.to_str().unwrap()]).status.code(), Some(2));

    let probs = dir.join("probs.json");
    std::fs::write(
        &probs,
        r#"{"version": 1, "mode": "min", "matroid": {"type": "uniform", "params": {"k": 1}},
            "alternatives": [{"type": "pb", "dist": [[1, 0.5], [2, 0.4]], "cost": 1}]}"#,
    )
    .unwrap();
    assert_eq!(cics(&["index", probs.to_str().unwrap()]).status.code(), Some(2));

    let out = cics(&["opt", instance("weighing_uniform.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let e = error_of(&out);
    assert_eq!(e["kind"], "cap");
    assert_eq!(e["exit_code"], 3);

    let out = cics(&[
        "surrogate",
        instance("two_actions.json").to_str().unwrap(),
        "--alt",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_of(&out)["kind"], "domain");

    let out = cics(&[
        "compose-semilocal",
        instance("two_boxes.json").to_str().unwrap(),
        "--beta",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(4));

    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn outputs_are_canonical_text() {
    for name in INSTANCES {
        let out = cics(&["index", instance(name).to_str().unwrap()]);
        let text = String::from_utf8(out.stdout).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(canon::to_string(&v), text, "{name}");
    }
}

fn pb_file() -> impl Strategy<Value = InstanceFile> {
    let alt = (prop::collection::vec((0i32..50, 1u32..10), 1..5), 0u32..40).prop_map(|(atoms, c)| {
        let total: u32 = atoms.iter().map(|a| a.1).sum();
        let dist: Vec<Value> = atoms
            .iter()
            .map(|&(v, w)| serde_json::json!([f64::from(v) / 3.0, f64::from(w) / f64::from(total)]))
            .collect();
        serde_json::json!({"type": "pb", "dist": dist, "cost": f64::from(c) / 7.0})
    });
    (prop::collection::vec(alt, 1..4), prop_oneof![Just("min"), Just("max")]).prop_map(|(alts, mode)| {
        let v = serde_json::json!({
            "version": 1,
            "mode": mode,
            "matroid": {"type": "uniform", "params": {"k": 1}},
            "alternatives": alts,
        });
        serde_json::from_value(v).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_numbers_reparse_to_rounded_values(x in -1e15f64..1e15, e in -12i32..12) {
        let y = x * 10f64.powi(e);
        let text = canon::number(y);
        let back: f64 = text.parse().unwrap();
        prop_assert_eq!(back, canon::round12(y));
    }

    #[test]
    fn canonical_form_is_a_fixed_point(file in pb_file()) {
        let once = file.to_canonical();
        let twice = InstanceFile::parse(&once).unwrap().to_canonical();
        prop_assert_eq!(&once, &twice);
        prop_assert!(InstanceFile::parse(&once).unwrap().load().is_ok());
    }

    #[test]
    fn pb_index_is_the_reservation_value(file in pb_file()) {
        let l = InstanceFile::parse(&file.to_canonical()).unwrap().load().unwrap();
        let idx = commands::index(&l).unwrap();
        for (i, a) in idx["alternatives"].as_array().unwrap().iter().enumerate() {
            let f = mdp_curve(&l.alternative(i).unwrap().mdp().unwrap(), l.mode());
            let g = num(&a["index"]);
            // The curve sits on the diagonal exactly up to (min) or down to (max) the index.
            let off = match l.mode() { Mode::Min => -1.0, Mode::Max => 1.0 };
            prop_assert!((f.eval(g + off) - (g + off)).abs() < 1e-6, "{a:?}");
        }
    }
}
