use std::fs;
use std::process::{Command, Output};

fn linkops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linkops"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

const CFG: [&str; 8] = ["--c", "-1", "--n", "5", "--rho", "2", "--k", "1"];

fn with_cfg<'a>(rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![rest[0]];
    v.extend(CFG);
    v.extend(&rest[1..]);
    v
}

#[test]
fn eval_table_shape() {
    let out = linkops(&with_cfg(&["eval", "--kind", "V", "--f", "t^2", "--grid", "0:1:11"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("x,value\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 12);
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.len(), 18, "{cell}");
        }
    }
}

#[test]
fn affine_functions_agree_for_v_and_d() {
    let v = linkops(&with_cfg(&["eval", "--kind", "V", "--f", "t"]));
    let d = linkops(&with_cfg(&["eval", "--kind", "D", "--f", "t"]));
    let (v, d) = (column(&stdout(&v), 1), column(&stdout(&d), 1));
    assert_eq!(v.len(), 11);
    for (a, b) in v.iter().zip(&d) {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}

#[test]
fn baskakov_reproduces_constants() {
    let out = linkops(&["eval", "--c", "0", "--n", "6", "--kind", "baskakov_inf", "--f", "1", "--grid", "0:3:7"]);
    for v in column(&stdout(&out), 1) {
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn moments_columns() {
    let out = linkops(&["moments", "--c", "0", "--n", "4", "--rho", "2", "--k", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let xs = column(&text, 0);
    let e0 = column(&text, 1);
    let e1 = column(&text, 4);
    let e2 = column(&text, 7);
    for i in 0..xs.len() {
        let x = xs[i];
        assert_eq!(e0[i], 1.0);
        assert!((e1[i] - x).abs() < 1e-15);
        assert!((e2[i] - (x * x + x * 3.0 / 8.0)).abs() < 1e-14);
    }
    for col in [3, 6, 9] {
        assert!(column(&text, col).iter().all(|r| *r < 1e-9));
    }
}

#[test]
fn entropy_examples() {
    let out = linkops(&["entropy", "--c", "-1", "--n", "2", "--grid", "0:1:3"]);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("x,s_series,s_integral,s_bound,tsallis"));
    assert_eq!(column(&text, 1), vec![1.0, 0.375, 1.0]);
    assert_eq!(column(&text, 3)[1], 0.5);
    assert_eq!(column(&text, 4)[0], 0.0);
}

#[test]
fn converge_column_decreases() {
    let out = linkops(&["converge", "--c", "-1", "--n", "5", "--k", "1", "--f", "t^2"]);
    let d = column(&stdout(&out), 1);
    assert_eq!(d.len(), 9);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn verify_exit_codes() {
    assert_eq!(linkops(&["verify", "decomposition"]).status.code(), Some(0));
    let t33 = linkops(&["verify", "thm33"]);
    assert_eq!(t33.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&t33.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["overall"], true);
    assert!(report["cases"].as_array().unwrap().len() > 10);
    assert_eq!(linkops(&["verify", "all", "--mutate"]).status.code(), Some(1));
    assert_eq!(linkops(&["verify", "bogus"]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["eval", "--c", "-0.3", "--n", "5", "--f", "t"],
        vec!["eval", "--c", "0", "--n", "5", "--f", "t^"],
        vec!["eval", "--c", "0", "--n", "5", "--f", "t", "--grid", "1:0:3"],
        vec!["eval", "--c", "-1", "--n", "5", "--f", "t", "--grid", "0:2:3"],
        vec!["eval", "--c", "1", "--n", "5", "--rho", "0", "--f", "t"],
        vec!["eval", "--c", "-0.5", "--n", "4", "--k", "1", "--f", "t"],
        vec!["eval", "--c", "0", "--n", "5", "--f", "t", "--tol", "2"],
    ] {
        let out = linkops(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn params_file_and_out_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.txt");
    fs::write(&params, "# c n rho k\n-1 5 2 1\n1 4 3 2\n0 10 inf 1\n").unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("r{i}.json"));
            let status = linkops(&[
                "verify",
                "all",
                "--params",
                params.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .status;
            assert_eq!(status.code(), Some(0));
            fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let v: serde_json::Value = serde_json::from_slice(&runs[0]).unwrap();
    assert_eq!(v["suite"], "all");
    assert_eq!(v["failed"], 0);

    fs::write(&params, "-1 5 2\n").unwrap();
    let bad = linkops(&["verify", "all", "--params", params.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn json_eval_carries_metadata() {
    let out = linkops(&with_cfg(&["eval", "--f", "t^2", "--d2sup", "2", "--format", "json", "--grid", "0:1:2"]));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "eval");
    assert_eq!(v["config"]["rho"], "2");
    assert_eq!(v["kind"], "V_normalized");
    assert_eq!(v["d2_sup"], 2.0);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}
