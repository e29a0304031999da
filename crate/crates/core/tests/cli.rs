use std::path::PathBuf;

use fourier_metric::cli::{run, EXIT_DIVERGENT, EXIT_INPUT, EXIT_OK};
use tempfile::TempDir;

const MOMENTS_101: &str = r#"{"type":"phi_delta","dim":1,"m":2,"moments":[{"beta":[0],"value":[1.0,0.0]},{"beta":[1],"value":[0.0,0.0]},{"beta":[2],"value":[1.0,0.0]}]}"#;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fourier-metric").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn rows(out: &str) -> Vec<Vec<String>> {
    out.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn dist_identical_files_is_zero() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"type":"discrete","dim":1,"atoms":[{"x":[-1.0],"w":[0.5,0]},{"x":[1.0],"w":[0.5,0]}]}"#);
    let r = cli(&["dist", a.to_str().unwrap(), a.to_str().unwrap(), "--m", "2"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let t = rows(&r.out);
    assert_eq!(t[0][..4], ["value", "lower_bound", "tail_bound", "argmax_0"]);
    assert_eq!(t[1][0].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn dist_matched_pair() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"type":"discrete","dim":1,"atoms":[{"x":[-1.0],"w":[0.5,0]},{"x":[1.0],"w":[0.5,0]}]}"#);
    let b = write(
        &dir,
        "b.json",
        r#"{"type":"discrete","dim":1,"atoms":[{"x":[-2.0],"w":[0.125,0]},{"x":[0.0],"w":[0.75,0]},{"x":[2.0],"w":[0.125,0]}]}"#,
    );
    let r = cli(&["dist", a.to_str().unwrap(), b.to_str().unwrap(), "--m", "2"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: f64 = rows(&r.out)[1][0].parse().unwrap();
    assert!((v - 0.26253).abs() < 1e-4, "{v}");
    // 17 significant digits.
    assert_eq!(rows(&r.out)[1][0].split('e').next().unwrap().len(), 18);
}

#[test]
fn dist_reports_divergence() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"type":"discrete","dim":1,"atoms":[{"x":[0.0],"w":[1,0]}]}"#);
    let b = write(&dir, "b.json", r#"{"type":"discrete","dim":1,"atoms":[{"x":[1.0],"w":[1,0]}]}"#);
    let r = cli(&["dist", a.to_str().unwrap(), b.to_str().unwrap(), "--m", "2"]);
    assert_eq!(r.code, EXIT_DIVERGENT);
    assert!(r.out.starts_with("divergent beta=[1]"), "{}", r.out);
}

#[test]
fn malformed_spec_names_the_field() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"type":"discrete","dim":1,"atoms":[{"x":[0.0],"w":[1]}]}"#);
    let r = cli(&["dist", a.to_str().unwrap(), a.to_str().unwrap(), "--m", "2"]);
    assert_eq!(r.code, EXIT_INPUT);
    assert_eq!(r.err.lines().count(), 1);
    assert!(r.err.contains("atoms[0].w"), "{}", r.err);
    let r = cli(&["dist", "/nonexistent.json", a.to_str().unwrap(), "--m", "2"]);
    assert_eq!(r.code, EXIT_INPUT);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli(&["dist"]).code, EXIT_INPUT);
    assert_eq!(cli(&["frobnicate"]).code, EXIT_INPUT);
    assert_eq!(cli(&["smoothness-probe", "--m", "2", "-n", "3"]).code, EXIT_INPUT);
    assert_eq!(cli(&["--help"]).code, EXIT_OK);
}

#[test]
fn moments_tables() {
    let dir = TempDir::new().unwrap();
    let dirac = write(&dir, "d.json", r#"{"type":"discrete","dim":1,"atoms":[{"x":[0.0],"w":[1,0]}]}"#);
    let r = cli(&["moments", dirac.to_str().unwrap(), "--order", "2"]);
    assert_eq!(r.code, EXIT_OK);
    let t = rows(&r.out);
    assert_eq!(t[0], ["beta", "re", "im"]);
    let re: Vec<f64> = t[1..].iter().map(|row| row[1].parse().unwrap()).collect();
    assert_eq!(re, [1.0, 0.0, 0.0]);

    let sym = write(&dir, "s.json", r#"{"type":"discrete","dim":1,"atoms":[{"x":[-1.0],"w":[0.5,0]},{"x":[1.0],"w":[0.5,0]}]}"#);
    let t = rows(&cli(&["moments", sym.to_str().unwrap(), "--order", "2"]).out);
    let re: Vec<f64> = t[1..].iter().map(|row| row[1].parse().unwrap()).collect();
    assert_eq!(re, [1.0, 0.0, 1.0]);

    let fam = write(&dir, "p.json", &MOMENTS_101.replace(r#""m":2,"#, r#""m":2,"delta":0.5,"#));
    let r = cli(&["moments", fam.to_str().unwrap(), "--order", "2"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(rows(&r.out)[3][0], "[2]");
    assert_eq!(cli(&["moments", fam.to_str().unwrap(), "--order", "3"]).code, EXIT_INPUT);
}

#[test]
fn moments_quote_multi_indices_in_two_dimensions() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d.json", r#"{"type":"discrete","dim":2,"atoms":[{"x":[1.0,2.0],"w":[1,0]}]}"#);
    let r = cli(&["moments", p.to_str().unwrap(), "--order", "1"]);
    assert!(r.out.lines().nth(2).unwrap().starts_with("\"[1,0]\","), "{}", r.out);
}

#[test]
fn lipschitz_command() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "m.json", MOMENTS_101);
    let path = p.to_str().unwrap();
    let r = cli(&["lipschitz", path, "--delta1", "1", "--delta2", "0.5"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let t = rows(&r.out);
    assert_eq!(t[0], ["estimate", "bound", "pass"]);
    assert_eq!(t[1][1].parse::<f64>().unwrap(), 0.5);
    assert_eq!(t[1][2], "true");

    let same = rows(&cli(&["lipschitz", path, "--delta1", "1", "--delta2", "1"]).out);
    assert!(same[1][0].parse::<f64>().unwrap() <= 1e-6);

    assert_eq!(cli(&["lipschitz", path, "--delta1", "0", "--delta2", "0.5"]).code, EXIT_INPUT);
    assert_eq!(cli(&["lipschitz", path, "--m", "3", "--delta1", "1", "--delta2", "0.5"]).code, EXIT_INPUT);
    assert_eq!(cli(&["lipschitz", path, "--d", "2", "--delta1", "1", "--delta2", "0.5"]).code, EXIT_INPUT);
}

#[test]
fn cauchy_command() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "m.json", MOMENTS_101);
    let path = p.to_str().unwrap();
    let single = cli(&["cauchy", path, "--j", "1"]);
    assert_eq!(single.code, EXIT_OK);
    assert_eq!(rows(&single.out).len(), 1);

    let pair = rows(&cli(&["cauchy", path, "--j", "1,2"]).out);
    assert_eq!(pair.len(), 2);
    assert_eq!(pair[1][3].parse::<f64>().unwrap(), 0.5);

    let four = cli(&["cauchy", path, "--m", "2", "--d", "1", "--j", "1,2,4,8"]);
    let t = rows(&four.out);
    assert_eq!(t.len(), 7);
    assert!(t[1..].iter().all(|row| row[4] == "true"), "{}", four.out);
    assert_eq!(cli(&["cauchy", path, "--j", "0,2"]).code, EXIT_INPUT);
}

#[test]
fn smoothness_probe_command() {
    let r = cli(&["smoothness-probe", "--m", "2", "--n-max", "10"]);
    assert_eq!(r.code, EXIT_OK);
    let t = rows(&r.out);
    assert_eq!(t[0], ["n", "h", "quotient", "branch"]);
    assert_eq!(t.len(), 21);
    let summary = r.out.lines().last().unwrap();
    assert!(summary.starts_with("# limit_a="), "{summary}");

    let one = cli(&["smoothness-probe", "--m", "2", "--n-max", "1"]);
    assert_eq!(rows(&one.out).len(), 3);
    assert_eq!(cli(&["smoothness-probe", "--m", "1"]).code, EXIT_INPUT);
    // Default n_max.
    assert_eq!(rows(&cli(&["smoothness-probe", "--m", "3"]).out).len(), 41);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "m.json", MOMENTS_101);
    let args = ["lipschitz", p.to_str().unwrap(), "--delta1", "0.2", "--delta2", "0.1"];
    assert_eq!(cli(&args).out, cli(&args).out);
}
