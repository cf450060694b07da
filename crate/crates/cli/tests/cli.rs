use std::path::Path;
use std::process::{Command, Output};

fn kcirc(args: &[&str]) -> Output {
    kcirc_with(args, &[])
}

fn kcirc_with(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kcirc"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run kcirc")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn partition_summary() {
    let o = kcirc(&["partition", "--k", "3", "--n", "10"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "n'=10 g1=4 blocks=4 upsilon=1/5");
    assert!(text.contains("block sizes: 1x2 4x2"));
}

#[test]
fn partition_json_and_structural_zeros() {
    let o = kcirc(&["partition", "--k", "2", "--n", "6", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_prime"], 3);
    assert_eq!(v["zero_multiplicity"], 3);
}

#[test]
fn usage_and_hypothesis_errors_exit_2() {
    assert_eq!(code(&kcirc(&["partition", "--k", "10", "--n", "10"])), 2);
    assert_eq!(code(&kcirc(&["lsd", "--theorem", "3", "--k", "10", "--n", "100"])), 2);
    assert_eq!(code(&kcirc(&["gumbel", "--kk", "1"])), 2);
    assert_eq!(code(&kcirc(&["spectrum", "--k", "2"])), 2);
    assert_eq!(code(&kcirc(&["spectrum", "--preset", "fig9"])), 2);
    assert_eq!(code(&kcirc(&["tail", "--x", "-1"])), 2);
    assert_eq!(code(&kcirc_with(&["tail", "--x", "1"], &[("KCIRC_THREADS", "zero")])), 2);
}

#[test]
fn fuzzed_verify_exits_1() {
    let o = kcirc(&["verify", "--nmax", "6", "--samples", "1", "--det-pairs", "1", "--fuzz", "1e-3"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
    assert_eq!(code(&kcirc(&["verify", "--nmax", "6", "--samples", "1", "--det-pairs", "1"])), 0);
}

#[test]
fn unwritable_output_exits_3() {
    let o = kcirc(&["spectrum", "--k", "2", "--n", "9", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn tail_table() {
    let o = kcirc(&["tail", "--x", "0,1,100"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows[0], ["x", "kbar", "asymptotic", "ratio"]);
    assert_eq!(&rows[1][2..], ["-", "-"]);
    assert!(rows[2][3].starts_with("1.166"));
    let r100: f64 = rows[3][3].parse().unwrap();
    assert!((r100 - 1.0).abs() < 0.03);
}

#[test]
fn spectrum_csv_is_reproducible_across_thread_counts() {
    let args = ["spectrum", "--k", "11", "--n", "666", "--law", "exponential", "--realizations", "4", "--seed", "5"];
    let one = kcirc_with(&args, &[("KCIRC_THREADS", "1")]);
    let four = kcirc_with(&args, &[("KCIRC_THREADS", "4")]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    assert_eq!(text.lines().next().unwrap(), "re,im,block_index,root_index");
    assert_eq!(text.lines().count(), 1 + 4 * 666);
}

#[test]
fn lsd_json_is_reproducible_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        let o = kcirc_with(
            &["lsd", "--theorem", "4", "--k", "30", "--n", "899", "--trials", "4", "--out", path.to_str().unwrap()],
            &[("KCIRC_THREADS", threads)],
        );
        assert!(o.stdout.is_empty());
        (code(&o), std::fs::read(path).unwrap())
    };
    let (c1, a) = run("1", "a.json");
    let (c3, b) = run("3", "b.json");
    assert_eq!(c1, c3);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["config"]["g"], 2);
    assert!(v.get("wall_clock").is_none());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "theorem = 3\nk = 10\nn = 101\ntrials = 2\nlaw = \"uniform\"\nradial_ks = 0.9\n").unwrap();
    let out = dir.path().join("r.json");
    let o = kcirc(&[
        "lsd",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["trials"], 3);
    assert_eq!(v["config"]["law"], "uniform");
    assert_eq!(v["config"]["tolerances"]["radial_ks"], 0.9);

    std::fs::write(&cfg, "colour = 1\n").unwrap();
    assert_eq!(code(&kcirc(&["lsd", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&kcirc(&["lsd", "--config", "/nonexistent/exp.toml"])), 3);
}

#[test]
fn svg_and_preset_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.svg");
    let o = kcirc(&["spectrum", "--preset", "fig3-left", "--format", "svg", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.matches("<circle").count() > 1000);
    assert!(Path::new(&path).exists());
}

#[test]
fn gumbel_radii_csv() {
    let dir = tempfile::tempdir().unwrap();
    let radii = dir.path().join("radii.csv");
    let o = kcirc(&["gumbel", "--kk", "10", "--trials", "20", "--radii-csv", radii.to_str().unwrap()]);
    assert!(matches!(code(&o), 0 | 1));
    let text = std::fs::read_to_string(&radii).unwrap();
    assert_eq!(text.lines().next().unwrap(), "trial,seed,spectral_radius,standardized");
    assert_eq!(text.lines().count(), 21);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["n"], 101);
}
