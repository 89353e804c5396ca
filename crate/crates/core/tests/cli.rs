use std::path::Path;
use std::process::{Command, Output};

fn mvpipe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvpipe"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["gen", "zipf", "--n", "100000", "--alpha", "1.0", "--seed", "7", "--out", out];
    ok(&mvpipe(&args("a.bin"), dir.path()));
    ok(&mvpipe(&args("b.bin"), dir.path()));
    let a = std::fs::read(dir.path().join("a.bin")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.bin")).unwrap());
    assert_eq!(&a[..4], b"MVPT");
    assert_eq!(a.len(), 17 + 100_000 * 12);
}

#[test]
fn usage_errors_exit_two_and_runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = mvpipe(&["gen", "zipf", "--out", "x.bin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));
    let out = mvpipe(&["run", "--trace", "missing.bin", "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = mvpipe(&["gen", "skew", "--n", "10", "--topk", "20", "--out", "x.bin"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_handles_empty_traces_and_high_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "src,dst,value\n").unwrap();
    ok(&mvpipe(&["run", "--trace", "empty.csv", "--out", "r"], dir.path()));
    assert_eq!(std::fs::read_to_string(dir.path().join("r/epoch-0000.json")).unwrap().trim(), "[]");

    ok(&mvpipe(&["gen", "skew", "--n", "5000", "--topk", "10", "--fraction", "0.5", "--out", "t.csv"], dir.path()));
    ok(&mvpipe(
        &["run", "--trace", "t.csv", "--out", "hi", "--threshold", "5001", "--format", "csv"],
        dir.path(),
    ));
    assert_eq!(std::fs::read_to_string(dir.path().join("hi/epoch-0000.csv")).unwrap(), "key,count\n");
    ok(&mvpipe(
        &["run", "--trace", "t.csv", "--out", "lo", "--phi", "0.05", "--epoch-len", "2000"],
        dir.path(),
    ));
    for i in 0..3 {
        assert!(dir.path().join(format!("lo/epoch-{i:04}.json")).exists());
    }
    let inst = std::fs::read_to_string(dir.path().join("lo/instrumentation.csv")).unwrap();
    assert_eq!(inst.lines().count(), 4);
}

#[test]
fn eval_recovers_a_tiny_trace_exactly() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("t.csv"),
        "src,dst,value\n1.2.3.4,5.6.7.8,6\n1.2.3.5,5.6.7.8,3\n9.9.9.9,1.1.1.1,2\n1.2.3.4,5.6.7.8,1\n",
    )
    .unwrap();
    let csv = ok(&mvpipe(
        &["eval", "--trace", "t.csv", "--memory", "1048576", "--threshold", "5", "--modes", "full,hw"],
        dir.path(),
    ));
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("epoch,mode,"));
    assert_eq!(rows.len(), 5);
    for row in &rows[1..3] {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!((f[5], f[6]), ("1.000000", "1.000000"), "{row}");
    }
    // A key that takes over a bucket with a weighted record starts the
    // hardware indicator at -v, so hw rows are not expected to be exact.
    assert!(rows[1].contains(",full,") && rows[3].contains(",hw,") && rows[4].contains(",hw,"));
}

#[test]
fn eval_emits_one_average_row_per_threshold() {
    let dir = tempfile::tempdir().unwrap();
    ok(&mvpipe(&["gen", "zipf", "--n", "20000", "--universe", "3000", "--out", "z.bin"], dir.path()));
    let csv = ok(&mvpipe(
        &["eval", "--trace", "z.bin", "--epoch-len", "10000", "--phis", "0.002,0.005,0.01,0.02,0.05"],
        dir.path(),
    ));
    assert_eq!(csv.lines().filter(|l| l.starts_with("avg,")).count(), 5);
    assert_eq!(csv.lines().count(), 1 + 5 * 3);
}

#[test]
fn two_d_runs_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    ok(&mvpipe(&["gen", "zipf", "--n", "20000", "--universe", "2000", "--out", "z.bin"], dir.path()));
    let csv = ok(&mvpipe(
        &["eval", "--trace", "z.bin", "--spec", "2d-byte", "--memory", "262144", "--phi", "0.01"],
        dir.path(),
    ));
    let avg = csv.lines().find(|l| l.starts_with("avg,")).unwrap();
    assert!(avg.contains(",2d-byte,"));
}

#[test]
fn bench_reports_min_median_max() {
    let dir = tempfile::tempdir().unwrap();
    ok(&mvpipe(&["gen", "skew", "--n", "50000", "--topk", "100", "--out", "s.bin"], dir.path()));
    let csv = ok(&mvpipe(
        &["bench", "--trace", "s.bin", "--reps", "5", "--specs", "1d-byte,1d-bit"],
        dir.path(),
    ));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains("min_mups,median_mups,max_mups"));
    for row in &rows[1..] {
        let f: Vec<f64> = row.split(',').skip(5).take(3).map(|x| x.parse().unwrap()).collect();
        assert!(f[0] <= f[1] && f[1] <= f[2]);
    }
    std::fs::write(dir.path().join("e.csv"), "src,dst,value\n").unwrap();
    let na = ok(&mvpipe(&["bench", "--trace", "e.csv", "--reps", "3"], dir.path()));
    assert!(na.lines().nth(1).unwrap().contains("NA"));
}

#[test]
fn sweeps_have_the_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    ok(&mvpipe(&["gen", "skew", "--n", "40000", "--topk", "50", "--out", "s.bin"], dir.path()));
    let csv = ok(&mvpipe(
        &[
            "sweep", "--axis", "memory", "--trace", "s.bin",
            "--memories", "262144,524288,1048576,2097152",
            "--phis", "0.001,0.002,0.005,0.01,0.02",
        ],
        dir.path(),
    ));
    assert_eq!(csv.lines().count(), 1 + 4 * 5);
    let csv = ok(&mvpipe(
        &["sweep", "--axis", "epochs", "--trace", "s.bin", "--epoch-lens", "10000,20000,40000", "--phi", "0.01"],
        dir.path(),
    ));
    let epochs: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(epochs, vec!["4", "2", "1"]);
    let csv = ok(&mvpipe(
        &["sweep", "--axis", "skew", "--n", "20000", "--topk", "50", "--fractions", "0.1,0.54", "--phi", "0.01"],
        dir.path(),
    ));
    let means: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(means[0] > means[1]);
}

#[test]
fn config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    ok(&mvpipe(&["gen", "skew", "--n", "5000", "--topk", "10", "--out", "t.bin"], dir.path()));
    std::fs::write(dir.path().join("run.conf"), "spec=1d-bit\nmemory=65536\nphi=0.05\n").unwrap();
    let csv = ok(&mvpipe(&["eval", "--trace", "t.bin", "--config", "run.conf"], dir.path()));
    assert!(csv.lines().nth(1).unwrap().contains(",1d-bit,"));
    std::fs::write(dir.path().join("bad.conf"), "memory=1\nwidths=1\n").unwrap();
    let out = mvpipe(&["eval", "--trace", "t.bin", "--config", "bad.conf"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
