use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rvdp_cli::config::{parse_config, Command as RunCommand};
use rvdp_cli::run::exit;
use rvdp_cli::suite::random_config;

fn rvdp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvdp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn rvdp")
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn ode_with_empty_config_uses_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("empty.cfg"), "").unwrap();
    let out = rvdp(&["ode", "--config", "empty.cfg", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(exit::OK), "{out:?}");
    assert_eq!(header(&tmp.path().join("o/run.csv")), "t,u");
    let meta = fs::read_to_string(tmp.path().join("o/meta.txt")).unwrap();
    for line in [
        "omega0 = 1.0",
        "epsilon = 0.1",
        "delta = canonical",
        "mu = 0.0",
    ] {
        assert!(meta.contains(line), "missing {line:?} in\n{meta}");
    }
    // meta.txt is itself a configuration
    let back = parse_config(&meta, RunCommand::Ode, &[]).unwrap();
    assert_eq!(back.model.omega0, 1.0);
}

#[test]
fn pde_writes_field_csv_meta_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "\
[model]
omega0 = 2
epsilon = 1
mu = 1.41421356

[grid]
length = 22
dx = 0.05
dt = 0.01
duration = 0.5

[bc]
kind = periodic

[output]
plot = true
";
    fs::write(tmp.path().join("wave.cfg"), cfg).unwrap();
    let out = rvdp(
        &[
            "pde", "--config", "wave.cfg", "--out", "o", "--stride", "10",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::OK), "{out:?}");
    let csv = fs::read_to_string(tmp.path().join("o/run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    // 441 nodes at t = 0, 0.1, ..., 0.5
    assert_eq!(rows.len(), 441 * 6);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows.last().unwrap()[0] - 0.5).abs() < 1e-12);
    let meta = fs::read_to_string(tmp.path().join("o/meta.txt")).unwrap();
    assert!(meta.contains("# courant = "));
    assert!(meta.contains("# wall_time_s = "));
    assert!(meta.contains("stride = 10"));
    assert!(tmp.path().join("o/plot.gp").exists());
}

#[test]
fn network_csv_has_node_column() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rvdp(
        &[
            "network",
            "--out",
            "o",
            "--override",
            "model.omega0=2",
            "--override",
            "model.mu=0.1",
            "--override",
            "grid.duration=1",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::OK), "{out:?}");
    assert_eq!(header(&tmp.path().join("o/run.csv")), "t,node,u");
}

#[test]
fn network_from_adjacency_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("ring.txt"), "0 1 1\n1 0 1\n1 1 0\n").unwrap();
    let out = rvdp(
        &[
            "network",
            "--out",
            "o",
            "--override",
            "model.graph=file",
            "--override",
            "model.adjacency=ring.txt",
            "--override",
            "grid.duration=1",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::OK), "{out:?}");
    fs::write(tmp.path().join("bad.txt"), "0 1\n2 0\n").unwrap();
    let out = rvdp(
        &[
            "network",
            "--override",
            "model.graph=file",
            "--override",
            "model.adjacency=bad.txt",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::INVALID_INPUT));
}

#[test]
fn chain_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rvdp(
        &[
            "chain",
            "--out",
            "o",
            "--override",
            "grid.sites=50",
            "--override",
            "grid.duration=1",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::OK), "{out:?}");
    assert_eq!(header(&tmp.path().join("o/run.csv")), "t,x,u");
}

#[test]
fn sweep_writes_summary_and_subdirectories() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rvdp(
        &[
            "sweep",
            "--out",
            "s",
            "--override",
            "model.epsilon=0.5",
            "--override",
            "grid.duration=1",
            "--stride",
            "50",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::OK), "{out:?}");
    let summary = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "mu,v_measured,v_expected,rel_error");
    assert_eq!(rows.len(), 5);
    for row in &rows[1..] {
        let rel: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel < 0.02, "{row}");
    }
    for i in 0..4 {
        assert!(tmp.path().join(format!("s/mu_{i}/run.csv")).exists());
    }
}

#[test]
fn config_errors_report_line_and_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.cfg"),
        "[model]\n# comment\nomega0 = -1\n",
    )
    .unwrap();
    let out = rvdp(&["ode", "--config", "bad.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(exit::CONFIG));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");

    fs::write(tmp.path().join("typo.cfg"), "[grid]\nlenght = 3\n").unwrap();
    let out = rvdp(&["pde", "--config", "typo.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(exit::CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.lenght"));

    let out = rvdp(&["ode", "--config", "missing.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(exit::IO));
}

#[test]
fn distinct_exit_codes_for_model_failures() {
    let tmp = tempfile::tempdir().unwrap();
    // past the synchronization boundary
    let out = rvdp(
        &["network", "--override", "model.mu=0.2", "--out", "o"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::UNSTABLE));
    // no real homogeneous frequency
    let out = rvdp(
        &[
            "ode",
            "--override",
            "model.system=homogeneous",
            "--override",
            "model.mu=1",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::UNSTABLE));
    // a step far past the Courant limit blows up
    let out = rvdp(
        &[
            "pde",
            "--override",
            "grid.dt=0.5",
            "--override",
            "grid.duration=200",
            "--override",
            "model.mu=1",
            "--out",
            "o",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::BLOWUP), "{out:?}");
    let out = rvdp(
        &[
            "pde",
            "--override",
            "bc.kind=dirichlet_wave",
            "--override",
            "ic.preset=uniform(1)",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(exit::CONFIG));
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let out = rvdp(
            &[
                "pde",
                "--out",
                dir,
                "--override",
                "grid.duration=0.5",
                "--override",
                "ic.preset=gaussian(10, 1)",
            ],
            tmp.path(),
        );
        assert_eq!(out.status.code(), Some(exit::OK));
    }
    let a = fs::read(tmp.path().join("a/run.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/run.csv")).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_configs_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_config(&mut rng, RunCommand::Pde);
        let back = parse_config(&c.to_config_text(), RunCommand::Pde, &[]).unwrap();
        prop_assert_eq!(back, c);
    }
}
