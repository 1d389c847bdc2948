use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn polymatrix(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polymatrix"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn psne_on_hard_ensemble_prints_one_profile() {
    let dir = TempDir::new().unwrap();
    let o = polymatrix(
        &[
            "hard-ensemble",
            "--p",
            "6",
            "--d",
            "3",
            "--seed",
            "5",
            "--out",
            "h.txt",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let game = std::fs::read_to_string(dir.path().join("h.txt")).unwrap();
    let expected = game
        .lines()
        .find_map(|l| l.strip_prefix("# equilibrium = "))
        .unwrap()
        .to_string();
    let o = polymatrix(&["psne", "--game", "h.txt"], dir.path());
    assert!(o.status.success());
    assert_eq!(body(&stdout(&o)), ["equilibria 1", expected.as_str()]);
}

#[test]
fn compare_game_with_itself() {
    let dir = TempDir::new().unwrap();
    assert!(polymatrix(
        &["generate", "--p", "4", "--d", "2", "--out", "g.txt"],
        dir.path()
    )
    .status
    .success());
    let o = polymatrix(
        &["compare", "--truth", "g.txt", "--learned", "g.txt"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "epsilon 0"));
    assert!(text.lines().any(|l| l == "equal true"));
    assert!(text.lines().any(|l| l == "max_payoff_error 0"));
}

#[test]
fn experiment_mini_run_has_two_rows() {
    let dir = TempDir::new().unwrap();
    let args = [
        "experiment",
        "--p",
        "4",
        "--d",
        "1",
        "--c-grid",
        "1,2",
        "--trials",
        "3",
        "--out",
        "r.csv",
    ];
    let o = polymatrix(&args, dir.path());
    assert!(o.status.success());
    let first = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let rows = body(&first);
    assert_eq!(rows.len(), 3);
    assert_eq!(
        rows[0],
        "p,d,c,n,trials,recovered,probability,mean_fit_seconds"
    );
    assert!(rows[1].starts_with("4,1,1,"));
    assert!(rows[2].starts_with("4,1,2,"));
    // byte-stable reruns
    assert!(polymatrix(&args, dir.path()).status.success());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("r.csv")).unwrap(),
        first
    );
}

#[test]
fn pipeline_sample_learn_poa() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert!(polymatrix(
        &["hard-ensemble", "--p", "5", "--d", "2", "--out", "h.txt"],
        p
    )
    .status
    .success());
    let o = polymatrix(
        &[
            "sample", "--game", "h.txt", "--n", "800", "--qi", "0.9", "--seed", "3", "--out",
            "s.csv",
        ],
        p,
    );
    assert!(o.status.success());
    let data = std::fs::read_to_string(p.join("s.csv")).unwrap();
    assert!(data.starts_with("# polymatrix "));
    assert!(data.contains("# seed = 3\n"));
    let o = polymatrix(&["learn", "--data", "s.csv", "--out", "m.txt"], p);
    assert!(o.status.success());
    let model = std::fs::read_to_string(p.join("m.txt")).unwrap();
    assert!(model.contains("\ndiagnostics\n"));
    let o = polymatrix(&["poa", "--game", "m.txt"], p);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("ratio ")));
}

#[test]
fn artifacts_are_byte_stable() {
    let dir = TempDir::new().unwrap();
    let run = || {
        let o = polymatrix(
            &["generate", "--p", "5", "--d", "2", "--seed", "9"],
            dir.path(),
        );
        assert!(o.status.success());
        stdout(&o)
    };
    assert_eq!(run(), run());
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# defaults\np = 4\nd = 5\nseed = 2\n",
    )
    .unwrap();
    // d = 5 is invalid for p = 4, the flag fixes it
    let bad = polymatrix(&["generate", "--config", "run.cfg"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    let o = polymatrix(&["generate", "--config", "run.cfg", "--d", "1"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# d = 1\n") && text.contains("# seed = 2\n"));
}

#[test]
fn ingest_fixture() {
    let dir = TempDir::new().unwrap();
    let votes = fixture("votes.csv");
    let o = polymatrix(&["ingest", "--votes", &votes], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# players = alito,breyer,ginsburg\n"));
    assert_eq!(
        body(&text),
        [
            "player_1,player_2,player_3",
            "1,3,3",
            "1,1,2",
            "1,1,1",
            "3,1,1",
            "1,1,1"
        ]
    );
}

#[test]
fn error_lines_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let check = |args: &[&str], code: i32, kind: &str| {
        let o = polymatrix(args, p);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(
            err.starts_with(&format!("error: kind={kind} message=")),
            "{err}"
        );
    };
    check(&["psne", "--unknown"], 2, "usage");
    check(&["psne", "--game", "missing.txt"], 6, "io");
    std::fs::write(p.join("bad.txt"), "players two\n").unwrap();
    check(&["psne", "--game", "bad.txt"], 3, "parse");
    std::fs::write(
        p.join("big.txt"),
        "players 26\nstrategies 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2 2\n",
    )
    .unwrap();
    check(&["psne", "--game", "big.txt"], 4, "capacity");
    std::fs::write(p.join("one.txt"), "players 2\nstrategies 1 2\n").unwrap();
    check(
        &["sample", "--game", "one.txt", "--n", "5", "--qi", "0.9"],
        5,
        "model-undefined",
    );

    let help = polymatrix(&["--help"], p);
    assert!(help.status.success());
    assert!(stdout(&help).contains("Exit codes:"));
}
