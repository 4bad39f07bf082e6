use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use ris_core::response::ElementResponse;

fn ris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris"))
        .args(args)
        .env_remove("RIS_DATASET")
        .env_remove("RIS_EMULATOR_PORT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_reproduces_worst_off_magnitude() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = ris(&[
        "sweep",
        "--from",
        "5.1",
        "--to",
        "5.9",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let min_off = text
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .filter(|v| (5.15..=5.875).contains(&v[0]))
        .map(|v| v[1])
        .fold(f64::INFINITY, f64::min);
    assert!((min_off - -5.2).abs() < 1e-6, "{min_off}");

    let ingested = ElementResponse::from_csv(&text).unwrap();
    assert!(ingested.warnings.is_empty());
    let o = ris(&["ingest", path_str(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\nwarnings 0\n"), "{}", stdout(&o));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let sweep = dir.path().join(format!("s{tag}.csv"));
        let log = dir.path().join(format!("g{tag}.log"));
        let best = dir.path().join(format!("b{tag}.hex"));
        let beam = dir.path().join(format!("beam{tag}.csv"));
        assert!(ris(&["sweep", "-o", path_str(&sweep)]).status.success());
        let o = ris(&[
            "optimize",
            "--method",
            "genetic",
            "--budget",
            "5",
            "--seed",
            "11",
            "--log",
            path_str(&log),
            "--out",
            path_str(&best),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(ris(&[
            "steer",
            "--theta",
            "25",
            "--phi",
            "30",
            "--beam-out",
            path_str(&beam)
        ])
        .status
        .success());
        [sweep, log, best, beam].map(|p| std::fs::read(p).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn steer_broadside_gives_uniform_pattern() {
    let o = ris(&["steer", "--theta", "0", "--phi", "0"]);
    assert!(o.status.success());
    let hex = stdout(&o).lines().next().unwrap().to_owned();
    assert!(hex == "0".repeat(64) || hex == "f".repeat(64), "{hex}");
}

fn best_db(o: &Output) -> f64 {
    let s = stdout(o);
    let line = s.lines().find(|l| l.starts_with("best_db")).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn exhaustive_dominates_greedy_on_3x4() {
    let common = [
        "--nx",
        "3",
        "--ny",
        "4",
        "--seed",
        "3",
        "--tx=-0.4,0.3,1.1",
        "--rx",
        "0.9,-0.2,1.7",
    ];
    let mut greedy = vec!["optimize", "--method", "greedy", "--init", "random"];
    greedy.extend(common);
    let mut full = vec!["optimize", "--method", "exhaustive"];
    full.extend(common);
    let g = ris(&greedy);
    let e = ris(&full);
    assert!(g.status.success() && e.status.success());
    assert!(best_db(&e) >= best_db(&g));
}

#[test]
fn pattern_codec() {
    let o = ris(&[
        "pattern",
        "--nx",
        "4",
        "--ny",
        "2",
        "checkerboard",
        "--ascii",
    ]);
    assert_eq!(stdout(&o), "5a\n.#.#\n#.#.\n");
    let o = ris(&["pattern", "--nx", "4", "--ny", "2", "decode", "5a"]);
    assert_eq!(stdout(&o), "5a\n");
    let o = ris(&["pattern", "--nx", "4", "--ny", "2", "decode", "5a5a"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(ris(&[]).status.code(), Some(2));
    assert_eq!(ris(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ris(&["steer", "--theta", "abc"]).status.code(), Some(2));
    let help = ris(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("sweep"));
    assert_eq!(ris(&["--version"]).status.code(), Some(0));

    let o = ris(&["ingest", "/nonexistent/data.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: "));

    let o = ris(&["sweep", "--from", "4.0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dataset_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, "5.0,-1,-2,0,180\n6.0,-1,-2,0,180\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ris"))
        .arg("ingest")
        .env("RIS_DATASET", &path)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(
        stdout(&o).contains("worst_off_db -1.0000"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn failed_write_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let o = ris(&["sweep", "-o", path_str(&target)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn emulate_and_control_over_tcp() {
    let mut server = Command::new(env!("CARGO_BIN_EXE_ris"))
        .args(["emulate", "--channel"])
        .env("RIS_EMULATOR_PORT", "0")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().rsplit(' ').next().unwrap().to_owned();

    let control = |args: &[&str]| {
        let mut all = vec!["control", "--connect", addr.as_str()];
        all.extend(args);
        ris(&all)
    };
    let o = control(&["info"]);
    assert_eq!(stdout(&o), "nx 16 ny 16 firmware 1.0\n");
    let hex = "0f".repeat(32);
    assert_eq!(stdout(&control(&["set", &hex])), "ok\n");
    let rssi: f64 = stdout(&control(&["rssi"])).trim().parse().unwrap();
    assert!(rssi < 0.0 && rssi > -150.0);
    assert_eq!(stdout(&control(&["element", "3", "off"])), "ok\n");
    let o = control(&["set", "00"]);
    assert_eq!(o.status.code(), Some(1));

    server.kill().unwrap();
    server.wait().unwrap();
}
