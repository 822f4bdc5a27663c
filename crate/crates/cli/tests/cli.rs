use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replicator"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn parse_row(line: &str) -> Vec<f64> {
    line.split(',').map(|v| v.parse().unwrap()).collect()
}

#[test]
fn tables_bsoe() {
    let csv = stdout(&["tables", "--base", "bso", "--equivocator", "0.5"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    let classes: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(classes, ["stable", "stable", "stable", "unstable", "unstable", "unstable"]);
}

#[test]
fn tables_bdoep() {
    let csv = stdout(&["tables", "--base", "bdo", "--equivocator", "0.5", "--prefer", "A", "--delta", "0.3"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    let stable: Vec<&&str> = lines.iter().filter(|l| l.ends_with(",stable")).collect();
    assert_eq!(stable.len(), 1);
    assert!(stable[0].starts_with("5,p*_5,0.65;0.35;0,"));
}

#[test]
fn delta_defaults_to_a() {
    let with = stdout(&["tables", "--base", "bdo", "--equivocator", "0.5", "--prefer", "A", "--delta", "0.3"]);
    let without = stdout(&["tables", "--base", "bdo", "--equivocator", "0.5", "--delta", "0.3"]);
    assert_eq!(with, without);
}

#[test]
fn bad_parameters_exit_2() {
    let out = run(&["tables", "--base", "bso", "--equivocator", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error[ParameterOutOfRange]:"), "{err}");
    assert_eq!(err.lines().count(), 1);

    assert_eq!(run(&["tables", "--base", "xyz"]).status.code(), Some(2));
    assert_eq!(run(&["tables"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--base", "bso", "--prefer", "A"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--base", "bso", "--format", "svg"]).status.code(), Some(2));
    let out = run(&["simulate", "--base", "bso", "--x0", "0.5,0.6"]);
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error[InvalidState]"));
}

#[test]
fn no_attractor_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.txt");
    std::fs::write(&path, "A B\n1 1\n1 1\n").unwrap();
    let out = run(&["basins", "--matrix", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error[NoAttractor]"));
}

#[test]
fn simulate_majority_wins() {
    let csv = stdout(&["simulate", "--base", "bso", "--x0", "0.6,0.4", "--t-end", "100"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x_A,x_B");
    let last = parse_row(lines.last().unwrap());
    assert_eq!(last[0], 100.0);
    assert!((last[1] - 1.0).abs() < 1e-6 && last[2] < 1e-6);
}

#[test]
fn simulate_json_with_tolerance() {
    let json = stdout(&[
        "simulate", "--base", "bdo", "--equivocator", "0.5", "--delta", "0.4", "--x0", "0.2,0.3,0.5", "--tol", "1e-10",
        "--format", "json",
    ]);
    assert!(json.contains("\"converged\": true"));
    assert!(json.contains("\"labels\""));
}

#[test]
fn phase_svg_circles() {
    let svg = stdout(&["phase", "--base", "bdo", "--equivocator", "0.3", "--resolution", "0.05", "--format", "svg"]);
    assert_eq!(svg.matches("<circle").count(), 6);
    assert_eq!(svg.matches(r#"fill="black""#).count(), 1);
    assert_eq!(svg.matches(r#"fill="white""#).count(), 5);
}

#[test]
fn phase_csv_ternary_columns() {
    let csv = stdout(&["phase", "--base", "bdo", "--equivocator", "0.3", "--resolution", "0.1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x_A,x_B,x_E,dx_A,dx_B,dx_E,speed,u,v");
    assert_eq!(lines.len(), 1 + 66);
}

#[test]
fn sweep_counts() {
    let csv = stdout(&["sweep", "--base", "bso", "--equivocator", "0.5", "--prefer", "A", "--delta", "0.1:0.9:0.1"]);
    let counts: Vec<usize> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts, [7, 7, 7, 7, 5, 5, 5, 5, 5]);

    let rows = stdout(&["sweep", "--base", "bso", "--equivocator", "0.5", "--delta", "0.1:0.9:0.1", "--rows"]);
    assert_eq!(rows.lines().count(), 1 + 4 * 7 + 5 * 5);
    assert_eq!(run(&["tables", "--base", "bso", "--equivocator", "0.1:0.5:0.1"]).status.code(), Some(2));
}

#[test]
fn sweep_svg_has_loci() {
    let svg = stdout(&[
        "sweep", "--base", "bdo", "--equivocator", "0.5", "--delta", "0.1:0.4:0.1", "--format", "svg",
    ]);
    assert!(svg.contains("stroke-dasharray"));
}

#[test]
fn basins_csv() {
    let csv = stdout(&["basins", "--base", "bso", "--resolution", "0.1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x_A,x_B,attractor,attractor_coordinates");
    assert_eq!(lines.len(), 12);
    assert!(lines.contains(&"0.5,0.5,,"));
}

#[test]
fn abm_snapshots() {
    let csv = stdout(&["abm", "--base", "bso", "--pop", "200", "--x0", "0.6,0.4", "--steps", "1000", "--every", "100", "--seed", "5"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,x_A,x_B");
    assert_eq!(lines[1], "0,0.6,0.4");
    assert_eq!(lines.len(), 12);
}

#[test]
fn outputs_are_deterministic() {
    let cases: [&[&str]; 5] = [
        &["tables", "--base", "bso", "--equivocator", "0.3", "--prefer", "A", "--delta", "0.2", "--format", "json"],
        &["simulate", "--base", "bdo", "--equivocator", "0.4", "--x0", "0.2,0.3,0.5", "--t-end", "50"],
        &["phase", "--base", "bso", "--equivocator", "0.5", "--format", "svg"],
        &["sweep", "--base", "bdo", "--equivocator", "0.2:0.8:0.3", "--delta", "0.1:0.5:0.2", "--format", "json"],
        &["abm", "--base", "bso", "--equivocator", "0.5", "--pop", "500", "--steps", "20000", "--seed", "9"],
    ];
    let dir = tempfile::tempdir().unwrap();
    for args in cases {
        let mut bytes = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("out{k}"));
            let mut full = args.to_vec();
            full.extend(["--out", path.to_str().unwrap()]);
            let out = run(&full);
            assert!(out.status.success(), "{full:?}");
            assert!(out.stdout.is_empty());
            bytes.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{args:?}");
        assert!(!bytes[0].is_empty());
    }
    let a = stdout(&["abm", "--base", "bso", "--pop", "500", "--x0", "0.55,0.45", "--steps", "20000", "--seed", "1"]);
    let b = stdout(&["abm", "--base", "bso", "--pop", "500", "--x0", "0.55,0.45", "--steps", "20000", "--seed", "2"]);
    assert_ne!(a, b);
}

#[test]
fn matrix_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let game = replicator_core::build(
        &replicator_core::ModelSpec::bdo().with_equivocator(0.3).with_preference("A", 0.2),
    )
    .unwrap();
    let path = dir.path().join("game.txt");
    std::fs::write(&path, game.to_text()).unwrap();
    let back = replicator_core::PayoffMatrix::parse_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, game);

    // the CLI gives the same table from the file as from the flags, minus existence labels
    let from_file = stdout(&["tables", "--matrix", path.to_str().unwrap()]);
    let from_flags = stdout(&["tables", "--base", "bdo", "--equivocator", "0.3", "--delta", "0.2"]);
    let coords = |s: &str| {
        let mut v: Vec<String> = s.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().to_string()).collect();
        v.sort();
        v
    };
    assert_eq!(coords(&from_file), coords(&from_flags));
}

#[test]
fn config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.cfg");
    std::fs::write(&path, "base=bso\nr=0.5\ndelta=0.3\npreferred=A\n").unwrap();
    let a = stdout(&["tables", "--config", path.to_str().unwrap()]);
    let b = stdout(&["tables", "--base", "bso", "--equivocator", "0.5", "--prefer", "A", "--delta", "0.3"]);
    assert_eq!(a, b);
    assert_eq!(run(&["tables", "--config", path.to_str().unwrap(), "--base", "bso"]).status.code(), Some(2));
}
