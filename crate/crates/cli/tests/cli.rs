use std::path::{Path, PathBuf};
use std::process::Command;

use lpsmt_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_REFUTED};
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn lpsmt(args: &[&str]) -> (i32, String, String) {
    lpsmt_in(&fixtures(), args)
}

fn lpsmt_in(fx: &Path, args: &[&str]) -> (i32, String, String) {
    let mut full = vec![
        "lpsmt".to_string(),
        "--fixtures-dir".into(),
        fx.display().to_string(),
    ];
    full.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn machine(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--machine"];
    a.extend_from_slice(args);
    let (code, out, err) = lpsmt(&a);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (code, v)
}

#[test]
fn certify_triangle_is_certified() {
    let (code, out, _) = lpsmt(&["certify", "triangle", "--mode", "steiner"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("verdict: certified"));
}

#[test]
fn certify_square_center_is_refuted_with_worst_subset() {
    let (code, out, _) = lpsmt(&["certify", "square_center", "--mode", "steiner"]);
    assert_eq!(code, EXIT_REFUTED);
    assert!(out.contains("worst subset [0, 1]"), "{out}");
    let (_, v) = machine(&["certify", "square_center"]);
    let norm = v["report"]["worst_subset_norm"].as_f64().unwrap();
    assert!((norm - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn certify_obtuse_triangle() {
    let (code, out, _) = lpsmt(&["certify", "obtuse_triangle", "--mode", "vertex"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, out, _) = lpsmt(&["certify", "obtuse_triangle", "--mode", "steiner"]);
    assert_eq!(code, EXIT_REFUTED);
    assert!(out.contains("coincides with terminal 0"), "{out}");
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("t.toml");
    std::fs::write(&truncated, "p = 2.0\npoints = [[0.0, 0.0], [1.0").unwrap();
    let (code, _, err) = lpsmt(&["certify", truncated.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("malformed"), "{err}");

    let ragged = dir.path().join("r.toml");
    std::fs::write(&ragged, "p = 2.0\npoints = [[0.0, 0.0], [1.0]]\n").unwrap();
    assert_eq!(
        lpsmt(&["certify", ragged.to_str().unwrap()]).0,
        EXIT_INVALID
    );

    let bad_p = dir.path().join("p.toml");
    std::fs::write(&bad_p, "p = 0.5\npoints = [[0.0], [1.0]]\n").unwrap();
    assert_eq!(lpsmt(&["solve", bad_p.to_str().unwrap()]).0, EXIT_INVALID);

    assert_eq!(lpsmt(&["certify", "no_such_file"]).0, EXIT_INVALID);
    assert_eq!(
        lpsmt(&["certify", "square", "--mode", "tree"]).0,
        EXIT_INVALID
    );
    assert_eq!(
        lpsmt(&["bounds", "--p", "1.0", "--dim", "3"]).0,
        EXIT_INVALID
    );
    assert_eq!(lpsmt(&["frobnicate"]).0, EXIT_INVALID);
}

#[test]
fn bounds_examples() {
    let (_, out, _) = lpsmt(&["bounds", "--p", "2", "--dim", "5"]);
    assert!(out.contains("lower 3 upper 3"), "{out}");
    let (_, out, _) = lpsmt(&["bounds", "--p", "3", "--dim", "10"]);
    assert!(out.contains("lower 4 upper 4"), "{out}");
    let (_, v) = machine(&["bounds", "--p", "1.2", "--dim", "6"]);
    let r = &v["report"];
    assert_eq!(r["upper"], 7);
    assert_eq!(r["lower"], 6);
    assert_eq!(r["lower_method"], "simplex");
    assert_eq!(r["upper_method"], "smooth");
}

#[test]
fn thresholds_table() {
    let (code, out, _) = lpsmt(&["thresholds"]);
    assert_eq!(code, EXIT_OK);
    for v in [
        "2.709511",
        "3.409421",
        "4.818842",
        "10.381786",
        "1.847416",
        "3.210660",
        "3.400923",
        "3.692462",
        "4.093458",
    ] {
        assert!(out.contains(v), "missing {v} in\n{out}");
    }
    assert_eq!(out.lines().count(), 10);
    let (_, v) = machine(&["thresholds"]);
    assert_eq!(v["constants"].as_array().unwrap().len(), 9);
}

#[test]
fn solve_examples() {
    let (code, out, _) = lpsmt(&["solve", "triangle"]);
    assert_eq!(code, EXIT_OK);
    assert!(
        out.contains(&format!("length: {:.12}", 3f64.sqrt())),
        "{out}"
    );
    let (_, v) = machine(&["solve", "square"]);
    assert!((v["length"].as_f64().unwrap() - (1.0 + 3f64.sqrt())).abs() < 1e-5);
    let (code, v) = machine(&["solve", "two_points"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["steiner"].as_array().unwrap().len(), 0);
    assert_eq!(v["verdict"], "certified");
}

#[test]
fn solve_then_certify_tree_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "triangle",
        "square",
        "two_points",
        "obtuse_triangle",
        "four_point_star",
    ] {
        let input = if name == "four_point_star" {
            // the star instance of the four-point construction, as a plain instance
            let c = std::fs::read_to_string(fixtures().join("four_point_q1.5.toml")).unwrap();
            let c = lpsmt::instance::ConstructionFile::parse(&c).unwrap();
            let mut inst = c.instance.unwrap();
            inst.center = None;
            let path = dir.path().join("star.toml");
            inst.write(&path).unwrap();
            path
        } else {
            fixtures().join(format!("{name}.toml"))
        };
        let out_path = dir.path().join(format!("{name}_solved.toml"));
        let (code, solved) = machine(&[
            "solve",
            input.to_str().unwrap(),
            "--output",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{name}");
        let (code2, cert) = machine(&["certify", out_path.to_str().unwrap(), "--mode", "tree"]);
        assert_eq!(code2, code);
        assert_eq!(cert["recorded_reproduced"], true, "{name}");
        assert_eq!(cert["certificate"], solved["certificate"], "{name}");
        assert_eq!(cert["length"], solved["length"], "{name}");
    }
}

#[test]
fn commands_are_deterministic() {
    for args in [
        vec!["solve", "square"],
        vec!["thresholds"],
        vec!["bounds", "--p", "1.7", "--dim", "4"],
        vec!["certify", "triangle"],
        vec!["construct", "simplex", "--dim", "5", "--q", "3.5"],
    ] {
        assert_eq!(lpsmt(&args), lpsmt(&args), "{args:?}");
    }
}

#[test]
fn construction_fixtures_regenerate_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (args, file) in [
        (
            vec!["construct", "four-point", "--q", "1.5", "--write"],
            "four_point_q1.5.toml",
        ),
        (
            vec![
                "construct",
                "simplex",
                "--dim",
                "4",
                "--q",
                "3.3",
                "--write",
            ],
            "simplex_d4_q3.3.toml",
        ),
    ] {
        let (code, _, _) = lpsmt_in(dir.path(), &args);
        assert_eq!(code, EXIT_OK);
        let fresh = std::fs::read_to_string(dir.path().join(file)).unwrap();
        let committed = std::fs::read_to_string(fixtures().join(file)).unwrap();
        assert_eq!(fresh, committed, "{file}");
    }
}

#[test]
fn construct_reports_refuted_collapsing() {
    let (code, v) = machine(&["construct", "four-point", "--q", "1.62"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verified"]["collapsing"], false);
    assert_eq!(v["claims_reproduced"], true);
    assert!(v["construction"].get("instance").is_none());
    let (code, _) = machine(&["construct", "simplex", "--dim", "4", "--p", "1.5"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_lpsmt");
    let fx = fixtures();
    let status = |args: &[&str]| {
        Command::new(bin)
            .arg("--fixtures-dir")
            .arg(&fx)
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
            .unwrap()
    };
    assert_eq!(status(&["certify", "triangle"]), 0);
    assert_eq!(status(&["certify", "square_center"]), 1);
    assert_eq!(status(&["certify", "missing"]), 2);
    assert_eq!(status(&["--help"]), 0);
}
