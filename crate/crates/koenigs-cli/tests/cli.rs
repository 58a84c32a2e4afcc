use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use koenigs_cli::schema::{NetJson, QuadricJson};
use koenigs_core::fixtures::perturb_corner;
use koenigs_core::Tolerance;
use serde_json::Value;
use tempfile::TempDir;

fn koenigs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koenigs")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON report")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Tangent grid, autoconjugate pair and its grid in a fresh directory.
fn fixtures() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&koenigs(d, &["gen", "tangent-grid", "--rows", "5", "--cols", "5", "--seed", "42", "--out", "tan.json"])), 0);
    assert_eq!(code(&koenigs(d, &["gen", "autoconjugate", "--d", "2", "--len", "8", "--seed", "42", "--out", "pair.json"])), 0);
    assert_eq!(code(&koenigs(d, &["gen", "grid-from-curves", "--pair", "pair.json", "--out", "ac.json"])), 0);
    dir
}

#[test]
fn generated_fixtures_pass_their_checks() {
    let dir = fixtures();
    let d = dir.path();
    let k = koenigs(d, &["verify", "koenigs", "--net", "tan.json"]);
    assert_eq!(code(&k), 0);
    assert_eq!(report(&k)["pass"], true);
    for args in [
        &["verify", "grid", "--net", "ac.json"][..],
        &["verify", "binet", "--net", "ac.json", "--instance", "special"],
        &["verify", "roundtrip", "--pair", "pair.json"],
        &["verify", "diag-corollary", "--net", "ac.json"],
        &["verify", "inscribed", "--net", "ac.json", "--instance", "special"],
    ] {
        let o = koenigs(d, args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(report(&o)["pass"].as_bool().unwrap());
    }
    let b = report(&koenigs(d, &["verify", "binet", "--net", "ac.json", "--instance", "special"]));
    assert!(b["max_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn generation_log_records_predicates() {
    let dir = tempfile::tempdir().unwrap();
    let o = koenigs(dir.path(), &["gen", "tangent-grid", "--rows", "5", "--cols", "5", "--seed", "42"]);
    assert_eq!(code(&o), 0);
    let log: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(log["is_koenigs"], true);
    let net: NetJson = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((net.rows, net.cols, net.d), (5, 5, Some(1)));
}

#[test]
fn perturbed_net_fails_with_the_offending_face() {
    let dir = fixtures();
    let d = dir.path();
    let tol = Tolerance::default();
    let net: NetJson = serde_json::from_str(&read(d, "tan.json")).unwrap();
    let moved = perturb_corner(&net.to_net().unwrap(), 1e-3, 1, &tol).unwrap();
    write(d, "moved.json", &serde_json::to_string(&NetJson::from_net(&moved, None)).unwrap());
    let o = koenigs(d, &["verify", "koenigs", "--net", "moved.json"]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    assert_eq!(r["pass"], false);
    assert!(r["worst_face"].is_array());
    assert!(r["closure_residual"].as_f64().unwrap() > 1e-4);
}

#[test]
fn special_grid_is_not_generic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&koenigs(d, &["gen", "special-grid", "--d", "2", "--len", "8", "--seed", "42", "--out", "sp.json"])), 0);
    let o = koenigs(d, &["verify", "grid", "--net", "sp.json"]);
    assert_eq!(code(&o), 1);
    let r = report(&o);
    assert_eq!(r["special"], true);
    assert_eq!(r["pd_degenerate"], true);
}

#[test]
fn incidence_on_a_small_tangent_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    koenigs(d, &["gen", "tangent-grid", "--rows", "4", "--cols", "4", "--out", "t4.json"]);
    assert_eq!(code(&koenigs(d, &["verify", "incidence", "--net", "t4.json"])), 0);
    // Wrong size is an input error.
    koenigs(d, &["gen", "tangent-grid", "--rows", "5", "--cols", "4", "--out", "t5.json"]);
    assert_eq!(code(&koenigs(d, &["verify", "incidence", "--net", "t5.json"])), 2);
}

#[test]
fn inscribed_quadric_is_written_and_rechecked() {
    let dir = fixtures();
    let d = dir.path();
    assert_eq!(code(&koenigs(d, &["verify", "inscribed", "--net", "ac.json", "--instance", "special", "--out", "q.json"])), 0);
    let q: QuadricJson = serde_json::from_str(&read(d, "q.json")).unwrap();
    assert_eq!(q.ambient_dim, 4);
    let again = koenigs(d, &["verify", "inscribed", "--net", "ac.json", "--instance", "special", "--quadric", "q.json"]);
    assert_eq!(code(&again), 0);
}

#[test]
fn net_exports_as_vertices_and_quads() {
    let dir = fixtures();
    let o = koenigs(dir.path(), &["export", "obj", "--net", "tan.json"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let v = text.lines().filter(|l| l.starts_with("v ")).count();
    let faces: Vec<Vec<usize>> = text
        .lines()
        .filter(|l| l.starts_with("f "))
        .map(|l| l[2..].split(' ').map(|k| k.parse().unwrap()).collect())
        .collect();
    assert_eq!(v, 25);
    assert_eq!(faces.len(), 16);
    assert!(faces.iter().all(|f| f.len() == 4 && f.iter().all(|&k| (1..=v).contains(&k))));
    let first_face = text.lines().position(|l| l.starts_with("f ")).unwrap();
    assert!(text.lines().skip(first_face).all(|l| !l.starts_with("v ")));
}

#[test]
fn conics_export_as_closed_polylines() {
    let dir = fixtures();
    let d = dir.path();
    assert_eq!(code(&koenigs(d, &["verify", "koenigs", "--net", "tan.json", "--out", "inst.json"])), 0);
    let o = koenigs(d, &["export", "obj", "--net", "tan.json", "--instance", "inst.json"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<Vec<&str>> = text.lines().filter(|l| l.starts_with("l ")).map(|l| l[2..].split(' ').collect()).collect();
    assert_eq!(lines.len(), 16);
    assert!(lines.iter().all(|l| l.len() == 65 && l[0] == l[64]));
    // The same instance file drives the other checks.
    assert_eq!(code(&koenigs(d, &["verify", "binet", "--net", "tan.json", "--instance", "inst.json"])), 0);
}

fn surface(dir: &Path, matrix: &str, density: &str) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    write(dir, "q.json", &format!(r#"{{"schema":"koenigs-quadric/1","ambient_dim":3,"matrix":{matrix}}}"#));
    let o = koenigs(dir, &["export", "json", "--quadric", "q.json", "--density", density]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = report(&o);
    let verts = serde_json::from_value(v["mesh"]["vertices"].clone()).unwrap();
    let tris = serde_json::from_value(v["mesh"]["triangles"].clone()).unwrap();
    (verts, tris)
}

#[test]
fn sphere_mesh_is_closed_and_on_the_surface() {
    let dir = tempfile::tempdir().unwrap();
    let (verts, tris) = surface(dir.path(), "[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,-1]]", "16");
    assert!(verts.iter().all(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0).abs() < 1e-12));
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &tris {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    assert!(edges.values().all(|&n| n == 2), "open edges in the sphere mesh");
}

#[test]
fn cone_mesh_lies_on_the_cone() {
    let dir = tempfile::tempdir().unwrap();
    let (verts, tris) = surface(dir.path(), "[[1,0,0,0],[0,1,0,0],[0,0,-1,0],[0,0,0,0]]", "24");
    assert!(!tris.is_empty());
    for v in &verts {
        let r = v[0] * v[0] + v[1] * v[1] - v[2] * v[2];
        assert!(r.abs() < 1e-9 * (1.0 + v[2] * v[2]), "{v:?}");
    }
    // The apex is a single shared vertex.
    assert_eq!(verts.iter().filter(|v| v.iter().all(|x| x.abs() < 1e-12)).count(), 1);
}

#[test]
fn geometry_at_infinity_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "inf.json",
        r#"{"schema":"koenigs-net/1","ambient_dim":2,"origin":[0,0],"rows":2,"cols":2,"points":[[1,0,0],[0,1,0],[1,1,0],[1,2,0]]}"#,
    );
    assert_eq!(code(&koenigs(d, &["export", "obj", "--net", "inf.json"])), 2);
    // A hyperbola runs through infinity; an ellipse in the same chart does not.
    write(d, "hyp.json", r#"{"schema":"koenigs-quadric/1","ambient_dim":2,"matrix":[[1,0,0],[0,-1,0],[0,0,-1]]}"#);
    assert_eq!(code(&koenigs(d, &["export", "obj", "--quadric", "hyp.json"])), 2);
    write(d, "ell.json", r#"{"schema":"koenigs-quadric/1","ambient_dim":2,"matrix":[[1,0,0],[0,4,0],[0,0,-1]]}"#);
    assert_eq!(code(&koenigs(d, &["export", "obj", "--quadric", "ell.json"])), 0);
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = fixtures();
    let d = dir.path();
    assert_eq!(code(&koenigs(d, &["gen", "tangent-grid", "--rows", "5"])), 2);
    assert_eq!(code(&koenigs(d, &["gen", "autoconjugate", "--d", "2", "--len", "5"])), 2);
    assert_eq!(code(&koenigs(d, &["verify", "koenigs", "--net", "missing.json"])), 2);
    assert_eq!(code(&koenigs(d, &["verify", "koenigs", "--net", "pair.json"])), 2);
    assert_eq!(code(&koenigs(d, &["verify", "grid", "--net", "tan.json", "--d", "0"])), 2);
    assert_eq!(code(&koenigs(d, &["--rank-tol", "2", "verify", "koenigs", "--net", "tan.json"])), 2);
    write(d, "bad.json", r#"{"schema":"koenigs-net/1","ambient_dim":2,"origin":[0,0],"rows":2,"cols":2,"points":[[1,0,0]]}"#);
    assert_eq!(code(&koenigs(d, &["verify", "koenigs", "--net", "bad.json"])), 2);
    assert_eq!(code(&koenigs(d, &["frobnicate"])), 2);
}

#[test]
fn degenerate_input_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Three collinear vertices: the face has no inscribed conics.
    write(
        d,
        "flat.json",
        r#"{"schema":"koenigs-net/1","ambient_dim":2,"origin":[0,0],"rows":2,"cols":2,"points":[[0,0,1],[1,0,1],[2,0,1],[0,1,1]]}"#,
    );
    assert_eq!(code(&koenigs(d, &["verify", "koenigs", "--net", "flat.json"])), 3);
    write(d, "pair.json", r#"{"schema":"koenigs-quadric/1","ambient_dim":3,"matrix":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#);
    assert_eq!(code(&koenigs(d, &["export", "obj", "--quadric", "pair.json"])), 3);
}

#[test]
fn output_is_reproducible() {
    let (a, b) = (fixtures(), fixtures());
    for name in ["tan.json", "pair.json", "ac.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let one = koenigs(a.path(), &["--threads", "1", "verify", "koenigs", "--net", "ac.json"]);
    let four = koenigs(a.path(), &["--threads", "4", "verify", "koenigs", "--net", "ac.json"]);
    assert_eq!(one.stdout, four.stdout);
    let other_seed = tempfile::tempdir().unwrap();
    koenigs(other_seed.path(), &["gen", "tangent-grid", "--rows", "5", "--cols", "5", "--seed", "43", "--out", "tan.json"]);
    assert_ne!(read(a.path(), "tan.json"), read(other_seed.path(), "tan.json"));
}
