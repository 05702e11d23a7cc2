use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use wnfkit::geom::Vec3;
use wnfkit::io::{self, MeshFormat, Volume};
use wnfkit::mesh::{FeatureChannels, PointCloud};
use wnfkit::sampling::sample_surface;
use wnfkit::shapes;

fn wnfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wnfkit"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(primary: &Path) -> Value {
    let mut name = primary.as_os_str().to_owned();
    name.push(".manifest.json");
    serde_json::from_str(&std::fs::read_to_string(PathBuf::from(name)).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn normalize_writes_transform_and_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cube.obj");
    io::save_mesh(&shapes::cube(Vec3::zeros(), Vec3::new(4.0, 2.0, 1.0)), &input, MeshFormat::Obj).unwrap();
    let out = dir.path().join("out");
    let o = wnfkit(&["normalize", s(&input), "--category", "shirt", "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = wnfkit::nocs::NocsTransform::load(&out.join("shirt_transform.json")).unwrap();
    assert_eq!(t.scale, 0.25);
    let m = io::load_mesh(&out.join("cube.obj"), MeshFormat::Obj).unwrap();
    let bb = m.bbox();
    assert!((bb.max.x - 1.0).abs() < 1e-12 && bb.min.x.abs() < 1e-12);
    assert_eq!(manifest(&out.join("shirt_transform.json"))["command"], "normalize");

    // reusing the transform under another category is rejected
    let o = wnfkit(&[
        "normalize",
        s(&input),
        "--category",
        "dress",
        "--out-dir",
        s(&dir.path().join("o2")),
        "--transform",
        s(&out.join("shirt_transform.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn normalize_without_inputs_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wnfkit(&["normalize", "--category", "shirt", "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn field_wnf_of_cube() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cube.ply");
    io::save_mesh(&shapes::cube(Vec3::repeat(0.2), Vec3::repeat(0.8)), &input, MeshFormat::Ply).unwrap();
    let out = dir.path().join("cube.volb");
    let o = wnfkit(&["field", s(&input), "--kind", "wnf", "--dims", "32", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g = io::load_grid(&out).unwrap();
    assert_eq!(g.dims(), [32; 3]);
    assert!((g.at(16, 16, 16) - 1.0).abs() < 0.01);
    assert!(g.at(0, 0, 0).abs() < 0.01);
    let m = manifest(&out);
    assert_eq!(m["parameters"]["beta"], 2.0);
    assert_eq!(m["parameters"]["dims"], 32);
}

#[test]
fn field_occupancy_reports_rate_and_tsdf_echoes_trunc() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("shell.ply");
    io::save_mesh(&shapes::garment_shell(100, 50), &input, MeshFormat::Ply).unwrap();
    let out = dir.path().join("occ.volb");
    let o = wnfkit(&["field", s(&input), "--kind", "occ", "--dims", "128", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("occupancy rate"));
    let rate = manifest(&out)["results"]["occupancy_rate"].as_f64().unwrap();
    assert!(rate > 0.0 && rate < 0.02, "{rate}");

    let o = wnfkit(&["field", s(&input), "--kind", "occ", "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(manifest(&out)["parameters"]["dims"], 64);

    let tsdf = dir.path().join("t.volb");
    let o = wnfkit(&["field", s(&input), "--kind", "tsdf", "--dims", "24", "--out", s(&tsdf)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&tsdf);
    let h = m["parameters"]["voxel_size"].as_f64().unwrap();
    assert!((m["parameters"]["trunc"].as_f64().unwrap() - 10.0 * h).abs() < 1e-15);
    assert_eq!(io::load_grid(&tsdf).unwrap().trunc(), Some(10.0 * h));
}

#[test]
fn extract_marks_cylinder_rims() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cyl.obj");
    let cyl = shapes::capless_cylinder(Vec3::new(0.5, 0.5, 0.5), 0.25, 0.5, 64, 16);
    io::save_mesh(&cyl, &input, MeshFormat::Obj).unwrap();
    let vol = dir.path().join("cyl.volb");
    assert!(wnfkit(&["field", s(&input), "--dims", "64", "--out", s(&vol)]).status.success());
    let out = dir.path().join("cyl_labeled.ply");
    let stripped = dir.path().join("tube.ply");
    let o = wnfkit(&["extract", s(&vol), "--out", s(&out), "--stripped", s(&stripped)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lab = io::load_labeled_mesh(&out).unwrap();
    assert!(lab.opening_count() > 0);
    // openings sit on the cap planes, away from the wall
    let z_mid = 0.5;
    for (v, open) in lab.mesh.vertices().iter().zip(&lab.is_opening) {
        let rho = ((v.x - 0.5).powi(2) + (v.y - 0.5).powi(2)).sqrt();
        if *open && rho < 0.15 {
            assert!((v.z - z_mid).abs() > 0.2);
        }
    }
    let tube = io::load_mesh_auto(&stripped).unwrap();
    assert_eq!(wnfkit::mesh::boundary_loop_count(&tube), 2);
}

#[test]
fn extract_of_constant_volume_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let spec = wnfkit::grid::GridSpec::new([4; 3], Vec3::zeros(), 1.0).unwrap();
    let g = wnfkit::grid::ScalarGrid::from_fn(spec, wnfkit::grid::FieldKind::Wnf, |_| 0.25).unwrap();
    let vol = dir.path().join("c.volb");
    io::save_grid(&g, &vol).unwrap();
    let out = dir.path().join("c.ply");
    let o = wnfkit(&["extract", s(&vol), "--out", s(&out)]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("outside field range"));
    assert!(io::load_labeled_mesh(&out).unwrap().mesh.is_empty());
    let o = wnfkit(&["extract", s(&vol), "--iso", "7", "--out", s(&out)]);
    assert!(o.status.success());
}

fn feature_cloud(n: usize, f: usize) -> PointCloud {
    let pts: Vec<Vec3> = (0..n).map(|i| Vec3::new(i as f64 * 0.01, -0.5, 1.0)).collect();
    let nocs: Vec<Vec3> = (0..n).map(|i| Vec3::new((i * 37 % 101) as f64 / 101.0, (i * 11 % 13) as f64 / 13.0, 0.5)).collect();
    let conf = vec![[0.9f32, 0.8, 0.7]; n];
    let feats: Vec<f32> = (0..n * f).map(|k| ((k * 7919) % 1000) as f32 / 250.0 - 2.0).collect();
    PointCloud::new(pts)
        .with_nocs(nocs)
        .unwrap()
        .with_confidence(conf)
        .unwrap()
        .with_features(FeatureChannels::new(f, feats).unwrap())
        .unwrap()
}

#[test]
fn scatter_outputs_are_order_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = feature_cloud(500, 128);
    let a = dir.path().join("a.ply");
    let b = dir.path().join("b.ply");
    io::save_cloud(&cloud, &a).unwrap();
    let order: Vec<usize> = (0..500).map(|i| (i * 173) % 500).collect();
    io::save_cloud(&cloud.permuted(&order), &b).unwrap();
    let (va, vb) = (dir.path().join("a.volb"), dir.path().join("b.volb"));
    assert!(wnfkit(&["scatter", s(&a), "--out", s(&va)]).status.success());
    assert!(wnfkit(&["scatter", s(&b), "--out", s(&vb)]).status.success());
    let bytes = std::fs::read(&va).unwrap();
    assert_eq!(bytes, std::fs::read(&vb).unwrap());
    let header = String::from_utf8_lossy(&bytes[..bytes.iter().position(|c| *c == b'\n').unwrap()]).into_owned();
    assert!(header.contains("\"channels\":137"), "{header}");
    match io::load_volume(&va).unwrap() {
        Volume::Feature(f) => assert_eq!((f.dims(), f.channels()), (32, 137)),
        _ => panic!("expected a feature volume"),
    }

    let one = dir.path().join("one.ply");
    io::save_cloud(&feature_cloud(1, 4), &one).unwrap();
    let vo = dir.path().join("one.volb");
    assert!(wnfkit(&["scatter", s(&one), "--out", s(&vo)]).status.success());
    assert_eq!(io::load_feature_volume(&vo).unwrap().occupied_count(), 1);
}

#[test]
fn eval_is_deterministic_and_checks_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.ply");
    io::save_mesh(&shapes::icosphere(Vec3::zeros(), 0.5, 2), &mesh, MeshFormat::Ply).unwrap();
    let out = dir.path().join("e.json");
    let o = wnfkit(&["eval", s(&mesh), s(&mesh), "--n", "2000", "--seed", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = std::fs::read(&out).unwrap();
    let records: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(records[0]["metric"], "chamfer");
    assert_eq!(records[0]["value"], 0.0);
    assert_eq!(records[0]["seed"], 3);
    assert_eq!(records[0]["n"], 2000);
    assert!(wnfkit(&["eval", s(&mesh), s(&mesh), "--n", "2000", "--seed", "3", "--out", s(&out)]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);

    let o = wnfkit(&["eval", s(&mesh), s(&mesh), "--metric", "corr", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nocs labels"));

    let lobes = dir.path().join("lobes.ply");
    io::save_mesh(&shapes::two_lobes(2), &lobes, MeshFormat::Ply).unwrap();
    let o = wnfkit(&["eval", s(&lobes), s(&lobes), "--metric", "nocs", "--symmetric", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let records: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(records[0]["value"], 0.0);
    assert_eq!(records[0]["units"], "nocs");
}

#[test]
fn align_recovers_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let a = shapes::cube(Vec3::new(0.2, -0.1, -0.5), Vec3::new(0.8, 0.1, 0.0));
    let b = shapes::cube(Vec3::new(-0.3, 0.1, -0.4), Vec3::new(-0.1, 0.5, -0.2));
    let pred = a.concat(&b);
    let pred_path = dir.path().join("pred.ply");
    io::save_mesh(&pred, &pred_path, MeshFormat::Ply).unwrap();
    let observed = sample_surface(&wnfkit::align::rotate_z(&pred, 37f64.to_radians()), 3000, 5).unwrap();
    let obs_path = dir.path().join("obs.ply");
    io::save_cloud(&observed, &obs_path).unwrap();
    let out = dir.path().join("aligned.ply");
    let o = wnfkit(&["align", s(&pred_path), s(&obs_path), "--samples", "4000", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let deg = manifest(&out)["results"]["angle_deg"].as_f64().unwrap();
    assert!((deg - 37.0).abs() < 1.0, "{deg}");

    let o = wnfkit(&["align", s(&pred_path), s(&obs_path), "--steps", "1", "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(manifest(&out)["results"]["angle_rad"], 0.0);

    let empty = dir.path().join("empty.ply");
    io::save_cloud(&PointCloud::new(vec![]), &empty).unwrap();
    let o = wnfkit(&["align", s(&pred_path), s(&empty), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn manifests_are_reproducible_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cube.obj");
    io::save_mesh(&shapes::unit_cube(), &input, MeshFormat::Obj).unwrap();
    let out = dir.path().join("v.volb");
    let run = |threads: &str| {
        let o = wnfkit(&["--threads", threads, "field", s(&input), "--dims", "16", "--out", s(&out)]);
        assert!(o.status.success());
        let mut m = manifest(&out);
        m["wall_time_s"] = Value::Null;
        (std::fs::read(&out).unwrap(), m)
    };
    let (a, ma) = run("1");
    let (b, mb) = run("1");
    let (c, _) = run("3");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(ma, mb);
    assert_eq!(ma["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(ma["seed"], 0);
}

#[test]
fn validate_reports_open_cube() {
    let dir = tempfile::tempdir().unwrap();
    let cube = shapes::unit_cube();
    let open = cube.filter_triangles(|t| t >= 2);
    let input = dir.path().join("open.obj");
    io::save_mesh(&open, &input, MeshFormat::Obj).unwrap();
    let out = dir.path().join("r.json");
    let o = wnfkit(&["validate", s(&input), "--out", s(&out)]);
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(r["is_watertight"], false);
}

#[test]
fn unknown_flags_and_bad_files() {
    assert_eq!(wnfkit(&["field", "--bogus"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.obj");
    std::fs::write(&bad, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n").unwrap();
    let o = wnfkit(&["field", s(&bad), "--dims", "16", "--out", s(&dir.path().join("x.volb"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.obj:4"));
}
