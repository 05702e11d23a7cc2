use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wnfkit::bvh::TriangleBvh;
use wnfkit::geom::Vec3;
use wnfkit::grid::{FieldKind, GridSpec, ScalarGrid};
use wnfkit::io::{self, MeshFormat};
use wnfkit::marching::marching_cubes;
use wnfkit::mesh::{boundary_loop_count, is_watertight, validate, TriMesh};
use wnfkit::metrics::{chamfer, correspondence_clouds, correspondence_distance};
use wnfkit::nocs::{fit_category_transform, mirror_nocs, Axis};
use wnfkit::openings::{classify_openings, strip_openings, threshold_for, DEFAULT_THRESHOLD_FACTOR};
use wnfkit::raster::{rasterize_tsdf, rasterize_wnf};
use wnfkit::shapes;
use wnfkit::winding::{WindingAccel, WindingQueryParams};
use wnfkit::{Frame, PointCloud};

fn wnf_grid(mesh: &TriMesh, spec: &GridSpec) -> ScalarGrid {
    let accel = WindingAccel::with_default_leaf(mesh).unwrap();
    rasterize_wnf(mesh, spec, &accel, &WindingQueryParams::default()).unwrap()
}

/// Symmetric Hausdorff distance estimated from vertices and dense samples.
fn hausdorff(a: &TriMesh, b: &TriMesh) -> f64 {
    let one_way = |from: &TriMesh, to: &TriMesh| {
        let bvh = TriangleBvh::build(to, 16).unwrap();
        let samples = wnfkit::sampling::sample_surface(from, 20_000, 4).unwrap();
        from.vertices()
            .iter()
            .chain(samples.points())
            .map(|p| bvh.distance(p))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[test]
fn cube_wnf_extraction_is_watertight_and_close() {
    let cube = shapes::cube(Vec3::repeat(0.2), Vec3::repeat(0.8));
    let spec = GridSpec::canonical(48).unwrap();
    let g = wnf_grid(&cube, &spec);
    let surf = marching_cubes(&g, 0.5);
    assert!(validate(&surf, 1e-14).is_watertight);
    let h = spec.voxel_size;
    let d = hausdorff(&surf, &cube);
    assert!(d < h, "Hausdorff {d} vs h {h}");
}

#[test]
fn wnf_and_tsdf_surfaces_agree_within_a_voxel() {
    let sphere = shapes::icosphere(Vec3::new(0.5, 0.5, 0.5), 0.3, 3);
    let spec = GridSpec::canonical(40).unwrap();
    let accel = WindingAccel::with_default_leaf(&sphere).unwrap();
    let params = WindingQueryParams::default();
    let w = rasterize_wnf(&sphere, &spec, &accel, &params).unwrap();
    let t = rasterize_tsdf(&sphere, &spec, 10.0 * spec.voxel_size, &accel, &params).unwrap();
    let sw = marching_cubes(&w, 0.5);
    let st = marching_cubes(&t, 0.0);
    assert!(is_watertight(&sw) && is_watertight(&st));
    assert!(hausdorff(&sw, &st) < spec.voxel_size);
}

#[test]
fn sphere_error_shrinks_with_resolution() {
    let hd = |n: usize| {
        let sphere = shapes::icosphere(Vec3::new(0.5, 0.5, 0.5), 0.3, 4);
        let spec = GridSpec::canonical(n).unwrap();
        let surf = marching_cubes(&wnf_grid(&sphere, &spec), 0.5);
        hausdorff(&surf, &sphere)
    };
    let (coarse, fine) = (hd(24), hd(48));
    assert!(coarse / fine >= 1.5, "{coarse} -> {fine}");
}

#[test]
fn wnf_grid_follows_rigid_motion() {
    let mesh = shapes::garment_shell(40, 20);
    let spec = GridSpec::canonical(20).unwrap();
    let rot = nalgebra::Rotation3::from_euler_angles(0.4, -0.7, 1.3);
    let t = Vec3::new(2.0, -1.0, 0.5);
    let worst = |motion: &dyn Fn(&Vec3) -> Vec3, params: WindingQueryParams| {
        let a = WindingAccel::with_default_leaf(&mesh).unwrap();
        let moved_mesh = mesh.map_vertices(|p| motion(p));
        let b = WindingAccel::with_default_leaf(&moved_mesh).unwrap();
        spec.centers()
            .iter()
            .map(|c| (a.winding_fast(c, &params) - b.winding_fast(&motion(c), &params)).abs())
            .fold(0.0, f64::max)
    };
    // the exact field is invariant under any rigid motion
    let exact = worst(&|p| rot * p + t, WindingQueryParams::exact());
    assert!(exact < 1e-6, "{exact}");
    // the accelerated field keeps its hierarchy under translation
    let shifted = worst(&|p| p + t, WindingQueryParams::default());
    assert!(shifted < 1e-6, "{shifted}");
}

#[test]
fn garment_pipeline_strips_the_openings() {
    let shell = shapes::garment_shell(100, 50);
    assert_eq!(boundary_loop_count(&shell), 1);
    let spec = GridSpec::canonical(96).unwrap();
    let g = wnf_grid(&shell, &spec);
    let surf = marching_cubes(&g, 0.5);
    assert!(is_watertight(&surf));
    let lab = classify_openings(&surf, &g, threshold_for(&g, DEFAULT_THRESHOLD_FACTOR));
    assert!(lab.opening_count() > 0 && lab.opening_count() < surf.vertex_count());
    let garment = strip_openings(&lab);
    assert!(!is_watertight(&garment));
    // the kept surface hugs the original shell
    let bvh = TriangleBvh::build(&shell, 16).unwrap();
    let far = garment.vertices().iter().filter(|v| bvh.distance(v) > 2.0 * spec.voxel_size).count();
    assert!((far as f64) < 0.02 * garment.vertex_count() as f64, "{far}");
}

#[test]
fn mirrored_labels_expose_pose_error() {
    let gt = shapes::two_lobes(3);
    let mirrored: Vec<Vec3> = gt.nocs_labels().unwrap().iter().map(|l| mirror_nocs(l, Axis::X)).collect();
    let pred = gt.clone().with_nocs_labels(Some(mirrored)).unwrap();
    assert_eq!(chamfer(&pred, &gt, 5000, 1).unwrap().symmetric_mean, 0.0);
    let dn = correspondence_distance(&pred, &gt, 5000, 1).unwrap();
    // lobe centers sit 0.6 apart and the mirror swaps them
    assert!((dn - 0.6).abs() < 0.02, "{dn}");
}

#[test]
fn constant_labels_tie_to_first_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Vec3> { (0..n).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect() };
    let pred = PointCloud::new(pts(200, &mut rng)).with_nocs(pts(200, &mut rng)).unwrap();
    let gt_points = pts(300, &mut rng);
    let gt = PointCloud::new(gt_points.clone()).with_nocs(vec![Vec3::repeat(0.5); 300]).unwrap();
    let d = correspondence_clouds(&pred, &gt);
    let expect = pred.points().iter().map(|p| (p - gt_points[0]).norm()).sum::<f64>() / 200.0;
    assert!((d - expect).abs() < 1e-12);
}

#[test]
fn normalized_category_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = shapes::cube(Vec3::zeros(), Vec3::new(2.0, 1.0, 1.0)).with_frame(Frame::Canonical);
    let b = shapes::cube(Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.5, 0.25)).with_frame(Frame::Canonical);
    let t = fit_category_transform("shirt", &[a.clone(), b.clone()]).unwrap();
    assert_eq!(t.scale, 0.5);
    for (i, m) in [a, b].iter().enumerate() {
        let path = dir.path().join(format!("m{i}.ply"));
        io::save_mesh(&t.apply(m), &path, MeshFormat::Ply).unwrap();
        let back = io::load_mesh(&path, MeshFormat::Ply).unwrap();
        assert_eq!(back.frame(), Frame::Canonical);
        assert!(back.vertices().iter().all(|v| v.iter().all(|c| (-1e-9..=1.0 + 1e-9).contains(c))));
    }
    let tp = dir.path().join("t.json");
    t.save(&tp).unwrap();
    assert_eq!(wnfkit::nocs::NocsTransform::load(&tp).unwrap(), t);
}

#[test]
fn mesh_file_contracts() {
    let dir = tempfile::tempdir().unwrap();
    let two = TriMesh::new(
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.25)],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap();
    for fmt in [MeshFormat::Obj, MeshFormat::Ply] {
        let ext = if fmt == MeshFormat::Obj { "obj" } else { "ply" };
        let p1 = dir.path().join(format!("a.{ext}"));
        let p2 = dir.path().join(format!("b.{ext}"));
        io::save_mesh(&two, &p1, fmt).unwrap();
        let back = io::load_mesh(&p1, fmt).unwrap();
        assert_eq!(back.triangles(), two.triangles());
        for (x, y) in back.vertices().iter().zip(two.vertices()) {
            assert!((x - y).norm() < 1e-6);
        }
        io::save_mesh(&back, &p2, fmt).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    let labeled = shapes::two_lobes(1);
    let err = io::save_mesh(&labeled, &dir.path().join("l.obj"), MeshFormat::Obj).unwrap_err();
    assert!(err.to_string().contains("PLY"));

    let missing_dir = dir.path().join("no/such/dir/x.ply");
    assert!(matches!(io::save_mesh(&two, &missing_dir, MeshFormat::Ply), Err(wnfkit::Error::Io { .. })));
    assert!(matches!(io::load_mesh(&dir.path().join("absent.obj"), MeshFormat::Obj), Err(wnfkit::Error::Io { .. })));
}

#[test]
fn random_labeled_meshes_round_trip_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..10 {
        let nv = rng.gen_range(3..40);
        let verts: Vec<Vec3> = (0..nv).map(|_| Vec3::new(rng.gen_range(-5.0..5.0), rng.gen(), rng.gen::<f64>() * 1e-3)).collect();
        let tris: Vec<[u32; 3]> = (0..rng.gen_range(1..60))
            .map(|_| {
                let a = rng.gen_range(0..nv as u32);
                let b = (a + rng.gen_range(1..nv as u32)) % nv as u32;
                let mut c = rng.gen_range(0..nv as u32);
                while c == a || c == b {
                    c = rng.gen_range(0..nv as u32);
                }
                [a, b, c]
            })
            .collect();
        let labels: Vec<Vec3> = (0..nv).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect();
        let m = TriMesh::with_labels(verts, tris, Frame::Task, Some(labels)).unwrap();
        let p1 = dir.path().join(format!("{case}a.ply"));
        let p2 = dir.path().join(format!("{case}b.ply"));
        io::save_mesh(&m, &p1, MeshFormat::Ply).unwrap();
        io::save_mesh(&io::load_mesh(&p1, MeshFormat::Ply).unwrap(), &p2, MeshFormat::Ply).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}

#[test]
fn tsdf_and_occupancy_grids_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::new([6, 5, 4], Vec3::new(0.1, 0.2, 0.3), 0.05).unwrap();
    let occ = ScalarGrid::from_fn(spec, FieldKind::Occupancy, |p| if p.x > 0.2 { 1.0 } else { 0.0 }).unwrap();
    let path = dir.path().join("o.volb");
    io::save_grid(&occ, &path).unwrap();
    assert_eq!(io::load_grid(&path).unwrap(), occ);
}
