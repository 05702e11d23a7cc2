//! Command-line front end. Every command writes a JSON run manifest next to
//! its primary output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use serde_json::{json, Value};

use wnfkit::align::{align_rotation_z, AlignParams, DEFAULT_COARSE_STEPS, DEFAULT_REFINE_ITERS};
use wnfkit::grid::{GridSpec, ScalarGrid, CANONICAL_MARGIN};
use wnfkit::io;
use wnfkit::marching::marching_cubes;
use wnfkit::mesh::{validate, DEFAULT_AREA_EPSILON};
use wnfkit::metrics::{
    chamfer, chamfer_point_to_surface, correspondence_distance, nocs_error, ChamferResult, MetricRecord,
    DEFAULT_SAMPLES,
};
use wnfkit::nocs::{fit_category_transform, Axis, NocsTransform};
use wnfkit::openings::{classify_openings_with, strip_openings, GradientScheme, DEFAULT_THRESHOLD_FACTOR};
use wnfkit::raster::{rasterize_occupancy, rasterize_tdf, rasterize_tsdf, rasterize_wnf, DEFAULT_TRUNC_VOXELS};
use wnfkit::scatter::{assemble_features, scatter_max, DEFAULT_DIMS};
use wnfkit::winding::{FarFieldOrder, WindingAccel, WindingQueryParams, DEFAULT_BETA};
use wnfkit::{Error, Frame};

#[derive(Debug, Parser)]
#[command(name = "wnfkit", version, about = "Winding-number field toolkit for garment meshes")]
pub struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true, env = "WNFKIT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a category's unit-cube transform and write normalized meshes.
    Normalize(NormalizeArgs),
    /// Rasterize a mesh into a VOLB volume.
    Field(FieldArgs),
    /// Extract the iso-surface of a volume and label its openings.
    Extract(ExtractArgs),
    /// Scatter a labeled point cloud into a feature volume.
    Scatter(ScatterArgs),
    /// Compare a predicted mesh with ground truth.
    Eval(EvalArgs),
    /// Align a predicted mesh to an observed cloud by rotation about z.
    Align(AlignArgs),
    /// Report degenerate triangles, duplicates and watertightness.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Canonical-pose meshes of one category.
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub category: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Apply this transform instead of fitting a new one.
    #[arg(long)]
    pub transform: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Wnf,
    Occ,
    Tsdf,
    Tdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    /// Canonical grid for canonical meshes, fitted grid otherwise.
    Auto,
    /// Unit cube with a four-voxel margin.
    Canonical,
    /// Cube around the mesh bounding box with a four-voxel margin.
    Fit,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    pub mesh: PathBuf,
    #[arg(long, value_enum, default_value = "wnf")]
    pub kind: KindArg,
    /// Voxels per axis (default 128, 64 for occupancy).
    #[arg(long)]
    pub dims: Option<usize>,
    /// Truncation distance in mesh units (default 10 voxels).
    #[arg(long)]
    pub trunc: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, value_enum, default_value = "second")]
    pub order: FarFieldOrder,
    #[arg(long, value_enum, default_value = "auto")]
    pub grid: GridArg,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    pub volume: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub iso: f64,
    /// Opening threshold as a multiple of 1/h.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_FACTOR)]
    pub open_threshold: f64,
    #[arg(long, value_enum, default_value = "cell")]
    pub gradient: GradientScheme,
    /// Also write the surface with opening triangles removed.
    #[arg(long)]
    pub stripped: Option<PathBuf>,
    /// Labeled PLY output.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    pub cloud: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIMS)]
    pub dims: usize,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Chamfer,
    Corr,
    Nocs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub pred: PathBuf,
    pub gt: PathBuf,
    #[arg(long, value_enum, default_value = "chamfer")]
    pub metric: MetricArg,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Nocs error: also compare against the mirrored ground truth.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, value_enum, default_value = "x")]
    pub mirror_axis: Axis,
    /// Chamfer: exact sample-to-surface distances instead of sample-to-sample.
    #[arg(long)]
    pub point_to_surface: bool,
    /// Report lengths in centimeters, assuming meshes are in meters.
    #[arg(long)]
    pub cm: bool,
    /// JSON output with one record per metric.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    pub pred: PathBuf,
    pub observed: PathBuf,
    #[arg(long, default_value_t = DEFAULT_COARSE_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_REFINE_ITERS)]
    pub refine: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rotated mesh output.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub mesh: PathBuf,
    #[arg(long, default_value_t = DEFAULT_AREA_EPSILON)]
    pub area_epsilon: f64,
    /// JSON report output.
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    version: &'static str,
    parameters: Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
    seed: u64,
    results: Value,
    wall_time_s: f64,
}

struct Run {
    command: &'static str,
    started: Instant,
    parameters: Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
    seed: u64,
    results: Value,
}

impl Run {
    fn new(command: &'static str, inputs: &[&Path]) -> Self {
        Run {
            command,
            started: Instant::now(),
            parameters: json!({}),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: Vec::new(),
            seed: 0,
            results: json!({}),
        }
    }

    fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `<primary>.manifest.json`.
    fn finish(self, primary: &Path) -> CliResult<()> {
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            parameters: self.parameters,
            inputs: self.inputs,
            outputs: self.outputs,
            seed: self.seed,
            results: self.results,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::Compute(Error::Io { path, source: e }))
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::Compute(Error::Io { path: path.into(), source: e }))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Normalize(a) => cmd_normalize(a),
        Command::Field(a) => cmd_field(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Scatter(a) => cmd_scatter(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Align(a) => cmd_align(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn cmd_normalize(a: NormalizeArgs) -> CliResult<()> {
    if a.category.trim().is_empty() {
        return Err(CliError::Usage("--category must not be empty".into()));
    }
    let inputs: Vec<&Path> = a.inputs.iter().map(PathBuf::as_path).collect();
    let mut run = Run::new("normalize", &inputs);
    // inputs are canonical-pose meshes by contract, whatever their file says
    let meshes = a
        .inputs
        .iter()
        .map(|p| io::load_mesh_auto(p).map(|m| m.with_frame(Frame::Canonical)))
        .collect::<wnfkit::Result<Vec<_>>>()?;

    let transform = match &a.transform {
        Some(path) => {
            let t = NocsTransform::load(path)?;
            if t.category_id != a.category {
                return Err(CliError::Usage(format!(
                    "transform {} belongs to category {:?}, not {:?}",
                    path.display(),
                    t.category_id,
                    a.category
                )));
            }
            run.inputs.push(path.display().to_string());
            t
        }
        None => fit_category_transform(&a.category, &meshes)?,
    };

    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::Compute(Error::Io { path: a.out_dir.clone(), source: e }))?;
    let transform_path = a.out_dir.join(format!("{}_transform.json", a.category));
    transform.save(&transform_path)?;
    run.output(&transform_path);

    let mut out_of_cube = 0usize;
    for (path, mesh) in a.inputs.iter().zip(&meshes) {
        let normalized = transform.apply(mesh);
        out_of_cube += normalized
            .vertices()
            .iter()
            .filter(|v| v.iter().any(|c| !(-1e-6..=1.0 + 1e-6).contains(c)))
            .count();
        let file = path.file_name().ok_or_else(|| CliError::Usage(format!("{} has no file name", path.display())))?;
        let out = a.out_dir.join(file);
        if out == *path {
            return Err(CliError::Usage(format!("refusing to overwrite input {}", path.display())));
        }
        io::save_mesh_auto(&normalized, &out)?;
        run.output(&out);
    }
    if out_of_cube > 0 {
        warn!("{out_of_cube} vertices fall outside the unit cube under this transform");
    }
    println!("scale {} translation {:?}", transform.scale, transform.translation);
    run.parameters = json!({
        "category": a.category,
        "fitted": a.transform.is_none(),
    });
    run.results = json!({
        "scale": transform.scale,
        "translation": transform.translation,
        "vertices_outside_unit_cube": out_of_cube,
    });
    run.finish(&transform_path)
}

fn cmd_field(a: FieldArgs) -> CliResult<()> {
    let mut run = Run::new("field", &[&a.mesh]);
    let mesh = io::load_mesh_auto(&a.mesh)?;
    let dims = a.dims.unwrap_or(if a.kind == KindArg::Occ { 64 } else { 128 });
    if dims <= 2 * CANONICAL_MARGIN {
        return Err(CliError::Usage(format!("--dims must exceed {}", 2 * CANONICAL_MARGIN)));
    }
    if !(a.beta > 0.0) {
        return Err(CliError::Usage("--beta must be positive".into()));
    }
    let canonical = match a.grid {
        GridArg::Canonical => true,
        GridArg::Fit => false,
        GridArg::Auto => mesh.frame() == Frame::Canonical,
    };
    let spec = if canonical { GridSpec::canonical(dims)? } else { GridSpec::fit(&mesh.bbox(), dims, CANONICAL_MARGIN)? };
    let trunc = match a.trunc {
        Some(t) if !(t > 0.0) => return Err(CliError::Usage("--trunc must be positive".into())),
        Some(t) => t,
        None => DEFAULT_TRUNC_VOXELS * spec.voxel_size,
    };
    let params = WindingQueryParams::new(a.beta, false)?.with_order(a.order);

    let grid = match a.kind {
        KindArg::Wnf => rasterize_wnf(&mesh, &spec, &WindingAccel::with_default_leaf(&mesh)?, &params)?,
        KindArg::Occ => rasterize_occupancy(&mesh, &spec)?,
        KindArg::Tsdf => rasterize_tsdf(&mesh, &spec, trunc, &WindingAccel::with_default_leaf(&mesh)?, &params)?,
        KindArg::Tdf => rasterize_tdf(&mesh, &spec, trunc)?,
    };
    io::save_grid(&grid, &a.out)?;
    run.output(&a.out);

    let (lo, hi) = grid.min_max();
    let mut results = json!({ "min": lo, "max": hi });
    if a.kind == KindArg::Occ {
        let rate = grid.nonzero_fraction();
        println!("occupancy rate {:.4}%", rate * 100.0);
        results["occupancy_rate"] = json!(rate);
    } else {
        println!("{} range [{lo}, {hi}]", grid.kind().as_str());
    }
    run.parameters = json!({
        "kind": grid.kind().as_str(),
        "dims": dims,
        "grid": if canonical { "canonical" } else { "fit" },
        "origin": [spec.origin.x, spec.origin.y, spec.origin.z],
        "voxel_size": spec.voxel_size,
        "trunc": matches!(a.kind, KindArg::Tsdf | KindArg::Tdf).then_some(trunc),
        "beta": a.beta,
        "order": format!("{:?}", a.order).to_lowercase(),
    });
    run.results = results;
    run.finish(&a.out)
}

fn cmd_extract(a: ExtractArgs) -> CliResult<()> {
    let mut run = Run::new("extract", &[&a.volume]);
    if !(a.open_threshold >= 0.0) {
        return Err(CliError::Usage("--open-threshold must be >= 0".into()));
    }
    let grid: ScalarGrid = io::load_grid(&a.volume)?;
    let surface = marching_cubes(&grid, a.iso);
    if surface.is_empty() {
        warn!("extracted surface is empty");
    }
    let threshold = a.open_threshold / grid.voxel_size();
    let labeled = classify_openings_with(&surface, &grid, threshold, a.iso, a.gradient);
    io::save_labeled_mesh(&labeled, &a.out)?;
    run.output(&a.out);
    if let Some(path) = &a.stripped {
        io::save_mesh_auto(&strip_openings(&labeled), path)?;
        run.output(path);
    }
    println!(
        "{} vertices, {} triangles, {} openings",
        surface.vertex_count(),
        surface.triangle_count(),
        labeled.opening_count()
    );
    run.parameters = json!({
        "iso": a.iso,
        "open_threshold": a.open_threshold,
        "threshold_abs": threshold,
        "gradient": format!("{:?}", a.gradient).to_lowercase(),
    });
    run.results = json!({
        "vertices": surface.vertex_count(),
        "triangles": surface.triangle_count(),
        "opening_vertices": labeled.opening_count(),
    });
    run.finish(&a.out)
}

fn cmd_scatter(a: ScatterArgs) -> CliResult<()> {
    let mut run = Run::new("scatter", &[&a.cloud]);
    if a.dims < 2 {
        return Err(CliError::Usage("--dims must be at least 2".into()));
    }
    let cloud = io::load_cloud(&a.cloud)?;
    let input = assemble_features(&cloud)?;
    let volume = scatter_max(&input, a.dims)?;
    io::save_feature_volume(&volume, &a.out)?;
    run.output(&a.out);
    println!("{} points into {} of {} cells, {} channels", input.len(), volume.occupied_count(), volume.cell_count(), volume.channels());
    run.parameters = json!({ "dims": a.dims });
    run.results = json!({
        "points": input.len(),
        "channels": volume.channels(),
        "occupied_cells": volume.occupied_count(),
    });
    run.finish(&a.out)
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let mut run = Run::new("eval", &[&a.pred, &a.gt]);
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let (scale, length_units) = if a.cm { (100.0, "cm") } else { (1.0, "native") };
    let record = |metric: &str, value: f64, n: usize, units: &str| MetricRecord {
        metric: metric.into(),
        value,
        n,
        seed: a.seed,
        units: units.into(),
    };
    let records = match a.metric {
        MetricArg::Chamfer => {
            let pred = io::load_mesh_auto(&a.pred)?;
            let gt = io::load_mesh_auto(&a.gt)?;
            let r: ChamferResult = if a.point_to_surface {
                chamfer_point_to_surface(&pred, &gt, a.n, a.seed)?
            } else {
                chamfer(&pred, &gt, a.n, a.seed)?
            };
            vec![
                record("chamfer", r.symmetric_mean * scale, a.n, length_units),
                record("chamfer_accuracy", r.accuracy_mean * scale, a.n, length_units),
                record("chamfer_completeness", r.completeness_mean * scale, a.n, length_units),
            ]
        }
        MetricArg::Corr => {
            let pred = io::load_mesh_auto(&a.pred)?;
            let gt = io::load_mesh_auto(&a.gt)?;
            let d = correspondence_distance(&pred, &gt, a.n, a.seed)?;
            vec![record("correspondence", d * scale, a.n, length_units)]
        }
        MetricArg::Nocs => {
            let pred = io::load_cloud(&a.pred)?;
            let gt = io::load_cloud(&a.gt)?;
            let (p, g) = match (pred.nocs(), gt.nocs()) {
                (Some(p), Some(g)) => (p, g),
                _ => return Err(Error::InvalidCloud("nocs error needs nocs labels on both inputs".into()).into()),
            };
            let e = nocs_error(p, g, a.symmetric, a.mirror_axis)?;
            let name = if a.symmetric { "nocs_error_symmetric" } else { "nocs_error" };
            vec![record(name, e, p.len(), "nocs")]
        }
    };
    for r in &records {
        println!("{} {} {}", r.metric, r.value, r.units);
    }
    write_json(&a.out, &records)?;
    run.output(&a.out);
    run.seed = a.seed;
    run.parameters = json!({
        "metric": format!("{:?}", a.metric).to_lowercase(),
        "n": a.n,
        "symmetric": a.symmetric,
        "mirror_axis": a.mirror_axis,
        "point_to_surface": a.point_to_surface,
        "units": length_units,
    });
    run.results = serde_json::to_value(&records).expect("records serialize");
    run.finish(&a.out)
}

fn cmd_align(a: AlignArgs) -> CliResult<()> {
    let mut run = Run::new("align", &[&a.pred, &a.observed]);
    if a.steps == 0 || a.samples == 0 {
        return Err(CliError::Usage("--steps and --samples must be at least 1".into()));
    }
    let pred = io::load_mesh_auto(&a.pred)?;
    let observed = io::load_cloud(&a.observed)?;
    let params = AlignParams { coarse_steps: a.steps, refine_iters: a.refine, samples: a.samples, seed: a.seed };
    let r = align_rotation_z(&pred, &observed, &params)?;
    io::save_mesh_auto(&r.aligned, &a.out)?;
    run.output(&a.out);
    info!("objective {}", r.objective);
    println!("angle {} rad ({} deg)", r.angle, r.angle.to_degrees());
    run.seed = a.seed;
    run.parameters = json!({
        "steps": a.steps,
        "refine": a.refine,
        "samples": a.samples,
    });
    run.results = json!({
        "angle_rad": r.angle,
        "angle_deg": r.angle.to_degrees(),
        "objective": r.objective,
    });
    run.finish(&a.out)
}

fn cmd_validate(a: ValidateArgs) -> CliResult<()> {
    let mut run = Run::new("validate", &[&a.mesh]);
    let mesh = io::load_mesh_auto(&a.mesh)?;
    let report = validate(&mesh, a.area_epsilon);
    write_json(&a.out, &report)?;
    run.output(&a.out);
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    run.parameters = json!({ "area_epsilon": a.area_epsilon });
    run.results = serde_json::to_value(&report).expect("report serializes");
    run.finish(&a.out)
}
