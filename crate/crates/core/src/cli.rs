//! `shellsym` command-line front end.
//!
//! ```text
//! shellsym classify|transform|solve|verify [--config FILE] [--system S] [--check C] [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 solver non-convergence, 4 verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::equivalence::{to_vonkarman, transform_boundary_data};
use crate::expr::{parse, Expr};
use crate::geometry::{shallowness_check, Domain2D, MaterialParams, ShellSpec};
use crate::solver::{
    solve, BcKind, BoundaryConditions, BoundaryData, DataSampling, EdgeExprs, FieldGrid, Grid, Problem,
    SolverOptions,
};
use crate::symmetry::{classify, Generator, MotionKind, SamplingConfig, KERNEL_DIMENSION};
use crate::verify::{
    manufactured_study, orbit_residual, verify_equivalence, verify_reduction, OrbitCheck, OrbitOptions,
    VerifyError,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "SHELLSYM_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Gap allowed between `w + f` and `w̃` (and between the stress functions).
pub const EQUIVALENCE_TOL: f64 = 1e-9;
/// Generators and points drawn by the reduction check.
pub const REDUCTION_GENERATORS: usize = 30;
pub const REDUCTION_POINTS: usize = 100;
/// Default flow parameter of orbit checks.
pub const ORBIT_T: f64 = 0.3;

fn default_case_id() -> String {
    "case".to_string()
}
fn default_surface() -> String {
    "0".to_string()
}
fn default_domain() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Nodes per axis, boundary nodes included.
    pub n: usize,
    pub sampling: DataSampling,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 65,
            sampling: DataSampling::Stencil,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcConfig {
    pub w_kind: BcKind,
    pub phi_kind: BcKind,
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig {
            w_kind: BcKind::Clamped,
            phi_kind: BcKind::Clamped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassificationConfig {
    pub n_samples: usize,
    pub svd_tol: f64,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        let d = SamplingConfig::default();
        ClassificationConfig {
            n_samples: d.n_samples,
            svd_tol: d.svd_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    /// `[C1, C2, C3, C4, A1, A2, A3, B1, B2, B3]`.
    pub generator: [f64; 10],
    #[serde(default = "default_orbit_t")]
    pub t: f64,
}

fn default_orbit_t() -> f64 {
    ORBIT_T
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(rename = "D", default = "one")]
    pub d: f64,
    #[serde(rename = "E", default = "one")]
    pub e: f64,
    #[serde(default = "one")]
    pub h: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig { d: 1.0, e: 1.0, h: 1.0 }
    }
}

/// A single JSON case description; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default = "default_case_id")]
    pub case_id: String,
    /// Expression for the midsurface `f`.
    #[serde(default = "default_surface")]
    pub surface: String,
    /// Expression for the load `p`.
    #[serde(default = "default_surface")]
    pub load: String,
    /// `[a1, b1, a2, b2]`.
    #[serde(default = "default_domain")]
    pub domain: [f64; 4],
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub bc: BcConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub classification: ClassificationConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub orbit: Option<OrbitConfig>,
}

impl Default for CaseConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) | CliError::Runtime(_) => EXIT_IO,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CliError::VerificationFailed(_) => EXIT_VERIFY_FAILED,
        }
    }
}

/// Validated case.
pub struct Case {
    pub config: CaseConfig,
    pub spec: ShellSpec,
    pub mat: MaterialParams,
    pub grid: Grid,
    pub bc: BoundaryConditions,
}

impl Case {
    pub fn from_config(config: CaseConfig) -> Result<Case, CliError> {
        let bad = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
        let f = parse(&config.surface).map_err(|e| CliError::Config(format!("surface: {e}")))?;
        let p = parse(&config.load).map_err(|e| CliError::Config(format!("load: {e}")))?;
        let [a1, b1, a2, b2] = config.domain;
        let domain = Domain2D::new(a1, b1, a2, b2).map_err(|e| bad(&e))?;
        let spec = ShellSpec::new(f, p, domain, config.epsilon).map_err(|e| bad(&e))?;
        let m = &config.material;
        let mat = MaterialParams::new(m.d, m.e, m.h).map_err(|e| bad(&e))?;
        let grid = Grid::with_points(domain, config.grid.n).map_err(|e| bad(&e))?;
        let s = &config.solver;
        if !(s.tol_abs >= 0.0 && s.tol_rel >= 0.0) || s.max_iter == 0 || s.max_load_steps == 0 {
            return Err(CliError::Config(
                "solver tolerances must be non-negative and iteration limits positive".into(),
            ));
        }
        let c = &config.classification;
        if c.n_samples < 4 || !(c.svd_tol > 0.0) {
            return Err(CliError::Config(
                "classification needs n_samples >= 4 and svd_tol > 0".into(),
            ));
        }
        let bc = BoundaryConditions::homogeneous(config.bc.w_kind, config.bc.phi_kind);
        Ok(Case {
            config,
            spec,
            mat,
            grid,
            bc,
        })
    }

    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            n_samples: self.config.classification.n_samples,
            svd_tol: self.config.classification.svd_tol,
            seed: self.config.seed,
            ..SamplingConfig::default()
        }
    }
}

/// Reads the case, applying the seed override from the environment.
pub fn load_config(path: Option<&Path>, seed_override: Option<&str>) -> Result<CaseConfig, CliError> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<CaseConfig>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => CaseConfig::default(),
    };
    if let Some(s) = seed_override {
        config.seed = s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
    }
    Ok(config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Marguerre,
    Vonkarman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    Equivalence,
    Reduction,
    Orbit,
    All,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// JSON case configuration; defaults to an unloaded plate on the unit square.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for reports and fields.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group classification of the shell: admitted symmetry algebra.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Von Kármán right-hand sides and transformed boundary data.
    Transform {
        #[command(flatten)]
        common: Common,
    },
    /// Newton solve of the shell or its von Kármán form.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "marguerre")]
        system: SystemArg,
        /// Run the manufactured-solution convergence study on 33/65/129 grids instead.
        #[arg(long)]
        manufactured: bool,
    },
    /// Equivalence, reduction and orbit checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        check: CheckArg,
    },
}

#[derive(Debug, Parser)]
#[command(name = "shellsym", version, about = "Symmetries and equivalence of Marguerre shallow-shell equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_csv(dir: &Path, name: &str, field: &FieldGrid) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join(name))?;
    let mut w = io::BufWriter::new(file);
    field.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn envelope(command: &str, case: &Case, body: Value) -> Value {
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "case_id": case.config.case_id,
        "seed": case.config.seed,
        "config": case.config,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}


fn classification_summary(r: &crate::symmetry::ClassificationResult) -> String {
    let d = r.algebra_dimension;
    if r.nullity == 0 {
        return format!("dimension {d} (kernel only)");
    }
    if r.nullity == 4 {
        return format!("dimension {d} = {KERNEL_DIMENSION} (kernel) + 4 (homothetic)");
    }
    let count = |k: MotionKind| r.basis.iter().filter(|g| g.motion == k).count();
    let mut parts = Vec::new();
    for (k, one, many) in [
        (MotionKind::Translation, "translation", "translations"),
        (MotionKind::Rotation, "rotation", "rotations"),
        (MotionKind::Homothety, "homothety", "homotheties"),
    ] {
        match count(k) {
            0 => {}
            1 => parts.push(format!("1 {one}")),
            n => parts.push(format!("{n} {many}")),
        }
    }
    let c1 = if r.basis.iter().all(|g| g.c[0].abs() < 1e-8) {
        "C1 excluded"
    } else {
        "C1 included"
    };
    format!("dimension {d}; extra generators: {}; {c1}", parts.join(", "))
}

pub fn cmd_classify(case: &Case, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let result = classify(&case.spec, &case.mat, &case.sampling()).map_err(runtime)?;
    let shallow = shallowness_check(&case.spec);
    let summary = classification_summary(&result);
    writeln!(stdout, "{summary}")?;
    writeln!(stdout, "{KERNEL_DIMENSION}-parameter kernel always present")?;
    for g in &result.basis {
        writeln!(stdout, "  {:?} C = {:?} ({:?})", g.motion, g.c, g.characterization)?;
    }
    if !shallow.ok {
        writeln!(
            stdout,
            "warning: shell is not shallow: max slope product {:.3e} > epsilon^2 = {:.3e}",
            shallow.max_slope_product,
            shallow.epsilon * shallow.epsilon
        )?;
    }
    let report = envelope(
        "classify",
        case,
        json!({
            "summary": summary,
            "kernel_dimension": KERNEL_DIMENSION,
            "kernel_note": format!("{KERNEL_DIMENSION}-parameter kernel always present"),
            "classification": result,
            "shallowness": shallow,
        }),
    );
    write_json(out, "classification.json", &report)
}

fn edge_json(e: &EdgeExprs) -> Value {
    json!({
        "left": e.left.simplify().to_string(),
        "right": e.right.simplify().to_string(),
        "bottom": e.bottom.simplify().to_string(),
        "top": e.top.simplify().to_string(),
    })
}

fn bc_json(b: &BoundaryData) -> Value {
    match b {
        BoundaryData::Clamped { value, normal } => json!({
            "kind": "clamped",
            "value": value.simplify().to_string(),
            "normal_derivative": edge_json(normal),
        }),
        BoundaryData::SimplySupported { value, laplacian } => json!({
            "kind": "simply_supported",
            "value": value.simplify().to_string(),
            "laplacian": laplacian.simplify().to_string(),
        }),
    }
}

fn sample_all(grid: Grid, e: &Expr) -> Result<FieldGrid, CliError> {
    FieldGrid::sample(grid, e).map_err(runtime)
}

pub fn cmd_transform(case: &Case, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let form = to_vonkarman(&case.spec, &case.mat);
    let bc = transform_boundary_data(&case.bc, &case.spec).map_err(runtime)?;
    writeln!(stdout, "P = {}", form.p)?;
    writeln!(stdout, "K = {}", form.k)?;
    writeln!(stdout, "w~ = w + ({})", form.shift)?;
    write_csv(out, "P.csv", &sample_all(case.grid, &form.p)?)?;
    write_csv(out, "K.csv", &sample_all(case.grid, &form.k)?)?;
    let report = envelope(
        "transform",
        case,
        json!({
            "P": form.p.to_string(),
            "K": form.k.to_string(),
            "shift": form.shift.to_string(),
            "boundary": { "w_tilde": bc_json(&bc.w), "phi": bc_json(&bc.phi) },
        }),
    );
    write_json(out, "transform.json", &report)
}

pub fn cmd_solve(case: &Case, system: SystemArg, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let sampling = case.config.grid.sampling;
    let (problem, w_name) = match system {
        SystemArg::Marguerre => (
            Problem::marguerre(&case.spec, &case.mat, case.grid, &case.bc, sampling),
            "w.csv",
        ),
        SystemArg::Vonkarman => {
            let bc = transform_boundary_data(&case.bc, &case.spec).map_err(runtime)?;
            (
                Problem::von_karman_from_shell(&case.spec, &case.mat, case.grid, &bc, sampling),
                "w_tilde.csv",
            )
        }
    };
    let problem = problem.map_err(runtime)?;
    let s = solve(&problem, None, &case.config.solver).map_err(runtime)?;
    write_csv(out, w_name, &s.w)?;
    write_csv(out, "phi.csv", &s.phi)?;
    let r = &s.report;
    writeln!(
        stdout,
        "{:?}: converged = {}, iterations = {}, load steps = {}, residual = {:.3e} (tolerance {:.3e})",
        r.system, r.converged, r.iterations, r.load_steps_used, r.final_residual_inf, r.tolerance
    )?;
    let report = envelope("solve", case, json!({ "report": r }));
    write_json(out, "solve_report.json", &report)?;
    if r.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "residual {:.3e} above tolerance {:.3e}",
            r.final_residual_inf, r.tolerance
        )))
    }
}

pub fn cmd_manufactured(case: &Case, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let study = manufactured_study(&case.mat, case.config.bc.w_kind, &[33, 65, 129], &case.config.solver)
        .map_err(verify_error)?;
    writeln!(stdout, "{:>6} {:>12} {:>14} {:>14}", "points", "h", "error w~", "error phi")?;
    for r in &study.rows {
        writeln!(stdout, "{:>6} {:>12.5e} {:>14.6e} {:>14.6e}", r.points, r.h, r.error_w, r.error_phi)?;
    }
    writeln!(stdout, "observed order w~: {:?}", study.order_w)?;
    writeln!(stdout, "observed order phi: {:?}", study.order_phi)?;
    let passed = study.passed;
    write_json(out, "manufactured.json", &envelope("solve", case, json!({ "manufactured": study })))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::VerificationFailed("observed order outside 2.0 +/- 0.3".into()))
    }
}

fn verify_error(e: VerifyError) -> CliError {
    match e {
        VerifyError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
        other => runtime(other),
    }
}

/// Orbit checks for the configured generator, or else for every admitted
/// extra generator plus one random kernel generator. The flow parameter is
/// halved until the transformed stencil fits in the domain.
fn orbit_checks(case: &Case, rng: &mut ChaCha8Rng) -> Result<Vec<OrbitCheck>, CliError> {
    let problem = Problem::marguerre(&case.spec, &case.mat, case.grid, &case.bc, DataSampling::Stencil).map_err(runtime)?;
    let s = solve(&problem, None, &case.config.solver).map_err(runtime)?;
    if !s.report.converged {
        return Err(CliError::NotConverged(format!(
            "Marguerre solve for the orbit check stopped at residual {:.3e}",
            s.report.final_residual_inf
        )));
    }
    let mut gens: Vec<(Generator, f64)> = Vec::new();
    match &case.config.orbit {
        Some(o) => gens.push((Generator::from_params(o.generator), o.t)),
        None => {
            let result = classify(&case.spec, &case.mat, &case.sampling()).map_err(runtime)?;
            for g in &result.basis {
                gens.push((Generator::homothetic(g.c), ORBIT_T));
            }
            let mut kernel = [0.0; 10];
            for v in &mut kernel[4..] {
                *v = rng.gen_range(-1.0..1.0);
            }
            gens.push((Generator::from_params(kernel), ORBIT_T));
        }
    }
    let opts = OrbitOptions::default();
    let mut checks = Vec::new();
    for (gen, t0) in gens {
        let mut t = t0;
        let check = loop {
            match orbit_residual(&s.w, &s.phi, &gen, &case.spec, &case.mat, t, &opts) {
                Err(VerifyError::OutsideDomain) if t.abs() > t0.abs() / 64.0 => t *= 0.5,
                other => break other.map_err(verify_error)?,
            }
        };
        checks.push(check);
    }
    Ok(checks)
}

pub fn cmd_verify(case: &Case, check: CheckArg, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let want = |c: CheckArg| check == CheckArg::All || check == c;
    let mut rng = ChaCha8Rng::seed_from_u64(case.config.seed);
    let mut body = serde_json::Map::new();
    let mut pass = serde_json::Map::new();

    if want(CheckArg::Equivalence) {
        let c = verify_equivalence(
            &case.spec,
            &case.mat,
            case.grid,
            &case.bc,
            &case.config.solver,
            EQUIVALENCE_TOL,
        )
        .map_err(verify_error)?;
        writeln!(
            stdout,
            "equivalence: max|w+f-w~| = {:.3e}, max|phi_M-phi_vK| = {:.3e} -> {}",
            c.gap_w,
            c.gap_phi,
            if c.passed { "pass" } else { "FAIL" }
        )?;
        body.insert("max_equivalence_gap_w".into(), json!(c.gap_w));
        body.insert("max_equivalence_gap_phi".into(), json!(c.gap_phi));
        pass.insert("equivalence".into(), json!(c.passed));
        body.insert("equivalence".into(), json!(c));
    }
    if want(CheckArg::Reduction) {
        let result = classify(&case.spec, &case.mat, &case.sampling()).map_err(runtime)?;
        let admitted: Vec<[f64; 4]> = result.basis.iter().map(|g| g.c).collect();
        let seed = rng.gen();
        let c = verify_reduction(
            &case.spec,
            &case.mat,
            &admitted,
            REDUCTION_GENERATORS,
            REDUCTION_POINTS,
            seed,
        )
        .map_err(verify_error)?;
        writeln!(
            stdout,
            "reduction: max full residual where reduced vanish = {:.3e}, curvature residual = {:.3e} -> {}",
            c.reduction_residual_max,
            c.curvature_residual_max,
            if c.passed { "pass" } else { "FAIL" }
        )?;
        body.insert("reduction_residual_max".into(), json!(c.reduction_residual_max));
        pass.insert("reduction".into(), json!(c.passed));
        body.insert("reduction".into(), json!(c));
    }
    if want(CheckArg::Orbit) {
        let checks = orbit_checks(case, &mut rng)?;
        let ratio = checks.iter().map(|c| c.ratio).fold(0.0f64, f64::max);
        let passed = checks.iter().all(|c| c.passed);
        writeln!(
            stdout,
            "orbit: {} generator(s), max residual ratio = {:.3e} -> {}",
            checks.len(),
            ratio,
            if passed { "pass" } else { "FAIL" }
        )?;
        body.insert("orbit_residual_ratio".into(), json!(ratio));
        pass.insert("orbit".into(), json!(passed));
        body.insert("orbit".into(), json!(checks));
    }
    let all = pass.values().all(|v| v.as_bool() == Some(true));
    body.insert("pass".into(), Value::Object(pass));
    body.insert("passed".into(), json!(all));
    write_json(out, "verification.json", &envelope("verify", case, Value::Object(body)))?;
    if all {
        Ok(())
    } else {
        Err(CliError::VerificationFailed("see verification.json".into()))
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. `seed_override` plays the role of the `SHELLSYM_SEED` variable.
pub fn run<I, T>(args: I, seed_override: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = (|| {
        let common = match &cli.command {
            Command::Classify { common }
            | Command::Transform { common }
            | Command::Solve { common, .. }
            | Command::Verify { common, .. } => common,
        };
        let case = Case::from_config(load_config(common.config.as_deref(), seed_override)?)?;
        let out = common.out.as_path();
        match &cli.command {
            Command::Classify { .. } => cmd_classify(&case, out, stdout),
            Command::Transform { .. } => cmd_transform(&case, out, stdout),
            Command::Solve { manufactured: true, .. } => cmd_manufactured(&case, out, stdout),
            Command::Solve { system, .. } => cmd_solve(&case, *system, out, stdout),
            Command::Verify { check, .. } => cmd_verify(&case, *check, out, stdout),
        }
    })();
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_exit_code() -> i32 {
    let seed = std::env::var(SEED_ENV).ok();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), seed.as_deref(), &mut stdout.lock(), &mut stderr.lock())
}
