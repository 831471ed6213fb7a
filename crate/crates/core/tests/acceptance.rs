//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shellsym::equivalence::{to_vonkarman, ContinuousResidual};
use shellsym::expr::{parse, Expr};
use shellsym::geometry::{Domain2D, MaterialParams, ShellSpec};
use shellsym::solver::{solve, BcKind, BoundaryConditions, DataSampling, Grid, Problem, SolverOptions};
use shellsym::symmetry::{classify, check_full_de, Generator, SamplingConfig};
use shellsym::verify::{
    case_suite, manufactured_study, orbit_residual, verify_equivalence, verify_reduction, OrbitOptions,
};

use common::{dense_reduced_matrix, nullity, random_field, random_load, random_point, random_surface, relative_residual};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn shell(f: &str, p: &str, a: f64, b: f64) -> ShellSpec {
    ShellSpec::new(parse(f).unwrap(), parse(p).unwrap(), Domain2D::square(a, b), 0.5).unwrap()
}

fn timed(limit: Duration, run: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = run();
    let elapsed = start.elapsed();
    o.detail = format!("{} ({:.1} s, limit {:.0} s)", o.detail, elapsed.as_secs_f64(), limit.as_secs_f64());
    o.passed &= elapsed < limit;
    o
}

fn kernel_universality() -> Outcome {
    timed(Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mat = MaterialParams::new(2.0, 10.0, 0.1).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let spec = shell(&random_surface(&mut rng), &random_load(&mut rng), 0.0, 1.0);
            let mut params = [0.0; 10];
            for v in &mut params[4..] {
                *v = rng.gen_range(-1.0..1.0);
            }
            let gen = Generator::from_params(params);
            for _ in 0..100 {
                let x = random_point(&mut rng, 0.0, 1.0);
                worst = worst.max(check_full_de(&gen, &spec, &mat, x).unwrap().max_abs());
            }
        }
        outcome(worst < 1e-9, format!("max kernel residual {worst:.2e} < 1e-9"))
    })
}

fn plate_classification() -> Outcome {
    let spec = shell("0", "0", -1.0, 1.0);
    let r = classify(&spec, &MaterialParams::default(), &SamplingConfig::default()).unwrap();
    outcome(r.algebra_dimension == 10, format!("dimension {} (expected 10)", r.algebra_dimension))
}

fn counterexample_classification() -> Outcome {
    let spec = shell("sin(x1)*sin(x2)", "0", 0.3, 2.8);
    let r = classify(&spec, &MaterialParams::default(), &SamplingConfig::default()).unwrap();
    let sigma = r.singular_values[3];
    outcome(
        r.algebra_dimension == 6 && sigma > 1e-3,
        format!("dimension {} (expected 6), smallest singular value {sigma:.3e} > 1e-3", r.algebra_dimension),
    )
}

fn derived_classifications() -> Outcome {
    let mat = MaterialParams::default();
    let cfg = SamplingConfig::default();
    let para = classify(&shell("0.5*(x1^2+x2^2)", "0", -1.0, 1.0), &mat, &cfg).unwrap();
    let cyl = classify(&shell("0.5*x1^2", "0", -1.0, 1.0), &mat, &cfg).unwrap();
    let c1_max = para.basis.iter().map(|g| g.c[0].abs()).fold(0.0, f64::max);

    let m_para = dense_reduced_matrix(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]), |_| 0.0, mat.d, -0.95, 0.95, 41);
    let m_cyl = dense_reduced_matrix(|x| 0.5 * x[0] * x[0], |_| 0.0, mat.d, -0.95, 0.95, 41);
    let (oracle_para, _) = nullity(&m_para, 1e-6);
    let (oracle_cyl, _) = nullity(&m_cyl, 1e-6);
    let basis_res = para
        .basis
        .iter()
        .map(|g| relative_residual(&m_para, g.c))
        .chain(cyl.basis.iter().map(|g| relative_residual(&m_cyl, g.c)))
        .fold(0.0, f64::max);

    let passed = para.algebra_dimension == 9
        && c1_max < 1e-8
        && cyl.algebra_dimension == 10
        && oracle_para + 6 == 9
        && oracle_cyl + 6 == 10
        && basis_res < 1e-6;
    outcome(
        passed,
        format!(
            "paraboloid {} (oracle {}), max|C1| {c1_max:.1e}; cylinder {} (oracle {}); oracle residual of basis {basis_res:.1e}",
            para.algebra_dimension,
            oracle_para + 6,
            cyl.algebra_dimension,
            oracle_cyl + 6
        ),
    )
}

fn reduction_equivalence() -> Outcome {
    let mut passed = true;
    let mut full: f64 = 0.0;
    let mut curvature: f64 = 0.0;
    for (k, case) in case_suite().into_iter().enumerate() {
        let r = classify(&case.spec, &case.mat, &SamplingConfig::default()).unwrap();
        let admitted: Vec<[f64; 4]> = r.basis.iter().map(|g| g.c).collect();
        let c = verify_reduction(&case.spec, &case.mat, &admitted, 30, 100, 100 + k as u64).unwrap();
        passed &= c.admitted_samples > 0 && c.reduction_residual_max < 1e-8 && c.curvature_residual_max < 1e-9;
        full = full.max(c.reduction_residual_max);
        curvature = curvature.max(c.curvature_residual_max);
    }
    outcome(
        passed,
        format!("full residual where reduced vanish {full:.2e} < 1e-8, curvature residual {curvature:.2e} < 1e-9"),
    )
}

fn discrete_equivalence() -> Outcome {
    let mut passed = true;
    let mut details = Vec::new();
    for (id, f, p, a, b) in [
        ("cap", "0.05*(x1^2+x2^2)", "1", 0.0, 1.0),
        ("sinsin", "sin(x1)*sin(x2)", "0", 0.3, 2.8),
    ] {
        let o = timed(Duration::from_secs(60), || {
            let spec = shell(f, p, a, b);
            let grid = Grid::with_points(spec.domain, 65).unwrap();
            let bc = BoundaryConditions::homogeneous(BcKind::Clamped, BcKind::Clamped);
            let c = verify_equivalence(&spec, &MaterialParams::default(), grid, &bc, &SolverOptions::default(), 1e-9)
                .unwrap();
            outcome(c.passed, format!("{id}: gaps {:.1e}, {:.1e}", c.gap_w, c.gap_phi))
        });
        passed &= o.passed;
        details.push(o.detail);
    }
    outcome(passed, details.join("; "))
}

fn solver_order() -> Outcome {
    timed(Duration::from_secs(300), || {
        let s = manufactured_study(
            &MaterialParams::default(),
            BcKind::Clamped,
            &[33, 65, 129],
            &SolverOptions::default(),
        )
        .unwrap();
        outcome(
            s.passed,
            format!("orders w {:.2?}, phi {:.2?} within 2.0 +- 0.3", s.order_w, s.order_phi),
        )
    })
}

fn algebraic_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mat = MaterialParams::new(0.7, 3.0, 0.2).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let spec = shell(&random_surface(&mut rng), &random_load(&mut rng), 0.0, 1.0);
        let w = random_field(&mut rng);
        let phi = random_field(&mut rng);
        let m = ContinuousResidual::marguerre(&spec, &mat, &w, &phi);
        let v = ContinuousResidual::von_karman(&to_vonkarman(&spec, &mat), &mat, &Expr::sum([w, spec.f.clone()]), &phi);
        for _ in 0..100 {
            let x = random_point(&mut rng, 0.0, 1.0);
            let (a, b) = (m.eval(x).unwrap(), v.eval(x).unwrap());
            worst = worst.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
        }
    }
    outcome(worst < 1e-9, format!("max residual difference {worst:.2e} < 1e-9 over 1000 points"))
}

fn symmetry_orbit() -> Outcome {
    let mat = MaterialParams::default();
    let opts = OrbitOptions::default();
    let run = |spec: &ShellSpec, c: [f64; 4], t: f64| {
        let grid = Grid::with_points(spec.domain, 65).unwrap();
        let bc = BoundaryConditions::homogeneous(BcKind::Clamped, BcKind::Clamped);
        let problem = Problem::marguerre(spec, &mat, grid, &bc, DataSampling::Stencil).unwrap();
        let s = solve(&problem, None, &SolverOptions::default()).unwrap();
        assert!(s.report.converged);
        orbit_residual(&s.w, &s.phi, &Generator::homothetic(c), spec, &mat, t, &opts).unwrap()
    };
    let rotation = run(&shell("0.5*(x1^2+x2^2)", "1", -0.5, 0.5), [0.0, 1.0, 0.0, 0.0], 0.3);
    let control = run(&shell("sin(x1)*sin(x2)", "0", 0.3, 2.8), [1.0, 0.0, 0.0, 0.0], 2f64.ln());
    outcome(
        rotation.ratio <= 10.0 && control.ratio > 1e3,
        format!(
            "rotation ratio {:.2} <= 10, dilation control ratio {:.2e} > 1e3",
            rotation.ratio, control.ratio
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("case.json");
    std::fs::write(
        &config,
        r#"{"case_id": "cap", "surface": "0.05*(x1^2+x2^2)", "load": "1", "grid": {"n": 33}}"#,
    )
    .unwrap();
    let commands: [&[&str]; 4] = [
        &["classify"],
        &["transform"],
        &["solve", "--system", "marguerre"],
        &["verify", "--check", "reduction"],
    ];
    let run = |out: &Path| {
        for args in commands {
            let status = Command::new(env!("CARGO_BIN_EXE_shellsym"))
                .args(args)
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(out)
                .output()
                .unwrap()
                .status;
            assert_eq!(status.code(), Some(0), "{args:?}");
        }
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        std::fs::create_dir(d).unwrap();
        run(d);
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let differing: Vec<_> = names
        .iter()
        .filter(|n| std::fs::read(a.join(n)).unwrap() != std::fs::read(b.join(n)).ok().unwrap_or_default())
        .collect();
    outcome(
        differing.is_empty() && names.len() >= 7,
        format!("{} report files compared, {} differ", names.len(), differing.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("kernel universality", kernel_universality),
        ("plate classification", plate_classification),
        ("counterexample classification", counterexample_classification),
        ("derived classifications", derived_classifications),
        ("reduction equivalence", reduction_equivalence),
        ("discrete equivalence", discrete_equivalence),
        ("solver order", solver_order),
        ("algebraic identity", algebraic_identity),
        ("symmetry orbit", symmetry_orbit),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failures += 1;
        }
        println!(
            "criterion {}: {} {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failures > 0 {
        eprintln!("{failures} criterion/criteria failed");
        std::process::exit(1);
    }
}
