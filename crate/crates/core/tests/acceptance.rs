//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3, Vector6};
use rand::Rng;

use otgeom::exterior::{canonical_symplectic, AltForm, GraphSection, DIM, DX1, DX2, DXBAR1};
use otgeom::fields::{CostFunction, Density, DomainBox, IntervalDensity, Point, ScalarField};
use otgeom::ma_structure::{block_swap, effectiveness_defect, MAStructure};
use otgeom::ot_solver::{
    duality_report, el_residual_grid, sinkhorn, solve_assignment, solve_monotone_1d,
    DiscreteOTProblem, MonotoneMap, SinkhornParams,
};
use otgeom::sampling::{self, interior_pairs};
use otgeom::semigeostrophic::{verify_prop31, SGConfig};
use otgeom::transport_geometry::{
    conformal_defect_at, graph_geometry_check, kmw_metric_at, metric_signature,
    transport_map_from_potential,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 20_240_611;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gaussian_source() -> Density {
    Density::truncated_gaussian(
        Vector3::new(0.1, -0.2, 0.3),
        Matrix3::new(0.5, 0.1, 0.0, 0.1, 0.4, 0.05, 0.0, 0.05, 0.3),
        DomainBox::cube(1.0),
    )
    .unwrap()
}

fn uniform_target() -> Density {
    Density::uniform(DomainBox::new([-1.0, -1.0, 0.0], [2.0, 1.0, 1.5]).unwrap())
}

/// Both density classes on each side.
fn density_pairs() -> Vec<(Density, Density)> {
    vec![
        (gaussian_source(), uniform_target()),
        (uniform_target(), gaussian_source()),
    ]
}

fn max_conformal(s: &MAStructure, n: usize, seed: u64) -> Result<f64, String> {
    let margin = s.cost().stencil_margin();
    let pairs = interior_pairs(s.source().domain(), s.target().domain(), margin, n, seed)
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (x, xb) in &pairs {
        let r = conformal_defect_at(s, x, xb).map_err(|e| e.to_string())?;
        worst = worst.max(r.relative_defect);
    }
    Ok(worst)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut analytic: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for (i, (rho, rhobar)) in density_pairs().into_iter().enumerate() {
        let s = MAStructure::new(CostFunction::quadratic(), rho.clone(), rhobar.clone());
        analytic = analytic.max(max_conformal(&s, 1000, SEED + i as u64)?);
        let custom = CostFunction::custom("quadratic-fd", |x, xb| -x.dot(xb));
        let s = MAStructure::new(custom, rho, rhobar);
        fd = fd.max(max_conformal(&s, 1000, SEED + i as u64)?);
    }
    let elapsed = start.elapsed();
    ensure(analytic <= 1e-10, || {
        format!("analytic defect {analytic:e}")
    })?;
    ensure(fd <= 1e-5, || format!("finite-difference defect {fd:e}"))?;
    ensure(elapsed <= Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "analytic {analytic:.1e}, fd {fd:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let mut worst = [0.0f64; 4];
    for (i, (rho, rhobar)) in density_pairs().into_iter().enumerate() {
        let cfg = SGConfig::new(1.0, rho, rhobar).map_err(|e| e.to_string())?;
        let r = verify_prop31(&cfg, 1000, SEED + i as u64).map_err(|e| e.to_string())?;
        for (w, v) in worst.iter_mut().zip([
            r.canonical_defect,
            r.conformal_defect,
            r.lr_closed_form_defect,
            r.kmw_closed_form_defect,
        ]) {
            *w = w.max(v);
        }
    }
    ensure(worst.iter().all(|&w| w <= 1e-10), || {
        format!("canonical/conformal/lr/kmw defects {worst:?}")
    })?;
    Ok(format!(
        "max defects {:.1e}",
        worst.iter().fold(0.0f64, |a, &b| a.max(b))
    ))
}

fn criterion_3() -> Outcome {
    let swap = block_swap();
    let mut worst: f64 = 0.0;
    for (i, (rho, rhobar)) in density_pairs().into_iter().enumerate() {
        let s = MAStructure::new(CostFunction::quadratic(), rho.clone(), rhobar.clone());
        let pairs = interior_pairs(
            rho.domain(),
            rhobar.domain(),
            0.0,
            200,
            SEED + 10 + i as u64,
        )
        .unwrap();
        for (x, xb) in &pairs {
            let rr = rho.eval(x) * rhobar.eval(xb);
            let g = s.lr_metric_at(x, xb).map_err(|e| e.to_string())?;
            let h = kmw_metric_at(s.cost(), &rho, &rhobar, x, xb).map_err(|e| e.to_string())?;
            let lr_expected: Matrix6<f64> = rr * swap;
            let kmw_expected: Matrix6<f64> = rr.cbrt() * swap;
            worst = worst.max((g.matrix() - lr_expected).amax() / lr_expected.amax());
            worst = worst.max((h.matrix() - kmw_expected).amax() / kmw_expected.amax());
        }
    }
    ensure(worst <= 1e-10, || format!("relative defect {worst:e}"))?;
    Ok(format!("relative defect {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    for cost in [
        CostFunction::quadratic(),
        CostFunction::semigeostrophic(1.0),
    ] {
        for (i, (rho, rhobar)) in density_pairs().into_iter().enumerate() {
            let s = MAStructure::new(cost.clone(), rho.clone(), rhobar.clone());
            let pairs = interior_pairs(
                rho.domain(),
                rhobar.domain(),
                0.0,
                500,
                SEED + 20 + i as u64,
            )
            .unwrap();
            for (x, xb) in &pairs {
                if rho.eval(x) <= 0.0 || rhobar.eval(xb) <= 0.0 {
                    continue;
                }
                let c = conformal_defect_at(&s, x, xb).map_err(|e| e.to_string())?;
                for (name, m) in [("lr", c.lr.matrix()), ("kmw", c.kmw.matrix())] {
                    let sig = metric_signature(m, 1e-12 * m.amax());
                    ensure(sig.is_split(), || {
                        format!("{name} signature {sig:?} at {x:?}, {xb:?}")
                    })?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("(3, 3, 0) at {checked} points, both metrics"))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for cost in [
        CostFunction::quadratic(),
        CostFunction::semigeostrophic(1.0),
    ] {
        for (i, (rho, rhobar)) in density_pairs().into_iter().enumerate() {
            let s = MAStructure::new(cost.clone(), rho.clone(), rhobar.clone());
            let pairs = interior_pairs(
                rho.domain(),
                rhobar.domain(),
                0.0,
                500,
                SEED + 30 + i as u64,
            )
            .unwrap();
            for (x, xb) in &pairs {
                let omega = s.symplectic_form_at(x, xb).map_err(|e| e.to_string())?;
                let alpha = s.effective_form_at(x, xb).map_err(|e| e.to_string())?;
                worst = worst.max(effectiveness_defect(&omega, &alpha).map_err(|e| e.to_string())?);
            }
        }
    }
    let control = AltForm::monomial(&[DX1, DX2, DXBAR1], 1.0);
    let control_defect = effectiveness_defect(&canonical_symplectic(), &control).unwrap();
    ensure(worst <= 1e-12, || format!("effectiveness defect {worst:e}"))?;
    ensure(control_defect > 0.5, || {
        format!("control defect {control_defect}")
    })?;
    Ok(format!("defect {worst:.1e}, control {control_defect}"))
}

fn brute_force(c: &DMatrix<f64>) -> (f64, Vec<usize>) {
    fn go(
        c: &DMatrix<f64>,
        row: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        acc: f64,
        best: &mut (f64, Vec<usize>),
    ) {
        let n = c.nrows();
        if row == n {
            if acc < best.0 {
                *best = (acc, cur.clone());
            }
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                go(c, row + 1, used, cur, acc + c[(row, j)], best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    go(
        c,
        0,
        &mut vec![false; c.nrows()],
        &mut Vec::new(),
        0.0,
        &mut best,
    );
    best
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = sampling::rng(SEED + 40);
    let mut worst_gap: f64 = 0.0;
    let mut worst_support: f64 = 0.0;
    let mut worst_feas: f64 = 0.0;
    for k in 0..200 {
        let n = rng.random_range(1..=6);
        let c = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let problem = DiscreteOTProblem::uniform(c.clone()).map_err(|e| e.to_string())?;
        let sol = solve_assignment(&problem).map_err(|e| e.to_string())?;
        let (best, perm) = brute_force(&c);
        let total: f64 = sol
            .assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| c[(i, j)])
            .sum();
        ensure(sol.assignment == perm, || {
            format!("instance {k}: {:?} vs {:?}", sol.assignment, perm)
        })?;
        ensure((total - best).abs() <= 1e-12, || {
            format!("instance {k}: value {total} vs {best}")
        })?;
        let d = duality_report(&problem, &sol.plan, &sol.potentials, None);
        worst_gap = worst_gap.max(d.gap.abs());
        worst_support = worst_support.max(d.support_defect);
        worst_feas = worst_feas.max(d.feasibility_violation);
    }
    let elapsed = start.elapsed();
    ensure(worst_gap <= 1e-9, || format!("gap {worst_gap:e}"))?;
    ensure(worst_support <= 1e-9, || {
        format!("support defect {worst_support:e}")
    })?;
    ensure(worst_feas <= 1e-12, || {
        format!("feasibility violation {worst_feas:e}")
    })?;
    ensure(elapsed <= Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "200 instances, gap {worst_gap:.1e}, support {worst_support:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_7() -> Outcome {
    let half_sq =
        CostFunction::custom("half-squared-distance", |x, y| 0.5 * (x - y).norm_squared());
    let mut summary = Vec::new();
    for inst in 0..3u64 {
        let mut rng = sampling::rng(SEED + 50 + inst);
        let bx = DomainBox::new([0.0; 3], [1.0; 3]).unwrap();
        let xs: Vec<Point> = (0..16).map(|_| bx.sample(&mut rng)).collect();
        let ys: Vec<Point> = (0..16).map(|_| bx.sample(&mut rng)).collect();
        let w = vec![1.0 / 16.0; 16];
        let problem =
            DiscreteOTProblem::new(xs, w.clone(), ys, w, &half_sq).map_err(|e| e.to_string())?;
        let exact = solve_assignment(&problem).map_err(|e| e.to_string())?;
        let optimum = duality_report(&problem, &exact.plan, &exact.potentials, None).primal;
        let mean_c = problem.cost_matrix().mean();
        let mut prev = f64::INFINITY;
        for factor in [1.0, 0.3, 0.1, 0.03] {
            let sol = sinkhorn(
                &problem,
                SinkhornParams {
                    epsilon: factor * mean_c,
                    max_iter: 200_000,
                    tol: 1e-11,
                },
            )
            .map_err(|e| e.to_string())?;
            ensure(sol.converged, || {
                format!("instance {inst}: no convergence at {factor}")
            })?;
            ensure(sol.marginal_defect <= 1e-8, || {
                format!("instance {inst}: marginal defect {:e}", sol.marginal_defect)
            })?;
            let primal = problem
                .cost_matrix()
                .component_mul(&sol.plan.coupling)
                .sum();
            let excess = primal - optimum;
            ensure(excess >= -1e-9, || {
                format!("instance {inst}: below optimum by {excess:e}")
            })?;
            ensure(excess <= prev + 1e-9, || {
                format!("instance {inst}: excess rose from {prev:e} to {excess:e} at {factor}")
            })?;
            prev = excess;
        }
        summary.push(format!("{prev:.1e}"));
    }
    Ok(format!(
        "final excess over optimum [{}]",
        summary.join(", ")
    ))
}

/// Residual of the embedded 1-D monotone map at its grid nodes.
fn embedded_residual(grid_n: usize) -> Result<f64, String> {
    let (lo, hi) = (-1.0, 1.0);
    let (tlo, thi) = (-1.0, 1.5);
    let transverse = 0.5;
    let src1 = IntervalDensity::truncated_gaussian(0.0, 0.5, lo, hi).unwrap();
    let tgt1 = IntervalDensity::truncated_gaussian(0.3, 0.7, tlo, thi).unwrap();
    let rho = Density::truncated_gaussian(
        Vector3::zeros(),
        Matrix3::from_diagonal(&Vector3::new(
            0.25,
            transverse * transverse,
            transverse * transverse,
        )),
        DomainBox::cube(1.0),
    )
    .unwrap();
    let rhobar = Density::truncated_gaussian(
        Vector3::new(0.3, 0.0, 0.0),
        Matrix3::from_diagonal(&Vector3::new(
            0.49,
            transverse * transverse,
            transverse * transverse,
        )),
        DomainBox::new([tlo, -1.0, -1.0], [thi, 1.0, 1.0]).unwrap(),
    )
    .unwrap();
    let map = solve_monotone_1d(&src1, &tgt1, grid_n);
    let slope = MonotoneMap {
        grid: map.grid.clone(),
        values: map.derivative(),
    };
    let t = map.clone();
    let u = ScalarField::new(*rho.domain(), |_| f64::NAN)
        .with_gradient(move |x| Vector3::new(t.interpolate(x[0]), x[1], x[2]))
        .with_hessian(move |x| {
            Matrix3::from_diagonal(&Vector3::new(slope.interpolate(x[0]), 1.0, 1.0))
        });
    let s = MAStructure::new(CostFunction::quadratic(), rho.clone(), rhobar);
    let nodes: Vec<Point> = map
        .grid
        .iter()
        .map(|&g| rho.domain().clamp(&Point::new(g, 0.2, -0.3)))
        .collect();
    let summary = el_residual_grid(&s, &u, &nodes);
    ensure(summary.failed == 0, || {
        format!("{} failed points", summary.failed)
    })?;
    Ok(summary.max_abs)
}

fn criterion_8() -> Outcome {
    let r256 = embedded_residual(256)?;
    let r512 = embedded_residual(512)?;
    ensure(r256 <= 5e-3, || format!("residual at 256: {r256:e}"))?;
    ensure(r256 >= 1.8 * r512, || {
        format!("residual {r256:e} -> {r512:e} on doubling")
    })?;

    let rho = gaussian_source();
    let s = MAStructure::new(CostFunction::quadratic(), rho.clone(), rho.clone());
    let u = ScalarField::quadratic(*rho.domain(), Matrix3::identity(), Vector3::zeros());
    let grid = sampling::interior_points(rho.domain(), 0.0, 500, SEED + 60).unwrap();
    let exact = el_residual_grid(&s, &u, &grid);
    ensure(exact.failed == 0 && exact.max_abs <= 1e-10, || {
        format!(
            "|x|^2/2 residual {:e} ({} failed)",
            exact.max_abs, exact.failed
        )
    })?;
    Ok(format!(
        "256: {r256:.2e}, 512: {r512:.2e} (ratio {:.2}), identity {:.1e}",
        r256 / r512,
        exact.max_abs
    ))
}

fn random_orthogonal(rng: &mut impl Rng) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

fn criterion_9() -> Outcome {
    let rho = Density::uniform(DomainBox::cube(1.0));
    let rhobar = Density::uniform(DomainBox::cube(3.0));
    let s = MAStructure::new(CostFunction::quadratic(), rho.clone(), rhobar);
    let mut rng = sampling::rng(SEED + 70);
    let mut worst_lagrangian: f64 = 0.0;
    for k in 0..20 {
        let m = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let h = m * m.transpose() + 0.1 * Matrix3::identity();
        let b = Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5));
        let u = ScalarField::quadratic(*rho.domain(), h, b);
        let x = rho.domain().sample(&mut rng);
        let section = transport_map_from_potential(s.cost(), &u, &x).map_err(|e| e.to_string())?;
        let g = graph_geometry_check(&s, &x, &section).map_err(|e| e.to_string())?;
        worst_lagrangian = worst_lagrangian.max(g.lagrangian_defect);
        ensure(g.spacelike, || {
            format!(
                "convex case {k} not space-like: {:?}",
                g.restricted_eigenvalues
            )
        })?;
    }
    ensure(worst_lagrangian <= 1e-12, || {
        format!("Lagrangian defect {worst_lagrangian:e}")
    })?;
    for k in 0..20 {
        let q = random_orthogonal(&mut rng);
        let d = Vector3::new(
            rng.random_range(0.2..2.0),
            rng.random_range(0.2..2.0),
            -rng.random_range(0.2..2.0),
        );
        let h = q * Matrix3::from_diagonal(&d) * q.transpose();
        let u = ScalarField::quadratic(*rho.domain(), h, Vector3::zeros());
        let x = rho.domain().sample(&mut rng);
        let section = transport_map_from_potential(s.cost(), &u, &x).map_err(|e| e.to_string())?;
        let g = graph_geometry_check(&s, &x, &section).map_err(|e| e.to_string())?;
        ensure(!g.spacelike, || {
            format!("indefinite case {k} reported space-like")
        })?;
    }
    let mut weakest: f64 = f64::INFINITY;
    for k in 0..5 {
        let sym = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let sym = 0.5 * (sym + sym.transpose());
        let a = rng.random_range(0.5..1.5);
        let skew = Matrix3::new(0.0, a, 0.0, -a, 0.0, 0.0, 0.0, 0.0, 0.0);
        let jac = sym + skew;
        let x = rho.domain().sample(&mut rng);
        let section = GraphSection::new(jac * x, jac).map_err(|e| e.to_string())?;
        let g = graph_geometry_check(&s, &x, &section).map_err(|e| e.to_string())?;
        weakest = weakest.min(g.lagrangian_defect);
        ensure(g.lagrangian_defect > 0.1, || {
            format!("non-gradient case {k}: defect {}", g.lagrangian_defect)
        })?;
    }
    Ok(format!(
        "convex defect {worst_lagrangian:.1e}, smallest non-gradient defect {weakest:.2}"
    ))
}

fn random_form(rng: &mut impl Rng, degree: usize) -> AltForm {
    let n = otgeom::exterior::basis_len(degree);
    AltForm::from_coeffs(
        degree,
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

fn random_vector(rng: &mut impl Rng) -> Vector6<f64> {
    Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

fn criterion_10() -> Outcome {
    let tol = 1e-12;
    let mut rng = sampling::rng(SEED + 80);
    let mut worst = [0.0f64; 4];
    for _ in 0..1000 {
        let (p, q) = (rng.random_range(0..=DIM), rng.random_range(0..=DIM));
        let r = rng.random_range(0..=DIM);
        let (a, b) = (random_form(&mut rng, p), random_form(&mut rng, q));
        if p + q + r <= DIM {
            let c = random_form(&mut rng, r);
            let lhs = a.wedge(&b).unwrap().wedge(&c).unwrap();
            let rhs = a.wedge(&b.wedge(&c).unwrap()).unwrap();
            worst[0] = worst[0].max((&lhs - &rhs).max_abs());
        }
        if p + q <= DIM {
            let ab = a.wedge(&b).unwrap();
            let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
            let ba = sign * b.wedge(&a).unwrap();
            worst[1] = worst[1].max((&ab - &ba).max_abs());
            if p > 0 || q > 0 {
                let v = random_vector(&mut rng);
                let lhs = ab.interior(&v).unwrap();
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                let mut rhs = if p > 0 {
                    a.interior(&v).unwrap().wedge(&b).unwrap()
                } else {
                    AltForm::zero(p + q - 1)
                };
                if q > 0 {
                    rhs = rhs + sign * a.wedge(&b.interior(&v).unwrap()).unwrap();
                }
                worst[2] = worst[2].max((&lhs - &rhs).max_abs());
            }
        }
        let theta = AltForm::one_form(&random_vector(&mut rng));
        worst[3] = worst[3].max(theta.wedge(&theta).unwrap().max_abs());
        if p >= 2 {
            let v = random_vector(&mut rng);
            worst[3] = worst[3].max(a.interior(&v).unwrap().interior(&v).unwrap().max_abs());
        }
    }
    ensure(worst.iter().all(|&w| w <= tol), || {
        format!("associativity/commutativity/antiderivation/nilpotency {worst:?}")
    })?;
    Ok(format!(
        "4000 checks, worst {:.1e}",
        worst.iter().fold(0.0f64, |a, &b| a.max(b))
    ))
}

const PASS_CONFIG: &str = r#"
command = "verify-conformal"
samples = 200
seed = 7

[cost]
kind = "quadratic"

[source]
kind = "gaussian"
lo = [-1.0, -1.0, -1.0]
hi = [1.0, 1.0, 1.0]
mean = [0.1, 0.0, -0.1]
variance = [0.4, 0.3, 0.5]

[target]
kind = "uniform"
lo = [-1.0, -1.0, 0.0]
hi = [2.0, 1.0, 1.5]

[output]
points_csv = true
"#;

fn run_cli(config: &Path, out: &Path) -> Result<(i32, Option<Vec<u8>>), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_otgeom"))
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    let code = status.status.code().ok_or("killed by signal")?;
    Ok((code, fs::read(out.join("report.json")).ok()))
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let pass = write("pass.toml", PASS_CONFIG);
    let fail = write(
        "fail.toml",
        &PASS_CONFIG.replace(
            "kind = \"quadratic\"",
            "kind = \"custom\"\nformula = \"exp-twist\"",
        ),
    );
    let invalid = write(
        "invalid.toml",
        &PASS_CONFIG.replace("samples = 200", "sampels = 200"),
    );
    let sg_f2 = write(
        "sg.toml",
        &PASS_CONFIG.replace("verify-conformal", "sg-demo").replace(
            "kind = \"quadratic\"",
            "kind = \"semigeostrophic\"\nf = 2.0",
        ),
    );

    let out = dir.path().join("run");
    let (c1, r1) = run_cli(&pass, &out)?;
    let csv1 = fs::read(out.join("points.csv")).map_err(|e| e.to_string())?;
    fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
    let (c2, r2) = run_cli(&pass, &out)?;
    let csv2 = fs::read(out.join("points.csv")).map_err(|e| e.to_string())?;
    ensure(c1 == 0 && c2 == 0, || {
        format!("pass fixture exited {c1}, {c2}")
    })?;
    ensure(r1.is_some() && r1 == r2, || {
        "report.json differs between runs".into()
    })?;
    ensure(csv1 == csv2, || "points.csv differs between runs".into())?;

    let (cf, rf) = run_cli(&fail, &dir.path().join("fail"))?;
    ensure(cf == 1 && rf.is_some(), || {
        format!("fail fixture exited {cf}")
    })?;
    let (ci, _) = run_cli(&invalid, &dir.path().join("invalid"))?;
    ensure(ci == 2, || format!("invalid fixture exited {ci}"))?;
    let (cs, _) = run_cli(&sg_f2, &dir.path().join("sg"))?;
    ensure(cs == 2, || format!("sg-demo with f = 2 exited {cs}"))?;
    Ok(format!(
        "byte-identical reports; exit codes pass {c1}, fail {cf}, invalid {ci}, f=2 {cs}"
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("quadratic cost conformal relation", criterion_1),
        ("semigeostrophic structure", criterion_2),
        ("closed-form metric pins", criterion_3),
        ("split signature", criterion_4),
        ("effectiveness", criterion_5),
        ("assignment duality", criterion_6),
        ("entropic consistency", criterion_7),
        ("Monge-Ampere residual bridge", criterion_8),
        ("graph geometry", criterion_9),
        ("exterior algebra properties", criterion_10),
        ("CLI determinism and exit codes", criterion_11),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("acceptance {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
