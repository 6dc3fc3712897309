//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rlt_core::dualcert::{self, ExactnessStatus};
use rlt_core::gen::{self, Certificate, InstanceKind};
use rlt_core::rlt::{self, RltRelaxation};
use rlt_core::special;
use rlt_core::{oracle, DualSolution, LpStatus, Mat, OracleStatus, Polyhedron, QpInstance, Vector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: rlt_core::Error) -> String {
    e.to_string()
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:.0?}"))
}

fn flat(rel: &RltRelaxation, pt: &rlt_core::LiftedPoint) -> Vec<f64> {
    rel.to_vector(pt)
}

fn box_instance_reproduction() -> Outcome {
    let start = Instant::now();
    let qp = box_instance();
    let sol = rlt::solve_rlt(&qp).map_err(err)?;
    ensure((sol.value + 1.5).abs() <= 1e-7, || format!("ℓ*_R = {}", sol.value))?;
    let qpa = special::build_qpa(&qp).map_err(err)?;
    ensure(qpa.a_a.iter().all(|a| *a == 1.0), || "QPA is not a standard quadratic program".into())?;
    let rla = special::stqp_bound(&qpa.q_a, &qpa.c_a);
    ensure((rla + 1.0).abs() <= 1e-7, || format!("ℓ*_RA = {rla}"))?;
    let global = oracle::global_min_qp(&qp).map_err(err)?;
    let x = global.argmin.clone().unwrap_or_else(|| Vector::zeros(2));
    ensure(
        global.status == OracleStatus::Optimal
            && (global.value + 1.0).abs() <= 1e-7
            && (x - v(&[1.0, 0.0])).amax() <= 1e-7,
        || format!("oracle {global:?}"),
    )?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("ℓ*_R={} ℓ*_RA={rla} ℓ*={}", sol.value, global.value))
}

fn strip_instance_reproduction() -> Outcome {
    let start = Instant::now();
    let dual = DualSolution {
        u: Vector::zeros(2),
        w: Vector::zeros(0),
        r: Mat::zeros(0, 2),
        s: Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]),
    };
    let inst = gen::inexact_from_parts(&strip(), &v(&[1.0, 0.0]), &v(&[0.0, -1.0]), dual, InstanceKind::InexactMinFaces, 0)
        .map_err(err)?;
    ensure(inst.qp.q == Mat::from_element(2, 2, 3.0), || format!("Q = {}", inst.qp.q))?;
    ensure(inst.qp.c == v(&[1.0, 1.0]), || format!("c = {}", inst.qp.c))?;
    let report = dualcert::certify_exactness(&inst.qp).map_err(err)?;
    ensure(
        report.status == ExactnessStatus::Inexact
            && (report.rlt_bound + 1.5).abs() <= 1e-7
            && (report.qp_value + 1.0 / 6.0).abs() <= 1e-7,
        || format!("{report:?}"),
    )?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("Q=[[3,3],[3,3]] c=(1,1) ℓ*_R={} ℓ*={}", report.rlt_bound, report.qp_value))
}

fn unit_box_lifted_vertices() -> Outcome {
    let start = Instant::now();
    let qp = QpInstance::new(Mat::zeros(2, 2), Vector::zeros(2), Polyhedron::unit_box(2)).unwrap();
    let rel = rlt::build_rlt(&qp);
    let vs = [v(&[0.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0])];
    let mut structural = Vec::new();
    for a in &vs {
        structural.push(rlt::lift(a));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            structural.push(rlt::midpoint_lift(&vs[i], &vs[j]));
        }
    }
    let extra = rlt_core::LiftedPoint { x: v(&[0.5, 0.5]), products: Mat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]) };
    for pt in structural.iter().chain(std::iter::once(&extra)) {
        ensure(rlt::is_vertex_of_lifted(pt, &rel).map_err(err)?, || format!("not a vertex: {pt:?}"))?;
    }
    let found: Vec<Vec<f64>> = rlt::enumerate_lifted_vertices(&rel).map_err(err)?.iter().map(|p| flat(&rel, p)).collect();
    for pt in &structural {
        ensure(contains_point(&found, &flat(&rel, pt), 1e-7), || format!("missing {pt:?}"))?;
    }
    ensure(contains_point(&found, &flat(&rel, &extra), 1e-7), || "extra vertex not enumerated".into())?;
    ensure(found.len() > structural.len(), || "no vertex beyond the structural ten".into())?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("10 structural vertices confirmed, {} vertices enumerated", found.len()))
}

fn stqp_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut r = rng(1000 + seed);
        let n = 2 + (seed as usize % 4);
        let q = random_symmetric(&mut r, n);
        let c = random_vector(&mut r, n, -1.0, 1.0);
        let closed = special::stqp_bound(&q, &c);
        let qp = QpInstance::new(q, c, Polyhedron::standard_simplex(n)).unwrap();
        let sol = rlt::solve_rlt(&qp).map_err(err)?;
        ensure(sol.status == LpStatus::Optimal, || format!("seed {seed}: relaxation {:?}", sol.status))?;
        let diff = (closed - sol.value).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-8, || format!("seed {seed}: closed form {closed} vs LP {}", sol.value))?;
    }
    Ok(format!("50 instances, max |difference| = {worst:.1e}"))
}

fn specific_class_vertex_set() -> Outcome {
    for seed in 0..10u64 {
        let mut r = rng(2000 + seed);
        let n = 2 + (seed as usize % 2);
        let a = random_vector(&mut r, n, 0.2, 3.0);
        let qp = QpInstance::new(Mat::zeros(n, n), Vector::zeros(n), Polyhedron::weighted_simplex(&a)).unwrap();
        let rel = rlt::build_rlt(&qp);
        let found: Vec<Vec<f64>> =
            rlt::enumerate_lifted_vertices(&rel).map_err(err)?.iter().map(|p| flat(&rel, p)).collect();
        // vertices (1/a_j)eʲ computed here from the weights directly
        let vs: Vec<Vector> = (0..n)
            .map(|j| {
                let mut e = Vector::zeros(n);
                e[j] = 1.0 / a[j];
                e
            })
            .collect();
        let mut expected = Vec::new();
        for i in 0..n {
            expected.push(flat(&rel, &rlt::lift(&vs[i])));
            for j in i + 1..n {
                expected.push(flat(&rel, &rlt::midpoint_lift(&vs[i], &vs[j])));
            }
        }
        ensure(found.len() == expected.len() && same_point_set(&found, &expected, 1e-7), || {
            format!("seed {seed}: {} enumerated vs {} structural", found.len(), expected.len())
        })?;
    }
    Ok("10 weight vectors, enumerated set equals lifts ∪ midpoint lifts".into())
}

fn generator_postconditions() -> Outcome {
    let unbounded_regions = [strip(), Polyhedron::orthant(2), slab3(), from_rows(2, &[-1.0, 0.0, 1.0, -1.0], &[0.0, 1.0])];
    let exact_regions = [Polyhedron::unit_box(2), Polyhedron::standard_simplex(3), Polyhedron::unit_box(3), strip()];
    let vertex_regions = [Polyhedron::unit_box(2), Polyhedron::standard_simplex(3), Polyhedron::unit_box(3)];
    let face_regions = [strip(), slab3(), prism3()];
    let mut min_gap = f64::INFINITY;
    for seed in 0..20u64 {
        let poly = &unbounded_regions[seed as usize % unbounded_regions.len()];
        let inst = gen::gen_unbounded(poly, seed).map_err(err)?;
        let Certificate::Ray { direction, .. } = &inst.certificate else { unreachable!() };
        let value = 0.5 * inst.qp.q.component_mul(&direction.products).sum() + inst.qp.c.dot(&direction.d);
        ensure((value + 1.0).abs() <= 1e-9, || format!("unbounded seed {seed}: ray value {value}"))?;
        ensure(rlt::in_lifted_recession_cone(poly, direction), || format!("unbounded seed {seed}: ray outside cone"))?;
        let status = rlt::solve_rlt(&inst.qp).map_err(err)?.status;
        ensure(status == LpStatus::Unbounded, || format!("unbounded seed {seed}: status {status:?}"))?;
    }
    for seed in 0..20u64 {
        let poly = &exact_regions[seed as usize % exact_regions.len()];
        let faces = poly.enumerate_minimal_faces().map_err(err)?;
        let inst = gen::gen_exact(poly, seed as usize % faces.len(), seed).map_err(err)?;
        let report = dualcert::certify_exactness(&inst.qp).map_err(err)?;
        ensure(
            report.status == ExactnessStatus::Exact && (report.rlt_bound - report.qp_value).abs() <= 1e-7,
            || format!("exact seed {seed}: {report:?}"),
        )?;
    }
    for seed in 0..20u64 {
        let poly = &vertex_regions[seed as usize % vertex_regions.len()];
        let verts = poly.enumerate_vertices().map_err(err)?;
        let i = seed as usize % verts.len();
        let j = (i + 1 + (seed as usize / 3) % (verts.len() - 1)) % verts.len();
        let inst = gen::gen_inexact_vertices(poly, &verts[i], &verts[j], seed).map_err(err)?;
        let report = dualcert::certify_exactness(&inst.qp).map_err(err)?;
        let gap = report.qp_value - report.rlt_bound;
        min_gap = min_gap.min(gap);
        ensure(report.status == ExactnessStatus::Inexact && gap >= 1e-6, || {
            format!("inexact-vertices seed {seed}: {report:?}")
        })?;
    }
    for seed in 0..20u64 {
        let poly = &face_regions[seed as usize % face_regions.len()];
        let count = poly.enumerate_minimal_faces().map_err(err)?.len();
        let f1 = seed as usize % count;
        let f2 = (f1 + 1 + (seed as usize / 3) % (count - 1)) % count;
        let inst = gen::gen_inexact_minfaces(poly, f1, f2, seed).map_err(err)?;
        let report = dualcert::certify_exactness(&inst.qp).map_err(err)?;
        let gap = report.qp_value - report.rlt_bound;
        min_gap = min_gap.min(gap);
        ensure(report.status == ExactnessStatus::Inexact && gap >= 1e-6, || {
            format!("inexact-faces seed {seed}: {report:?}")
        })?;
    }
    Ok(format!("80 instances verified, smallest inexact gap {min_gap:.3}"))
}

fn sandwich_property() -> Outcome {
    for seed in 0..50u64 {
        let mut r = rng(3000 + seed);
        let n = 1 + (seed as usize % 3);
        let poly = random_bounded_region(&mut r, n);
        let qp = QpInstance::new(random_symmetric(&mut r, n), random_vector(&mut r, n, -1.0, 1.0), poly).unwrap();
        let s = special::bound_sandwich(&qp).map_err(|e| format!("seed {seed}: {e}"))?;
        let tol = 1e-7;
        ensure(s.rlt <= s.rlt_qpa + tol && s.rlt_qpa <= s.qp + tol, || format!("seed {seed}: {s:?}"))?;
    }
    Ok("50 bounded instances ordered".into())
}

fn boundedness_transfer() -> Outcome {
    let (mut bounded, mut unbounded) = (0, 0);
    for seed in 0..30u64 {
        let mut r = rng(4000 + seed);
        let n = 2 + (seed as usize % 2);
        let poly = match seed % 3 {
            0 => random_bounded_region(&mut r, n),
            1 => random_region(&mut r, n, n + 2),
            _ => random_region(&mut r, n, 1 + (seed as usize % n)),
        };
        let is_bounded = poly.is_bounded().map_err(err)?;
        let dir = rlt::lifted_recession_direction(&poly).map_err(err)?;
        if let Some(d) = &dir {
            ensure(rlt::in_lifted_recession_cone(&poly, d), || format!("seed {seed}: direction outside the cone"))?;
        }
        ensure(is_bounded == dir.is_none(), || {
            format!("seed {seed}: bounded={is_bounded} but lifted direction {dir:?}")
        })?;
        if is_bounded {
            bounded += 1;
        } else {
            unbounded += 1;
        }
    }
    Ok(format!("30 regions agree ({bounded} bounded, {unbounded} unbounded)"))
}

fn one_minimal_face_dichotomy() -> Outcome {
    let regions = [
        Polyhedron::orthant(2),
        from_rows(3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0], &[-1.0, 1.0, 0.0]),
        from_rows(2, &[1.0, -1.0, -1.0, -1.0], &[0.0, 0.0]),
        from_rows(3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0], &[0.0, 0.0]),
        Polyhedron::new(Mat::zeros(2, 0), Vector::zeros(0), Mat::identity(2, 2), v(&[0.5, -1.0])).unwrap(),
    ];
    let mut counts = [0usize; 4];
    for (k, poly) in regions.iter().enumerate() {
        let faces = poly.enumerate_minimal_faces().map_err(err)?;
        ensure(faces.len() == 1, || format!("region {k} has {} minimal faces", faces.len()))?;
        for t in 0..50u64 {
            let mut r = rng(5000 + 100 * k as u64 + t);
            let n = poly.n();
            let qp = QpInstance::new(random_symmetric(&mut r, n), random_vector(&mut r, n, -1.0, 1.0), poly.clone())
                .unwrap();
            let report = dualcert::certify_exactness(&qp).map_err(|e| format!("region {k} draw {t}: {e}"))?;
            ensure(report.status != ExactnessStatus::Inexact, || format!("region {k} draw {t}: {report:?}"))?;
            counts[report.status as usize] += 1;
        }
    }
    Ok(format!(
        "250 draws: {} exact, {} unbounded relaxation, {} unbounded program",
        counts[ExactnessStatus::Exact as usize],
        counts[ExactnessStatus::UnboundedRelaxation as usize],
        counts[ExactnessStatus::UnboundedQp as usize]
    ))
}

fn underestimator_properties() -> Outcome {
    let mut finite = 0usize;
    let mut convexity_checks = 0usize;
    for k in 0..10u64 {
        let mut r = rng(6000 + k);
        let poly = match k {
            0..=6 => random_bounded_region(&mut r, 2 + (k as usize % 2)),
            7 => strip(),
            8 => Polyhedron::orthant(2),
            _ => prism3(),
        };
        let n = poly.n();
        let qp = QpInstance::new(random_symmetric(&mut r, n), random_vector(&mut r, n, -1.0, 1.0), poly).unwrap();
        let samples = qp.poly.sample_points(100, &mut r).map_err(err)?;
        let mut values = Vec::with_capacity(samples.len());
        for x in &samples {
            let lr = dualcert::underestimator(&qp, x).map_err(err)?;
            let q = qp.objective(x);
            ensure(lr <= q + 1e-8, || format!("instance {k}: ℓ_R = {lr} > q = {q} at {x}"))?;
            if lr.is_finite() {
                finite += 1;
            }
            values.push(lr);
        }
        for p in 0..samples.len() / 2 {
            let (a, b) = (2 * p, 2 * p + 1);
            for lambda in [0.25, 0.5, 0.75] {
                let x = &samples[a] * lambda + &samples[b] * (1.0 - lambda);
                let mid = dualcert::underestimator(&qp, &x).map_err(err)?;
                if mid.is_finite() && values[a].is_finite() && values[b].is_finite() {
                    let rhs = lambda * values[a] + (1.0 - lambda) * values[b];
                    ensure(mid <= rhs + 1e-8, || format!("instance {k}: convexity fails, {mid} > {rhs}"))?;
                    convexity_checks += 1;
                }
            }
        }
    }
    Ok(format!("1000 samples ({finite} finite), {convexity_checks} convexity checks"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("nonconvex box instance", box_instance_reproduction),
        ("strip instance", strip_instance_reproduction),
        ("unit-box lifted vertices", unit_box_lifted_vertices),
        ("StQP closed form", stqp_closed_form),
        ("complete vertex set, specific class", specific_class_vertex_set),
        ("generator postconditions", generator_postconditions),
        ("sandwich property", sandwich_property),
        ("boundedness transfer", boundedness_transfer),
        ("one-minimal-face dichotomy", one_minimal_face_dichotomy),
        ("underestimator properties", underestimator_properties),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("acceptance {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(reason) => {
                failures += 1;
                println!("acceptance {:>2} FAIL  {name}: {reason} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
