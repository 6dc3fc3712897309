mod common;

use common::*;
use proptest::prelude::*;
use rlt_core::gen::{self, Certificate, GeneratedInstance, InstanceKind};
use rlt_core::io::{emit_instance, generated_meta};
use rlt_core::rlt::{build_rlt, enumerate_lifted_vertices, lift};
use rlt_core::{
    certify_exactness, check_optimality, ExactnessStatus, LpStatus, Mat, Polyhedron, QpInstance, Vector,
};

fn regions(kind: InstanceKind) -> Vec<Polyhedron> {
    match kind {
        InstanceKind::Unbounded => vec![strip(), Polyhedron::orthant(2), slab3(), prism3(), Polyhedron::orthant(3)],
        InstanceKind::Exact => vec![
            Polyhedron::unit_box(2),
            Polyhedron::standard_simplex(3),
            strip(),
            prism3(),
            Polyhedron::orthant(2),
        ],
        InstanceKind::InexactVertices => {
            vec![Polyhedron::unit_box(2), Polyhedron::standard_simplex(3), Polyhedron::unit_box(3)]
        }
        InstanceKind::InexactMinFaces => vec![strip(), slab3(), prism3()],
    }
}

fn generate(kind: InstanceKind, seed: u64) -> GeneratedInstance {
    let rs = regions(kind);
    let poly = &rs[seed as usize % rs.len()];
    let pick = |count: usize| {
        let i = (seed as usize / rs.len()) % count;
        (i, (i + 1 + (seed as usize / 7) % (count - 1)) % count)
    };
    match kind {
        InstanceKind::Unbounded => gen::gen_unbounded(poly, seed),
        InstanceKind::Exact => {
            let count = poly.enumerate_minimal_faces().unwrap().len();
            gen::gen_exact(poly, seed as usize % count, seed)
        }
        InstanceKind::InexactVertices => {
            let verts = poly.enumerate_vertices().unwrap();
            let (i, j) = pick(verts.len());
            gen::gen_inexact_vertices(poly, &verts[i], &verts[j], seed)
        }
        InstanceKind::InexactMinFaces => {
            let (i, j) = pick(poly.enumerate_minimal_faces().unwrap().len());
            gen::gen_inexact_minfaces(poly, i, j, seed)
        }
    }
    .unwrap()
}

fn kind_strategy() -> impl Strategy<Value = InstanceKind> {
    prop::sample::select(InstanceKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_reverify(kind in kind_strategy(), seed in 0u64..10_000) {
        let inst = generate(kind, seed);
        let qp = &inst.qp;
        match &inst.certificate {
            Certificate::Ray { origin, direction, value } => {
                prop_assert!(qp.poly.contains(origin, 1e-9).unwrap());
                let recomputed = 0.5 * qp.q.component_mul(&direction.products).sum() + qp.c.dot(&direction.d);
                prop_assert!((recomputed - value).abs() <= 1e-12 && recomputed < 0.0);
                prop_assert_eq!(rlt_core::solve_rlt(qp).unwrap().status, LpStatus::Unbounded);
            }
            Certificate::Exact { witness, face_index, dual } => {
                prop_assert!(check_optimality(qp, &lift(witness), dual, 1e-8).unwrap());
                let report = certify_exactness(qp).unwrap();
                prop_assert_eq!(report.status, ExactnessStatus::Exact);
                prop_assert!((report.rlt_bound - report.qp_value).abs() <= 1e-7);
                prop_assert!((qp.objective(witness) - report.qp_value).abs() <= 1e-7);
                let face = &qp.poly.enumerate_minimal_faces().unwrap()[*face_index];
                prop_assert_eq!(&qp.poly.face_of(witness).active_ineq, &face.active_ineq);
            }
            Certificate::Inexact { optimum, dual, .. } => {
                prop_assert!(check_optimality(qp, optimum, dual, 1e-8).unwrap());
                let report = certify_exactness(qp).unwrap();
                prop_assert_eq!(report.status, ExactnessStatus::Inexact);
                prop_assert!(report.qp_value - report.rlt_bound > 1e-6);
                prop_assert!((qp.lifted_objective(optimum) - report.rlt_bound).abs() <= 1e-7);
            }
        }
        prop_assert!(gen::verify(&inst).unwrap().ok);
    }

    #[test]
    fn generation_is_byte_deterministic(kind in kind_strategy(), seed in 0u64..10_000) {
        let a = generate(kind, seed);
        let b = generate(kind, seed);
        prop_assert_eq!(emit_instance(&a.qp, &generated_meta(&a)), emit_instance(&b.qp, &generated_meta(&b)));
    }

    #[test]
    fn one_minimal_face_is_never_inexact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 2 + (seed % 2) as usize;
        let poly = shifted_pointed_cone(&mut r, n);
        prop_assert_eq!(poly.enumerate_minimal_faces().unwrap().len(), 1);
        let qp = QpInstance::new(random_symmetric(&mut r, n), random_vector(&mut r, n, -1.0, 1.0), poly).unwrap();
        let report = certify_exactness(&qp).unwrap();
        prop_assert!(report.status != ExactnessStatus::Inexact, "{report:?}");
    }

    #[test]
    fn single_vertex_lifts_to_the_only_lifted_vertex(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 1 + (seed % 3) as usize;
        let poly = shifted_pointed_cone(&mut r, n);
        let verts = poly.enumerate_vertices().unwrap();
        prop_assert_eq!(verts.len(), 1);
        let qp = QpInstance::new(Mat::zeros(n, n), Vector::zeros(n), poly).unwrap();
        let rel = build_rlt(&qp);
        let found: Vec<Vec<f64>> = enumerate_lifted_vertices(&rel).unwrap().iter().map(|p| rel.to_vector(p)).collect();
        prop_assert!(same_point_set(&found, &[rel.to_vector(&lift(&verts[0]))], 1e-7), "{found:?}");
    }
}

/// `{x : A(x − v) ≤ 0}` with `A` a random well-conditioned `n×n` matrix, so
/// `v` is the only vertex.
fn shifted_pointed_cone(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Polyhedron {
    let vertex = random_vector(r, n, -1.0, 1.0);
    loop {
        let a = Mat::from_fn(n, n, |i, j| (if i == j { 1.0 } else { 0.0 }) + uniform(r, -0.4, 0.4));
        if a.clone().svd(false, false).singular_values.min() > 0.2 {
            let rhs = &a * &vertex;
            return Polyhedron::from_rows(&a, rhs, &Mat::zeros(0, n), Vector::zeros(0)).unwrap();
        }
    }
}

#[test]
fn different_seeds_give_different_objectives() {
    for kind in InstanceKind::ALL {
        let a = generate(kind, 3);
        let b = generate(kind, 3 + 5 * 7 * 3);
        assert!(a.qp.q != b.qp.q || a.qp.c != b.qp.c, "{kind:?}");
    }
}

#[test]
fn invalid_requests_are_rejected() {
    use rlt_core::Error;
    let bx = Polyhedron::unit_box(2);
    assert_eq!(gen::gen_unbounded(&bx, 0).unwrap_err(), Error::BoundedRegion);
    assert_eq!(gen::gen_exact(&bx, 9, 0).unwrap_err(), Error::BadFaceIndex { index: 9, count: 4 });
    assert_eq!(gen::gen_inexact_vertices(&bx, &v(&[0.5, 0.0]), &v(&[1.0, 1.0]), 0).unwrap_err(), Error::NotAVertex);
    assert_eq!(gen::gen_inexact_vertices(&bx, &v(&[1.0, 1.0]), &v(&[1.0, 1.0]), 0).unwrap_err(), Error::IdenticalVertices);
    assert_eq!(gen::gen_inexact_minfaces(&bx, 0, 1, 0).unwrap_err(), Error::HasVertices);
    assert!(matches!(gen::gen_inexact_minfaces(&strip(), 0, 0, 0), Err(Error::InvalidArgument(_))));
}
