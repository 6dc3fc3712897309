#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlt_core::{Mat, Polyhedron, QpInstance, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_vec(xs.to_vec())
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(n, |_, _| uniform(rng, lo, hi))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let mut q = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = uniform(rng, -1.0, 1.0);
            q[(i, j)] = x;
            q[(j, i)] = x;
        }
    }
    q
}

pub fn box_instance() -> QpInstance {
    QpInstance::new(Mat::from_row_slice(2, 2, &[-2.0, 2.0, 2.0, 2.0]), v(&[0.0, -2.0]), Polyhedron::unit_box(2))
        .unwrap()
}

/// `{x ∈ ℝ² : −1 ≤ x₁ + x₂ ≤ 1}`.
pub fn strip() -> Polyhedron {
    Polyhedron::new(
        Mat::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]),
        v(&[1.0, 1.0]),
        Mat::zeros(2, 0),
        Vector::zeros(0),
    )
    .unwrap()
}

/// `{x ∈ ℝ³ : −1 ≤ x₁ + x₂ + x₃ ≤ 1}`: two parallel planes as minimal faces.
pub fn slab3() -> Polyhedron {
    Polyhedron::new(
        Mat::from_row_slice(3, 2, &[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]),
        v(&[1.0, 1.0]),
        Mat::zeros(3, 0),
        Vector::zeros(0),
    )
    .unwrap()
}

/// `[−1, 1]² × ℝ`: four vertical lines as minimal faces.
pub fn prism3() -> Polyhedron {
    let g = Mat::from_row_slice(3, 4, &[1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
    Polyhedron::new(g, v(&[1.0, 1.0, 1.0, 1.0]), Mat::zeros(3, 0), Vector::zeros(0)).unwrap()
}

/// Rows `a_iᵀx ≤ b_i` given as a row-major list.
pub fn from_rows(n: usize, rows: &[f64], rhs: &[f64]) -> Polyhedron {
    let a = Mat::from_row_slice(rhs.len(), n, rows);
    Polyhedron::from_rows(&a, v(rhs), &Mat::zeros(0, n), Vector::zeros(0)).unwrap()
}

/// The unit box, optionally cut by a random halfspace through an interior point.
pub fn random_bounded_region(rng: &mut ChaCha8Rng, n: usize) -> Polyhedron {
    let base = Polyhedron::unit_box(n);
    if rng.random::<f64>() < 0.3 {
        return base;
    }
    let a = random_vector(rng, n, -1.0, 1.0);
    let center = random_vector(rng, n, 0.3, 0.7);
    let mut g = base.ineq_normals.clone().insert_column(2 * n, 0.0);
    g.set_column(2 * n, &a);
    let mut rhs = base.ineq_rhs.clone().insert_row(2 * n, 0.0);
    rhs[2 * n] = a.dot(&center);
    Polyhedron::new(g, rhs, Mat::zeros(n, 0), Vector::zeros(0)).unwrap()
}

/// `m` random halfspaces all containing a random point; may be unbounded.
pub fn random_region(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Polyhedron {
    let x0 = random_vector(rng, n, -1.0, 1.0);
    let g = Mat::from_fn(n, m, |_, _| uniform(rng, -1.0, 1.0));
    let rhs = g.transpose() * &x0 + random_vector(rng, m, 0.1, 1.0);
    Polyhedron::new(g, rhs, Mat::zeros(n, 0), Vector::zeros(0)).unwrap()
}

/// Every point of `a` is within `tol` of some point of `b` and vice versa.
pub fn same_point_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let close = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol);
    a.iter().all(|x| b.iter().any(|y| close(x, y))) && b.iter().all(|y| a.iter().any(|x| close(x, y)))
}

pub fn contains_point(set: &[Vec<f64>], x: &[f64], tol: f64) -> bool {
    set.iter().any(|y| y.iter().zip(x).all(|(p, q)| (p - q).abs() <= tol))
}
