//! Exhaustive global minimization of a quadratic over a small polyhedron.
//!
//! Serves as ground truth for the relaxation. The minimum of a quadratic that
//! is bounded below on a polyhedron is attained, and it is attained at a
//! stationary point of `q` restricted to the affine hull of some face. Every
//! linearly independent active set is visited, its reduced stationary system
//! solved, and the best feasible candidate kept.
//!
//! Boundedness is settled first. With `F = conv(V) + cone(W)`, `q` is bounded
//! below on `F` iff every `ψᵥ(z) = (Qv + c)ᵀWz + ½zᵀ(WᵀQW)z` is bounded below
//! on `z ≥ 0`, which holds iff `M = WᵀQW` is copositive and `(Qv + c)ᵀWz ≥ 0`
//! on every `z ≥ 0` with `zᵀMz = 0`. Copositivity is an optimization over the
//! simplex (bounded, so this oracle solves it), and the zero set of a
//! copositive `M` is the union over supports `J` of `{z_J ≥ 0 : M_JJ z_J = 0}`.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::{self, Mat, Vector};
use crate::lp::{self, LpProblem, LpStatus};
use crate::poly::{Decomposition, FaceDescriptor, Polyhedron};
use crate::rlt::QpInstance;
use crate::tol;

/// Largest number of inequalities (the oracle visits up to `2^m` active sets).
pub const MAX_INEQ: usize = 17;
pub const MAX_DIM: usize = 16;
/// Largest number of conic generators for the exact boundedness test.
pub const MAX_GENERATORS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Unbounded,
    Infeasible,
    /// Boundedness could not be decided; no value is reported.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalQpResult {
    pub status: OracleStatus,
    /// `ℓ*`: finite when Optimal, `−∞` when Unbounded, `+∞` when Infeasible.
    pub value: f64,
    pub argmin: Option<Vector>,
    pub attaining_face: Option<FaceDescriptor>,
    /// `(x̂, d̂)` along which `q` decreases without bound (Unbounded only).
    pub ray: Option<(Vector, Vector)>,
}

impl GlobalQpResult {
    fn with_status(status: OracleStatus, value: f64) -> Self {
        Self { status, value, argmin: None, attaining_face: None, ray: None }
    }
}

pub fn global_min_qp(qp: &QpInstance) -> Result<GlobalQpResult> {
    global_min_qp_with(qp, Execution::default())
}

pub fn global_min_qp_with(qp: &QpInstance, exec: Execution) -> Result<GlobalQpResult> {
    let poly = &qp.poly;
    if poly.n() > MAX_DIM || poly.m() > MAX_INEQ {
        return Err(Error::ScaleLimit(format!(
            "oracle handles n ≤ {MAX_DIM}, m ≤ {MAX_INEQ}; got n = {}, m = {}",
            poly.n(),
            poly.m()
        )));
    }
    if poly.is_empty()? {
        return Ok(GlobalQpResult::with_status(OracleStatus::Infeasible, f64::INFINITY));
    }
    let dec = poly.decompose()?;
    match boundedness(qp, &dec, exec)? {
        Boundedness::Bounded => {}
        Boundedness::Unbounded(x, d) => {
            let mut r = GlobalQpResult::with_status(OracleStatus::Unbounded, f64::NEG_INFINITY);
            r.ray = Some((x, d));
            return Ok(r);
        }
        Boundedness::Unknown => {
            return Ok(GlobalQpResult::with_status(OracleStatus::Incomplete, f64::NAN));
        }
    }
    let (x, value) = enumerate_minimum(qp, exec)?;
    Ok(GlobalQpResult {
        status: OracleStatus::Optimal,
        value,
        attaining_face: Some(poly.face_of(&x)),
        argmin: Some(x),
        ray: None,
    })
}

/// A pair `(x̂, d̂)` certifying `ℓ* = −∞`, if the oracle finds one.
pub fn qp_unbounded_witness(qp: &QpInstance) -> Result<Option<(Vector, Vector)>> {
    if qp.poly.is_empty()? {
        return Ok(None);
    }
    let dec = qp.poly.decompose()?;
    Ok(match boundedness(qp, &dec, Execution::default())? {
        Boundedness::Unbounded(x, d) => Some((x, d)),
        _ => None,
    })
}

/// Minimum of `q` over a minimal face (an affine subspace contained in `F`);
/// `None` when `q` is unbounded below there.
pub fn minimize_on_minimal_face(qp: &QpInstance, face: &FaceDescriptor) -> Option<(Vector, f64)> {
    let e = linalg::stack_normals(&qp.poly.ineq_normals, &face.active_ineq, &qp.poly.eq_normals);
    let z = linalg::null_space(&e);
    let x0 = &face.witness;
    if z.ncols() == 0 {
        return Some((x0.clone(), qp.objective(x0)));
    }
    let hr = z.transpose() * &qp.q * &z;
    let gr = z.transpose() * (&qp.q * x0 + &qp.c);
    let scale = 1.0 + qp.q.amax();
    let min_eig = hr.clone().symmetric_eigen().eigenvalues.min();
    if min_eig < -tol::CURVATURE * scale {
        return None;
    }
    let (t, res) = linalg::lstsq(&hr, &(-&gr));
    if res > tol::FEAS * (1.0 + linalg::inf_norm(&gr)) * 10.0 {
        return None;
    }
    let x = x0 + &z * t;
    let v = qp.objective(&x);
    Some((x, v))
}

enum Boundedness {
    Bounded,
    Unbounded(Vector, Vector),
    Unknown,
}

fn boundedness(qp: &QpInstance, dec: &Decomposition, exec: Execution) -> Result<Boundedness> {
    let gens = dec.cone.conic_generators();
    if gens.is_empty() {
        return Ok(Boundedness::Bounded);
    }
    let n = qp.n();
    let t = gens.len();
    let mut w = Mat::zeros(n, t);
    for (j, d) in gens.iter().enumerate() {
        w.set_column(j, d);
    }
    let m = w.transpose() * &qp.q * &w;
    let grads: Vec<Vector> = dec
        .witnesses
        .iter()
        .map(|v| w.transpose() * (&qp.q * v + &qp.c))
        .collect();
    let curv_tol = tol::CURVATURE * (1.0 + m.amax());
    let lin_tol = tol::CURVATURE * (1.0 + grads.iter().map(linalg::inf_norm).fold(0.0, f64::max));

    // Single-generator tests are sound at any size.
    for j in 0..t {
        let d = w.column(j).into_owned();
        if m[(j, j)] < -curv_tol {
            return Ok(Boundedness::Unbounded(dec.witnesses[0].clone(), d));
        }
        if m[(j, j)] <= curv_tol {
            for (v, a) in dec.witnesses.iter().zip(&grads) {
                if a[j] < -lin_tol {
                    return Ok(Boundedness::Unbounded(v.clone(), d));
                }
            }
        }
    }
    if t > MAX_GENERATORS {
        let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
        let convex_along_rays = min_eig > curv_tol;
        return Ok(if convex_along_rays { Boundedness::Bounded } else { Boundedness::Unknown });
    }

    // copositivity: min ½zᵀMz over the simplex
    let simplex = QpInstance::new(m.clone(), Vector::zeros(t), Polyhedron::standard_simplex(t))?;
    let (z, val) = enumerate_minimum(&simplex, exec)?;
    if val < -curv_tol {
        return Ok(Boundedness::Unbounded(dec.witnesses[0].clone(), &w * z));
    }

    // zero directions of a copositive M
    let supports: Vec<u32> = (1u32..(1u32 << t)).collect();
    let found = exec::map_ordered(exec, &supports, |&mask| -> Result<Option<(usize, Vector)>> {
        let idx: Vec<usize> = (0..t).filter(|j| mask & (1 << j) != 0).collect();
        let k = idx.len();
        let mjj = Mat::from_fn(k, k, |a, b| m[(idx[a], idx[b])]);
        if linalg::rank(&mjj) == k && mjj.amax() > curv_tol {
            return Ok(None);
        }
        for (i, a) in grads.iter().enumerate() {
            let obj: Vec<f64> = idx.iter().map(|&j| a[j]).collect();
            let mut lpp = LpProblem::new(obj);
            lpp.lower_bounds = vec![0.0; k];
            if mjj.amax() > curv_tol {
                lpp.eq_lhs = mjj.clone();
                lpp.eq_rhs = vec![0.0; k];
            }
            lpp.push_eq(&vec![1.0; k], 1.0);
            let o = lp::solve_lp(&lpp)?;
            if o.status == LpStatus::Optimal && o.objective_value < -lin_tol {
                let mut zf = Vector::zeros(t);
                for (a, &j) in idx.iter().enumerate() {
                    zf[j] = o.primal[a];
                }
                return Ok(Some((i, &w * zf)));
            }
        }
        Ok(None)
    });
    for r in found {
        if let Some((i, d)) = r? {
            return Ok(Boundedness::Unbounded(dec.witnesses[i].clone(), d));
        }
    }
    Ok(Boundedness::Bounded)
}

/// Best feasible stationary point over all independent active sets. Assumes
/// `q` is bounded below on a nonempty region.
fn enumerate_minimum(qp: &QpInstance, exec: Execution) -> Result<(Vector, f64)> {
    let poly = &qp.poly;
    let (n, m) = (poly.n(), poly.m());
    let rank_h = linalg::rank(&poly.eq_normals.transpose());
    let budget = n - rank_h.min(n);
    let masks: Vec<u32> = (0u32..(1u32 << m))
        .filter(|mask| mask.count_ones() as usize <= budget)
        .collect();
    let candidates = exec::map_ordered(exec, &masks, |&mask| -> Result<Option<(Vector, f64)>> {
        let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let e = linalg::stack_normals(&poly.ineq_normals, &active, &poly.eq_normals);
        if linalg::rank(&e) < active.len() + rank_h {
            return Ok(None);
        }
        face_candidate(qp, &active, &e)
    });
    let mut best: Option<(Vector, f64)> = None;
    for c in candidates {
        if let Some((x, v)) = c? {
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((x, v));
            }
        }
    }
    best.ok_or_else(|| Error::NumericalBreakdown("no feasible stationary point found".into()))
}

fn face_candidate(qp: &QpInstance, active: &[usize], e: &Mat) -> Result<Option<(Vector, f64)>> {
    let poly = &qp.poly;
    let rhs = Vector::from_iterator(
        e.nrows(),
        active.iter().map(|&i| poly.ineq_rhs[i]).chain(poly.eq_rhs.iter().cloned()),
    );
    let (x0, res) = linalg::lstsq(e, &rhs);
    if res > tol::FEAS * (1.0 + linalg::inf_norm(&rhs)) * 10.0 {
        return Ok(None);
    }
    let z = linalg::null_space(e);
    if z.ncols() == 0 {
        return Ok(poly.contains_point(&x0).then(|| (x0.clone(), qp.objective(&x0))));
    }
    let hr = z.transpose() * &qp.q * &z;
    let gr = z.transpose() * (&qp.q * &x0 + &qp.c);
    let (t, res) = linalg::lstsq(&hr, &(-&gr));
    if res > tol::FEAS * (1.0 + linalg::inf_norm(&gr) + hr.amax()) * 10.0 {
        return Ok(None);
    }
    let x1 = &x0 + &z * t;
    if poly.contains_point(&x1) {
        return Ok(Some((x1.clone(), qp.objective(&x1))));
    }
    // q is constant on the stationary set x1 + Z·null(Hr); look for a
    // feasible member of it.
    let nr = linalg::null_space(&hr);
    if nr.ncols() == 0 {
        return Ok(None);
    }
    let dirs = &z * &nr;
    let mut lpp = LpProblem::new(vec![0.0; dirs.ncols()]);
    lpp.ineq_lhs = poly.ineq_normals.transpose() * &dirs;
    lpp.ineq_rhs = poly.slack(&x1).iter().cloned().collect();
    let o = lp::solve_lp(&lpp)?;
    if o.status != LpStatus::Optimal {
        return Ok(None);
    }
    let x = &x1 + &dirs * Vector::from_vec(o.primal);
    Ok(poly.contains_point(&x).then(|| (x.clone(), qp.objective(&x))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    fn strip() -> Polyhedron {
        Polyhedron::new(
            Mat::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]),
            v(&[1.0, 1.0]),
            Mat::zeros(2, 0),
            Vector::zeros(0),
        )
        .unwrap()
    }

    #[test]
    fn box_instance_global_minimum() {
        let qp = QpInstance::new(
            Mat::from_row_slice(2, 2, &[-2.0, 2.0, 2.0, 2.0]),
            v(&[0.0, -2.0]),
            Polyhedron::unit_box(2),
        )
        .unwrap();
        let r = global_min_qp(&qp).unwrap();
        assert_eq!(r.status, OracleStatus::Optimal);
        assert!((r.value + 1.0).abs() < 1e-9);
        assert!(linalg::dist_inf(r.argmin.as_ref().unwrap(), &v(&[1.0, 0.0])) < 1e-9);
    }

    #[test]
    fn strip_instance_global_minimum() {
        let qp = QpInstance::new(Mat::from_element(2, 2, 3.0), v(&[1.0, 1.0]), strip()).unwrap();
        let r = global_min_qp(&qp).unwrap();
        assert_eq!(r.status, OracleStatus::Optimal);
        assert!((r.value + 1.0 / 6.0).abs() < 1e-9);
        let x = r.argmin.unwrap();
        assert!((x[0] + x[1] + 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(qp_unbounded_witness(&qp).unwrap(), None);
    }

    #[test]
    fn convex_box_minimum_at_origin() {
        let qp = QpInstance::new(Mat::identity(2, 2) * 2.0, Vector::zeros(2), Polyhedron::unit_box(2)).unwrap();
        let r = global_min_qp(&qp).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!(linalg::inf_norm(r.argmin.as_ref().unwrap()) < 1e-12);
    }

    #[test]
    fn linear_descent_on_orthant() {
        let qp = QpInstance::new(Mat::zeros(1, 1), v(&[-1.0]), Polyhedron::orthant(1)).unwrap();
        let r = global_min_qp(&qp).unwrap();
        assert_eq!(r.status, OracleStatus::Unbounded);
        let (x, d) = qp_unbounded_witness(&qp).unwrap().unwrap();
        assert!(x[0].abs() < 1e-12);
        assert!((d[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_ray_indefiniteness_is_detected() {
        // x ≥ 0 in ℝ², q = −x₁x₂: each axis ray is flat but the diagonal descends.
        let qp = QpInstance::new(
            Mat::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]),
            Vector::zeros(2),
            Polyhedron::orthant(2),
        )
        .unwrap();
        let r = global_min_qp(&qp).unwrap();
        assert_eq!(r.status, OracleStatus::Unbounded);
        let (_, d) = r.ray.unwrap();
        assert!(d.dot(&(&qp.q * &d)) < 0.0);
    }

    #[test]
    fn flat_ray_with_increasing_linear_term_is_bounded() {
        // x ≥ 0, q = x₁ + ½x₂²: bounded, minimum 0 at the origin.
        let qp = QpInstance::new(
            Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            v(&[1.0, 0.0]),
            Polyhedron::orthant(2),
        )
        .unwrap();
        let r = global_min_qp(&qp).unwrap();
        assert_eq!(r.status, OracleStatus::Optimal);
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn empty_region_is_infeasible() {
        let poly = Polyhedron::new(
            Mat::from_row_slice(1, 2, &[1.0, -1.0]),
            v(&[0.0, -1.0]),
            Mat::zeros(1, 0),
            Vector::zeros(0),
        )
        .unwrap();
        let qp = QpInstance::new(Mat::zeros(1, 1), Vector::zeros(1), poly).unwrap();
        assert_eq!(global_min_qp(&qp).unwrap().status, OracleStatus::Infeasible);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let qp = QpInstance::new(
            Mat::from_row_slice(3, 3, &[1.0, -2.0, 0.5, -2.0, -1.0, 0.3, 0.5, 0.3, -0.7]),
            v(&[0.2, -0.1, 0.4]),
            Polyhedron::unit_box(3),
        )
        .unwrap();
        let a = global_min_qp_with(&qp, Execution::Sequential).unwrap();
        let b = global_min_qp_with(&qp, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scale_guard() {
        let qp = QpInstance::new(Mat::zeros(9, 9), Vector::zeros(9), Polyhedron::unit_box(9)).unwrap();
        assert!(matches!(global_min_qp(&qp), Err(Error::ScaleLimit(_))));
    }
}
