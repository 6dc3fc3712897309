//! Programs over `{x : aᵀx = 1, x ≥ 0}`, standard quadratic programs, and the
//! reformulation of an arbitrary program into that class.
//!
//! For this class the relaxation's vertices are exactly the lifts of the
//! region's vertices `(1/a_j)eʲ` and the midpoint lifts of their pairs, so a
//! finite bound is the minimum of the objective over those points.

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::lp::LpStatus;
use crate::oracle::{self, OracleStatus};
use crate::poly::Polyhedron;
use crate::rlt::{self, QpInstance};
use crate::tol;

/// Largest `s + t` accepted by [`build_qpa`].
pub const MAX_QPA_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecificClassInstance {
    pub q: Mat,
    pub c: Vector,
    pub a: Vector,
}

impl SpecificClassInstance {
    pub fn new(q: Mat, c: Vector, a: Vector) -> Result<Self> {
        check_weights(&a)?;
        let n = a.len();
        if q.shape() != (n, n) || c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "Q is {}×{}, c has {} entries, a has {n}",
                q.nrows(),
                q.ncols(),
                c.len()
            )));
        }
        Ok(Self { q: crate::linalg::sym(&q), c, a })
    }

    pub fn to_qp(&self) -> QpInstance {
        QpInstance::new(self.q.clone(), self.c.clone(), Polyhedron::weighted_simplex(&self.a))
            .expect("validated shapes")
    }
}

fn check_weights(a: &Vector) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidWeights("empty weight vector".into()));
    }
    if a.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
    }
    if a.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidWeights("weights must not all vanish".into()));
    }
    Ok(())
}

/// `(1/a_j)eʲ` for every `j` with `a_j > 0`, in index order.
pub fn specific_vertices(a: &Vector) -> Result<Vec<Vector>> {
    check_weights(a)?;
    let n = a.len();
    Ok((0..n)
        .filter(|&j| a[j] > 0.0)
        .map(|j| {
            let mut v = Vector::zeros(n);
            v[j] = 1.0 / a[j];
            v
        })
        .collect())
}

/// `min_k q(vᵏ)` and `min_{i<j} ½((vⁱ)ᵀQvʲ + cᵀ(vⁱ + vʲ))` over the given points.
pub fn pairwise_bound(q: &Mat, c: &Vector, points: &[Vector]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, vi) in points.iter().enumerate() {
        let qvi = q * vi;
        best = best.min(0.5 * vi.dot(&qvi) + c.dot(vi));
        for vj in &points[i + 1..] {
            best = best.min(0.5 * (vj.dot(&qvi) + c.dot(vi) + c.dot(vj)));
        }
    }
    best
}

/// Closed-form relaxation bound; `−∞` when the relaxation is unbounded.
pub fn specific_bound(inst: &SpecificClassInstance) -> Result<f64> {
    if inst.a.iter().any(|v| *v == 0.0) {
        let sol = rlt::solve_rlt(&inst.to_qp())?;
        if sol.status == LpStatus::Unbounded {
            return Ok(f64::NEG_INFINITY);
        }
    }
    let vs = specific_vertices(&inst.a)?;
    Ok(pairwise_bound(&inst.q, &inst.c, &vs))
}

/// `min{½Q_kk + c_k, ½(Q_ij + c_i + c_j)}` for the standard quadratic program.
pub fn stqp_bound(q: &Mat, c: &Vector) -> f64 {
    let n = c.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        best = best.min(0.5 * q[(i, i)] + c[i]);
        for j in i + 1..n {
            let qij = 0.5 * (q[(i, j)] + q[(j, i)]);
            best = best.min(0.5 * (qij + c[i] + c[j]));
        }
    }
    best
}

/// A program rewritten over `{x_A : a_Aᵀx_A = 1, x_A ≥ 0}` through
/// `x = [M P] x_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpaReformulation {
    /// Minimal-face witnesses as columns (n×s).
    pub witnesses: Mat,
    /// Cone generators as columns (n×t).
    pub rays: Mat,
    pub q_a: Mat,
    pub c_a: Vector,
    pub a_a: Vector,
}

impl QpaReformulation {
    pub fn s(&self) -> usize {
        self.witnesses.ncols()
    }

    pub fn t(&self) -> usize {
        self.rays.ncols()
    }

    pub fn n_a(&self) -> usize {
        self.s() + self.t()
    }

    pub fn instance(&self) -> SpecificClassInstance {
        SpecificClassInstance { q: self.q_a.clone(), c: self.c_a.clone(), a: self.a_a.clone() }
    }

    /// Map a point of the reformulated region back to `x = M x_M + P x_P`.
    pub fn recover(&self, x_a: &Vector) -> Vector {
        let s = self.s();
        &self.witnesses * x_a.rows(0, s) + &self.rays * x_a.rows(s, self.t())
    }
}

/// Reformulate using the minimal-face witnesses and cone generators of `F`;
/// each lineality direction `b` contributes both `+b` and `−b`.
pub fn build_qpa(qp: &QpInstance) -> Result<QpaReformulation> {
    let dec = qp.poly.decompose()?;
    build_qpa_from_parts(qp, &dec.witnesses, &dec.cone.conic_generators())
}

/// Reformulate with explicitly chosen witnesses and generators.
pub fn build_qpa_from_parts(qp: &QpInstance, witnesses: &[Vector], rays: &[Vector]) -> Result<QpaReformulation> {
    let n = qp.n();
    let (s, t) = (witnesses.len(), rays.len());
    if s == 0 {
        return Err(Error::EmptyPolyhedron);
    }
    if s + t > MAX_QPA_DIM {
        return Err(Error::ScaleLimit(format!("s + t = {} > {MAX_QPA_DIM}", s + t)));
    }
    if witnesses.iter().chain(rays).any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("generators must have {n} entries")));
    }
    let mp = Mat::from_columns(&witnesses.iter().chain(rays).cloned().collect::<Vec<_>>());
    let q_a = crate::linalg::sym(&(mp.transpose() * &qp.q * &mp));
    let c_a = mp.transpose() * &qp.c;
    let mut a_a = Vector::zeros(s + t);
    a_a.rows_mut(0, s).fill(1.0);
    Ok(QpaReformulation {
        witnesses: mp.columns(0, s).into_owned(),
        rays: mp.columns(s, t).into_owned(),
        q_a,
        c_a,
        a_a,
    })
}

/// `ℓ*_R ≤ ℓ*_RA ≤ ℓ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSandwich {
    pub rlt: f64,
    pub rlt_qpa: f64,
    pub qp: f64,
}

impl BoundSandwich {
    pub fn is_ordered(&self, tol: f64) -> bool {
        let le = |a: f64, b: f64| a == f64::NEG_INFINITY || b == f64::INFINITY || a <= b + tol * (1.0 + b.abs());
        le(self.rlt, self.rlt_qpa) && le(self.rlt_qpa, self.qp)
    }
}

fn relaxation_value(qp: &QpInstance) -> Result<f64> {
    let sol = rlt::solve_rlt(qp)?;
    match sol.status {
        LpStatus::Infeasible => Err(Error::EmptyPolyhedron),
        _ => Ok(sol.value),
    }
}

pub fn bound_sandwich(qp: &QpInstance) -> Result<BoundSandwich> {
    let rlt = relaxation_value(qp)?;
    let qpa = build_qpa(qp)?;
    let rlt_qpa = relaxation_value(&qpa.instance().to_qp())?;
    let global = oracle::global_min_qp(qp)?;
    let qp_value = match global.status {
        OracleStatus::Optimal | OracleStatus::Unbounded => global.value,
        OracleStatus::Infeasible => return Err(Error::EmptyPolyhedron),
        OracleStatus::Incomplete => {
            return Err(Error::OracleIncomplete("boundedness of q over F is undecided".into()))
        }
    };
    let out = BoundSandwich { rlt, rlt_qpa, qp: qp_value };
    if !out.is_ordered(tol::EXACTNESS_REL) {
        return Err(Error::VerificationFailed(format!(
            "bounds out of order: {} ≤ {} ≤ {} fails",
            out.rlt, out.rlt_qpa, out.qp
        )));
    }
    Ok(out)
}

/// Objective minimum over minimal-face witnesses and midpoints of witness pairs.
pub fn face_upper_bound(qp: &QpInstance) -> Result<f64> {
    let faces = qp.poly.enumerate_minimal_faces()?;
    let ws: Vec<Vector> = faces.into_iter().map(|f| f.witness).collect();
    Ok(pairwise_bound(&qp.q, &qp.c, &ws))
}
