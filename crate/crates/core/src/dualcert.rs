//! Dual of the relaxation, optimality certificates, exactness, and the
//! parametric underestimator `ℓ_R(x̂)`.
//!
//! The dual in multipliers `(u, w, R, S)`, `u ≥ 0`, `S ≥ 0` symmetric, reads
//!
//! ```text
//! max  −uᵀg + wᵀh − ½gᵀSg
//! s.t. −Gu + Hw − Rᵀh − GSg = c
//!      RᵀHᵀ + HR + GSGᵀ = Q
//! ```
//!
//! and a feasible lifted point `(x, X)` is optimal iff some dual-feasible
//! `(u, w, R, S)` is complementary to it: `uᵀr = 0` and
//! `⟨S, GᵀXG + rgᵀ + grᵀ − ggᵀ⟩ = 0`, where `r = g − Gᵀx`.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::lp::{self, LpProblem, LpStatus};
use crate::oracle::{self, OracleStatus};
use crate::poly::FaceDescriptor;
use crate::rlt::{self, LiftedPoint, QpInstance, RowLabel, SymIndex};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub u: Vector,
    pub w: Vector,
    /// p×n.
    pub r: Mat,
    /// m×m, symmetric and nonnegative.
    pub s: Mat,
}

impl DualSolution {
    pub fn zeros(n: usize, m: usize, p: usize) -> Self {
        Self { u: Vector::zeros(m), w: Vector::zeros(p), r: Mat::zeros(p, n), s: Mat::zeros(m, m) }
    }

    /// `−uᵀg + wᵀh − ½gᵀSg`.
    pub fn objective(&self, qp: &QpInstance) -> f64 {
        let g = &qp.poly.ineq_rhs;
        -self.u.dot(g) + self.w.dot(&qp.poly.eq_rhs) - 0.5 * g.dot(&(&self.s * g))
    }

    /// Residuals of the two equality blocks: `(c − (−Gu + Hw − Rᵀh − GSg),
    /// Q − (RᵀHᵀ + HR + GSGᵀ))`.
    pub fn residuals(&self, qp: &QpInstance) -> (Vector, Mat) {
        let p = &qp.poly;
        let (g, h) = (&p.ineq_normals, &p.eq_normals);
        let lin = -(g * &self.u) + h * &self.w
            - self.r.transpose() * &p.eq_rhs
            - g * (&self.s * &p.ineq_rhs);
        let hr = h * &self.r;
        let quad = &hr + hr.transpose() + g * &self.s * g.transpose();
        (&qp.c - lin, &qp.q - quad)
    }

    /// Shape, sign and equality-block feasibility.
    pub fn is_feasible(&self, qp: &QpInstance, tol: f64) -> bool {
        let (n, m, p) = (qp.n(), qp.poly.m(), qp.poly.p());
        if self.u.len() != m
            || self.w.len() != p
            || self.r.shape() != (p, n)
            || self.s.shape() != (m, m)
        {
            return false;
        }
        if self.u.iter().any(|v| *v < -tol) || self.s.iter().any(|v| *v < -tol) {
            return false;
        }
        if (&self.s - self.s.transpose()).amax() > tol {
            return false;
        }
        let (rc, rq) = self.residuals(qp);
        let scale = 1.0 + qp.q.amax().max(linalg::inf_norm(&qp.c)).max(self.magnitude());
        linalg::inf_norm(&rc) <= tol * scale && rq.amax() <= tol * scale
    }

    fn magnitude(&self) -> f64 {
        linalg::inf_norm(&self.u)
            .max(linalg::inf_norm(&self.w))
            .max(self.r.amax())
            .max(self.s.amax())
    }
}

/// Index layout of the dual LP's variables `[u; w; vec(R); flat(S)]`.
#[derive(Debug, Clone, Copy)]
pub struct DualLayout {
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

impl DualLayout {
    pub fn of(qp: &QpInstance) -> Self {
        Self { n: qp.n(), m: qp.poly.m(), p: qp.poly.p() }
    }

    pub fn u(&self, i: usize) -> usize {
        i
    }

    pub fn w(&self, j: usize) -> usize {
        self.m + j
    }

    pub fn r(&self, j: usize, k: usize) -> usize {
        self.m + self.p + j * self.n + k
    }

    pub fn s(&self, i: usize, i2: usize) -> usize {
        self.m + self.p + self.p * self.n + SymIndex::new(self.m).flat(i, i2)
    }

    pub fn len(&self) -> usize {
        self.m + self.p + self.p * self.n + self.m * (self.m + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unpack(&self, v: &[f64]) -> DualSolution {
        let mut ds = DualSolution::zeros(self.n, self.m, self.p);
        for i in 0..self.m {
            ds.u[i] = v[self.u(i)];
            for i2 in i..self.m {
                ds.s[(i, i2)] = v[self.s(i, i2)];
                ds.s[(i2, i)] = v[self.s(i, i2)];
            }
        }
        for j in 0..self.p {
            ds.w[j] = v[self.w(j)];
            for k in 0..self.n {
                ds.r[(j, k)] = v[self.r(j, k)];
            }
        }
        ds
    }
}

/// The dual as a minimization of the negated dual objective. The `Q` block is
/// emitted on the upper triangle.
pub fn build_dual(qp: &QpInstance) -> LpProblem {
    let lay = DualLayout::of(qp);
    let (n, m, p) = (lay.n, lay.m, lay.p);
    let poly = &qp.poly;
    let (g, h, gr, hr) = (&poly.ineq_normals, &poly.eq_normals, &poly.ineq_rhs, &poly.eq_rhs);

    let mut objective = vec![0.0; lay.len()];
    for i in 0..m {
        objective[lay.u(i)] = gr[i];
        objective[lay.s(i, i)] = 0.5 * gr[i] * gr[i];
        for i2 in i + 1..m {
            objective[lay.s(i, i2)] = gr[i] * gr[i2];
        }
    }
    for j in 0..p {
        objective[lay.w(j)] = -hr[j];
    }
    let mut lpp = LpProblem::new(objective);
    for i in 0..m {
        lpp.lower_bounds[lay.u(i)] = 0.0;
        for i2 in i..m {
            lpp.lower_bounds[lay.s(i, i2)] = 0.0;
        }
    }

    // −Gu + Hw − Rᵀh − GSg = c
    for k in 0..n {
        let mut row = vec![0.0; lay.len()];
        for i in 0..m {
            row[lay.u(i)] = -g[(k, i)];
            row[lay.s(i, i)] -= g[(k, i)] * gr[i];
            for i2 in i + 1..m {
                row[lay.s(i, i2)] -= g[(k, i)] * gr[i2] + g[(k, i2)] * gr[i];
            }
        }
        for j in 0..p {
            row[lay.w(j)] = h[(k, j)];
            row[lay.r(j, k)] -= hr[j];
        }
        lpp.push_eq(&row, qp.c[k]);
    }
    // RᵀHᵀ + HR + GSGᵀ = Q
    for a in 0..n {
        for b in a..n {
            let mut row = vec![0.0; lay.len()];
            for j in 0..p {
                row[lay.r(j, a)] += h[(b, j)];
                row[lay.r(j, b)] += h[(a, j)];
            }
            for i in 0..m {
                row[lay.s(i, i)] += g[(a, i)] * g[(b, i)];
                for i2 in i + 1..m {
                    row[lay.s(i, i2)] += g[(a, i)] * g[(b, i2)] + g[(a, i2)] * g[(b, i)];
                }
            }
            lpp.push_eq(&row, qp.q[(a, b)]);
        }
    }
    lpp
}

/// Solve the dual; returns the status, the dual optimal value (`+∞` when the
/// dual is unbounded, `−∞` when infeasible) and an optimal solution.
pub fn solve_dual(qp: &QpInstance) -> Result<(LpStatus, f64, Option<DualSolution>)> {
    let lpp = build_dual(qp);
    let o = lp::solve_lp(&lpp)?;
    Ok(match o.status {
        LpStatus::Optimal => {
            let ds = DualLayout::of(qp).unpack(&o.primal);
            (LpStatus::Optimal, -o.objective_value, Some(ds))
        }
        LpStatus::Unbounded => (LpStatus::Unbounded, f64::INFINITY, None),
        LpStatus::Infeasible => (LpStatus::Infeasible, f64::NEG_INFINITY, None),
    })
}

/// The four optimality conditions at a feasible lifted point.
pub fn check_optimality(qp: &QpInstance, pt: &LiftedPoint, ds: &DualSolution, tol: f64) -> Result<bool> {
    let rel = rlt::build_rlt(qp);
    if !rel.is_feasible(pt) {
        return Err(Error::InfeasiblePoint);
    }
    if !ds.is_feasible(qp, tol) {
        return Ok(false);
    }
    let poly = &qp.poly;
    let (g, gr) = (&poly.ineq_normals, &poly.ineq_rhs);
    let r = poly.slack(&pt.x);
    let scale = 1.0 + linalg::inf_norm(&pt.x).max(pt.products.amax()).max(linalg::inf_norm(gr));
    let dual_scale = 1.0 + ds.magnitude();
    if ds.u.dot(&r).abs() > tol * scale * dual_scale {
        return Ok(false);
    }
    let rg = &r * gr.transpose();
    let block = g.transpose() * &pt.products * g + &rg + rg.transpose() - gr * gr.transpose();
    let comp = ds.s.component_mul(&block).sum();
    Ok(comp.abs() <= tol * scale * scale * dual_scale * (1.0 + poly.m() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactnessStatus {
    Exact,
    Inexact,
    UnboundedRelaxation,
    UnboundedQp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub status: ExactnessStatus,
    pub rlt_bound: f64,
    pub qp_value: f64,
    pub witness: Option<Vector>,
    pub witness_face: Option<FaceDescriptor>,
}

/// Compare `ℓ*_R` with `ℓ*` and, when they agree, recover a minimal-face
/// point attaining the bound.
pub fn certify_exactness(qp: &QpInstance) -> Result<ExactnessReport> {
    if qp.poly.is_empty()? {
        return Err(Error::EmptyPolyhedron);
    }
    let sol = rlt::solve_rlt(qp)?;
    let global = oracle::global_min_qp(qp)?;
    let mut report = ExactnessReport {
        status: ExactnessStatus::Inexact,
        rlt_bound: sol.value,
        qp_value: global.value,
        witness: None,
        witness_face: None,
    };
    if sol.status == LpStatus::Unbounded {
        report.status = if global.status == OracleStatus::Unbounded {
            ExactnessStatus::UnboundedQp
        } else {
            ExactnessStatus::UnboundedRelaxation
        };
        return Ok(report);
    }
    match global.status {
        OracleStatus::Optimal => {}
        OracleStatus::Incomplete => {
            return Err(Error::OracleIncomplete("boundedness of q over F is undecided".into()))
        }
        OracleStatus::Unbounded => {
            return Err(Error::NumericalBreakdown(
                "finite relaxation bound but the oracle reports an unbounded program".into(),
            ))
        }
        OracleStatus::Infeasible => return Err(Error::EmptyPolyhedron),
    }
    let gap_tol = tol::EXACTNESS_REL * (1.0 + global.value.abs());
    if (sol.value - global.value).abs() > gap_tol {
        return Ok(report);
    }
    report.status = ExactnessStatus::Exact;
    let faces = qp.poly.enumerate_minimal_faces()?;
    let best = faces
        .iter()
        .filter_map(|f| oracle::minimize_on_minimal_face(qp, f).map(|(x, v)| (f, x, v)))
        .min_by(|a, b| a.2.total_cmp(&b.2));
    if let Some((face, x, v)) = best {
        if (v - sol.value).abs() <= gap_tol {
            let mut face = face.clone();
            face.witness = x.clone();
            report.witness = Some(x);
            report.witness_face = Some(face);
        }
    }
    Ok(report)
}

/// `ℓ_R(x̂)`: the relaxation with `x` fixed at `x̂`, optimized over `X` alone.
pub fn underestimator(qp: &QpInstance, x_hat: &Vector) -> Result<f64> {
    if x_hat.len() != qp.n() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} entries, expected {}",
            x_hat.len(),
            qp.n()
        )));
    }
    if !qp.poly.contains_point(x_hat) {
        return Err(Error::NotInF);
    }
    let rel = rlt::build_rlt(qp);
    let n = qp.n();
    let nx = rel.sym.len();
    let split = |row: nalgebra::DMatrixView<'_, f64>| -> (f64, Vec<f64>) {
        let fixed: f64 = (0..n).map(|k| row[(0, k)] * x_hat[k]).sum();
        (fixed, (0..nx).map(|k| row[(0, n + k)]).collect())
    };
    let mut lpp = LpProblem::new(rel.lp.objective[n..].to_vec());
    for (i, label) in rel.ineq_labels.iter().enumerate() {
        if let RowLabel::Prod(..) = label {
            let (fixed, coeffs) = split(rel.lp.ineq_lhs.rows(i, 1));
            lpp.push_ineq(&coeffs, rel.lp.ineq_rhs[i] - fixed);
        }
    }
    for (j, label) in rel.eq_labels.iter().enumerate() {
        if let RowLabel::EqProd(..) = label {
            let (fixed, coeffs) = split(rel.lp.eq_lhs.rows(j, 1));
            lpp.push_eq(&coeffs, rel.lp.eq_rhs[j] - fixed);
        }
    }
    let o = lp::solve_lp(&lpp)?;
    match o.status {
        LpStatus::Optimal => Ok(o.objective_value + qp.c.dot(x_hat)),
        LpStatus::Unbounded => Ok(f64::NEG_INFINITY),
        LpStatus::Infeasible => Err(Error::NumericalBreakdown(
            "the lift of a feasible point violates the parametric relaxation".into(),
        )),
    }
}
