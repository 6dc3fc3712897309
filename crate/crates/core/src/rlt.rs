//! The RLT linear relaxation of a quadratic program.
//!
//! For `min ½xᵀQx + cᵀx` over `F = {Gᵀx ≤ g, Hᵀx = h}` the relaxation lives in
//! `(x, X) ∈ ℝⁿ × 𝒮ⁿ` with rows
//!
//! ```text
//! Gᵀx ≤ g,   Hᵀx = h,   HᵀX = h xᵀ,   GᵀXG − Gᵀx gᵀ − g xᵀG + g gᵀ ≥ 0
//! ```
//!
//! `X` is stored once per unordered pair (upper triangle, row-major), so rows
//! and objective terms touching an off-diagonal entry carry both symmetric
//! contributions in a single coefficient.

use itertools::Itertools;

use crate::dualcert::DualSolution;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::{self, Mat, Vector};
use crate::lp::{self, LpOutcome, LpProblem, LpStatus};
use crate::poly::{ConeGenerators, Polyhedron, MAX_SUBSETS};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct QpInstance {
    pub q: Mat,
    pub c: Vector,
    pub poly: Polyhedron,
}

impl QpInstance {
    /// Validates shapes; `q` is symmetrized by averaging.
    pub fn new(q: Mat, c: Vector, poly: Polyhedron) -> Result<Self> {
        let n = poly.n();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Q is {}×{} but the region lives in dimension {n}",
                q.nrows(),
                q.ncols()
            )));
        }
        if c.len() != n {
            return Err(Error::DimensionMismatch(format!("c has {} entries, expected {n}", c.len())));
        }
        Ok(Self { q: linalg::sym(&q), c, poly })
    }

    pub fn n(&self) -> usize {
        self.poly.n()
    }

    /// `q(x) = ½xᵀQx + cᵀx`.
    pub fn objective(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.c.dot(x)
    }

    /// `½⟨Q, X⟩ + cᵀx`.
    pub fn lifted_objective(&self, pt: &LiftedPoint) -> f64 {
        0.5 * self.q.component_mul(&pt.products).sum() + self.c.dot(&pt.x)
    }

    /// `½⟨Q, D⟩ + cᵀd`.
    pub fn direction_objective(&self, dir: &LiftedDirection) -> f64 {
        0.5 * self.q.component_mul(&dir.products).sum() + self.c.dot(&dir.d)
    }
}

/// Flattening of symmetric matrices onto their upper triangle, row-major:
/// (0,0), (0,1), …, (0,n−1), (1,1), …
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymIndex {
    pub n: usize,
}

impl SymIndex {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn len(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Flat position of the unordered pair `{i, j}`.
    pub fn flat(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * (2 * self.n - i + 1) / 2 + (j - i)
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        let mut k = k;
        for i in 0..self.n {
            let row = self.n - i;
            if k < row {
                return (i, i + k);
            }
            k -= row;
        }
        panic!("flat index out of range")
    }

    pub fn flatten(&self, m: &Mat) -> Vec<f64> {
        (0..self.len()).map(|k| {
            let (i, j) = self.pair(k);
            m[(i, j)]
        }).collect()
    }

    pub fn unflatten(&self, v: &[f64]) -> Mat {
        let mut m = Mat::zeros(self.n, self.n);
        for (k, &val) in v.iter().enumerate() {
            let (i, j) = self.pair(k);
            m[(i, j)] = val;
            m[(j, i)] = val;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub x: Vector,
    pub products: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedDirection {
    pub d: Vector,
    pub products: Mat,
}

/// `(x, xxᵀ)`.
pub fn lift(x: &Vector) -> LiftedPoint {
    LiftedPoint { x: x.clone(), products: x * x.transpose() }
}

/// `(½(v₁+v₂), ½(v₁v₂ᵀ + v₂v₁ᵀ))`.
pub fn midpoint_lift(v1: &Vector, v2: &Vector) -> LiftedPoint {
    let outer = v1 * v2.transpose();
    LiftedPoint {
        x: (v1 + v2) * 0.5,
        products: (&outer + outer.transpose()) * 0.5,
    }
}

/// Meaning of an LP row of the relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    /// `G_iᵀx ≤ g_i`.
    Ineq(usize),
    /// `H_jᵀx = h_j`.
    Eq(usize),
    /// Entry `(j, k)` of `HᵀX = h xᵀ`.
    EqProd(usize, usize),
    /// Entry `(i, i′)`, `i ≤ i′`, of the product block.
    Prod(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RltRelaxation {
    /// Variables `[x; flat(X)]`.
    pub lp: LpProblem,
    pub sym: SymIndex,
    /// Labels of `lp`'s inequality rows: `Ineq(i)` for all i, then `Prod(i, i′)`.
    pub ineq_labels: Vec<RowLabel>,
    /// Labels of `lp`'s equality rows: `Eq(j)` for all j, then `EqProd(j, k)`.
    pub eq_labels: Vec<RowLabel>,
}

impl RltRelaxation {
    pub fn n(&self) -> usize {
        self.sym.n
    }

    /// Number of LP variables, `n + n(n+1)/2`.
    pub fn dim(&self) -> usize {
        self.sym.n + self.sym.len()
    }

    pub fn to_vector(&self, pt: &LiftedPoint) -> Vec<f64> {
        let mut v: Vec<f64> = pt.x.iter().cloned().collect();
        v.extend(self.sym.flatten(&pt.products));
        v
    }

    pub fn from_vector(&self, v: &[f64]) -> LiftedPoint {
        let n = self.n();
        LiftedPoint {
            x: Vector::from_column_slice(&v[..n]),
            products: self.sym.unflatten(&v[n..]),
        }
    }

    fn direction_vector(&self, dir: &LiftedDirection) -> Vec<f64> {
        let mut v: Vec<f64> = dir.d.iter().cloned().collect();
        v.extend(self.sym.flatten(&dir.products));
        v
    }

    fn feas_tol(&self, v: &[f64]) -> f64 {
        let rhs = self
            .lp
            .ineq_rhs
            .iter()
            .chain(self.lp.eq_rhs.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        tol::FEAS * (1.0 + rhs.max(vmax)) * 10.0
    }

    /// Row activities `(ineq lhs, eq lhs)` at a flat point.
    fn activities(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let x = nalgebra::DVector::from_column_slice(v);
        let ineq = (&self.lp.ineq_lhs * &x).iter().cloned().collect();
        let eq = (&self.lp.eq_lhs * &x).iter().cloned().collect();
        (ineq, eq)
    }

    pub fn is_feasible(&self, pt: &LiftedPoint) -> bool {
        let v = self.to_vector(pt);
        let t = self.feas_tol(&v);
        let (ineq, eq) = self.activities(&v);
        ineq.iter().zip(&self.lp.ineq_rhs).all(|(a, b)| *a <= b + t)
            && eq.iter().zip(&self.lp.eq_rhs).all(|(a, b)| (a - b).abs() <= t)
    }

    /// Membership in the recession cone of the relaxation (rows with zero rhs).
    pub fn is_recession_direction(&self, dir: &LiftedDirection) -> bool {
        let v = self.direction_vector(dir);
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let t = tol::FEAS * (1.0 + vmax) * 10.0;
        let (ineq, eq) = self.activities(&v);
        ineq.iter().all(|a| *a <= t) && eq.iter().all(|a| a.abs() <= t)
    }
}

/// Emit the relaxation rows exactly as listed in the module docs.
pub fn build_rlt(qp: &QpInstance) -> RltRelaxation {
    let poly = &qp.poly;
    let (n, m, p) = (poly.n(), poly.m(), poly.p());
    let sym = SymIndex::new(n);
    let nv = n + sym.len();
    let g = &poly.ineq_normals;
    let h = &poly.eq_normals;
    let gr = &poly.ineq_rhs;
    let hr = &poly.eq_rhs;

    let mut objective = vec![0.0; nv];
    for i in 0..n {
        objective[i] = qp.c[i];
        for j in i..n {
            objective[n + sym.flat(i, j)] = if i == j { 0.5 * qp.q[(i, i)] } else { qp.q[(i, j)] };
        }
    }

    let n_ineq = m + m * (m + 1) / 2;
    let n_eq = p + p * n;
    let mut ineq = Mat::zeros(n_ineq, nv);
    let mut ineq_rhs = Vec::with_capacity(n_ineq);
    let mut ineq_labels = Vec::with_capacity(n_ineq);
    for i in 0..m {
        for k in 0..n {
            ineq[(i, k)] = g[(k, i)];
        }
        ineq_rhs.push(gr[i]);
        ineq_labels.push(RowLabel::Ineq(i));
    }
    let mut row = m;
    for i in 0..m {
        for i2 in i..m {
            // −(GᵀXG)_{ii′} + (Gᵀx)_i g_{i′} + g_i (Gᵀx)_{i′} ≤ g_i g_{i′}
            for a in 0..n {
                ineq[(row, a)] = g[(a, i)] * gr[i2] + gr[i] * g[(a, i2)];
                for b in a..n {
                    let coef = if a == b {
                        g[(a, i)] * g[(a, i2)]
                    } else {
                        g[(a, i)] * g[(b, i2)] + g[(b, i)] * g[(a, i2)]
                    };
                    ineq[(row, n + sym.flat(a, b))] = -coef;
                }
            }
            ineq_rhs.push(gr[i] * gr[i2]);
            ineq_labels.push(RowLabel::Prod(i, i2));
            row += 1;
        }
    }

    let mut eq = Mat::zeros(n_eq, nv);
    let mut eq_rhs = Vec::with_capacity(n_eq);
    let mut eq_labels = Vec::with_capacity(n_eq);
    for j in 0..p {
        for k in 0..n {
            eq[(j, k)] = h[(k, j)];
        }
        eq_rhs.push(hr[j]);
        eq_labels.push(RowLabel::Eq(j));
    }
    let mut row = p;
    for j in 0..p {
        for k in 0..n {
            // Σ_l H_{lj} X_{lk} − h_j x_k = 0
            for l in 0..n {
                eq[(row, n + sym.flat(l, k))] += h[(l, j)];
            }
            eq[(row, k)] -= hr[j];
            eq_rhs.push(0.0);
            eq_labels.push(RowLabel::EqProd(j, k));
            row += 1;
        }
    }

    let mut lp = LpProblem::new(objective);
    lp.ineq_lhs = ineq;
    lp.ineq_rhs = ineq_rhs;
    lp.eq_lhs = eq;
    lp.eq_rhs = eq_rhs;
    RltRelaxation { lp, sym, ineq_labels, eq_labels }
}

/// Solution of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct RltSolution {
    pub status: LpStatus,
    /// `ℓ*_R`; `−∞` when unbounded, NaN when infeasible.
    pub value: f64,
    pub point: Option<LiftedPoint>,
    pub dual: Option<DualSolution>,
    /// Recession direction with negative objective when unbounded.
    pub ray: Option<LiftedDirection>,
    pub outcome: LpOutcome,
}

pub fn solve_rlt(qp: &QpInstance) -> Result<RltSolution> {
    let rel = build_rlt(qp);
    let outcome = lp::solve_lp(&rel.lp)?;
    Ok(interpret(qp, &rel, outcome))
}

fn interpret(qp: &QpInstance, rel: &RltRelaxation, outcome: LpOutcome) -> RltSolution {
    let (m, p, n) = (qp.poly.m(), qp.poly.p(), qp.n());
    match outcome.status {
        LpStatus::Optimal => {
            let point = rel.from_vector(&outcome.primal);
            let mut u = Vector::zeros(m);
            let mut s = Mat::zeros(m, m);
            for (label, z) in rel.ineq_labels.iter().zip(&outcome.dual_ineq) {
                match *label {
                    RowLabel::Ineq(i) => u[i] = *z,
                    RowLabel::Prod(i, i2) if i == i2 => s[(i, i)] = 2.0 * z,
                    RowLabel::Prod(i, i2) => {
                        s[(i, i2)] = *z;
                        s[(i2, i)] = *z;
                    }
                    _ => unreachable!("equality label in inequality block"),
                }
            }
            let mut w = Vector::zeros(p);
            let mut r = Mat::zeros(p, n);
            for (label, y) in rel.eq_labels.iter().zip(&outcome.dual_eq) {
                match *label {
                    RowLabel::Eq(j) => w[j] = *y,
                    RowLabel::EqProd(j, k) => r[(j, k)] = *y,
                    _ => unreachable!("inequality label in equality block"),
                }
            }
            RltSolution {
                status: LpStatus::Optimal,
                value: qp.lifted_objective(&point),
                point: Some(point),
                dual: Some(DualSolution { u, w, r, s }),
                ray: None,
                outcome,
            }
        }
        LpStatus::Unbounded => {
            let dir = rel.from_vector(&outcome.ray);
            RltSolution {
                status: LpStatus::Unbounded,
                value: f64::NEG_INFINITY,
                point: None,
                dual: None,
                ray: Some(LiftedDirection { d: dir.x, products: dir.products }),
                outcome,
            }
        }
        LpStatus::Infeasible => RltSolution {
            status: LpStatus::Infeasible,
            value: f64::NAN,
            point: None,
            dual: None,
            ray: None,
            outcome,
        },
    }
}

/// `(d̂, x̂d̂ᵀ + d̂x̂ᵀ + PKPᵀ)` with `P` the extreme rays of `gens` as columns.
pub fn lift_recession(
    poly: &Polyhedron,
    x_hat: &Vector,
    d_hat: &Vector,
    k: &Mat,
    gens: &ConeGenerators,
) -> Result<LiftedDirection> {
    if !poly.contains_point(x_hat) {
        return Err(Error::NotInF);
    }
    if !poly.is_recession_direction(d_hat) {
        return Err(Error::NotInRecessionCone);
    }
    let t = gens.extreme_rays.len();
    if k.nrows() != t || k.ncols() != t {
        return Err(Error::DimensionMismatch(format!(
            "K must be {t}×{t}, got {}×{}",
            k.nrows(),
            k.ncols()
        )));
    }
    if k.iter().any(|v| *v < 0.0) || (k - k.transpose()).amax() > 1e-12 {
        return Err(Error::InvalidArgument("K must be symmetric and nonnegative".into()));
    }
    let n = poly.n();
    let mut pm = Mat::zeros(n, t);
    for (j, r) in gens.extreme_rays.iter().enumerate() {
        pm.set_column(j, r);
    }
    let outer = x_hat * d_hat.transpose();
    let products = &outer + outer.transpose() + &pm * k * pm.transpose();
    Ok(LiftedDirection { d: d_hat.clone(), products })
}

/// Membership of a lifted direction in the recession cone of the relaxation of
/// any objective over `poly`.
pub fn in_lifted_recession_cone(poly: &Polyhedron, dir: &LiftedDirection) -> bool {
    let qp = QpInstance::new(Mat::zeros(poly.n(), poly.n()), Vector::zeros(poly.n()), poly.clone())
        .expect("shapes");
    build_rlt(&qp).is_recession_direction(dir)
}

/// Vertex test by rank of the rows active at `pt`.
pub fn is_vertex_of_lifted(pt: &LiftedPoint, rel: &RltRelaxation) -> Result<bool> {
    if !rel.is_feasible(pt) {
        return Err(Error::InfeasiblePoint);
    }
    let v = rel.to_vector(pt);
    let t = rel.feas_tol(&v);
    let (ineq, _) = rel.activities(&v);
    let active: Vec<usize> = ineq
        .iter()
        .zip(&rel.lp.ineq_rhs)
        .enumerate()
        .filter(|(_, (a, b))| (*b - *a).abs() <= t)
        .map(|(i, _)| i)
        .collect();
    let n_eq = rel.lp.eq_lhs.nrows();
    let mut rows = Mat::zeros(n_eq + active.len(), rel.dim());
    rows.view_mut((0, 0), (n_eq, rel.dim())).copy_from(&rel.lp.eq_lhs);
    for (k, &i) in active.iter().enumerate() {
        rows.set_row(n_eq + k, &rel.lp.ineq_lhs.row(i));
    }
    Ok(linalg::rank(&rows) == rel.dim())
}

/// Largest relaxation dimension accepted by the brute-force vertex enumerator.
pub const MAX_LIFTED_DIM: usize = 9;

pub fn enumerate_lifted_vertices(rel: &RltRelaxation) -> Result<Vec<LiftedPoint>> {
    enumerate_lifted_vertices_with(rel, Execution::default())
}

/// All vertices of the relaxation polyhedron by active-set brute force.
pub fn enumerate_lifted_vertices_with(rel: &RltRelaxation, exec: Execution) -> Result<Vec<LiftedPoint>> {
    let dim = rel.dim();
    if dim > MAX_LIFTED_DIM {
        return Err(Error::ScaleLimit(format!("relaxation dimension {dim} > {MAX_LIFTED_DIM}")));
    }
    let eq = &rel.lp.eq_lhs;
    let eq_rhs = Vector::from_column_slice(&rel.lp.eq_rhs);
    let (x0, res) = linalg::lstsq(eq, &eq_rhs);
    if res > tol::FEAS * (1.0 + linalg::inf_norm(&eq_rhs)) * 10.0 {
        return Ok(Vec::new());
    }
    let z = linalg::null_space(eq);
    let k = z.ncols();
    let a_red = &rel.lp.ineq_lhs * &z;
    let b_red = Vector::from_column_slice(&rel.lp.ineq_rhs) - &rel.lp.ineq_lhs * &x0;
    let rows = a_red.nrows();
    let count = linalg::binomial(rows, k);
    if count > MAX_SUBSETS {
        return Err(Error::ScaleLimit(format!("C({rows}, {k}) = {count} active subsets")));
    }
    let full_b = Vector::from_column_slice(&rel.lp.ineq_rhs);
    let subsets: Vec<Vec<usize>> = (0..rows).combinations(k).collect();
    let candidates = exec::map_ordered(exec, &subsets, |subset| {
        let mut a = Mat::zeros(k, k);
        let mut b = Vector::zeros(k);
        for (r, &i) in subset.iter().enumerate() {
            a.set_row(r, &a_red.row(i));
            b[r] = b_red[i];
        }
        let t = linalg::solve_square(&a, &b)?;
        let v = &x0 + &z * t;
        let slack = &full_b - &rel.lp.ineq_lhs * &v;
        let vs: Vec<f64> = v.iter().cloned().collect();
        let tl = rel.feas_tol(&vs);
        slack.iter().all(|s| *s >= -tl).then_some(v)
    });
    let mut found: Vec<Vector> = Vec::new();
    for v in candidates.into_iter().flatten() {
        if !found.iter().any(|w| linalg::dist_inf(w, &v) <= tol::DEDUP) {
            found.push(v);
        }
    }
    Ok(found.iter().map(|v| rel.from_vector(v.as_slice())).collect())
}

/// A nonzero direction of the relaxation's recession cone, if one exists.
///
/// Decided by `2·dim` LPs maximizing `±` each coordinate over the cone
/// intersected with the unit box.
pub fn lifted_recession_direction(poly: &Polyhedron) -> Result<Option<LiftedDirection>> {
    let qp = QpInstance::new(Mat::zeros(poly.n(), poly.n()), Vector::zeros(poly.n()), poly.clone())?;
    let rel = build_rlt(&qp);
    let dim = rel.dim();
    let mut base = rel.lp.clone();
    base.ineq_rhs.iter_mut().for_each(|b| *b = 0.0);
    base.eq_rhs.iter_mut().for_each(|b| *b = 0.0);
    base.lower_bounds = vec![-1.0; dim];
    for j in 0..dim {
        let mut row = vec![0.0; dim];
        row[j] = 1.0;
        base.push_ineq(&row, 1.0);
    }
    for j in 0..dim {
        for sign in [1.0, -1.0] {
            let mut lpp = base.clone();
            lpp.objective = vec![0.0; dim];
            lpp.objective[j] = -sign;
            let o = lp::solve_lp(&lpp)?;
            if o.status == LpStatus::Optimal && -o.objective_value > 1e-7 {
                let pt = rel.from_vector(&o.primal);
                return Ok(Some(LiftedDirection { d: pt.x, products: pt.products }));
            }
        }
    }
    Ok(None)
}
