//! Polyhedra `F = {x : Gᵀx ≤ g, Hᵀx = h}` and their combinatorial structure.
//!
//! Normals are stored as columns (`G` is n×m, `H` is n×p). Vertices, minimal
//! faces and extreme rays are found by active-set enumeration, which is exact
//! and cheap for the desk-scale instances this crate targets; a guard raises
//! [`Error::ScaleLimit`] when the number of subsets to inspect exceeds 10⁶.

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::{self, Mat, Vector};
use crate::lp::{self, LpProblem, LpStatus};
use crate::tol;

/// Largest number of active subsets any enumeration may inspect.
pub const MAX_SUBSETS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    /// Inequality normals as columns (n×m).
    pub ineq_normals: Mat,
    pub ineq_rhs: Vector,
    /// Equality normals as columns (n×p).
    pub eq_normals: Mat,
    pub eq_rhs: Vector,
}

/// A face of a polyhedron, identified by its active inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceDescriptor {
    pub active_ineq: Vec<usize>,
    pub dim: usize,
    pub witness: Vector,
}

/// Generators of a recession cone: a lineality basis plus the extreme rays of
/// the pointed remainder.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConeGenerators {
    pub lineality_basis: Vec<Vector>,
    pub extreme_rays: Vec<Vector>,
}

impl ConeGenerators {
    pub fn is_trivial(&self) -> bool {
        self.lineality_basis.is_empty() && self.extreme_rays.is_empty()
    }

    /// Conic generators of the whole cone: `+b` and `−b` for every lineality
    /// vector, followed by the extreme rays.
    pub fn conic_generators(&self) -> Vec<Vector> {
        let mut out = Vec::with_capacity(2 * self.lineality_basis.len() + self.extreme_rays.len());
        for b in &self.lineality_basis {
            out.push(b.clone());
            out.push(-b);
        }
        out.extend(self.extreme_rays.iter().cloned());
        out
    }
}

/// `F = conv(witnesses) + cone(generators)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub witnesses: Vec<Vector>,
    pub cone: ConeGenerators,
}

impl Polyhedron {
    pub fn new(ineq_normals: Mat, ineq_rhs: Vector, eq_normals: Mat, eq_rhs: Vector) -> Result<Self> {
        let n = ineq_normals.nrows();
        if eq_normals.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "G has {} rows but H has {}",
                n,
                eq_normals.nrows()
            )));
        }
        if ineq_normals.ncols() != ineq_rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "G has {} columns but g has {} entries",
                ineq_normals.ncols(),
                ineq_rhs.len()
            )));
        }
        if eq_normals.ncols() != eq_rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "H has {} columns but h has {} entries",
                eq_normals.ncols(),
                eq_rhs.len()
            )));
        }
        Ok(Self { ineq_normals, ineq_rhs, eq_normals, eq_rhs })
    }

    /// Build from row-per-constraint matrices `A = Gᵀ` (m×n) and `B = Hᵀ` (p×n).
    pub fn from_rows(a: &Mat, g: Vector, b: &Mat, h: Vector) -> Result<Self> {
        if a.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch("A and B have different column counts".into()));
        }
        Self::new(a.transpose(), g, b.transpose(), h)
    }

    pub fn n(&self) -> usize {
        self.ineq_normals.nrows()
    }

    pub fn m(&self) -> usize {
        self.ineq_normals.ncols()
    }

    pub fn p(&self) -> usize {
        self.eq_normals.ncols()
    }

    /// `[0,1]ⁿ` written as `x ≤ 1, −x ≤ 0` (upper bounds first).
    pub fn unit_box(n: usize) -> Self {
        let mut g = Mat::zeros(n, 2 * n);
        let mut rhs = Vector::zeros(2 * n);
        for i in 0..n {
            g[(i, i)] = 1.0;
            g[(i, n + i)] = -1.0;
            rhs[i] = 1.0;
        }
        Self::new(g, rhs, Mat::zeros(n, 0), Vector::zeros(0)).expect("box dimensions")
    }

    /// `{x : aᵀx = 1, x ≥ 0}`.
    pub fn weighted_simplex(a: &Vector) -> Self {
        let n = a.len();
        let g = -Mat::identity(n, n);
        let h = Mat::from_column_slice(n, 1, a.as_slice());
        Self::new(g, Vector::zeros(n), h, Vector::from_element(1, 1.0)).expect("simplex dimensions")
    }

    /// The unit simplex `{x : eᵀx = 1, x ≥ 0}`.
    pub fn standard_simplex(n: usize) -> Self {
        Self::weighted_simplex(&Vector::from_element(n, 1.0))
    }

    /// The nonnegative orthant `{x : x ≥ 0}`.
    pub fn orthant(n: usize) -> Self {
        Self::new(-Mat::identity(n, n), Vector::zeros(n), Mat::zeros(n, 0), Vector::zeros(0))
            .expect("orthant dimensions")
    }

    /// Scaled feasibility tolerance for a point.
    pub(crate) fn feas_tol(&self, x: &Vector) -> f64 {
        let rhs = self
            .ineq_rhs
            .iter()
            .chain(self.eq_rhs.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        tol::FEAS * (1.0 + rhs.max(linalg::inf_norm(x)))
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} entries, region lives in dimension {}",
                x.len(),
                self.n()
            )));
        }
        let gx = self.ineq_normals.transpose() * x;
        if gx.iter().zip(self.ineq_rhs.iter()).any(|(a, b)| *a > b + tol) {
            return Ok(false);
        }
        let hx = self.eq_normals.transpose() * x;
        Ok(hx.iter().zip(self.eq_rhs.iter()).all(|(a, b)| (a - b).abs() <= tol))
    }

    /// Membership with the crate's scaled feasibility tolerance.
    pub fn contains_point(&self, x: &Vector) -> bool {
        self.contains(x, self.feas_tol(x)).unwrap_or(false)
    }

    /// Residuals `g − Gᵀx`.
    pub fn slack(&self, x: &Vector) -> Vector {
        &self.ineq_rhs - self.ineq_normals.transpose() * x
    }

    pub fn recession_cone(&self) -> Polyhedron {
        Polyhedron {
            ineq_normals: self.ineq_normals.clone(),
            ineq_rhs: Vector::zeros(self.m()),
            eq_normals: self.eq_normals.clone(),
            eq_rhs: Vector::zeros(self.p()),
        }
    }

    /// Whether `d` satisfies `Gᵀd ≤ 0`, `Hᵀd = 0` within tolerance.
    pub fn is_recession_direction(&self, d: &Vector) -> bool {
        let t = tol::FEAS * (1.0 + linalg::inf_norm(d));
        self.recession_cone().contains(d, t).unwrap_or(false)
    }

    /// LP over free `x` with this polyhedron's rows and the given objective.
    pub fn lp_with_objective(&self, objective: Vec<f64>) -> LpProblem {
        let n = self.n();
        assert_eq!(objective.len(), n);
        let mut p = LpProblem::new(objective);
        p.ineq_lhs = self.ineq_normals.transpose();
        p.ineq_rhs = self.ineq_rhs.iter().cloned().collect();
        p.eq_lhs = self.eq_normals.transpose();
        p.eq_rhs = self.eq_rhs.iter().cloned().collect();
        p
    }

    /// A feasible point from a phase-1 solve.
    pub fn feasible_point(&self) -> Result<Vector> {
        let o = lp::solve_lp(&self.lp_with_objective(vec![0.0; self.n()]))?;
        match o.status {
            LpStatus::Optimal => Ok(Vector::from_vec(o.primal)),
            _ => Err(Error::EmptyPolyhedron),
        }
    }

    pub fn is_empty(&self) -> Result<bool> {
        match self.feasible_point() {
            Ok(_) => Ok(false),
            Err(Error::EmptyPolyhedron) => Ok(true),
            Err(e) => Err(e),
        }
    }

    /// Boundedness by the dual test: every `±eᵢ` must be expressible as
    /// `Gu + Hw` with `u ≥ 0`.
    pub fn is_bounded(&self) -> Result<bool> {
        if self.is_empty()? {
            return Err(Error::EmptyPolyhedron);
        }
        let (n, m, p) = (self.n(), self.m(), self.p());
        let mut lhs = Mat::zeros(n, m + p);
        lhs.view_mut((0, 0), (n, m)).copy_from(&self.ineq_normals);
        lhs.view_mut((0, m), (n, p)).copy_from(&self.eq_normals);
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut lpp = LpProblem::new(vec![0.0; m + p]);
                lpp.eq_lhs = lhs.clone();
                let mut z = vec![0.0; n];
                z[i] = sign;
                lpp.eq_rhs = z;
                for j in 0..m {
                    lpp.lower_bounds[j] = 0.0;
                }
                if lp::solve_lp(&lpp)?.status != LpStatus::Optimal {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `ρ = rank([G H])`.
    pub fn constraint_rank(&self) -> usize {
        let (n, m, p) = (self.n(), self.m(), self.p());
        let mut all = Mat::zeros(n, m + p);
        all.view_mut((0, 0), (n, m)).copy_from(&self.ineq_normals);
        all.view_mut((0, m), (n, p)).copy_from(&self.eq_normals);
        linalg::rank(&all)
    }

    fn active_set(&self, x: &Vector) -> Vec<usize> {
        let t = self.feas_tol(x) * 10.0;
        self.slack(x)
            .iter()
            .enumerate()
            .filter(|(_, s)| s.abs() <= t)
            .map(|(i, _)| i)
            .collect()
    }

    /// Face descriptor of the smallest face containing `x`.
    pub fn face_of(&self, x: &Vector) -> FaceDescriptor {
        let active = self.active_set(x);
        let normals = linalg::stack_normals(&self.ineq_normals, &active, &self.eq_normals);
        FaceDescriptor {
            dim: self.n() - linalg::rank(&normals),
            active_ineq: active,
            witness: x.clone(),
        }
    }

    pub fn enumerate_minimal_faces(&self) -> Result<Vec<FaceDescriptor>> {
        self.enumerate_minimal_faces_with(Execution::default())
    }

    pub fn enumerate_minimal_faces_with(&self, exec: Execution) -> Result<Vec<FaceDescriptor>> {
        if self.is_empty()? {
            return Err(Error::EmptyPolyhedron);
        }
        let n = self.n();
        let rho = self.constraint_rank();
        let rank_h = linalg::rank(&self.eq_normals.transpose());
        let k = rho - rank_h.min(rho);
        guard(self.m(), k)?;
        let subsets: Vec<Vec<usize>> = (0..self.m()).combinations(k).collect();
        let candidates = exec::map_ordered(exec, &subsets, |subset| {
            let e = linalg::stack_normals(&self.ineq_normals, subset, &self.eq_normals);
            if linalg::rank(&e) < rho {
                return None;
            }
            let rhs = Vector::from_iterator(
                e.nrows(),
                subset.iter().map(|&i| self.ineq_rhs[i]).chain(self.eq_rhs.iter().cloned()),
            );
            let (x, res) = linalg::lstsq(&e, &rhs);
            if res > tol::FEAS * (1.0 + linalg::inf_norm(&rhs)) * 10.0 {
                return None;
            }
            // round-off residue on coordinates that are zero in exact arithmetic
            let floor = 1e-13 * (1.0 + linalg::inf_norm(&x));
            let x = x.map(|v| if v.abs() <= floor { 0.0 } else { v });
            self.contains_point(&x).then_some(x)
        });
        let mut witnesses: Vec<Vector> = Vec::new();
        for x in candidates.into_iter().flatten() {
            if !witnesses.iter().any(|w| linalg::dist_inf(w, &x) <= tol::DEDUP) {
                witnesses.push(x);
            }
        }
        Ok(witnesses
            .into_iter()
            .map(|w| {
                let mut f = self.face_of(&w);
                f.dim = n - rho;
                f
            })
            .collect())
    }

    /// Vertices; empty when `ρ < n`.
    pub fn enumerate_vertices(&self) -> Result<Vec<Vector>> {
        let faces = self.enumerate_minimal_faces()?;
        if self.constraint_rank() < self.n() {
            return Ok(Vec::new());
        }
        Ok(faces.into_iter().map(|f| f.witness).collect())
    }

    pub fn extreme_rays(&self) -> Result<ConeGenerators> {
        let n = self.n();
        let (m, p) = (self.m(), self.p());
        let mut all_t = Mat::zeros(m + p, n);
        all_t.view_mut((0, 0), (m, n)).copy_from(&self.ineq_normals.transpose());
        all_t.view_mut((m, 0), (p, n)).copy_from(&self.eq_normals.transpose());
        let lineality: Vec<Vector> = linalg::rref_null_basis(&all_t)
            .into_iter()
            .map(normalize_line)
            .collect();

        // equality normals of the pointed part: H and the lineality directions
        let mut eq = Mat::zeros(n, p + lineality.len());
        eq.view_mut((0, 0), (n, p)).copy_from(&self.eq_normals);
        for (k, l) in lineality.iter().enumerate() {
            eq.set_column(p + k, l);
        }
        let rank_eq = linalg::rank(&eq.transpose());
        let mut rays: Vec<Vector> = Vec::new();
        if rank_eq < n {
            let k = n - 1 - rank_eq;
            guard(m, k)?;
            for subset in (0..m).combinations(k) {
                let e = linalg::stack_normals(&self.ineq_normals, &subset, &eq);
                if linalg::rank(&e) != n - 1 {
                    continue;
                }
                let z = linalg::null_space(&e);
                if z.ncols() != 1 {
                    continue;
                }
                let d: Vector = z.column(0).into();
                let candidate = if self.is_recession_direction(&d) {
                    Some(d)
                } else if self.is_recession_direction(&(-&d)) {
                    Some(-d)
                } else {
                    None
                };
                if let Some(d) = candidate {
                    let d = &d / linalg::inf_norm(&d);
                    if !rays.iter().any(|r| linalg::dist_inf(r, &d) <= tol::DEDUP) {
                        rays.push(d);
                    }
                }
            }
        }
        Ok(ConeGenerators { lineality_basis: lineality, extreme_rays: rays })
    }

    pub fn decompose(&self) -> Result<Decomposition> {
        let faces = self.enumerate_minimal_faces()?;
        Ok(Decomposition {
            witnesses: faces.into_iter().map(|f| f.witness).collect(),
            cone: self.extreme_rays()?,
        })
    }

    /// Random points of the region: convex combinations of minimal-face
    /// witnesses plus nonnegative combinations of the cone generators.
    pub fn sample_points<R: Rng>(&self, count: usize, rng: &mut R) -> Result<Vec<Vector>> {
        let dec = self.decompose()?;
        Ok(sample_from(&dec, count, rng))
    }
}

pub(crate) fn sample_from<R: Rng>(dec: &Decomposition, count: usize, rng: &mut R) -> Vec<Vector> {
    let gens = dec.cone.conic_generators();
    let n = dec.witnesses[0].len();
    (0..count)
        .map(|_| {
            let weights: Vec<f64> =
                dec.witnesses.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = weights.iter().sum();
            let mut x = Vector::zeros(n);
            for (w, v) in weights.iter().zip(&dec.witnesses) {
                x += v * (w / total);
            }
            for d in &gens {
                if rng.random::<f64>() < 0.5 {
                    x += d * (2.0 * rng.random::<f64>());
                }
            }
            x
        })
        .collect()
}

fn guard(m: usize, k: usize) -> Result<()> {
    let count = linalg::binomial(m, k);
    if count > MAX_SUBSETS {
        Err(Error::ScaleLimit(format!("C({m}, {k}) = {count} active subsets")))
    } else {
        Ok(())
    }
}

/// Unit infinity norm with the first nonzero entry positive.
fn normalize_line(d: Vector) -> Vector {
    let scale = linalg::inf_norm(&d);
    let mut d = d / scale;
    if let Some(first) = d.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            d = -d;
        }
    }
    d
}
