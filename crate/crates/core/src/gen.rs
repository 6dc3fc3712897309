//! Objectives over a fixed region with a prescribed relation between the
//! relaxation bound `ℓ*_R` and the optimum `ℓ*`.
//!
//! Every construction picks the multipliers `(û, ŵ, R̂, Ŝ)` first and then
//! reads `Q` and `c` off the dual equality blocks
//!
//! ```text
//! Q = R̂ᵀHᵀ + HR̂ + GŜGᵀ,    c = −Gû + Hŵ − R̂ᵀh − GŜg,
//! ```
//!
//! so that the designated lifted point and the multipliers satisfy the
//! optimality conditions by construction. The support of `û` and `Ŝ` decides
//! which lifted point is optimal and therefore whether the bound is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dualcert::{self, DualSolution, ExactnessStatus};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::lp::LpStatus;
use crate::poly::Polyhedron;
use crate::rlt::{self, LiftedDirection, LiftedPoint, QpInstance};
use crate::tol;

/// Required gap `ℓ* − ℓ*_R` for an inexact instance to verify.
pub const INEXACT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Unbounded,
    Exact,
    InexactVertices,
    InexactMinFaces,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] = [
        InstanceKind::Unbounded,
        InstanceKind::Exact,
        InstanceKind::InexactVertices,
        InstanceKind::InexactMinFaces,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceKind::Unbounded => "unbounded",
            InstanceKind::Exact => "exact",
            InstanceKind::InexactVertices => "inexact-vertices",
            InstanceKind::InexactMinFaces => "inexact-faces",
        }
    }
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown instance kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `x̂ ∈ F` and a lifted recession direction with objective `value < 0`.
    Ray { origin: Vector, direction: LiftedDirection, value: f64 },
    /// `lift(witness)` is optimal for the relaxation with multipliers `dual`.
    Exact { witness: Vector, face_index: usize, dual: DualSolution },
    /// `midpoint_lift(v1, v2)` is optimal with multipliers `dual`.
    Inexact { v1: Vector, v2: Vector, dual: DualSolution, optimum: LiftedPoint },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub qp: QpInstance,
    pub kind: InstanceKind,
    pub seed: u64,
    pub certificate: Certificate,
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let mut q = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = uniform(rng, -1.0, 1.0);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    q
}

/// `(Q, c)` read off the dual equality blocks.
pub fn objective_from_dual(poly: &Polyhedron, ds: &DualSolution) -> (Mat, Vector) {
    let (g, h) = (&poly.ineq_normals, &poly.eq_normals);
    let hr = h * &ds.r;
    let q = linalg::sym(&(&hr + hr.transpose() + g * &ds.s * g.transpose()));
    let c = -(g * &ds.u) + h * &ds.w - ds.r.transpose() * &poly.eq_rhs - g * (&ds.s * &poly.ineq_rhs);
    (q, c)
}

fn draw_free_blocks(rng: &mut ChaCha8Rng, ds: &mut DualSolution) {
    for v in ds.w.iter_mut() {
        *v = uniform(rng, -1.0, 1.0);
    }
    for v in ds.r.iter_mut() {
        *v = uniform(rng, -1.0, 1.0);
    }
}

/// An objective whose relaxation is unbounded below along `(d̂, x̂d̂ᵀ + d̂x̂ᵀ)`.
pub fn gen_unbounded(poly: &Polyhedron, seed: u64) -> Result<GeneratedInstance> {
    let mut rng = rng_for(seed);
    let q = random_symmetric(&mut rng, poly.n());
    gen_unbounded_with_q(poly, q, seed)
}

/// [`gen_unbounded`] with a caller-chosen `Q`.
pub fn gen_unbounded_with_q(poly: &Polyhedron, q: Mat, seed: u64) -> Result<GeneratedInstance> {
    if poly.is_bounded()? {
        return Err(Error::BoundedRegion);
    }
    let x_hat = poly.feasible_point()?;
    let gens = poly.extreme_rays()?;
    let d_hat = gens
        .lineality_basis
        .first()
        .or_else(|| gens.extreme_rays.first())
        .cloned()
        .ok_or_else(|| Error::NumericalBreakdown("unbounded region without a recession generator".into()))?;
    let q = linalg::sym(&q);
    let alpha = -1.0 / d_hat.norm_squared();
    let c = -(&q * &x_hat) + &d_hat * alpha;
    let direction = rlt::lift_recession(poly, &x_hat, &d_hat, &Mat::zeros(gens.extreme_rays.len(), gens.extreme_rays.len()), &gens)?;
    let qp = QpInstance::new(q, c, poly.clone())?;
    let value = qp.direction_objective(&direction);
    Ok(GeneratedInstance {
        qp,
        kind: InstanceKind::Unbounded,
        seed,
        certificate: Certificate::Ray { origin: x_hat, direction, value },
    })
}

/// An objective with an exact relaxation whose optimum is the witness of the
/// chosen minimal face.
pub fn gen_exact(poly: &Polyhedron, face_index: usize, seed: u64) -> Result<GeneratedInstance> {
    let faces = poly.enumerate_minimal_faces()?;
    let face = faces
        .get(face_index)
        .ok_or(Error::BadFaceIndex { index: face_index, count: faces.len() })?;
    let v = face.witness.clone();
    let (n, m, p) = (poly.n(), poly.m(), poly.p());
    let active = active_mask(poly, &v);
    let mut rng = rng_for(seed);
    let mut ds = DualSolution::zeros(n, m, p);
    for i in 0..m {
        if active[i] {
            ds.u[i] = uniform(&mut rng, 0.5, 1.5);
        }
    }
    for i in 0..m {
        for j in i..m {
            if active[i] || active[j] {
                let s = uniform(&mut rng, 0.5, 1.5);
                ds.s[(i, j)] = s;
                ds.s[(j, i)] = s;
            }
        }
    }
    draw_free_blocks(&mut rng, &mut ds);
    let (q, c) = objective_from_dual(poly, &ds);
    Ok(GeneratedInstance {
        qp: QpInstance::new(q, c, poly.clone())?,
        kind: InstanceKind::Exact,
        seed,
        certificate: Certificate::Exact { witness: v, face_index, dual: ds },
    })
}

fn active_mask(poly: &Polyhedron, x: &Vector) -> Vec<bool> {
    let t = poly.feas_tol(x) * 10.0;
    poly.slack(x).iter().map(|s| s.abs() <= t).collect()
}

/// Multipliers for the midpoint of `v1` and `v2`: rows are split by activity
/// into both (0), first only (1), second only (2) and neither (3); `û` lives on
/// block 0 and `Ŝ` on blocks 00, 01, 02, 11, 22 (strictly positive) and 03.
fn midpoint_dual(poly: &Polyhedron, v1: &Vector, v2: &Vector, rng: &mut ChaCha8Rng) -> DualSolution {
    let (n, m, p) = (poly.n(), poly.m(), poly.p());
    let a1 = active_mask(poly, v1);
    let a2 = active_mask(poly, v2);
    let block: Vec<u8> = (0..m)
        .map(|i| match (a1[i], a2[i]) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        })
        .collect();
    let mut ds = DualSolution::zeros(n, m, p);
    for i in 0..m {
        if block[i] == 0 {
            ds.u[i] = uniform(rng, 0.5, 1.5);
        }
    }
    for i in 0..m {
        for j in i..m {
            let (lo, hi) = (block[i].min(block[j]), block[i].max(block[j]));
            let s = match (lo, hi) {
                (0, 0) | (0, 1) | (0, 2) | (1, 1) | (2, 2) => uniform(rng, 0.5, 1.5),
                (0, 3) => uniform(rng, 0.0, 1.0),
                _ => 0.0,
            };
            ds.s[(i, j)] = s;
            ds.s[(j, i)] = s;
        }
    }
    draw_free_blocks(rng, &mut ds);
    ds
}

/// An objective whose relaxation is uniquely optimal at the midpoint lift of
/// two distinct vertices, hence finite and inexact.
pub fn gen_inexact_vertices(poly: &Polyhedron, v1: &Vector, v2: &Vector, seed: u64) -> Result<GeneratedInstance> {
    for v in [v1, v2] {
        if v.len() != poly.n() || !poly.contains_point(v) || poly.face_of(v).dim != 0 {
            return Err(Error::NotAVertex);
        }
    }
    if linalg::dist_inf(v1, v2) <= tol::DEDUP {
        return Err(Error::IdenticalVertices);
    }
    let mut rng = rng_for(seed);
    let ds = midpoint_dual(poly, v1, v2, &mut rng);
    inexact_from_parts(poly, v1, v2, ds, InstanceKind::InexactVertices, seed)
}

/// The minimal-face analogue of [`gen_inexact_vertices`] for regions without
/// vertices, using the witnesses of faces `f1` and `f2`.
pub fn gen_inexact_minfaces(poly: &Polyhedron, f1: usize, f2: usize, seed: u64) -> Result<GeneratedInstance> {
    if poly.constraint_rank() == poly.n() {
        return Err(Error::HasVertices);
    }
    let faces = poly.enumerate_minimal_faces()?;
    for f in [f1, f2] {
        if f >= faces.len() {
            return Err(Error::BadFaceIndex { index: f, count: faces.len() });
        }
    }
    if f1 == f2 {
        return Err(Error::InvalidArgument("the two minimal faces must differ".into()));
    }
    let (v1, v2) = (&faces[f1].witness, &faces[f2].witness);
    let mut rng = rng_for(seed);
    let ds = midpoint_dual(poly, v1, v2, &mut rng);
    inexact_from_parts(poly, v1, v2, ds, InstanceKind::InexactMinFaces, seed)
}

/// Assemble an inexact instance from explicitly chosen points and multipliers.
pub fn inexact_from_parts(
    poly: &Polyhedron,
    v1: &Vector,
    v2: &Vector,
    dual: DualSolution,
    kind: InstanceKind,
    seed: u64,
) -> Result<GeneratedInstance> {
    if !poly.contains_point(v1) || !poly.contains_point(v2) {
        return Err(Error::NotInF);
    }
    let (q, c) = objective_from_dual(poly, &dual);
    Ok(GeneratedInstance {
        qp: QpInstance::new(q, c, poly.clone())?,
        kind,
        seed,
        certificate: Certificate::Inexact {
            v1: v1.clone(),
            v2: v2.clone(),
            optimum: rlt::midpoint_lift(v1, v2),
            dual,
        },
    })
}

/// Outcome of re-checking a generated instance end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub ok: bool,
    pub rlt_bound: f64,
    pub qp_value: f64,
    pub detail: String,
}

/// Re-verify the certificate with the independent checkers and the oracle.
pub fn verify(inst: &GeneratedInstance) -> Result<Verification> {
    let qp = &inst.qp;
    match &inst.certificate {
        Certificate::Ray { direction, .. } => {
            let sol = rlt::solve_rlt(qp)?;
            let value = qp.direction_objective(direction);
            let in_cone = rlt::in_lifted_recession_cone(&qp.poly, direction);
            let ok = sol.status == LpStatus::Unbounded && in_cone && value < 0.0;
            Ok(Verification {
                ok,
                rlt_bound: sol.value,
                qp_value: f64::NAN,
                detail: format!("status={:?} ray_value={value} in_cone={in_cone}", sol.status),
            })
        }
        Certificate::Exact { witness, .. } | Certificate::Inexact { v1: witness, .. } => {
            let (pt, ds) = match &inst.certificate {
                Certificate::Exact { dual, .. } => (rlt::lift(witness), dual),
                Certificate::Inexact { dual, optimum, .. } => (optimum.clone(), dual),
                Certificate::Ray { .. } => unreachable!(),
            };
            let optimal = dualcert::check_optimality(qp, &pt, ds, tol::CERT)?;
            let report = dualcert::certify_exactness(qp)?;
            let (want, gap_ok) = match inst.kind {
                InstanceKind::Exact => (
                    ExactnessStatus::Exact,
                    (report.rlt_bound - report.qp_value).abs()
                        <= tol::EXACTNESS_REL * (1.0 + report.qp_value.abs()),
                ),
                _ => (ExactnessStatus::Inexact, report.qp_value - report.rlt_bound >= INEXACT_MARGIN),
            };
            let ok = optimal && report.status == want && gap_ok;
            Ok(Verification {
                ok,
                rlt_bound: report.rlt_bound,
                qp_value: report.qp_value,
                detail: format!("certificate_optimal={optimal} status={:?}", report.status),
            })
        }
    }
}
