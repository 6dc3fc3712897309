//! Dense two-phase primal simplex.
//!
//! Problems are stated as
//!
//! ```text
//! min  cᵀx
//! s.t. A_eq x  = b_eq
//!      A_in x ≤ b_in
//!      x_j ≥ l_j        (l_j may be −∞)
//! ```
//!
//! and solved on a slack-augmented standard form with an explicit dense basis
//! inverse. Outcomes carry row duals in the sign convention
//! `c = A_eqᵀ y − A_inᵀ z + s` with `z ≥ 0` and bound multipliers `s ≥ 0`, or a
//! recession ray when the objective is unbounded below.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_lhs: DMatrix<f64>,
    pub eq_rhs: Vec<f64>,
    pub ineq_lhs: DMatrix<f64>,
    pub ineq_rhs: Vec<f64>,
    /// Per-variable lower bound, `f64::NEG_INFINITY` for free variables.
    pub lower_bounds: Vec<f64>,
}

impl LpProblem {
    /// An LP with `n` free variables and no rows.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            eq_lhs: DMatrix::zeros(0, n),
            eq_rhs: Vec::new(),
            ineq_lhs: DMatrix::zeros(0, n),
            ineq_rhs: Vec::new(),
            lower_bounds: vec![f64::NEG_INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) {
        self.eq_lhs = append_row(&self.eq_lhs, row);
        self.eq_rhs.push(rhs);
    }

    pub fn push_ineq(&mut self, row: &[f64], rhs: f64) {
        self.ineq_lhs = append_row(&self.ineq_lhs, row);
        self.ineq_rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let ok = self.eq_lhs.ncols() == n
            && self.ineq_lhs.ncols() == n
            && self.eq_lhs.nrows() == self.eq_rhs.len()
            && self.ineq_lhs.nrows() == self.ineq_rhs.len()
            && self.lower_bounds.len() == n;
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("LP rows and columns disagree".into()))
        }
    }
}

fn append_row(m: &DMatrix<f64>, row: &[f64]) -> DMatrix<f64> {
    let r = m.nrows();
    let mut out = m.clone().insert_row(r, 0.0);
    for (j, v) in row.iter().enumerate() {
        out[(r, j)] = *v;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal point (empty unless Optimal).
    pub primal: Vec<f64>,
    pub objective_value: f64,
    pub dual_eq: Vec<f64>,
    pub dual_ineq: Vec<f64>,
    /// Multipliers of the finite lower bounds (zero for free variables).
    pub dual_bounds: Vec<f64>,
    /// Recession ray with negative objective (empty unless Unbounded).
    pub ray: Vec<f64>,
    /// A feasible point from which `ray` can be followed (Unbounded only).
    pub ray_origin: Vec<f64>,
    pub pivots: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

const MAX_PIVOTS: usize = 100_000;
const REINVERT_EVERY: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

/// Maps an original variable onto one or two standard-form columns.
#[derive(Clone, Copy)]
enum VarMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    a: DMatrix<f64>,
    b: Vec<f64>,
    cost: Vec<f64>,
    kind: Vec<ColKind>,
    /// +1 or −1 applied to each row to make `b ≥ 0`.
    row_sign: Vec<f64>,
    vars: Vec<VarMap>,
    n_eq: usize,
    initial_basis: Vec<usize>,
}

fn standard_form(p: &LpProblem) -> StandardForm {
    let n = p.num_vars();
    let n_eq = p.eq_lhs.nrows();
    let n_in = p.ineq_lhs.nrows();
    let m = n_eq + n_in;

    let mut vars = Vec::with_capacity(n);
    let mut ncol = 0;
    for j in 0..n {
        if p.lower_bounds[j].is_finite() {
            vars.push(VarMap::Shifted { col: ncol, lower: p.lower_bounds[j] });
            ncol += 1;
        } else {
            vars.push(VarMap::Split { pos: ncol, neg: ncol + 1 });
            ncol += 2;
        }
    }
    let n_struct = ncol;

    // rows: original coefficients and shifted rhs
    let mut rows = DMatrix::zeros(m, n_struct);
    let mut b = vec![0.0; m];
    for i in 0..m {
        let (coef, rhs) = if i < n_eq {
            (p.eq_lhs.row(i), p.eq_rhs[i])
        } else {
            (p.ineq_lhs.row(i - n_eq), p.ineq_rhs[i - n_eq])
        };
        let mut r = rhs;
        for j in 0..n {
            let a = coef[j];
            if a == 0.0 {
                continue;
            }
            match vars[j] {
                VarMap::Shifted { col, lower } => {
                    rows[(i, col)] = a;
                    r -= a * lower;
                }
                VarMap::Split { pos, neg } => {
                    rows[(i, pos)] = a;
                    rows[(i, neg)] = -a;
                }
            }
        }
        b[i] = r;
    }
    let row_sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();

    // slacks for inequality rows, artificials where no slack can start basic
    let mut kind = vec![ColKind::Structural; n_struct];
    let mut extra: Vec<(usize, f64)> = Vec::new(); // (row, coefficient) for each new column
    let mut initial_basis = vec![usize::MAX; m];
    for i in n_eq..m {
        let col = n_struct + extra.len();
        extra.push((i, 1.0));
        kind.push(ColKind::Slack);
        if row_sign[i] > 0.0 {
            initial_basis[i] = col;
        }
    }
    for i in 0..m {
        if initial_basis[i] == usize::MAX {
            let col = n_struct + extra.len();
            extra.push((i, row_sign[i]));
            kind.push(ColKind::Artificial);
            initial_basis[i] = col;
        }
    }
    let total = n_struct + extra.len();
    let mut a = DMatrix::zeros(m, total);
    a.view_mut((0, 0), (m, n_struct)).copy_from(&rows);
    for (k, &(i, v)) in extra.iter().enumerate() {
        a[(i, n_struct + k)] = v;
    }
    for i in 0..m {
        if row_sign[i] < 0.0 {
            for j in 0..total {
                a[(i, j)] = -a[(i, j)];
            }
            b[i] = -b[i];
        }
    }

    let mut cost = vec![0.0; total];
    for j in 0..n {
        match vars[j] {
            VarMap::Shifted { col, .. } => cost[col] = p.objective[j],
            VarMap::Split { pos, neg } => {
                cost[pos] = p.objective[j];
                cost[neg] = -p.objective[j];
            }
        }
    }

    StandardForm { a, b, cost, kind, row_sign, vars, n_eq, initial_basis }
}

struct Simplex<'a> {
    sf: &'a StandardForm,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DMatrix<f64>,
    xb: Vec<f64>,
    pivots: usize,
    since_reinvert: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded { entering: usize, direction: Vec<f64> },
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let m = sf.b.len();
        let mut is_basic = vec![false; sf.a.ncols()];
        for &j in &sf.initial_basis {
            is_basic[j] = true;
        }
        Self {
            sf,
            basis: sf.initial_basis.clone(),
            is_basic,
            binv: DMatrix::identity(m, m),
            xb: sf.b.clone(),
            pivots: 0,
            since_reinvert: 0,
        }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let m = self.m();
        let col = self.sf.a.column(j);
        let mut out = vec![0.0; m];
        for k in 0..m {
            let a = col[k];
            if a != 0.0 {
                for i in 0..m {
                    out[i] += self.binv[(i, k)] * a;
                }
            }
        }
        out
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for (k, &bj) in self.basis.iter().enumerate() {
            let cb = cost[bj];
            if cb != 0.0 {
                for i in 0..m {
                    y[i] += cb * self.binv[(k, i)];
                }
            }
        }
        y
    }

    fn reinvert(&mut self) -> Result<()> {
        let m = self.m();
        let mut bmat = DMatrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            bmat.set_column(k, &self.sf.a.column(j));
        }
        let inv = bmat
            .try_inverse()
            .ok_or_else(|| Error::NumericalBreakdown("singular basis on reinversion".into()))?;
        self.binv = inv;
        let b = nalgebra::DVector::from_column_slice(&self.sf.b);
        let xb = &self.binv * b;
        self.xb = xb.iter().map(|&v| if v < 0.0 && v > -tol::FEAS { 0.0 } else { v }).collect();
        self.since_reinvert = 0;
        Ok(())
    }

    fn pivot(&mut self, row: usize, entering: usize, direction: &[f64]) -> Result<()> {
        let m = self.m();
        let piv = direction[row];
        let theta = self.xb[row] / piv;
        for i in 0..m {
            if i == row {
                continue;
            }
            self.xb[i] -= theta * direction[i];
            let f = direction[i] / piv;
            if f != 0.0 {
                for k in 0..m {
                    let v = self.binv[(row, k)];
                    if v != 0.0 {
                        self.binv[(i, k)] -= f * v;
                    }
                }
            }
        }
        self.xb[row] = theta;
        for k in 0..m {
            self.binv[(row, k)] /= piv;
        }
        self.is_basic[self.basis[row]] = false;
        self.is_basic[entering] = true;
        self.basis[row] = entering;
        self.pivots += 1;
        self.since_reinvert += 1;
        if self.since_reinvert >= REINVERT_EVERY {
            self.reinvert()?;
        }
        if self.pivots > MAX_PIVOTS {
            return Err(Error::NumericalBreakdown("pivot limit exceeded".into()));
        }
        Ok(())
    }

    fn run_phase(&mut self, cost: &[f64], allow: &dyn Fn(usize) -> bool) -> Result<PhaseEnd> {
        let m = self.m();
        let ncols = self.sf.a.ncols();
        let bland_after = 2 * (m + ncols);
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            let y = self.duals(cost);
            // pricing
            let mut entering = None;
            let mut best = -tol::FEAS;
            for j in 0..ncols {
                if self.is_basic[j] || !allow(j) {
                    continue;
                }
                let col = self.sf.a.column(j);
                let mut d = cost[j];
                for i in 0..m {
                    d -= y[i] * col[i];
                }
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let dir = self.column(q);
            // ratio test; basic artificials block any movement
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let bi = self.basis[i];
                let di = dir[i];
                let ratio = if self.sf.kind[bi] == ColKind::Artificial && !allow(bi) {
                    if di.abs() > tol::PIVOT {
                        0.0
                    } else {
                        continue;
                    }
                } else if di > tol::PIVOT {
                    self.xb[i].max(0.0) / di
                } else {
                    continue;
                };
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie {
                            Some((i, ratio))
                        } else if tie {
                            let better = if bland {
                                bi < self.basis[r]
                            } else {
                                di.abs() > dir[r].abs()
                            };
                            if better {
                                Some((i, ratio.min(best_ratio)))
                            } else {
                                Some((r, best_ratio.min(ratio)))
                            }
                        } else {
                            Some((r, best_ratio))
                        }
                    }
                };
            }
            let Some((row, theta)) = leave else {
                return Ok(PhaseEnd::Unbounded { entering: q, direction: dir });
            };
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > bland_after {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(row, q, &dir)?;
        }
    }
}

/// Solve an LP; deterministic for identical inputs.
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome> {
    p.validate()?;
    let sf = standard_form(p);
    let m = sf.b.len();
    let ncols = sf.a.ncols();
    let mut sx = Simplex::new(&sf);

    // phase 1
    let has_artificial = sf.kind.contains(&ColKind::Artificial);
    if has_artificial {
        let cost1: Vec<f64> = sf
            .kind
            .iter()
            .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        match sx.run_phase(&cost1, &|_| true)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded { .. } => {
                return Err(Error::NumericalBreakdown("phase 1 reported unbounded".into()))
            }
        }
        sx.reinvert()?;
        let infeas: f64 = (0..m)
            .filter(|&i| sf.kind[sx.basis[i]] == ColKind::Artificial)
            .map(|i| sx.xb[i].max(0.0))
            .sum();
        let bscale = sf.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if infeas > tol::FEAS * bscale {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                objective_value: f64::NAN,
                dual_eq: Vec::new(),
                dual_ineq: Vec::new(),
                dual_bounds: Vec::new(),
                ray: Vec::new(),
                ray_origin: Vec::new(),
                pivots: sx.pivots,
            });
        }
        // drive artificials out of the basis where a structural pivot exists
        for i in 0..m {
            if sf.kind[sx.basis[i]] != ColKind::Artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..ncols {
                if sx.is_basic[j] || sf.kind[j] == ColKind::Artificial {
                    continue;
                }
                // row i of B⁻¹A_j
                let col = sf.a.column(j);
                let mut v = 0.0;
                for k in 0..m {
                    v += sx.binv[(i, k)] * col[k];
                }
                if v.abs() > 1e-9 && best.is_none_or(|(_, b)| v.abs() > b) {
                    best = Some((j, v.abs()));
                }
            }
            if let Some((j, _)) = best {
                let dir = sx.column(j);
                sx.xb[i] = 0.0;
                sx.pivot(i, j, &dir)?;
            } else {
                sx.xb[i] = 0.0;
            }
        }
        sx.reinvert()?;
    }

    // phase 2
    let cost2 = sf.cost.clone();
    let end = sx.run_phase(&cost2, &|j| sf.kind[j] != ColKind::Artificial)?;
    sx.reinvert()?;

    let mut std_x = vec![0.0; ncols];
    for (i, &j) in sx.basis.iter().enumerate() {
        std_x[j] = sx.xb[i];
    }
    let primal = recover(&sf, p, &std_x, true);

    match end {
        PhaseEnd::Unbounded { entering, direction } => {
            let mut r = vec![0.0; ncols];
            r[entering] = 1.0;
            for (i, &j) in sx.basis.iter().enumerate() {
                r[j] -= direction[i];
            }
            let ray = recover(&sf, p, &r, false);
            Ok(LpOutcome {
                status: LpStatus::Unbounded,
                primal: Vec::new(),
                objective_value: f64::NEG_INFINITY,
                dual_eq: Vec::new(),
                dual_ineq: Vec::new(),
                dual_bounds: Vec::new(),
                ray,
                ray_origin: primal,
                pivots: sx.pivots,
            })
        }
        PhaseEnd::Optimal => {
            let y = sx.duals(&cost2);
            let dual_eq: Vec<f64> = (0..sf.n_eq).map(|i| y[i] * sf.row_sign[i]).collect();
            let dual_ineq: Vec<f64> =
                (sf.n_eq..m).map(|i| -y[i] * sf.row_sign[i]).collect();
            let dual_bounds = bound_duals(p, &dual_eq, &dual_ineq);
            let objective_value = dot(&p.objective, &primal);
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                primal,
                objective_value,
                dual_eq,
                dual_ineq,
                dual_bounds,
                ray: Vec::new(),
                ray_origin: Vec::new(),
                pivots: sx.pivots,
            })
        }
    }
}

fn recover(sf: &StandardForm, p: &LpProblem, std_x: &[f64], shift: bool) -> Vec<f64> {
    (0..p.num_vars())
        .map(|j| match sf.vars[j] {
            VarMap::Shifted { col, lower } => std_x[col] + if shift { lower } else { 0.0 },
            VarMap::Split { pos, neg } => std_x[pos] - std_x[neg],
        })
        .collect()
}

/// `s = c − A_eqᵀy + A_inᵀz`, zeroed on free variables.
fn bound_duals(p: &LpProblem, y: &[f64], z: &[f64]) -> Vec<f64> {
    let n = p.num_vars();
    (0..n)
        .map(|j| {
            if !p.lower_bounds[j].is_finite() {
                return 0.0;
            }
            let mut s = p.objective[j];
            for (i, yi) in y.iter().enumerate() {
                s -= p.eq_lhs[(i, j)] * yi;
            }
            for (i, zi) in z.iter().enumerate() {
                s += p.ineq_lhs[(i, j)] * zi;
            }
            s
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dual objective `b_eqᵀy − b_inᵀz + lᵀs` of an Optimal outcome.
pub fn dual_objective(p: &LpProblem, o: &LpOutcome) -> f64 {
    let mut v = dot(&p.eq_rhs, &o.dual_eq) - dot(&p.ineq_rhs, &o.dual_ineq);
    for j in 0..p.num_vars() {
        if p.lower_bounds[j].is_finite() {
            v += p.lower_bounds[j] * o.dual_bounds[j];
        }
    }
    v
}

/// Result of an independent certificate check.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub ok: bool,
    pub reasons: Vec<String>,
}

/// Re-check the invariants of an outcome from the problem data alone.
pub fn verify_certificate(p: &LpProblem, o: &LpOutcome, tol: f64) -> CertificateCheck {
    let mut reasons = Vec::new();
    let n = p.num_vars();
    let scale = |v: f64| tol * (1.0 + v.abs());
    match o.status {
        LpStatus::Optimal => {
            let x = &o.primal;
            if x.len() != n
                || o.dual_eq.len() != p.eq_rhs.len()
                || o.dual_ineq.len() != p.ineq_rhs.len()
                || o.dual_bounds.len() != n
            {
                reasons.push("shape".to_string());
                return CertificateCheck { ok: false, reasons };
            }
            for i in 0..p.eq_rhs.len() {
                let lhs: f64 = (0..n).map(|j| p.eq_lhs[(i, j)] * x[j]).sum();
                if (lhs - p.eq_rhs[i]).abs() > scale(p.eq_rhs[i]) {
                    reasons.push(format!("primal equality {i}"));
                }
            }
            for i in 0..p.ineq_rhs.len() {
                let lhs: f64 = (0..n).map(|j| p.ineq_lhs[(i, j)] * x[j]).sum();
                let slack = p.ineq_rhs[i] - lhs;
                if slack < -scale(p.ineq_rhs[i]) {
                    reasons.push(format!("primal inequality {i}"));
                }
                let z = o.dual_ineq[i];
                if z < -tol {
                    reasons.push("dual sign".to_string());
                }
                if (z * slack).abs() > scale(lhs) * (1.0 + z.abs()) {
                    reasons.push(format!("complementary slackness row {i}"));
                }
            }
            for j in 0..n {
                let l = p.lower_bounds[j];
                let s = o.dual_bounds[j];
                if l.is_finite() {
                    if x[j] < l - scale(l) {
                        reasons.push(format!("bound {j}"));
                    }
                    if s < -tol {
                        reasons.push("dual sign".to_string());
                    }
                    if (s * (x[j] - l)).abs() > scale(x[j]) * (1.0 + s.abs()) {
                        reasons.push(format!("complementary slackness bound {j}"));
                    }
                } else if s.abs() > tol {
                    reasons.push(format!("free variable multiplier {j}"));
                }
            }
            // stationarity c = A_eqᵀy − A_inᵀz + s
            for j in 0..n {
                let mut r = p.objective[j] - o.dual_bounds[j];
                for (i, y) in o.dual_eq.iter().enumerate() {
                    r -= p.eq_lhs[(i, j)] * y;
                }
                for (i, z) in o.dual_ineq.iter().enumerate() {
                    r += p.ineq_lhs[(i, j)] * z;
                }
                if r.abs() > scale(p.objective[j]) {
                    reasons.push(format!("dual feasibility column {j}"));
                }
            }
            let primal = dot(&p.objective, x);
            let dual = dual_objective(p, o);
            if (primal - dual).abs() > tol * (1.0 + primal.abs()) {
                reasons.push("duality gap".to_string());
            }
        }
        LpStatus::Unbounded => {
            let r = &o.ray;
            if r.len() != n {
                reasons.push("shape".to_string());
                return CertificateCheck { ok: false, reasons };
            }
            let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            for i in 0..p.eq_rhs.len() {
                let v: f64 = (0..n).map(|j| p.eq_lhs[(i, j)] * r[j]).sum();
                if v.abs() > tol * rn {
                    reasons.push(format!("ray equality {i}"));
                }
            }
            for i in 0..p.ineq_rhs.len() {
                let v: f64 = (0..n).map(|j| p.ineq_lhs[(i, j)] * r[j]).sum();
                if v > tol * rn {
                    reasons.push(format!("ray inequality {i}"));
                }
            }
            for j in 0..n {
                if p.lower_bounds[j].is_finite() && r[j] < -tol * rn {
                    reasons.push(format!("ray bound {j}"));
                }
            }
            if dot(&p.objective, r) >= -tol * rn {
                reasons.push("ray does not decrease the objective".to_string());
            }
        }
        LpStatus::Infeasible => {}
    }
    reasons.dedup();
    CertificateCheck { ok: reasons.is_empty(), reasons }
}
