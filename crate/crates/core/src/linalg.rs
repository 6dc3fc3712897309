//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::tol;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Numerical rank via column-pivoted QR; a pivot counts when it exceeds
/// `RANK_REL` times the largest pivot.
pub fn rank(a: &Mat) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let r = a.clone().col_piv_qr().unpack_r();
    let k = r.nrows().min(r.ncols());
    let pivots: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    if largest <= f64::MIN_POSITIVE {
        return 0;
    }
    pivots
        .iter()
        .filter(|&&p| p > tol::RANK_REL * largest)
        .count()
}

/// Thin SVD of `a` padded with zero rows so that the right singular basis is
/// complete. Returns singular values (descending as produced) and `V` (n×n).
fn full_svd(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.ncols();
    let rows = a.nrows().max(n);
    let mut padded = Mat::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v = svd.v_t.expect("v_t requested").transpose();
    (svd.singular_values.iter().cloned().collect(), v)
}

fn svd_cutoff(sv: &[f64]) -> f64 {
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    (tol::RANK_REL * largest).max(1e-13)
}

/// Orthonormal basis (columns) of `{d : a d = 0}`.
pub fn null_space(a: &Mat) -> Mat {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Mat::identity(n, n);
    }
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let (sv, v) = full_svd(a);
    let cut = svd_cutoff(&sv);
    let cols: Vec<usize> = (0..n).filter(|&i| sv[i] <= cut).collect();
    let mut z = Mat::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        z.set_column(k, &v.column(i));
    }
    z
}

/// Minimum-norm least-squares solution of `a x = b` and the residual norm.
pub fn lstsq(a: &Mat, b: &Vector) -> (Vector, f64) {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return (Vector::zeros(n), b.norm());
    }
    let svd = a.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let cut = svd_cutoff(&sv);
    let u = svd.u.as_ref().expect("u");
    let vt = svd.v_t.as_ref().expect("v_t");
    let mut x = Vector::zeros(n);
    for (i, &s) in sv.iter().enumerate() {
        if s > cut {
            let coef = u.column(i).dot(b) / s;
            x += vt.row(i).transpose() * coef;
        }
    }
    let res = (a * &x - b).norm();
    (x, res)
}

/// Solve a square system; `None` when numerically singular.
pub fn solve_square(a: &Mat, b: &Vector) -> Option<Vector> {
    if a.nrows() == 0 {
        return Some(Vector::zeros(0));
    }
    if rank(a) < a.nrows() {
        return None;
    }
    a.clone().lu().solve(b)
}

/// Canonical null-space basis from the reduced row echelon form: one vector per
/// free column, with a 1 in that column.
pub fn rref_null_basis(a: &Mat) -> Vec<Vector> {
    let n = a.ncols();
    let mut m = a.clone();
    let rows = m.nrows();
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, m[(i, col)].abs()))
            .fold((r, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
        if val <= 1e-10 * scale {
            continue;
        }
        m.swap_rows(r, best);
        let p = m[(r, col)];
        for j in 0..n {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, col)];
                if f != 0.0 {
                    for j in 0..n {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = Vector::zeros(n);
            v[f] = 1.0;
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -m[(row, f)];
            }
            v
        })
        .collect()
}

pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dist_inf(a: &Vector, b: &Vector) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Stack selected columns of `g` and all columns of `h` as rows of one matrix.
pub fn stack_normals(g: &Mat, cols: &[usize], h: &Mat) -> Mat {
    let n = g.nrows();
    let mut out = Mat::zeros(cols.len() + h.ncols(), n);
    for (k, &i) in cols.iter().enumerate() {
        out.set_row(k, &g.column(i).transpose());
    }
    for j in 0..h.ncols() {
        out.set_row(cols.len() + j, &h.column(j).transpose());
    }
    out
}

/// Binomial coefficient saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

pub fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_box_normals() {
        let g = Mat::from_row_slice(2, 4, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        assert_eq!(rank(&g), 2);
        assert_eq!(rank(&Mat::zeros(3, 2)), 0);
        let strip = Mat::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(rank(&strip), 1);
    }

    #[test]
    fn null_space_and_rref_agree_on_dimension() {
        let a = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let z = null_space(&a);
        assert_eq!(z.ncols(), 2);
        assert!((&a * &z).norm() < 1e-12);
        let basis = rref_null_basis(&a);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!((&a * b).norm() < 1e-12);
        }
        assert_eq!(null_space(&Mat::zeros(0, 2)).ncols(), 2);
    }

    #[test]
    fn lstsq_min_norm() {
        let a = Mat::from_row_slice(1, 2, &[1.0, 1.0]);
        let (x, res) = lstsq(&a, &Vector::from_vec(vec![1.0]));
        assert!(res < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(14, 5), 2002);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(27, 9), 4_686_825);
    }
}
