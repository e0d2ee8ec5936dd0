//! Small dense symmetric positive-definite helpers.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which a matrix is treated as singular.
pub const PIVOT_TOL: f64 = 1e-10;

/// Cholesky factor `L` (lower) of an SPD matrix, or `None` when any pivot
/// `L_kk^2` is non-positive or smaller than `PIVOT_TOL` times the largest.
pub fn cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        max_pivot = max_pivot.max(d);
        min_pivot = min_pivot.min(d);
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    if min_pivot <= PIVOT_TOL * max_pivot {
        return None;
    }
    Some(l)
}

pub fn logdet_from_cholesky(l: &DMatrix<f64>) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// `A^-1` from the Cholesky factor of `A`.
pub fn inverse_from_cholesky(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    // L^-1 by forward substitution, then A^-1 = L^-T L^-1.
    let mut linv = DMatrix::<f64>::zeros(n, n);
    for c in 0..n {
        linv[(c, c)] = 1.0 / l[(c, c)];
        for i in (c + 1)..n {
            let mut s = 0.0;
            for k in c..i {
                s -= l[(i, k)] * linv[(k, c)];
            }
            linv[(i, c)] = s / l[(i, i)];
        }
    }
    let inv = linv.transpose() * &linv;
    symmetrize(inv)
}

/// Log-determinant of an SPD matrix.
pub fn spd_logdet(a: &DMatrix<f64>) -> Option<f64> {
    cholesky(a).map(|l| logdet_from_cholesky(&l))
}

/// `(log det A, A^-1)` of an SPD matrix.
pub fn spd_logdet_inverse(a: &DMatrix<f64>) -> Option<(f64, DMatrix<f64>)> {
    cholesky(a).map(|l| (logdet_from_cholesky(&l), inverse_from_cholesky(&l)))
}

pub fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `u' M v`.
pub fn quad_form(m: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (m * v).dot(u)
}

/// Replaces `M = A^-1` by `(A + s f f')^-1` via Sherman-Morrison and returns
/// the determinant ratio `1 + s f'Mf`. `s` may be negative (downdate). The
/// matrix is left untouched when the ratio is not positive.
pub fn sherman_morrison(m: &mut DMatrix<f64>, f: &DVector<f64>, s: f64) -> f64 {
    let mf = &*m * f;
    let ratio = 1.0 + s * f.dot(&mf);
    if ratio > 0.0 {
        let scale = s / ratio;
        let n = m.nrows();
        for j in 0..n {
            let b = scale * mf[j];
            for i in 0..n {
                m[(i, j)] -= mf[i] * b;
            }
        }
    }
    ratio
}

/// Weighted information `sum_r w_r f_r f_r'` over the given rows.
pub fn weighted_gram<'a, I>(q: usize, rows: I) -> DMatrix<f64>
where
    I: IntoIterator<Item = (f64, &'a DVector<f64>)>,
{
    let mut m = DMatrix::<f64>::zeros(q, q);
    for (w, f) in rows {
        if w != 0.0 {
            m.ger(w, f, f, 1.0);
        }
    }
    m
}
