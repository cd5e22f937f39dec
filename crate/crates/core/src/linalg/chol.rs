//! Cholesky factorization and triangular solves.

use super::dense::{dot, Mat, SymMatrix};
use crate::error::{Error, Result};

/// Relative pivot floor: a pivot below `rel * max|diag|` fails the factorization.
pub const DEFAULT_PIVOT_FLOOR_REL: f64 = 1e-12;

/// Lower-triangular factor L with M = L L^T.
///
/// Fails with `NotPositiveDefinite` when a pivot drops to or below
/// `pivot_floor_rel * max|M_ii|`.
pub fn cholesky(m: &SymMatrix, pivot_floor_rel: f64) -> Result<Mat> {
    let n = m.n();
    let floor = pivot_floor_rel * m.max_abs_diag();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                let pivot = m.get(i, i) - s;
                if pivot <= floor {
                    return Err(Error::NotPositiveDefinite { index: i, pivot, floor });
                }
                l[(i, i)] = pivot.sqrt();
            } else {
                l[(i, j)] = (m.get(i, j) - s) / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve L x = b with L lower triangular.
pub fn solve_lower(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let mut x = b.to_vec();
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &x[..i]);
        x[i] = (x[i] - s) / l[(i, i)];
    }
    x
}

/// Solve L^T x = b with L lower triangular.
pub fn solve_lower_transpose(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = 0.0;
        for k in i + 1..n {
            s += l[(k, i)] * x[k];
        }
        x[i] = (x[i] - s) / l[(i, i)];
    }
    x
}

/// Solve L X = B in place, rows of B treated as the multiple right-hand sides
/// laid out so the sweep stays contiguous.
fn solve_lower_multi(l: &Mat, b: &mut Mat) {
    let n = l.nrows();
    assert_eq!(b.nrows(), n);
    for i in 0..n {
        for k in 0..i {
            let c = l[(i, k)];
            if c != 0.0 {
                let (bk, bi) = b.two_rows_mut(k, i);
                for (bi_v, bk_v) in bi.iter_mut().zip(bk.iter()) {
                    *bi_v -= c * *bk_v;
                }
            }
        }
        let inv = 1.0 / l[(i, i)];
        for v in b.row_mut(i) {
            *v *= inv;
        }
    }
}

/// Solve L^T X = B in place (same layout as `solve_lower_multi`).
pub fn solve_lower_transpose_multi(l: &Mat, b: &mut Mat) {
    let n = l.nrows();
    assert_eq!(b.nrows(), n);
    for i in (0..n).rev() {
        for k in i + 1..n {
            let c = l[(k, i)];
            if c != 0.0 {
                let (bk, bi) = b.two_rows_mut(k, i);
                for (bi_v, bk_v) in bi.iter_mut().zip(bk.iter()) {
                    *bi_v -= c * *bk_v;
                }
            }
        }
        let inv = 1.0 / l[(i, i)];
        for v in b.row_mut(i) {
            *v *= inv;
        }
    }
}

/// Congruence reduction L^{-1} A L^{-T} of a symmetric A, symmetrized to kill
/// round-off asymmetry before the eigensolver sees it.
pub fn reduce_congruence(l: &Mat, a: &SymMatrix) -> SymMatrix {
    let mut x = a.as_mat();
    solve_lower_multi(l, &mut x); // X = L^{-1} A
    let mut xt = x.transposed();
    solve_lower_multi(l, &mut xt); // L^{-1} A^T L^{-T}, transposed view
    SymMatrix::from_mat_symmetrize(&xt)
}

/// Solve (I + B) x = b given the Cholesky factor L of I + B.
pub fn solve_spd(l: &Mat, b: &[f64]) -> Vec<f64> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor_is_identity() {
        let m = SymMatrix::identity(3);
        let l = cholesky(&m, DEFAULT_PIVOT_FLOOR_REL).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(l[(i, j)], want);
            }
        }
    }

    #[test]
    fn diagonal_square_roots() {
        let m = SymMatrix::from_diag(&[4.0, 9.0]);
        let l = cholesky(&m, DEFAULT_PIVOT_FLOOR_REL).unwrap();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(1, 1)], 3.0);
        assert_eq!(l[(1, 0)], 0.0);
    }

    #[test]
    fn rank_one_bump_roundtrip() {
        // M = I + u u^T with u = (1,1)/sqrt(2); verify by re-multiplication
        let m = SymMatrix::from_rows(&[vec![1.5, 0.5], vec![0.5, 1.5]]).unwrap();
        let l = cholesky(&m, DEFAULT_PIVOT_FLOOR_REL).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let prod = dot(&l.row(i)[..2], &l.row(j)[..2]);
                assert!((prod - m.get(i, j)).abs() <= 1e-15);
            }
        }
        // upper triangle stays zero
        assert_eq!(l[(0, 1)], 0.0);
    }

    #[test]
    fn indefinite_rejected_with_pivot_index() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        match cholesky(&m, DEFAULT_PIVOT_FLOOR_REL) {
            Err(Error::NotPositiveDefinite { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn triangular_solves_invert() {
        let m = SymMatrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ])
        .unwrap();
        let l = cholesky(&m, DEFAULT_PIVOT_FLOOR_REL).unwrap();
        let b = vec![1.0, -2.0, 0.5];
        let x = solve_spd(&l, &b);
        let back = m.matvec(&x);
        for (bi, wi) in back.iter().zip(&b) {
            assert!((bi - wi).abs() < 1e-12);
        }
    }
}
