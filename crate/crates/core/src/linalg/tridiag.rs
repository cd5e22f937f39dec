//! Householder tridiagonalization and implicit-shift QL iteration.
//!
//! The reduction keeps the full symmetric matrix in play (both triangles) so
//! the rank-2 update runs over contiguous rows, and the QL sweep carries the
//! eigenvector basis as *rows* for the same reason. Reflectors are retained so
//! a single eigenvector can be back-transformed without accumulating the full
//! orthogonal factor.

use super::dense::{dot, Mat};
use crate::error::{Error, Result};

/// Outcome of the Householder reduction. `reflectors` row `i` holds the
/// Householder vector that zeroed row/column `i` (support `0..i`), with the
/// scalar `h = |u|^2 / 2` in `h[i]`; `h[i] == 0` marks a skipped step.
pub struct Tridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>, // e[i] couples i and i+1, length n-1
    reflectors: Mat,
    h: Vec<f64>,
}

/// Reduce a symmetric matrix (consumed as a full `Mat`) to tridiagonal form.
pub fn householder_tridiag(mut a: Mat) -> Tridiagonal {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut e_full = vec![0.0; n];
    let mut h_arr = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];

    for i in (2..n).rev() {
        // Householder vector from row i, entries 0..i
        let (ulen, row_i) = (i, a.row(i));
        let scale: f64 = row_i[..ulen].iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            e_full[i] = 0.0;
            h_arr[i] = 0.0;
            continue;
        }
        u[..ulen].copy_from_slice(&row_i[..ulen]);
        for v in &mut u[..ulen] {
            *v /= scale;
        }
        let sigma = dot(&u[..ulen], &u[..ulen]);
        let f = u[ulen - 1];
        let g = if f >= 0.0 { -sigma.sqrt() } else { sigma.sqrt() };
        e_full[i] = scale * g;
        let h = sigma - f * g;
        u[ulen - 1] = f - g;
        h_arr[i] = h;

        // p = A[0..i][0..i] u / h
        for j in 0..ulen {
            p[j] = dot(&a.row(j)[..ulen], &u[..ulen]) / h;
        }
        let kappa = dot(&u[..ulen], &p[..ulen]) / (2.0 * h);
        for j in 0..ulen {
            p[j] -= kappa * u[j];
        }
        // rank-2 update A -= u p^T + p u^T on the leading block
        for j in 0..ulen {
            let (uj, pj) = (u[j], p[j]);
            let row = &mut a.row_mut(j)[..ulen];
            for k in 0..ulen {
                row[k] -= uj * p[k] + pj * u[k];
            }
        }
        // stash the reflector in row i (its logical content is now (0..,e,d))
        a.row_mut(i)[..ulen].copy_from_slice(&u[..ulen]);
    }

    if n > 1 {
        e_full[1] = a[(1, 0)];
    }
    let d: Vec<f64> = (0..n).map(|k| a[(k, k)]).collect();
    let e: Vec<f64> = (1..n).map(|k| e_full[k]).collect();
    Tridiagonal { d, e, reflectors: a, h: h_arr }
}

impl Tridiagonal {
    fn n(&self) -> usize {
        self.d.len()
    }

    /// Apply the accumulated orthogonal factor Q to a vector expressed in the
    /// tridiagonal basis, returning its original-basis coordinates.
    pub fn apply_q(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(y.len(), n);
        let mut x = y.to_vec();
        for i in 2..n {
            if self.h[i] == 0.0 {
                continue;
            }
            let u = &self.reflectors.row(i)[..i];
            let g = dot(u, &x[..i]) / self.h[i];
            for (xk, uk) in x[..i].iter_mut().zip(u) {
                *xk -= g * uk;
            }
        }
        x
    }

    /// Accumulate Q^T as a matrix whose *rows* are the images of the basis
    /// vectors; feeding it to the QL sweep keeps every rotation contiguous.
    pub fn q_transpose(&self) -> Mat {
        let n = self.n();
        let mut zt = Mat::identity(n);
        for i in 2..n {
            if self.h[i] == 0.0 {
                continue;
            }
            let u = &self.reflectors.row(i)[..i];
            // rows 0..i carry the non-identity block at this stage
            for r in 0..i {
                let row = zt.row_mut(r);
                let g = dot(&row[..i], u) / self.h[i];
                for (rk, uk) in row[..i].iter_mut().zip(u) {
                    *rk -= g * uk;
                }
            }
        }
        zt
    }
}

/// Implicit-shift QL on a tridiagonal matrix. Eigenvalues land in `d`;
/// when `zt` is given, its rows are co-rotated (row k ends as the eigenvector
/// of `d[k]` in whatever basis `zt` started in).
pub fn ql_implicit(
    d: &mut [f64],
    e_sub: &[f64],
    mut zt: Option<&mut Mat>,
    max_iter: usize,
) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(e_sub);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // locate a negligible subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::NoConvergence { index: l, max_iter });
            }

            // implicit shift from the 2x2 at l
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;

            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // deflate without finishing the sweep
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                if let Some(zt) = zt.as_deref_mut() {
                    let (zi, zi1) = zt.two_rows_mut(i, i + 1);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// One eigenvector of the tridiagonal (d, e) for an already-converged
/// eigenvalue `mu`, by inverse iteration with a partially pivoted solve.
pub fn tridiag_eigenvector(d: &[f64], e_sub: &[f64], mu: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let norm_t = d.iter().chain(e_sub).fold(0.0_f64, |m, v| m.max(v.abs()));
    // deterministic, mildly irregular start vector
    let mut x: Vec<f64> = (0..n)
        .map(|k| 1.0 + 0.5 * ((k as f64 * 0.7390851332151607).sin()))
        .collect();
    let inv = 1.0 / super::dense::norm2(&x);
    for v in &mut x {
        *v *= inv;
    }
    for _ in 0..4 {
        let y = solve_shifted_tridiag(d, e_sub, mu, &x, norm_t);
        let ny = super::dense::norm2(&y);
        if !ny.is_finite() || ny == 0.0 {
            break;
        }
        let inv = 1.0 / ny;
        x = y.into_iter().map(|v| v * inv).collect();
        // residual at machine floor means we are done
        let mut res: f64 = 0.0;
        for k in 0..n {
            let mut t = (d[k] - mu) * x[k];
            if k > 0 {
                t += e_sub[k - 1] * x[k - 1];
            }
            if k + 1 < n {
                t += e_sub[k] * x[k + 1];
            }
            res = res.max(t.abs());
        }
        if res <= 64.0 * f64::EPSILON * norm_t {
            break;
        }
    }
    x
}

/// Gaussian elimination with partial pivoting on (T - mu I) x = b; the factor
/// picks up one extra superdiagonal, handled with a 3-band upper solve.
fn solve_shifted_tridiag(d: &[f64], e_sub: &[f64], mu: f64, b: &[f64], norm_t: f64) -> Vec<f64> {
    let n = d.len();
    let tiny = f64::EPSILON * norm_t.max(f64::MIN_POSITIVE);
    let mut diag: Vec<f64> = d.iter().map(|v| v - mu).collect();
    let mut upper1: Vec<f64> = e_sub.to_vec();
    upper1.push(0.0);
    let mut upper2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let mut lower: Vec<f64> = e_sub.to_vec(); // active subdiagonal entries

    for k in 0..n - 1 {
        if lower[k].abs() > diag[k].abs() {
            // swap rows k and k+1
            std::mem::swap(&mut diag[k], &mut lower[k]);
            std::mem::swap(&mut upper1[k], &mut diag[k + 1]);
            if k + 2 < n {
                upper2[k] = upper1[k + 1];
                upper1[k + 1] = 0.0;
            }
            rhs.swap(k, k + 1);
        }
        let piv = if diag[k].abs() < tiny { tiny.copysign(diag[k]) } else { diag[k] };
        diag[k] = piv;
        let m = lower[k] / piv;
        diag[k + 1] -= m * upper1[k];
        if k + 2 < n {
            upper1[k + 1] -= m * upper2[k];
        }
        rhs[k + 1] -= m * rhs[k];
    }
    if diag[n - 1].abs() < tiny {
        diag[n - 1] = tiny.copysign(diag[n - 1]);
    }

    // back substitution over the 3-band upper factor
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        if k + 1 < n {
            s -= upper1[k] * x[k + 1];
        }
        if k + 2 < n {
            s -= upper2[k] * x[k + 2];
        }
        x[k] = s / diag[k];
    }
    x
}
