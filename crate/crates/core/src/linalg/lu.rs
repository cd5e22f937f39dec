//! Dense LU with partial pivoting, used to refine targeted eigenpairs by
//! inverse iteration on the shifted pencil A - sigma G.

use super::dense::Mat;
use crate::error::{Error, Result};

pub struct LuFactor {
    lu: Mat,
    perm: Vec<usize>,
}

pub fn lu_factor(a: &Mat) -> Result<LuFactor> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].abs();
        for r in k + 1..n {
            let v = lu[(r, k)].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(Error::InvalidInput(format!("singular matrix at column {k}")));
        }
        if piv != k {
            let (a_row, b_row) = lu.two_rows_mut(k, piv);
            a_row.swap_with_slice(b_row);
            perm.swap(k, piv);
        }
        let pivot = lu[(k, k)];
        for r in k + 1..n {
            let m = lu[(r, k)] / pivot;
            lu[(r, k)] = m;
            if m != 0.0 {
                let (row_k, row_r) = lu.two_rows_mut(k, r);
                for c in k + 1..n {
                    row_r[c] -= m * row_k[c];
                }
            }
        }
    }
    Ok(LuFactor { lu, perm })
}

impl LuFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.nrows();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}
