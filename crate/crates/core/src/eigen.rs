//! Eigenvalues of dense real symmetric matrices: Householder reduction to
//! tridiagonal form followed by implicit-shift QL iteration. Eigenvectors are
//! never accumulated.

use crate::error::{Error, Result};

const MAX_QL_ITER: usize = 60;

/// Reduces the symmetric row-major matrix `a` (overwritten) to tridiagonal
/// form. Returns the diagonal and the `n - 1` off-diagonal entries.
pub fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n {
        diag[k] = a[k * n + k];
        if k + 1 == n {
            break;
        }
        let lo = k + 1;
        let m = n - lo;
        let x = &a[k * n + lo..k * n + n];
        if m == 1 {
            off[k] = x[0];
            continue;
        }
        let norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let v = &mut v[..m];
        v.copy_from_slice(x);
        v[0] -= alpha;
        let vv = v.iter().map(|t| t * t).sum::<f64>();
        off[k] = alpha;
        if vv == 0.0 {
            continue;
        }
        let tau = 2.0 / vv;

        // p = tau * A22 v, then w = p - (tau/2)(p·v) v
        let w = &mut w[..m];
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &a[(lo + i) * n + lo..(lo + i) * n + n];
            *wi = tau * dot(row, v);
        }
        let pv = dot(w, v);
        let half = 0.5 * tau * pv;
        for (wi, vi) in w.iter_mut().zip(v.iter()) {
            *wi -= half * vi;
        }

        // A22 -= v w' + w v'
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(lo + i) * n + lo..(lo + i) * n + n];
            for ((r, &vj), &wj) in row.iter_mut().zip(v.iter()).zip(w.iter()) {
                *r -= vi * wj + wi * vj;
            }
        }
    }
    (diag, off)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorizes
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Eigenvalues (unsorted) of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off`.
pub fn tridiagonal_eigenvalues(mut diag: Vec<f64>, off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(diag);
    }
    assert_eq!(off.len(), n - 1);
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let d = &mut diag;

    for l in 0..n {
        let mut iter = 0;
        loop {
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
            if iter > MAX_QL_ITER {
                return Err(Error::Internal(format!(
                    "QL iteration did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(diag)
}

/// All eigenvalues of a symmetric row-major matrix, sorted descending.
/// Symmetry is the caller's responsibility.
pub fn symmetric_eigenvalues(entries: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut a = entries.to_vec();
    let (diag, off) = tridiagonalize(&mut a, n);
    let mut values = tridiagonal_eigenvalues(diag, &off)?;
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}
