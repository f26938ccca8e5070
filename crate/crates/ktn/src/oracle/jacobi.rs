//! One-sided Jacobi orthogonalization.
//!
//! Rotating the columns of a factor `G` until they are mutually orthogonal leaves
//! `G G^T` invariant, so the final column norms squared are its eigenvalues and the
//! normalized columns its eigenvectors. Unlike tridiagonalization-based solvers this
//! preserves high *relative* accuracy for the exponentially graded factors produced by
//! Arrhenius rates, where eigenvalues span hundreds of orders of magnitude.

const MAX_SWEEPS: usize = 64;
const ORTHO_TOL: f64 = 1e-15;

/// Orthogonalize the columns in place. Returns the number of sweeps used.
pub(crate) fn orthogonalize_columns(cols: &mut [Vec<f64>]) -> usize {
    let m = cols.len();
    if m < 2 {
        return 0;
    }
    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m - 1 {
            for q in p + 1..m {
                let (app, aqq, apq) = gram(&cols[p], &cols[q]);
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                if apq.abs() <= ORTHO_TOL * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau.is_finite() {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                } else {
                    // extreme grading: the rotation angle is 1/(2 tau) to first order
                    0.5 / tau
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cols, p, q, c, s);
            }
        }
        if !rotated {
            return sweep + 1;
        }
    }
    MAX_SWEEPS
}

fn gram(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let mut xx = 0.0;
    let mut yy = 0.0;
    let mut xy = 0.0;
    for (a, b) in x.iter().zip(y) {
        xx += a * a;
        yy += b * b;
        xy += a * b;
    }
    (xx, yy, xy)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Squared norms and normalized columns, sorted by squared norm descending.
pub(crate) fn singular_pairs(mut cols: Vec<Vec<f64>>) -> Vec<(f64, Vec<f64>)> {
    orthogonalize_columns(&mut cols);
    let mut pairs: Vec<(f64, Vec<f64>)> = cols
        .into_iter()
        .map(|mut c| {
            let norm2: f64 = c.iter().map(|x| x * x).sum();
            if norm2 > 0.0 {
                let inv = 1.0 / norm2.sqrt();
                for x in &mut c {
                    *x *= inv;
                }
            }
            (norm2, c)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}
