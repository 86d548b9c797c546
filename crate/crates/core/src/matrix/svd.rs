//! One-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! Column pairs are swept in a fixed cyclic order, so the factorization is a
//! deterministic function of the input. Accuracy is at the level of the
//! column-orthogonality threshold, well below `SvdConfig::tol`.

use super::{complete_orthonormal, Matrix, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdConfig {
    /// Relative accuracy target; also scales the numerical-rank threshold.
    pub tol: f64,
    /// Sweep cap before reporting `NoConvergence`.
    pub max_sweeps: usize,
}

impl Default for SvdConfig {
    fn default() -> Self {
        SvdConfig {
            tol: 1e-11,
            max_sweeps: 80,
        }
    }
}

/// Thin SVD `A = U diag(s) V^H` with `s` nonincreasing.
///
/// For an `m x n` input, `u` is `m x min(m,n)` and `v` is `n x min(m,n)`;
/// both always have orthonormal columns, including those paired with zero
/// singular values.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
    tol: f64,
}

impl SvdResult {
    pub fn max_singular(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Numerical-rank threshold `max(rows, cols) * tol * s[0]`.
    pub fn rank_tol(&self) -> f64 {
        let dim = self.u.rows().max(self.v.rows()) as f64;
        dim * self.tol * self.max_singular()
    }

    pub fn rank(&self) -> usize {
        self.rank_with(self.rank_tol())
    }

    pub fn rank_with(&self, threshold: f64) -> usize {
        self.s.iter().filter(|&&s| s > threshold).count()
    }

    pub fn reconstruct(&self) -> Matrix {
        Matrix::from_svd_parts(&self.u, &self.s, &self.v)
    }
}

pub fn svd(a: &Matrix) -> Result<SvdResult> {
    svd_with(a, &SvdConfig::default())
}

pub fn svd_with(a: &Matrix, config: &SvdConfig) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if a.rows() < a.cols() {
        let t = tall_svd(&a.adjoint(), config)?;
        return Ok(SvdResult {
            u: t.v,
            s: t.s,
            v: t.u,
            tol: config.tol,
        });
    }
    tall_svd(a, config)
}

/// Requires `rows >= cols`.
fn tall_svd(a: &Matrix, config: &SvdConfig) -> Result<SvdResult> {
    let m = a.rows();
    let n = a.cols();
    // Work column-major: cols[j] is column j of the iterate.
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    let threshold = f64::EPSILON * (m as f64).max(1.0);
    // Columns below this squared norm are rounding noise; rotating them
    // against larger columns need not terminate.
    let fro_sq: f64 = w.iter().flatten().map(|z| z.norm_sqr()).sum();
    let negligible = (f64::EPSILON * f64::EPSILON) * fro_sq;
    let mut converged = n < 2;
    for _sweep in 0..config.max_sweeps {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (&w[p], &w[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = ZERO;
                    for i in 0..m {
                        alpha += wp[i].norm_sqr();
                        beta += wq[i].norm_sqr();
                        gamma += wp[i].conj() * wq[i];
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= threshold * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Phase e^{-i phi} that makes the 2x2 Gram matrix real.
                let phase = gamma.conj() / g;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: config.max_sweeps,
        });
    }

    let norms: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let smax = order.first().map_or(0.0, |&i| norms[i]);
    let zero_cut = smax * f64::EPSILON * (m as f64);
    let mut s = Vec::with_capacity(n);
    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut vcols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut pending = 0;
    for &j in &order {
        let sj = norms[j];
        s.push(sj);
        vcols.push(v[j].clone());
        if sj > zero_cut && sj > 0.0 {
            ucols.push(w[j].iter().map(|z| z / sj).collect());
        } else {
            pending += 1;
        }
    }
    if pending > 0 {
        // Columns of U paired with (numerically) zero singular values carry
        // no information; complete them to an orthonormal set.
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
        for col in &ucols {
            super::extend_orthonormal(&mut basis, col, 0.0);
        }
        complete_orthonormal(&mut basis, m, n);
        ucols = basis;
    }

    Ok(SvdResult {
        u: Matrix::from_columns(m, &ucols),
        s,
        v: Matrix::from_columns(n, &vcols),
        tol: config.tol,
    })
}

#[inline]
fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b * phase;
        *a = x * c - y * s;
        *b = x * s + y * c;
    }
}
