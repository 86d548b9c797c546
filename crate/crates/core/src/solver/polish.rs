use crate::algebra::{pairing, AlgebraElement};
use crate::error::Result;
use crate::matrix::{svd, Matrix, NormKind, C64};

use super::Problem;

const MAX_STEPS: usize = 40;
/// Relative spectral separation below which the objective is treated as
/// nonsmooth at the current point.
const SMOOTH_GAP: f64 = 1e-7;

/// Damped Newton refinement of the coefficients where the objective is
/// differentiable: full-rank residual blocks (trace) or a simple top singular
/// value (operator). Returns `None` when no smooth improvement is available.
pub(crate) fn newton_polish(problem: &Problem<'_>, start: &[C64]) -> Result<Option<Vec<C64>>> {
    let k = start.len();
    if k == 0 {
        return Ok(None);
    }
    let y_norms: Vec<f64> = problem
        .v
        .elements()
        .iter()
        .map(AlgebraElement::frobenius_norm)
        .collect();
    let mut theta = to_real(start);
    let Some(mut state) = evaluate(problem, &theta)? else {
        return Ok(None);
    };
    let start_value = state.value;
    let mut improved = false;

    for _ in 0..MAX_STEPS {
        let gnorm = norm(&state.grad);
        if gnorm <= 1e-15 * state.value.max(1e-300) {
            break;
        }
        let Some(hess) = hessian(problem, &theta, &state, &y_norms)? else {
            break;
        };
        let Some(step) = solve_dense(hess, state.grad.iter().map(|g| -g).collect()) else {
            break;
        };
        let slope: f64 = step.iter().zip(&state.grad).map(|(a, b)| a * b).sum();
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(slope < 0.0) {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            if let Some(next) = evaluate(problem, &trial)? {
                let armijo = next.value <= state.value + 1e-4 * t * slope;
                // Near the optimum the decrease drops below rounding in the
                // value, so a shrinking gradient decides instead.
                let flat = next.value <= state.value * (1.0 + 1e-14) && norm(&next.grad) < gnorm;
                if armijo || flat {
                    accepted = Some((trial, next));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, next)) = accepted else { break };
        theta = trial;
        state = next;
        improved = true;
    }

    if improved && state.value <= start_value * (1.0 + 1e-14) {
        Ok(Some(from_real(&theta)))
    } else {
        Ok(None)
    }
}

struct State {
    value: f64,
    grad: Vec<f64>,
}

/// Objective and gradient in the real parametrization
/// `(Re c_1, Im c_1, ..., Re c_k, Im c_k)`, or `None` at a nonsmooth point.
fn evaluate(problem: &Problem<'_>, theta: &[f64]) -> Result<Option<State>> {
    let coeffs = from_real(theta);
    let r = problem.residual(&coeffs);
    let decomps = r.blocks().iter().map(svd).collect::<Result<Vec<_>>>()?;
    let s_max = decomps.iter().map(|d| d.max_singular()).fold(0.0, f64::max);
    if s_max == 0.0 {
        return Ok(None);
    }
    let sig = r.signature();
    let (value, witness) = match problem.kind {
        NormKind::Trace => {
            let s_min = decomps
                .iter()
                .flat_map(|d| d.s.iter().copied())
                .fold(f64::INFINITY, f64::min);
            if s_min <= SMOOTH_GAP * s_max {
                return Ok(None);
            }
            let blocks = decomps
                .iter()
                .map(|d| Matrix::from_svd_parts(&d.v, &vec![1.0; d.s.len()], &d.u))
                .collect();
            let value = decomps.iter().flat_map(|d| d.s.iter()).sum();
            (value, AlgebraElement::from_blocks_unchecked(sig, blocks))
        }
        NormKind::Operator => {
            let mut all: Vec<(f64, usize)> = decomps
                .iter()
                .enumerate()
                .flat_map(|(i, d)| d.s.iter().map(move |&s| (s, i)))
                .collect();
            all.sort_by(|a, b| b.0.total_cmp(&a.0));
            if all.len() > 1 && all[0].0 - all[1].0 <= SMOOTH_GAP * s_max {
                return Ok(None);
            }
            let top = all[0].1;
            let blocks = decomps
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let n = d.s.len();
                    if i == top {
                        Matrix::from_svd_parts(&d.v.columns(0..1), &[1.0], &d.u.columns(0..1))
                    } else {
                        Matrix::zeros(n, n)
                    }
                })
                .collect();
            (s_max, AlgebraElement::from_blocks_unchecked(sig, blocks))
        }
    };
    let mut grad = Vec::with_capacity(theta.len());
    for y in problem.v.elements() {
        let p = pairing(&witness, y)?;
        grad.push(-p.re);
        grad.push(p.im);
    }
    Ok(Some(State { value, grad }))
}

/// Symmetrized central-difference Hessian of the analytic gradient.
fn hessian(problem: &Problem<'_>, theta: &[f64], state: &State, y_norms: &[f64]) -> Result<Option<Vec<Vec<f64>>>> {
    let d = theta.len();
    let mut h = vec![vec![0.0; d]; d];
    for i in 0..d {
        let step = 1e-6 * state.value / y_norms[i / 2];
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        plus[i] += step;
        minus[i] -= step;
        let (Some(gp), Some(gm)) = (evaluate(problem, &plus)?, evaluate(problem, &minus)?) else {
            return Ok(None);
        };
        for j in 0..d {
            h[j][i] = (gp.grad[j] - gm.grad[j]) / (2.0 * step);
        }
    }
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (h[i][j] + h[j][i]);
            h[i][j] = avg;
            h[j][i] = avg;
        }
    }
    Ok(Some(h))
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn to_real(c: &[C64]) -> Vec<f64> {
    c.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn from_real(theta: &[f64]) -> Vec<C64> {
    theta.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
