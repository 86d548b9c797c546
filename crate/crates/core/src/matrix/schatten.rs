use super::{svd, Matrix, NormKind};
use crate::error::{Error, Result};

pub fn schatten_norm(a: &Matrix, kind: NormKind) -> Result<f64> {
    let r = svd(a)?;
    Ok(match kind {
        NormKind::Operator => r.max_singular(),
        NormKind::Trace => r.s.iter().sum(),
    })
}

/// Polar factors `x = v * absx` with `v` a partial isometry.
#[derive(Debug, Clone)]
pub struct PolarResult {
    pub v: Matrix,
    pub absx: Matrix,
    pub rank: usize,
}

/// `v = U_r V_r^H` on the numerically nonzero singular subspace and
/// `absx = V diag(s) V^H`. The zero matrix maps to `v = 0`.
pub fn polar_decompose(a: &Matrix) -> Result<PolarResult> {
    let r = svd(a)?;
    let rank = r.rank();
    let ones = vec![1.0; rank];
    let v = Matrix::from_svd_parts(&r.u, &ones, &r.v);
    let absx = Matrix::from_svd_parts(&r.v, &r.s, &r.v);
    Ok(PolarResult { v, absx, rank })
}

/// Euclidean projection of a nonnegative vector onto
/// `{w >= 0 : sum(w) <= radius}`.
pub fn project_l1_ball(values: &[f64], radius: f64) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    if total <= radius {
        return values.to_vec();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    values.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Frobenius-nearest point of the trace-norm ball of the given radius.
pub fn project_nuclear_ball(a: &Matrix, radius: f64) -> Result<Matrix> {
    check_positive(radius, "radius")?;
    let r = svd(a)?;
    if r.s.iter().sum::<f64>() <= radius {
        return Ok(a.clone());
    }
    let s = project_l1_ball(&r.s, radius);
    Ok(Matrix::from_svd_parts(&r.u, &s, &r.v))
}

/// `argmin_P step * ||P|| + 1/2 ||P - A||_F^2` for the chosen Schatten norm.
pub fn prox_schatten(a: &Matrix, kind: NormKind, step: f64) -> Result<Matrix> {
    check_positive(step, "step")?;
    match kind {
        NormKind::Trace => {
            let r = svd(a)?;
            let s: Vec<f64> = r.s.iter().map(|&s| (s - step).max(0.0)).collect();
            Ok(Matrix::from_svd_parts(&r.u, &s, &r.v))
        }
        NormKind::Operator => {
            // Moreau: prox_{t|.|}(A) = A - t * proj_{dual ball}(A / t).
            let inner = project_nuclear_ball(&a.scale_real(1.0 / step), 1.0)?;
            Ok(a - &inner.scale_real(step))
        }
    }
}

fn check_positive(value: f64, name: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")))
    }
}
