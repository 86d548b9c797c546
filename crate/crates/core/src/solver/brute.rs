use crate::algebra::{AlgebraElement, SubspaceBasis};
use crate::error::{Error, Result};
use crate::matrix::{NormKind, C64};

/// Grid resolution for [`brute_force_distance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points per real axis of each coefficient on the coarse pass.
    pub points: usize,
    /// Zoom passes, each re-centred on the best point with the box shrunk to
    /// two coarse cells.
    pub refinements: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 41,
            refinements: 6,
        }
    }
}

/// Minimum of the objective over a coefficient grid. The box radius is
/// `2 * norm(x) / min_j norm(y_j)`, which contains every minimizer. Every
/// returned value is attained, so it never undercuts the true distance.
pub fn brute_force_distance(x: &AlgebraElement, v: &SubspaceBasis, kind: NormKind, grid: &GridSpec) -> Result<f64> {
    if x.signature() != v.signature() {
        return Err(Error::SignatureMismatch);
    }
    let k = v.len();
    if k > 2 {
        return Err(Error::TooManyDimensions(k));
    }
    if grid.points < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points per axis".into()));
    }
    let x_norm = x.norm(kind)?;
    let y_min = v
        .elements()
        .iter()
        .map(|y| y.norm(kind))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let objective = |c: &[C64]| -> Result<f64> { (x - &v.combination(c)).norm(kind) };

    let mut best = x_norm;
    let mut center = vec![C64::new(0.0, 0.0); k];
    let mut radius = 2.0 * x_norm / y_min;
    if x_norm == 0.0 {
        return Ok(0.0);
    }
    let axes = 2 * k;
    let n = grid.points;
    for _ in 0..=grid.refinements {
        let step = 2.0 * radius / (n - 1) as f64;
        let total = n.pow(axes as u32);
        let mut point = vec![C64::new(0.0, 0.0); k];
        let mut best_point = center.clone();
        for idx in 0..total {
            let mut rest = idx;
            for (j, p) in point.iter_mut().enumerate() {
                let re = rest % n;
                rest /= n;
                let im = rest % n;
                rest /= n;
                *p = center[j] + C64::new(re as f64 * step - radius, im as f64 * step - radius);
            }
            let value = objective(&point)?;
            if value < best {
                best = value;
                best_point.clone_from(&point);
            }
        }
        center = best_point;
        radius = 2.0 * step;
    }
    Ok(best)
}
