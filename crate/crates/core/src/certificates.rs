//! Unitary-average certificates, trace-norm smoothness and
//! Birkhoff-James orthogonality.

use crate::algebra::{pairing, AlgebraElement, SubspaceBasis};
use crate::error::{Error, Result};
use crate::matrix::{polar_decompose, svd, Matrix, NormKind, C64, ZERO};
use crate::solver::{solve_distance, SolveOptions};

const UNITARY_TOL: f64 = 1e-10;
const WEIGHT_TOL: f64 = 1e-12;
const SINGER_TOL: f64 = 1e-8;
/// Singular values within this factor above the rank threshold are flagged
/// as borderline by [`trace_smoothness`].
const BORDERLINE_FACTOR: f64 = 1e3;

/// A convex combination `sum_i weights[i] * unitaries[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingerCertificate {
    pub weights: Vec<f64>,
    pub unitaries: Vec<AlgebraElement>,
}

impl SingerCertificate {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn combination(&self) -> AlgebraElement {
        let mut out = AlgebraElement::zeros(self.unitaries[0].signature());
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            out.axpy(C64::new(*w, 0.0), u);
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.is_empty() || self.weights.len() != self.unitaries.len() {
            return Err(Error::InvalidArgument("weights and unitaries must pair up".into()));
        }
        if self.weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
            return Err(Error::InvalidArgument("weights must lie in [0, 1]".into()));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidArgument("weights must sum to 1".into()));
        }
        let sig = self.unitaries[0].signature();
        for u in &self.unitaries {
            if u.signature() != sig {
                return Err(Error::SignatureMismatch);
            }
            if unitarity_defect(u) > UNITARY_TOL {
                return Err(Error::InvalidArgument("certificate element is not unitary".into()));
            }
        }
        Ok(())
    }
}

fn unitarity_defect(u: &AlgebraElement) -> f64 {
    u.blocks()
        .iter()
        .map(|b| (&b.adjoint_matmul(b) - &Matrix::identity(b.rows())).max_abs())
        .fold(0.0, f64::max)
}

/// Writes a contraction as the average of two unitaries: with `a = P S Q^H`,
/// `a = (P D Q^H + P D^H Q^H) / 2` where `D = diag(exp(i arccos s))`.
/// A unitary input is returned as itself with weight 1.
pub fn singer_decompose(a: &AlgebraElement) -> Result<SingerCertificate> {
    let norm = a.norm(NormKind::Operator)?;
    if norm > 1.0 + UNITARY_TOL {
        return Err(Error::NotAContraction(norm));
    }
    if unitarity_defect(a) <= UNITARY_TOL {
        return Ok(SingerCertificate {
            weights: vec![1.0],
            unitaries: vec![a.clone()],
        });
    }
    let mut plus = Vec::with_capacity(a.blocks().len());
    let mut minus = Vec::with_capacity(a.blocks().len());
    for block in a.blocks() {
        let d = svd(block)?;
        let phases: Vec<C64> = d.s.iter().map(|&s| C64::from_polar(1.0, s.min(1.0).acos())).collect();
        let u = d.u.matmul(&Matrix::from_diag(&phases));
        plus.push(u.matmul_adjoint(&d.v));
        let conj: Vec<C64> = phases.iter().map(|p| p.conj()).collect();
        minus.push(d.u.matmul(&Matrix::from_diag(&conj)).matmul_adjoint(&d.v));
    }
    let sig = a.signature();
    Ok(SingerCertificate {
        weights: vec![0.5, 0.5],
        unitaries: vec![
            AlgebraElement::new(sig.clone(), plus)?,
            AlgebraElement::new(sig.clone(), minus)?,
        ],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingerCheck {
    /// `Re sum_i w_i pairing(u_i, x)`.
    pub value: f64,
    pub feasible: bool,
    /// `|Im sum_i w_i pairing(u_i, x - v0)|`.
    pub imaginary_part: f64,
    /// `max_j |sum_i w_i pairing(u_i, y_j)|`.
    pub feasibility_residual: f64,
}

/// Checks a unitary-average certificate against `x`, the subspace and a
/// claimed best approximant `v0`.
pub fn verify_singer(
    x: &AlgebraElement,
    v: &SubspaceBasis,
    v0: &AlgebraElement,
    cert: &SingerCertificate,
) -> Result<SingerCheck> {
    if x.signature() != v.signature() || v0.signature() != x.signature() {
        return Err(Error::SignatureMismatch);
    }
    cert.validate()?;
    if cert.unitaries[0].signature() != x.signature() {
        return Err(Error::SignatureMismatch);
    }
    let weighted = |target: &AlgebraElement| -> Result<C64> {
        let mut acc = ZERO;
        for (w, u) in cert.weights.iter().zip(&cert.unitaries) {
            acc += pairing(u, target)? * *w;
        }
        Ok(acc)
    };
    let imaginary_part = weighted(&(x - v0))?.im.abs();
    let mut feasibility_residual: f64 = 0.0;
    for y in v.elements() {
        feasibility_residual = feasibility_residual.max(weighted(y)?.norm());
    }
    let value = weighted(x)?.re;
    Ok(SingerCheck {
        value,
        feasible: imaginary_part <= SINGER_TOL && feasibility_residual <= SINGER_TOL,
        imaginary_part,
        feasibility_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    pub smooth: bool,
    /// The unique norming functional `v*` when smooth.
    pub witness: Option<AlgebraElement>,
    /// Some singular value sits just above the rank threshold, so the
    /// verdict is sensitive to perturbation.
    pub borderline: bool,
}

/// Trace-norm smoothness: every block has full numerical rank.
pub fn trace_smoothness(x: &AlgebraElement) -> Result<SmoothnessReport> {
    let mut smooth = true;
    let mut borderline = false;
    let mut any_nonzero = false;
    for block in x.blocks() {
        let d = svd(block)?;
        any_nonzero |= d.max_singular() > 0.0;
        let tol = d.rank_tol();
        smooth &= d.rank() == d.s.len();
        borderline |= d.s.iter().any(|&s| s > tol && s <= BORDERLINE_FACTOR * tol);
    }
    if !any_nonzero {
        return Err(Error::ZeroElement);
    }
    let witness = if smooth { Some(polar_adjoint(x)?) } else { None };
    Ok(SmoothnessReport {
        smooth,
        witness,
        borderline,
    })
}

pub fn is_smooth_trace(x: &AlgebraElement) -> Result<bool> {
    Ok(trace_smoothness(x)?.smooth)
}

/// Blocks `(polar factor of x_i)^H`; pairs with `x` to `||x||_1`.
pub fn polar_adjoint(x: &AlgebraElement) -> Result<AlgebraElement> {
    let blocks = x
        .blocks()
        .iter()
        .map(|b| polar_decompose(b).map(|p| p.v.adjoint()))
        .collect::<Result<Vec<_>>>()?;
    AlgebraElement::new(x.signature().clone(), blocks)
}

/// Two distinct unit-operator-norm functionals norming `x` in the trace
/// norm, or `None` when `x` is smooth. The second extends the first by the
/// partial isometry between the kernels.
pub fn distinct_norming_pair(x: &AlgebraElement) -> Result<Option<(AlgebraElement, AlgebraElement)>> {
    if trace_smoothness(x)?.smooth {
        return Ok(None);
    }
    let mut first = Vec::with_capacity(x.blocks().len());
    let mut second = Vec::with_capacity(x.blocks().len());
    for block in x.blocks() {
        let d = svd(block)?;
        let n = d.s.len();
        let r = d.rank();
        let base = Matrix::from_svd_parts(&d.v, &vec![1.0; r], &d.u);
        let kernel = d.v.columns(r..n).matmul_adjoint(&d.u.columns(r..n));
        second.push(&base + &kernel);
        first.push(base);
    }
    let sig = x.signature().clone();
    Ok(Some((
        AlgebraElement::new(sig.clone(), first)?,
        AlgebraElement::new(sig, second)?,
    )))
}

/// For smooth `x`: zero is a best trace-norm approximant iff `v*` annihilates
/// the subspace.
pub fn check_zero_best_approx(x: &AlgebraElement, v: &SubspaceBasis) -> Result<bool> {
    if x.signature() != v.signature() {
        return Err(Error::SignatureMismatch);
    }
    let report = trace_smoothness(x)?;
    let witness = report.witness.ok_or(Error::NotSmooth)?;
    Ok(v.pairing_residual(&witness)? <= SINGER_TOL)
}

/// Whether `x` is Birkhoff-James orthogonal to the subspace, i.e. zero is a
/// best approximant: `dist(x, V) >= ||x|| - tol`.
pub fn bj_orthogonal(x: &AlgebraElement, v: &SubspaceBasis, kind: NormKind, opts: &SolveOptions) -> Result<bool> {
    let report = solve_distance(x, v, kind, opts)?;
    Ok(report.primal_value >= x.norm(kind)? - opts.tol)
}
