//! Operators on `l2(N)` of the form head ⊕ weighted unilateral shift, plus
//! finitely many extra entries, and distance bounds obtained by truncation.
//!
//! Coordinates: `zeta_0, zeta_1, ...`. The head acts on the first `d`
//! coordinates and the shift sends `zeta_{d+n}` to `w_n zeta_{d+n+1}`.

use crate::algebra::{AlgebraElement, SubspaceBasis};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, NormKind, C64};
use crate::solver::{solve_distance, verify_certificate, DistanceReport, SolveOptions};

/// Largest truncation order [`dist1_tail`] will try.
pub const MAX_TRUNCATION: usize = 4096;

/// Shift weight sequences `w_0, w_1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    /// `w_n = c`.
    Constant(f64),
    /// `w_n = first * ratio^n`.
    Geometric { first: f64, ratio: f64 },
    /// Listed values, then `tail` forever.
    Explicit { values: Vec<f64>, tail: f64 },
    /// `w_n = base + scale / (n + 1)`.
    Harmonic { base: f64, scale: f64 },
}

impl WeightRule {
    pub fn weight(&self, n: usize) -> f64 {
        match self {
            WeightRule::Constant(c) => *c,
            WeightRule::Geometric { first, ratio } => first * ratio.powi(n.min(i32::MAX as usize) as i32),
            WeightRule::Explicit { values, tail } => values.get(n).copied().unwrap_or(*tail),
            WeightRule::Harmonic { base, scale } => base + scale / (n + 1) as f64,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match self {
            WeightRule::Constant(c) => c.is_finite(),
            WeightRule::Geometric { first, ratio } => first.is_finite() && ratio.is_finite(),
            WeightRule::Explicit { values, tail } => tail.is_finite() && values.iter().all(|v| v.is_finite()),
            WeightRule::Harmonic { base, scale } => base.is_finite() && scale.is_finite(),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    /// `limsup |w_n|`.
    pub fn limsup(&self) -> Result<f64> {
        match self {
            WeightRule::Constant(c) => Ok(c.abs()),
            WeightRule::Geometric { first, ratio } => {
                if *first == 0.0 || ratio.abs() < 1.0 {
                    Ok(0.0)
                } else if ratio.abs() == 1.0 {
                    Ok(first.abs())
                } else {
                    Err(Error::UnsupportedForm(format!(
                        "geometric weights with ratio {ratio} are unbounded"
                    )))
                }
            }
            WeightRule::Explicit { tail, .. } => Ok(tail.abs()),
            WeightRule::Harmonic { base, .. } => Ok(base.abs()),
        }
    }

    /// `sup_{n >= m} |w_n|`, infinite for unbounded rules.
    pub fn sup_from(&self, m: usize) -> f64 {
        match self {
            WeightRule::Constant(c) => c.abs(),
            WeightRule::Geometric { first, ratio } => {
                if *first == 0.0 {
                    0.0
                } else if ratio.abs() <= 1.0 {
                    self.weight(m).abs()
                } else {
                    f64::INFINITY
                }
            }
            WeightRule::Explicit { values, tail } => values.iter().skip(m).fold(tail.abs(), |acc, v| acc.max(v.abs())),
            // Monotone in n, so the sup is at n = m or in the limit.
            WeightRule::Harmonic { base, .. } => self.weight(m).abs().max(base.abs()),
        }
    }

    /// `sum_{n >= m} |w_n|`, infinite when not summable.
    pub fn sum_from(&self, m: usize) -> f64 {
        match self {
            WeightRule::Constant(c) => {
                if *c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            WeightRule::Geometric { first, ratio } => {
                if *first == 0.0 {
                    0.0
                } else if ratio.abs() < 1.0 {
                    self.weight(m).abs() / (1.0 - ratio.abs())
                } else {
                    f64::INFINITY
                }
            }
            WeightRule::Explicit { values, tail } => {
                if *tail != 0.0 {
                    f64::INFINITY
                } else {
                    values.iter().skip(m).map(|v| v.abs()).sum()
                }
            }
            WeightRule::Harmonic { base, scale } => {
                if *base == 0.0 && *scale == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// A single matrix entry `<x zeta_col, zeta_row> = value` added on top of the
/// head and shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingEntry {
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailOperator {
    head: Matrix,
    weights: WeightRule,
    coupling: Vec<CouplingEntry>,
}

impl TailOperator {
    pub fn new(head: Matrix, weights: WeightRule, coupling: Vec<CouplingEntry>) -> Result<Self> {
        if !head.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "head must be square, got {}x{}",
                head.rows(),
                head.cols()
            )));
        }
        if !head.is_finite()
            || coupling
                .iter()
                .any(|e| !(e.value.re.is_finite() && e.value.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        weights.validate()?;
        Ok(TailOperator {
            head,
            weights,
            coupling,
        })
    }

    /// A finite-rank operator supported on the first `head.rows()`
    /// coordinates.
    pub fn finite(head: Matrix) -> Result<Self> {
        TailOperator::new(head, WeightRule::Constant(0.0), Vec::new())
    }

    pub fn head(&self) -> &Matrix {
        &self.head
    }

    pub fn head_dim(&self) -> usize {
        self.head.rows()
    }

    pub fn weights(&self) -> &WeightRule {
        &self.weights
    }

    pub fn coupling(&self) -> &[CouplingEntry] {
        &self.coupling
    }

    /// Replaces the head, keeping shift and coupling.
    pub fn with_head(&self, head: Matrix) -> Result<Self> {
        TailOperator::new(head, self.weights.clone(), self.coupling.clone())
    }

    /// Smallest corner size containing the head and every coupling entry.
    pub fn support(&self) -> usize {
        self.coupling
            .iter()
            .map(|e| e.row.max(e.col) + 1)
            .fold(self.head_dim(), usize::max)
    }

    /// Number of shift entries `(d+n+1, d+n)` that fall inside the `N x N`
    /// corner.
    fn shifts_inside(&self, n: usize) -> usize {
        n.saturating_sub(self.head_dim() + 1)
    }

    fn coupling_outside(&self, n: usize) -> f64 {
        self.coupling
            .iter()
            .filter(|e| e.row >= n || e.col >= n)
            .map(|e| e.value.norm())
            .sum()
    }

    /// Upper bound on `||x - P_N x P_N||_1`: the shift part outside the
    /// corner is itself a weighted shift, plus one rank-one term per
    /// coupling entry outside.
    pub fn trace_tail_bound(&self, n: usize) -> f64 {
        self.weights.sum_from(self.shifts_inside(n)) + self.coupling_outside(n)
    }

    /// Upper bound on `||x - P_N x P_N||`.
    pub fn op_tail_bound(&self, n: usize) -> f64 {
        self.weights.sup_from(self.shifts_inside(n)) + self.coupling_outside(n)
    }

    /// `limsup |w_n|`, which for this class is the essential quantity
    /// `sup { limsup ||x xi_n|| : xi_n unit, weakly null }`.
    pub fn delta_ess(&self) -> Result<f64> {
        self.weights.limsup()
    }

    pub fn truncate(&self, n: usize) -> Result<Truncation> {
        let d = self.head_dim();
        if n < d {
            return Err(Error::TooSmall { requested: n, head: d });
        }
        let mut m = Matrix::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.head[(i, j)];
            }
        }
        for k in 0..self.shifts_inside(n) {
            m[(d + k + 1, d + k)] += C64::new(self.weights.weight(k), 0.0);
        }
        for e in &self.coupling {
            if e.row < n && e.col < n {
                m[(e.row, e.col)] += e.value;
            }
        }
        Ok(Truncation {
            n,
            element: m,
            error_bound: self.trace_tail_bound(n),
        })
    }
}

/// Top-left `N x N` corner with a trace-norm error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub n: usize,
    pub element: Matrix,
    pub error_bound: f64,
}

pub fn delta_ess(x: &TailOperator) -> Result<f64> {
    x.delta_ess()
}

pub fn truncate(x: &TailOperator, n: usize) -> Result<Truncation> {
    x.truncate(n)
}

/// Rigorous enclosure of an infinite-dimensional distance.
#[derive(Debug, Clone, PartialEq)]
pub struct TailDistance {
    pub lo: f64,
    pub hi: f64,
    /// Truncation order of the finite solve.
    pub n: usize,
    /// Norm bound on the discarded part of `x`.
    pub bound: f64,
    /// The finite solve on the truncated problem.
    pub report: DistanceReport,
}

impl TailDistance {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn finite_support(generators: &[TailOperator]) -> Result<usize> {
    let mut n = 0;
    for g in generators {
        if g.weights.sup_from(0) != 0.0 {
            return Err(Error::InvalidArgument(
                "subspace generators must have finite support".into(),
            ));
        }
        n = n.max(g.support());
    }
    Ok(n)
}

fn truncated_basis(generators: &[TailOperator], n: usize) -> Result<SubspaceBasis> {
    let elems = generators
        .iter()
        .map(|g| AlgebraElement::from_matrix(g.truncate(n)?.element))
        .collect::<Result<Vec<_>>>()?;
    SubspaceBasis::new(elems)
}

/// Trace-norm distance from `x` to `span(generators)`.
///
/// Picks the smallest `N` covering every support with `trace_tail_bound(N)
/// <= tol/2` and solves the corner problem to `tol/2`. The lower end is the
/// corner certificate, which stays feasible after zero-padding. The upper end
/// adds the tail bound to the corner primal value.
pub fn dist1_tail(
    x: &TailOperator,
    generators: &[TailOperator],
    tol: f64,
    opts: &SolveOptions,
) -> Result<TailDistance> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if generators.is_empty() {
        return Err(Error::InvalidArgument("subspace needs at least one generator".into()));
    }
    let start = x.support().max(finite_support(generators)?).max(1);
    let target = tol / 2.0;
    let n = (start..=MAX_TRUNCATION)
        .find(|&n| x.trace_tail_bound(n) <= target)
        .ok_or(Error::NoFiniteN {
            target,
            cap: MAX_TRUNCATION,
        })?;
    let corner = x.truncate(n)?;
    let xe = AlgebraElement::from_matrix(corner.element)?;
    let v = truncated_basis(generators, n)?;
    let solve_opts = SolveOptions {
        tol: target,
        ..opts.clone()
    };
    let report = solve_distance(&xe, &v, NormKind::Trace, &solve_opts)?;
    let lo = match &report.certificate {
        Some(cert) => {
            let check = verify_certificate(&xe, &v, cert)?;
            if check.feasible {
                check.lower_bound
            } else {
                0.0
            }
        }
        None => 0.0,
    };
    let hi = report.primal_value + corner.error_bound;
    // Rounding in the certificate value can overshoot the primal end.
    Ok(TailDistance {
        lo: lo.min(hi),
        hi,
        n,
        bound: corner.error_bound,
        report,
    })
}

/// Operator-norm distance when `x` splits as head ⊕ weighted shift and every
/// generator lives on the head: `dist = max(dist(head, V), sup |w_n|)`.
pub fn dist_op_tail(x: &TailOperator, generators: &[TailOperator], opts: &SolveOptions) -> Result<TailDistance> {
    if generators.is_empty() {
        return Err(Error::InvalidArgument("subspace needs at least one generator".into()));
    }
    let d = x.head_dim();
    if x.support() > d {
        return Err(Error::UnsupportedForm(
            "operator-norm tail distance needs all coupling inside the head".into(),
        ));
    }
    if finite_support(generators)? > d {
        return Err(Error::UnsupportedForm(
            "operator-norm tail distance needs generators supported on the head".into(),
        ));
    }
    let shift_norm = x.weights.sup_from(0);
    if !shift_norm.is_finite() {
        return Err(Error::UnsupportedForm("unbounded shift weights".into()));
    }
    let xe = AlgebraElement::from_matrix(x.head.clone())?;
    let v = truncated_basis(generators, d)?;
    let report = solve_distance(&xe, &v, NormKind::Operator, opts)?;
    let head_lo = match &report.certificate {
        Some(cert) => {
            let check = verify_certificate(&xe, &v, cert)?;
            if check.feasible {
                check.lower_bound
            } else {
                0.0
            }
        }
        None => 0.0,
    };
    let hi = report.primal_value.max(shift_norm);
    Ok(TailDistance {
        lo: head_lo.max(shift_norm).min(hi),
        hi,
        n: d,
        bound: 0.0,
        report,
    })
}
