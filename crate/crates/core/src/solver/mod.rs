//! Distance from a point to a subspace, with dual certificates.
//!
//! The primal problem `min_c ||x - sum_j c_j y_j||` is solved by operator
//! splitting. The dual problem maximizes `|pairing(a, x)|` over `a` in the
//! annihilator `N_V` with unit dual norm (trace norm for operator-norm
//! distances, operator norm for trace-norm distances). Every feasible `a`
//! gives a lower bound, and the reported gap is `primal - certificate value`.

mod admm;
mod brute;
mod certificate;
mod polish;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{annihilator_projector, AlgebraElement, OrthoFactor, SubspaceBasis};
use crate::error::{Error, Result};
use crate::matrix::{NormKind, C64, ZERO};

pub use brute::{brute_force_distance, GridSpec};
pub use certificate::{extract_certificate, verify_certificate, CertificateCheck, FEASIBILITY_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Duality-gap target.
    pub tol: f64,
    pub max_iter: usize,
    /// Splitting penalty (fixed).
    pub penalty: f64,
    pub seed: u64,
    /// Random starting points in addition to `c = 0`.
    pub restarts: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-6,
            max_iter: 20_000,
            penalty: 1.0,
            seed: 0,
            restarts: 3,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "penalty must be positive, got {}",
                self.penalty
            )));
        }
        Ok(())
    }
}

/// A feasible dual witness `a in N_V`, normalized to unit dual norm and
/// phase-rotated so that `pairing(a, x)` is real and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub witness: AlgebraElement,
    /// The distance problem this certifies.
    pub kind: NormKind,
    /// `max_j |pairing(a, y_j)|`.
    pub feasibility_residual: f64,
    /// Trace norm of `a` for operator-norm problems, operator norm for
    /// trace-norm problems.
    pub dual_norm: f64,
    /// `|pairing(a, x)|`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub kind: NormKind,
    pub primal_value: f64,
    pub best_coeffs: Vec<C64>,
    pub best_approx: AlgebraElement,
    pub certificate: Option<DualCertificate>,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DistanceReport {
    pub fn lower_bound(&self) -> f64 {
        self.certificate.as_ref().map_or(0.0, |c| c.value)
    }
}

/// Shared per-problem data.
pub(crate) struct Problem<'a> {
    pub x: &'a AlgebraElement,
    pub v: &'a SubspaceBasis,
    pub kind: NormKind,
    pub ls: OrthoFactor,
    pub annihilator: OrthoFactor,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(x: &'a AlgebraElement, v: &'a SubspaceBasis, kind: NormKind) -> Result<Self> {
        if x.signature() != v.signature() {
            return Err(Error::SignatureMismatch);
        }
        Ok(Problem {
            x,
            v,
            kind,
            ls: OrthoFactor::new(v.elements()),
            annihilator: annihilator_projector(v),
        })
    }

    pub(crate) fn residual(&self, coeffs: &[C64]) -> AlgebraElement {
        self.x - &self.v.combination(coeffs)
    }

    pub(crate) fn objective(&self, coeffs: &[C64]) -> Result<f64> {
        self.residual(coeffs).norm(self.kind)
    }
}

pub fn solve_distance(
    x: &AlgebraElement,
    v: &SubspaceBasis,
    kind: NormKind,
    opts: &SolveOptions,
) -> Result<DistanceReport> {
    opts.validate()?;
    let problem = Problem::new(x, v, kind)?;
    let k = v.len();
    let scale = x.norm(kind)?;
    if scale == 0.0 {
        return Ok(DistanceReport {
            kind,
            primal_value: 0.0,
            best_coeffs: vec![ZERO; k],
            best_approx: AlgebraElement::zeros(x.signature()),
            certificate: None,
            gap: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![vec![ZERO; k]];
    let y_norms: Vec<f64> = v.elements().iter().map(AlgebraElement::frobenius_norm).collect();
    let x_norm = x.frobenius_norm();
    for _ in 0..opts.restarts {
        starts.push(
            y_norms
                .iter()
                .map(|&yn| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im) * (x_norm / yn)
                })
                .collect(),
        );
    }

    let mut runs = Vec::with_capacity(starts.len());
    let mut best_cert: Option<DualCertificate> = None;
    let mut iterations = 0;
    for c0 in &starts {
        let run = admm::run(&problem, c0, scale, opts)?;
        iterations += run.iterations;
        best_cert = better(best_cert, run.certificate.clone());
        runs.push(run);
    }

    // Tie-break among near-optimal runs by the smallest coefficient vector.
    let min_primal = runs.iter().map(|r| r.primal).fold(f64::INFINITY, f64::min);
    let chosen = runs
        .iter()
        .filter(|r| r.primal <= min_primal + opts.tol)
        .min_by(|a, b| coeff_norm(&a.coeffs).total_cmp(&coeff_norm(&b.coeffs)))
        .expect("at least one run");
    let mut coeffs = chosen.coeffs.clone();
    let mut primal = chosen.primal;

    if let Some(polished) = polish::newton_polish(&problem, &coeffs)? {
        let value = problem.objective(&polished)?;
        if value <= primal * (1.0 + 1e-14) {
            coeffs = polished;
            primal = value;
        }
    }

    let gap_of = |cert: &Option<DualCertificate>| primal - cert.as_ref().map_or(0.0, |c| c.value);
    if gap_of(&best_cert) > opts.tol * 1e-3 {
        let residual = problem.residual(&coeffs);
        let extracted = certificate::search_certificate(&problem, &residual);
        best_cert = better(best_cert, extracted.certificate);
    }

    let gap = gap_of(&best_cert);
    Ok(DistanceReport {
        kind,
        primal_value: primal,
        best_approx: v.combination(&coeffs),
        best_coeffs: coeffs,
        certificate: best_cert,
        gap,
        iterations,
        converged: gap <= opts.tol,
    })
}

fn coeff_norm(c: &[C64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn better(a: Option<DualCertificate>, b: Option<DualCertificate>) -> Option<DualCertificate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.value > a.value { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}
