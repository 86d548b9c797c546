use crate::algebra::AlgebraElement;
use crate::error::Result;
use crate::matrix::{project_l1_ball, prox_schatten, svd, Matrix, NormKind, C64};

use super::certificate::{certify, search_certificate};
use super::{better, DualCertificate, Problem, SolveOptions};

const CHECK_EVERY: usize = 200;

pub(crate) struct Run {
    /// Coefficients in the original scale.
    pub coeffs: Vec<C64>,
    pub primal: f64,
    pub certificate: Option<DualCertificate>,
    pub iterations: usize,
}

/// ADMM on `min f(z)` s.t. `z + Y c = x / scale`, scaled dual `u`.
pub(crate) fn run(problem: &Problem<'_>, c0: &[C64], scale: f64, opts: &SolveOptions) -> Result<Run> {
    let kind = problem.kind;
    let rho = opts.penalty;
    let tol_s = opts.tol / scale;
    let xs = problem.x.scale_real(1.0 / scale);

    let mut c: Vec<C64> = c0.iter().map(|z| z / scale).collect();
    let mut yc = problem.v.combination(&c);
    let mut u = AlgebraElement::zeros(xs.signature());

    let mut best_c = c.clone();
    let mut best_primal = (&xs - &yc).norm(kind)?;
    let mut best_cert: Option<DualCertificate> = None;
    let mut iterations = 0;
    let mut next_face_search = CHECK_EVERY;

    for it in 1..=opts.max_iter {
        iterations = it;
        // z-step
        let w = &(&xs - &yc) - &u;
        let z = prox_element(&w, kind, 1.0 / rho)?;
        // c-step
        let target = &(&xs - &z) - &u;
        let c_new = problem.ls.least_squares(&target);
        let yc_new = problem.v.combination(&c_new);
        // dual step
        let r = &(&z + &yc_new) - &xs;
        u = &u + &r;

        let r_pri = r.frobenius_norm();
        let r_dual = rho * (&yc_new - &yc).frobenius_norm();
        c = c_new;
        yc = yc_new;

        if it % CHECK_EVERY != 0 && it != opts.max_iter {
            continue;
        }
        let primal = (&xs - &yc).norm(kind)?;
        if primal < best_primal {
            best_primal = primal;
            best_c = c.clone();
        }
        // Two dual candidates: the multiplier and the z-step subgradient.
        let multiplier = u.scale_real(rho).adjoint();
        let subgradient = (&w - &z).scale_real(rho).adjoint();
        for cand in [multiplier, subgradient] {
            best_cert = better(best_cert, certify(problem, &cand));
        }
        let mut lower = best_cert.as_ref().map_or(0.0, |c| c.value) / scale;
        if best_primal - lower > tol_s / 10.0 && it >= next_face_search {
            // The face search is costlier than the multiplier candidates, so
            // its schedule backs off geometrically.
            next_face_search *= 2;
            let unscaled: Vec<C64> = best_c.iter().map(|z| z * scale).collect();
            let found = search_certificate(problem, &problem.residual(&unscaled));
            best_cert = better(best_cert, found.certificate);
            lower = best_cert.as_ref().map_or(0.0, |c| c.value) / scale;
        }
        let gap = best_primal - lower;
        // A certificate this tight settles the value even if the splitting
        // residuals stall on a degenerate face.
        if (r_pri.max(r_dual) <= tol_s / 10.0 && gap <= tol_s) || gap <= tol_s / 10.0 {
            break;
        }
    }

    Ok(Run {
        coeffs: best_c.iter().map(|z| z * scale).collect(),
        primal: best_primal * scale,
        certificate: best_cert,
        iterations,
    })
}

/// `argmin_z ||z|| * step + 1/2 ||z - w||_F^2` for the algebra norm.
///
/// The trace norm separates over blocks. For the operator norm the Moreau
/// identity needs the nuclear-ball projection of the whole element, which
/// couples blocks through one joint simplex projection.
pub(crate) fn prox_element(w: &AlgebraElement, kind: NormKind, step: f64) -> Result<AlgebraElement> {
    match kind {
        NormKind::Trace => {
            let blocks = w
                .blocks()
                .iter()
                .map(|b| prox_schatten(b, kind, step))
                .collect::<Result<Vec<_>>>()?;
            Ok(AlgebraElement::from_blocks_unchecked(w.signature(), blocks))
        }
        NormKind::Operator => {
            let decomps = w.blocks().iter().map(svd).collect::<Result<Vec<_>>>()?;
            let scaled: Vec<f64> = decomps.iter().flat_map(|d| d.s.iter().map(|s| s / step)).collect();
            let projected = project_l1_ball(&scaled, 1.0);
            let mut offset = 0;
            let blocks = decomps
                .iter()
                .map(|d| {
                    let n = d.s.len();
                    let s: Vec<f64> =
                        d.s.iter()
                            .zip(&projected[offset..offset + n])
                            .map(|(s, p)| s - step * p)
                            .collect();
                    offset += n;
                    Matrix::from_svd_parts(&d.u, &s, &d.v)
                })
                .collect();
            Ok(AlgebraElement::from_blocks_unchecked(w.signature(), blocks))
        }
    }
}
