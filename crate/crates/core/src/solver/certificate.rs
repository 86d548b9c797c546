use crate::algebra::{pairing, AlgebraElement, SubspaceBasis};
use crate::error::{Error, Result};
use crate::matrix::{svd, Matrix, NormKind, SvdResult, C64, ZERO};

use super::{better, DistanceReport, DualCertificate, Problem};

/// Largest `max_j |pairing(a, y_j)|` accepted as membership in `N_V`.
pub const FEASIBILITY_TOL: f64 = 1e-8;

const DUAL_NORM_SLACK: f64 = 1e-8;
const DYKSTRA_MAX_ITER: usize = 600;
/// Cluster thresholds relative to the top singular value, finest first.
const LADDER: [f64; 6] = [0.0, 1e-9, 1e-7, 1e-5, 1e-4, 1e-3];

/// Result of an independent certificate check.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub lower_bound: f64,
    pub feasible: bool,
    pub value: f64,
    pub dual_norm: f64,
    pub feasibility_residual: f64,
}

/// Recomputes every certificate quantity from `x`, `V` and the witness alone.
pub fn verify_certificate(x: &AlgebraElement, v: &SubspaceBasis, cert: &DualCertificate) -> Result<CertificateCheck> {
    if x.signature() != v.signature() || cert.witness.signature() != x.signature() {
        return Err(Error::SignatureMismatch);
    }
    let a = &cert.witness;
    let dual_norm = a.norm(cert.kind.dual())?;
    let feasibility_residual = v.pairing_residual(a)?;
    let value = pairing(a, x)?.norm();
    let feasible = feasibility_residual <= FEASIBILITY_TOL && dual_norm <= 1.0 + DUAL_NORM_SLACK;
    Ok(CertificateCheck {
        lower_bound: value / dual_norm.max(1.0),
        feasible,
        value,
        dual_norm,
        feasibility_residual,
    })
}

/// Searches the subdifferential face of the residual `x - best_approx` for a
/// witness in `N_V`.
pub fn extract_certificate(
    x: &AlgebraElement,
    report: &DistanceReport,
    v: &SubspaceBasis,
    kind: NormKind,
) -> Result<DualCertificate> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(report.primal_value > 0.0) {
        return Err(Error::InvalidArgument(
            "certificate extraction needs a positive primal value".into(),
        ));
    }
    let problem = Problem::new(x, v, kind)?;
    if report.best_approx.signature() != x.signature() {
        return Err(Error::SignatureMismatch);
    }
    let residual = x - &report.best_approx;
    let outcome = search_certificate(&problem, &residual);
    match outcome.certificate {
        Some(cert) if outcome.face_residual <= FEASIBILITY_TOL => Ok(cert),
        cert => Err(Error::CertificateNotFound {
            residual: outcome.face_residual,
            gap: report.primal_value - cert.map_or(0.0, |c| c.value),
        }),
    }
}

/// Projects `candidate` onto `N_V`, scales it to unit dual norm and rotates
/// its phase so the pairing with `x` is real and nonnegative.
pub(crate) fn certify(problem: &Problem<'_>, candidate: &AlgebraElement) -> Option<DualCertificate> {
    let dual = problem.kind.dual();
    let projected = problem.annihilator.project_out(candidate);
    let dn = projected.norm(dual).ok()?;
    if !(dn > 0.0 && dn.is_finite()) {
        return None;
    }
    let mut a = projected.scale_real(1.0 / dn);
    let p = pairing(&a, problem.x).ok()?;
    if p.norm() > 0.0 {
        a = a.scale(p.conj() / p.norm());
    }
    let dual_norm = a.norm(dual).ok()?;
    let feasibility_residual = problem.v.pairing_residual(&a).ok()?;
    if feasibility_residual > FEASIBILITY_TOL || dual_norm > 1.0 + DUAL_NORM_SLACK {
        return None;
    }
    let value = pairing(&a, problem.x).ok()?.norm();
    Some(DualCertificate {
        witness: a,
        kind: problem.kind,
        feasibility_residual,
        dual_norm,
        value,
    })
}

pub(crate) struct SearchOutcome {
    pub certificate: Option<DualCertificate>,
    /// Smallest `max_j |pairing(a, y_j)|` reached on the face before the
    /// final projection onto `N_V`.
    pub face_residual: f64,
}

/// Walks a ladder of cluster thresholds, solving the face feasibility problem
/// at each and keeping the best certified value.
pub(crate) fn search_certificate(problem: &Problem<'_>, residual: &AlgebraElement) -> SearchOutcome {
    let mut outcome = SearchOutcome {
        certificate: None,
        face_residual: f64::INFINITY,
    };
    let Ok(decomps) = residual.blocks().iter().map(svd).collect::<Result<Vec<_>>>() else {
        return outcome;
    };
    let Ok(primal) = residual.norm(problem.kind) else {
        return outcome;
    };
    let s_max = decomps.iter().map(SvdResult::max_singular).fold(0.0, f64::max);
    if s_max == 0.0 {
        return outcome;
    }
    let dim_max = residual.signature().block_dims().iter().copied().max().unwrap_or(1) as f64;
    let finest = dim_max * 1e-11;

    for rel in LADDER {
        let threshold = rel.max(finest) * s_max;
        let face = match problem.kind {
            NormKind::Trace => trace_face(problem, &decomps, threshold),
            NormKind::Operator => operator_face(problem, &decomps, s_max - threshold),
        };
        let Some((candidate, face_residual)) = face else {
            continue;
        };
        outcome.face_residual = outcome.face_residual.min(face_residual);
        outcome.certificate = better(outcome.certificate.take(), certify(problem, &candidate));
        let value = outcome.certificate.as_ref().map_or(0.0, |c| c.value);
        if face_residual <= FEASIBILITY_TOL && primal - value <= 1e-12 * primal {
            break;
        }
    }
    outcome
}

/// Unit-operator-norm witnesses norming the residual in the trace norm:
/// `a = V_r U_r^H + Q_V W Q_U^H` with `||W|| <= 1`.
fn trace_face(problem: &Problem<'_>, decomps: &[SvdResult], threshold: f64) -> Option<(AlgebraElement, f64)> {
    let sig = problem.x.signature();
    let mut base = Vec::with_capacity(decomps.len());
    let mut complements = Vec::with_capacity(decomps.len());
    for d in decomps {
        let n = d.s.len();
        let r = d.rank_with(threshold);
        base.push(Matrix::from_svd_parts(&d.v, &vec![1.0; r], &d.u));
        complements.push((d.u.columns(r..n), d.v.columns(r..n)));
    }
    let base = AlgebraElement::from_blocks_unchecked(sig, base);
    let dims: Vec<usize> = complements.iter().map(|(qu, _)| qu.cols()).collect();
    let free: usize = dims.iter().map(|m| m * m).sum();

    let assemble = |w: &[C64]| -> AlgebraElement {
        let mut offset = 0;
        let blocks = base
            .blocks()
            .iter()
            .zip(&complements)
            .zip(&dims)
            .map(|((b, (qu, qv)), &m)| {
                let wm = Matrix::from_vec(m, m, w[offset..offset + m * m].to_vec()).expect("finite");
                offset += m * m;
                if m == 0 {
                    return b.clone();
                }
                b + &qv.matmul(&wm).matmul_adjoint(qu)
            })
            .collect();
        AlgebraElement::from_blocks_unchecked(sig, blocks)
    };

    if free == 0 {
        let residual = problem.v.pairing_residual(&base).ok()?;
        return Some((base, residual));
    }

    let mut constraints = Vec::with_capacity(problem.v.len());
    for y in problem.v.elements() {
        let mut g = Vec::with_capacity(free);
        for (yb, (qu, qv)) in y.blocks().iter().zip(&complements) {
            if qu.cols() == 0 {
                continue;
            }
            let m = qu.adjoint_matmul(yb).matmul(qv);
            g.extend(m.adjoint().into_vec());
        }
        let target = -pairing(&base, y).ok()?;
        constraints.push((g, target));
    }
    let affine = Affine::new(free, &constraints)?;
    let project_ball = |w: &[C64]| -> Vec<C64> {
        map_square_blocks(w, &dims, |m| {
            let d = svd(m).expect("finite");
            let s: Vec<f64> = d.s.iter().map(|&s| s.min(1.0)).collect();
            Matrix::from_svd_parts(&d.u, &s, &d.v)
        })
    };
    let w = dykstra(vec![ZERO; free], |w| affine.project(w), project_ball);
    let a = assemble(&w);
    let residual = problem.v.pairing_residual(&a).ok()?;
    Some((a, residual))
}

/// Unit-trace-norm witnesses norming the residual in the operator norm:
/// `a = V_1 Z U_1^H` over the top singular cluster, `Z >= 0`, `Tr Z = 1`.
fn operator_face(problem: &Problem<'_>, decomps: &[SvdResult], floor: f64) -> Option<(AlgebraElement, f64)> {
    let sig = problem.x.signature();
    let tops: Vec<(Matrix, Matrix)> = decomps
        .iter()
        .map(|d| {
            let m = d.rank_with(floor);
            (d.u.columns(0..m), d.v.columns(0..m))
        })
        .collect();
    let dims: Vec<usize> = tops.iter().map(|(u1, _)| u1.cols()).collect();
    let free: usize = dims.iter().map(|m| m * m).sum();
    if free == 0 {
        return None;
    }

    let assemble = |z: &[C64]| -> AlgebraElement {
        let mut offset = 0;
        let blocks = tops
            .iter()
            .zip(&dims)
            .zip(sig.block_dims())
            .map(|(((u1, v1), &m), &n)| {
                let zm = Matrix::from_vec(m, m, z[offset..offset + m * m].to_vec()).expect("finite");
                offset += m * m;
                if m == 0 {
                    return Matrix::zeros(n, n);
                }
                v1.matmul(&zm).matmul_adjoint(u1)
            })
            .collect();
        AlgebraElement::from_blocks_unchecked(sig, blocks)
    };

    let mut constraints = Vec::with_capacity(problem.v.len() + 1);
    for y in problem.v.elements() {
        let mut g = Vec::with_capacity(free);
        for (yb, (u1, v1)) in y.blocks().iter().zip(&tops) {
            if u1.cols() == 0 {
                continue;
            }
            g.extend(u1.adjoint_matmul(yb).matmul(v1).adjoint().into_vec());
        }
        constraints.push((g, ZERO));
    }
    let mut trace_row = Vec::with_capacity(free);
    for &m in &dims {
        trace_row.extend(Matrix::identity(m).into_vec());
    }
    constraints.push((trace_row, C64::new(1.0, 0.0)));
    let affine = Affine::new(free, &constraints)?;

    let total: usize = dims.iter().sum();
    let mut start = Vec::with_capacity(free);
    for &m in &dims {
        start.extend(Matrix::identity(m).scale_real(1.0 / total as f64).into_vec());
    }
    let project_psd = |z: &[C64]| -> Vec<C64> {
        map_square_blocks(z, &dims, |m| {
            let h = m.hermitian_part();
            let d = svd(&h).expect("finite");
            let abs = Matrix::from_svd_parts(&d.v, &d.s, &d.v);
            (&h + &abs).scale_real(0.5)
        })
    };
    let z = dykstra(start, |z| affine.project(z), project_psd);
    let a = assemble(&z);
    let residual = problem.v.pairing_residual(&a).ok()?;
    Some((a, residual))
}

fn map_square_blocks(v: &[C64], dims: &[usize], mut f: impl FnMut(&Matrix) -> Matrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(v.len());
    let mut offset = 0;
    for &m in dims {
        if m > 0 {
            let block = Matrix::from_vec(m, m, v[offset..offset + m * m].to_vec()).expect("finite");
            out.extend(f(&block).into_vec());
        }
        offset += m * m;
    }
    out
}

/// Dykstra's alternating projections onto `A ∩ C`, `A` affine. Returns the
/// last iterate of the convex side.
fn dykstra(
    start: Vec<C64>,
    project_affine: impl Fn(&[C64]) -> Vec<C64>,
    project_convex: impl Fn(&[C64]) -> Vec<C64>,
) -> Vec<C64> {
    let mut x = start;
    let mut q = vec![ZERO; x.len()];
    for _ in 0..DYKSTRA_MAX_ITER {
        let y = project_affine(&x);
        let shifted: Vec<C64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        let next = project_convex(&shifted);
        for ((qi, si), ni) in q.iter_mut().zip(&shifted).zip(&next) {
            *qi = si - ni;
        }
        let change: f64 = next.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        x = next;
        if change <= 1e-15 {
            break;
        }
    }
    x
}

/// `{w : <g_j, w> = t_j}` stored as an orthonormal basis of the constraint
/// directions with transformed targets.
struct Affine {
    directions: Vec<Vec<C64>>,
    targets: Vec<C64>,
}

impl Affine {
    fn new(dim: usize, constraints: &[(Vec<C64>, C64)]) -> Option<Self> {
        if constraints.is_empty() {
            return Some(Affine {
                directions: Vec::new(),
                targets: Vec::new(),
            });
        }
        let cols: Vec<Vec<C64>> = constraints.iter().map(|(g, _)| g.clone()).collect();
        let g = Matrix::from_columns(dim, &cols);
        let d = svd(&g).ok()?;
        let cut = 1e-12 * d.max_singular().max(f64::MIN_POSITIVE);
        let mut directions = Vec::new();
        let mut targets = Vec::new();
        for (k, &s) in d.s.iter().enumerate() {
            if s <= cut {
                continue;
            }
            // (S^{-1} V^H t)_k
            let vt: C64 = constraints
                .iter()
                .enumerate()
                .map(|(j, (_, t))| d.v[(j, k)].conj() * t)
                .sum();
            directions.push(d.u.column(k));
            targets.push(vt / s);
        }
        Some(Affine { directions, targets })
    }

    fn project(&self, w: &[C64]) -> Vec<C64> {
        let mut out = w.to_vec();
        for (u, t) in self.directions.iter().zip(&self.targets) {
            let coef: C64 = u.iter().zip(&out).map(|(a, b)| a.conj() * b).sum::<C64>() - t;
            for (o, a) in out.iter_mut().zip(u) {
                *o -= coef * a;
            }
        }
        out
    }
}
