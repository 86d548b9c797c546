//! End-to-end acceptance checks. Prints one PASS/FAIL line per check and
//! exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cstar_approx::certificates::{
    distinct_norming_pair, polar_adjoint, singer_decompose, trace_smoothness, verify_singer,
};
use cstar_approx::infinite::{dist1_tail, TailOperator};
use cstar_approx::testing::{
    random_basis, random_contraction, random_element, random_matrix, random_signature, seeded_rng,
};
use cstar_approx::{
    brute_force_distance, extract_certificate, pairing, solve_distance, verify_certificate, AlgebraElement,
    AlgebraSignature, GridSpec, Matrix, NormKind, SolveOptions, SubspaceBasis, C64,
};
use cstar_approx_cli::format::{parse_problem, Problem};
use cstar_approx_cli::run_delta;
use rand::Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn tail_sample(name: &str) -> (TailOperator, Vec<TailOperator>) {
    let bytes = std::fs::read(sample(name)).unwrap();
    match parse_problem(&bytes).unwrap().validate().unwrap() {
        Problem::Tail { x, generators, .. } => (x, generators),
        Problem::Finite { .. } => panic!("{name} is not a tail problem"),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("took {elapsed:.2?}, budget {budget:.0?}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn diagonal_closed_forms() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(101);
    let opts = SolveOptions::default();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let p = 1 + i % 4;
        let sig = AlgebraSignature::new(vec![2; p]).map_err(e)?;
        let x = random_element(&mut rng, &sig);
        let mut gens = Vec::new();
        for b in 0..p {
            for d in 0..2 {
                let blocks = (0..p)
                    .map(|j| {
                        if j == b {
                            Matrix::unit(2, 2, d, d)
                        } else {
                            Matrix::zeros(2, 2)
                        }
                    })
                    .collect();
                gens.push(AlgebraElement::new(sig.clone(), blocks).map_err(e)?);
            }
        }
        let v = SubspaceBasis::new(gens).map_err(e)?;
        let off = |b: &Matrix| (b[(0, 1)].norm(), b[(1, 0)].norm());
        let op = x.blocks().iter().map(|b| off(b).0.max(off(b).1)).fold(0.0, f64::max);
        let tr: f64 = x.blocks().iter().map(|b| off(b).0 + off(b).1).sum();
        for (kind, expect) in [(NormKind::Operator, op), (NormKind::Trace, tr)] {
            let r = solve_distance(&x, &v, kind, &opts).map_err(e)?;
            let err = (r.primal_value - expect).abs();
            worst = worst.max(err);
            ensure(err <= 1e-6, || {
                format!("instance {i} {kind}: {} vs {expect}", r.primal_value)
            })?;
            ensure(r.converged && r.gap <= 1e-6, || {
                format!("instance {i} {kind}: gap {:e}", r.gap)
            })?;
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(5))?;
    Ok(format!("200 instances, worst error {worst:.1e}, {elapsed:.2?}"))
}

fn shifted_identity_truncation() -> Outcome {
    let start = Instant::now();
    let (x, gens) = tail_sample("shifted_identity_tail.json");
    let n = 16;
    let xe = AlgebraElement::from_matrix(x.truncate(n).map_err(e)?.element).map_err(e)?;
    let elems = gens
        .iter()
        .map(|g| AlgebraElement::from_matrix(g.truncate(n)?.element))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let v = SubspaceBasis::new(elems).map_err(e)?;
    let r = solve_distance(&xe, &v, NormKind::Operator, &SolveOptions::default()).map_err(e)?;
    ensure((r.primal_value - 2.0).abs() <= 1e-6, || {
        format!("distance {}", r.primal_value)
    })?;
    let cert = r.certificate.as_ref().ok_or("no certificate")?;
    let check = verify_certificate(&xe, &v, cert).map_err(e)?;
    ensure(check.feasible && check.lower_bound >= 2.0 - 1e-6, || {
        format!("certificate {check:?}")
    })?;

    let delta = run_delta(&sample("shifted_identity_tail.json")).map_err(e)?;
    ensure(delta.delta == 1.0, || format!("delta {}", delta.delta))?;
    ensure(delta.strict == Some(true), || format!("strict flag {:?}", delta.strict))?;
    ensure(delta.delta < r.primal_value, || "delta not below the distance".into())?;
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "N = {n}, distance {:.12}, certified {:.12}, delta {}, {elapsed:.2?}",
        r.primal_value, check.lower_bound, delta.delta
    ))
}

fn trace_class_tail() -> Outcome {
    let start = Instant::now();
    let (x, gens) = tail_sample("trace_class_tail.json");
    let t = dist1_tail(&x, &gens, 1e-3, &SolveOptions::default()).map_err(e)?;
    ensure(t.width() <= 2e-3 && t.lo <= 2.0 && 2.0 <= t.hi, || {
        format!("interval [{}, {}]", t.lo, t.hi)
    })?;
    let half = C64::new(0.5, 0.0);
    let coeff_err = t
        .report
        .best_coeffs
        .iter()
        .map(|c| (c - half).norm())
        .fold(0.0, f64::max);
    ensure(t.report.best_coeffs.len() == 2 && coeff_err <= 1e-3, || {
        format!("coefficients {:?}", t.report.best_coeffs)
    })?;

    let n = t.n;
    let xe = AlgebraElement::from_matrix(x.truncate(n).map_err(e)?.element).map_err(e)?;
    let elems = gens
        .iter()
        .map(|g| AlgebraElement::from_matrix(g.truncate(n)?.element))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let v = SubspaceBasis::new(elems).map_err(e)?;
    let cert = extract_certificate(&xe, &t.report, &v, NormKind::Trace).map_err(e)?;
    let a = cert.witness.block(0);
    // Annihilating both diagonal generators forces a00 = -a11 = a22 / 2.
    let nv = (a[(0, 0)] + a[(1, 1)]).norm().max((a[(0, 0)] * 2.0 - a[(2, 2)]).norm());
    ensure(nv <= 1e-8, || format!("diagonal condition violated by {nv:e}"))?;
    let check = verify_certificate(&xe, &v, &cert).map_err(e)?;
    ensure(check.feasible, || format!("certificate {check:?}"))?;
    let value = pairing(&cert.witness, &xe).map_err(e)?;
    ensure(value.re >= 2.0 - 1e-3, || format!("pairing {value}"))?;

    let mut shift_dev = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let b = if j == i + 1 { 1.0 } else { 0.0 };
            shift_dev = shift_dev.max((a[(i, j)] - b).norm());
        }
    }
    let elapsed = start.elapsed();
    within_budget(elapsed, Duration::from_secs(2))?;
    Ok(format!(
        "interval [{:.6}, {:.6}] at N = {n}, pairing {:.6}, diagonal residual {nv:.1e}, \
         top corner differs from the backward shift by {shift_dev:.1e}, {elapsed:.2?}",
        t.lo, t.hi, value.re
    ))
}

fn brute_force_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(404);
    let opts = SolveOptions::default();
    let grid = GridSpec::default();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = rng.random_range(2..=4usize);
        let sig = AlgebraSignature::single(n).map_err(e)?;
        let x = random_element(&mut rng, &sig);
        let v = random_basis(&mut rng, &sig, 1);
        for kind in [NormKind::Operator, NormKind::Trace] {
            let solved = solve_distance(&x, &v, kind, &opts).map_err(e)?.primal_value;
            let brute = brute_force_distance(&x, &v, kind, &grid).map_err(e)?;
            let diff = (solved - brute).abs();
            worst = worst.max(diff);
            ensure(diff <= 2e-3, || {
                format!("instance {i} {kind}: solver {solved}, grid {brute}")
            })?;
        }
    }
    Ok(format!(
        "100 instances, worst difference {worst:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn duality_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(505);
    let opts = SolveOptions::default();
    let (mut converged, mut violations, mut false_converged, mut accepted) = (0, 0, 0, 0);
    let total = 500;
    for i in 0..total {
        let sig = loop {
            let s = random_signature(&mut rng, 3, 5);
            if s.dimension() > 1 {
                break s;
            }
        };
        let x = random_element(&mut rng, &sig);
        let k = rng.random_range(1..=3usize.min(sig.dimension() - 1));
        let v = random_basis(&mut rng, &sig, k);
        let kind = if i % 2 == 0 {
            NormKind::Operator
        } else {
            NormKind::Trace
        };
        let r = solve_distance(&x, &v, kind, &opts).map_err(e)?;
        if let Some(cert) = &r.certificate {
            let check = verify_certificate(&x, &v, cert).map_err(e)?;
            if check.feasible {
                accepted += 1;
                if check.lower_bound > r.primal_value + 1e-8 {
                    violations += 1;
                }
            }
        }
        converged += usize::from(r.converged);
        false_converged += usize::from(r.converged && r.gap > 1e-6);
    }
    let fraction = converged as f64 / total as f64;
    ensure(violations == 0, || format!("{violations} weak duality violations"))?;
    ensure(false_converged == 0, || {
        format!("{false_converged} converged reports with gap above 1e-6")
    })?;
    ensure(fraction >= 0.95, || format!("converged fraction {fraction}"))?;
    Ok(format!(
        "{total} instances, {accepted} accepted certificates, 0 violations, converged {:.1}%, {:.2?}",
        100.0 * fraction,
        start.elapsed()
    ))
}

fn singer_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(606);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let sig = random_signature(&mut rng, 3, 5);
        let a = random_contraction(&mut rng, &sig);
        let cert = singer_decompose(&a).map_err(e)?;
        ensure(cert.len() <= 2, || format!("contraction {i}: {} unitaries", cert.len()))?;
        let err = (&cert.combination() - &a).max_abs();
        worst = worst.max(err);
        ensure(err <= 1e-10, || {
            format!("contraction {i}: reconstruction error {err:e}")
        })?;
    }
    let opts = SolveOptions::default();
    let mut worst_value = 0.0f64;
    for i in 0..50 {
        let sig = loop {
            let s = random_signature(&mut rng, 2, 4);
            if s.dimension() > 1 {
                break s;
            }
        };
        let x = random_element(&mut rng, &sig);
        let k = rng.random_range(1..=3usize.min(sig.dimension() - 1));
        let v = random_basis(&mut rng, &sig, k);
        let r = solve_distance(&x, &v, NormKind::Trace, &opts).map_err(e)?;
        let witness = &r
            .certificate
            .as_ref()
            .ok_or_else(|| format!("instance {i}: no certificate"))?
            .witness;
        let cert = singer_decompose(witness).map_err(e)?;
        ensure(cert.len() <= 2, || format!("instance {i}: {} unitaries", cert.len()))?;
        let check = verify_singer(&x, &v, &r.best_approx, &cert).map_err(e)?;
        let diff = (check.value - r.primal_value).abs();
        worst_value = worst_value.max(diff);
        ensure(check.feasible && diff <= 2e-6, || {
            format!("instance {i}: {check:?} vs {}", r.primal_value)
        })?;
    }
    Ok(format!(
        "1000 contractions (worst {worst:.1e}), 50 optimal witnesses (worst value error {worst_value:.1e}), {:.2?}",
        start.elapsed()
    ))
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
fn inverse(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap();
        for j in 0..n {
            let (t, s) = (a[(col, j)], inv[(col, j)]);
            a[(col, j)] = a[(p, j)];
            inv[(col, j)] = inv[(p, j)];
            a[(p, j)] = t;
            inv[(p, j)] = s;
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for i in (0..n).filter(|&i| i != col) {
            let f = a[(i, col)];
            for j in 0..n {
                let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                a[(i, j)] -= f * ac;
                inv[(i, j)] -= f * ic;
            }
        }
    }
    inv
}

/// Unitary polar factor of an invertible matrix by Newton's iteration.
fn newton_polar(m: &Matrix) -> Matrix {
    let mut u = m.clone();
    for _ in 0..100 {
        let next = (&u + &inverse(&u).adjoint()).scale_real(0.5);
        let step = (&next - &u).max_abs();
        u = next;
        if step <= 1e-15 {
            break;
        }
    }
    u
}

fn smoothness_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(707);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let sig = random_signature(&mut rng, 3, 4);
        let x = random_element(&mut rng, &sig);
        let report = trace_smoothness(&x).map_err(e)?;
        ensure(report.smooth, || format!("full-rank element {i} flagged non-smooth"))?;
        let witness = report.witness.ok_or("smooth report without a witness")?;
        let oracle = x.map_blocks(|b| newton_polar(b).adjoint());
        let err = (&witness - &oracle)
            .max_abs()
            .max((&polar_adjoint(&x).map_err(e)? - &witness).max_abs());
        worst = worst.max(err);
        ensure(err <= 1e-8, || {
            format!("element {i}: witness differs from the polar adjoint by {err:e}")
        })?;
    }
    for i in 0..100 {
        let sig = random_signature(&mut rng, 3, 4);
        let dims = sig.block_dims().to_vec();
        let deficient = rng.random_range(0..dims.len());
        let mut x = random_element(&mut rng, &sig);
        if dims[deficient] == 1 {
            x = x.map_blocks(|b| if b.rows() == 1 { Matrix::zeros(1, 1) } else { b.clone() });
        } else {
            let n = dims[deficient];
            let r = rng.random_range(1..n);
            let low = random_matrix(&mut rng, n, r).matmul(&random_matrix(&mut rng, r, n));
            let mut blocks = x.blocks().to_vec();
            blocks[deficient] = low;
            x = AlgebraElement::new(sig.clone(), blocks).map_err(e)?;
        }
        if x.max_abs() == 0.0 {
            continue;
        }
        let report = trace_smoothness(&x).map_err(e)?;
        ensure(!report.smooth, || format!("rank-deficient element {i} flagged smooth"))?;
        let (a, b) = distinct_norming_pair(&x).map_err(e)?.ok_or("no norming pair")?;
        let norm = x.norm(NormKind::Trace).map_err(e)?;
        for w in [&a, &b] {
            let p = pairing(w, &x).map_err(e)?;
            ensure(
                (p.re - norm).abs() <= 1e-8 * norm.max(1.0) && p.im.abs() <= 1e-8 * norm.max(1.0),
                || format!("element {i}: pairing {p} vs norm {norm}"),
            )?;
            let op = w.norm(NormKind::Operator).map_err(e)?;
            ensure(op <= 1.0 + 1e-10, || format!("element {i}: functional of norm {op}"))?;
        }
        // They differ by a partial isometry between the kernels.
        let apart = (&a - &b).norm(NormKind::Operator).map_err(e)?;
        ensure((apart - 1.0).abs() <= 1e-8, || {
            format!("element {i}: functionals differ by {apart}")
        })?;
    }
    let opts = SolveOptions::default();
    let mut worst_dist = 0.0f64;
    for i in 0..100 {
        let sig = loop {
            let s = random_signature(&mut rng, 2, 4);
            if s.dimension() > 1 {
                break s;
            }
        };
        let x = random_element(&mut rng, &sig);
        let vstar = polar_adjoint(&x).map_err(e)?.adjoint();
        let norm_sq = vstar.frobenius_inner(&vstar);
        let k = rng.random_range(1..=2usize.min(sig.dimension() - 1));
        let gens = (0..k)
            .map(|_| {
                let mut y = random_element(&mut rng, &sig);
                let along = vstar.frobenius_inner(&y) / norm_sq;
                y.axpy(-along, &vstar);
                y
            })
            .collect();
        let v = SubspaceBasis::new(gens).map_err(e)?;
        let r = solve_distance(&x, &v, NormKind::Trace, &opts).map_err(e)?;
        let diff = (r.primal_value - x.norm(NormKind::Trace).map_err(e)?).abs();
        worst_dist = worst_dist.max(diff);
        ensure(diff <= 1e-6, || {
            format!("orthogonal instance {i}: distance off by {diff:e}")
        })?;
    }
    Ok(format!(
        "witness error {worst:.1e}, 100 non-smooth pairs, orthogonal distance error {worst_dist:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn main() -> ExitCode {
    let checks: [Check; 7] = [
        ("diagonal-subspace closed forms", diagonal_closed_forms),
        (
            "weighted-shift distance exceeds its essential norm",
            shifted_identity_truncation,
        ),
        ("trace-class tail distance and certificate", trace_class_tail),
        ("agreement with the brute-force grid", brute_force_agreement),
        ("weak duality and convergence rate", duality_suite),
        ("unitary-average decompositions", singer_suite),
        ("trace-norm smoothness", smoothness_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}/7] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}/7] {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
