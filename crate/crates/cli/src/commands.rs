use std::io::Write;
use std::path::{Path, PathBuf};

use cstar_approx::infinite::{dist1_tail, dist_op_tail, TailDistance, TailOperator};
use cstar_approx::{
    solve_distance, verify_certificate, AlgebraElement, DistanceReport, DualCertificate, Error, NormKind, SubspaceBasis,
};
use sha2::{Digest, Sha256};

use crate::format::{self, CertificateFile, Interval, Problem, ReportFile, SCHEMA_VERSION};
use crate::{CliError, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_REJECTED};

#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub report: ReportFile,
    pub exit_code: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub lower_bound: f64,
    /// Reported distance minus the recomputed lower bound.
    pub gap: f64,
    pub feasible: bool,
    pub accepted: bool,
    pub exit_code: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaOutcome {
    pub delta: f64,
    pub distance: Option<Interval>,
    /// `delta < dist`, decided against the rigorous lower end.
    pub strict: Option<bool>,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes to a sibling temporary file, then renames over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn load_problem(path: &Path) -> Result<(Vec<u8>, Problem), CliError> {
    let bytes = read(path)?;
    let problem = format::parse_problem(&bytes)?.validate()?;
    Ok((bytes, problem))
}

fn tail_distance(
    x: &TailOperator,
    generators: &[TailOperator],
    kind: NormKind,
    opts: &cstar_approx::SolveOptions,
) -> Result<TailDistance, Error> {
    match kind {
        NormKind::Trace => dist1_tail(x, generators, opts.tol, opts),
        NormKind::Operator => dist_op_tail(x, generators, opts),
    }
}

fn certificate_file(report: &DistanceReport) -> Option<CertificateFile> {
    report.certificate.as_ref().map(|c| CertificateFile {
        witness: format::element(&c.witness),
        dual_norm: c.dual_norm,
        feasibility_residual: c.feasibility_residual,
        value: c.value,
    })
}

/// Solves the problem in `args.input` and writes a report to `args.output`.
///
/// The report is written whether or not the solve converged.
pub fn run_solve(args: &SolveArgs) -> Result<SolveOutcome, CliError> {
    let (bytes, mut problem) = load_problem(&args.input)?;
    {
        let opts = problem.options_mut();
        if let Some(tol) = args.tol {
            opts.tol = tol;
        }
        if let Some(seed) = args.seed {
            opts.seed = seed;
        }
        opts.validate().map_err(|e| CliError::Invalid(format!("tol: {e}")))?;
    }
    let kind = problem.kind();
    let tol = problem.options().tol;

    let (report, distance, gap, converged, interval, truncation) = match &problem {
        Problem::Finite { x, basis, opts, .. } => {
            let r = solve_distance(x, basis, kind, opts)?;
            let (d, g, c) = (r.primal_value, r.gap, r.converged);
            (r, d, g, c, None, None)
        }
        Problem::Tail {
            x, generators, opts, ..
        } => {
            if generators.is_empty() {
                return Err(CliError::Invalid("basis: needs at least one element".into()));
            }
            let t = tail_distance(x, generators, kind, opts)?;
            let width = t.width();
            let interval = Interval { lo: t.lo, hi: t.hi };
            (
                t.report,
                0.5 * (t.lo + t.hi),
                width,
                width <= tol,
                Some(interval),
                Some(t.n),
            )
        }
    };

    let file = ReportFile {
        schema_version: SCHEMA_VERSION.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        input_digest: digest(&bytes),
        norm: kind.into(),
        distance,
        tol,
        gap,
        converged,
        iterations: report.iterations,
        best_coeffs: report.best_coeffs.iter().copied().map(format::complex).collect(),
        best_approx: format::element(&report.best_approx),
        certificate: certificate_file(&report),
        interval,
        truncation,
    };
    let mut json = serde_json::to_vec_pretty(&file).map_err(|e| CliError::Parse(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&args.output, &json)?;
    Ok(SolveOutcome {
        report: file,
        exit_code: if converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
    })
}

/// Rebuilds the finite problem the certificate lives on, plus any lower
/// bound that holds independently of it.
fn certificate_problem(
    problem: &Problem,
    report: &ReportFile,
) -> Result<(AlgebraElement, SubspaceBasis, f64), CliError> {
    match problem {
        Problem::Finite { x, basis, .. } => Ok((x.clone(), basis.clone(), 0.0)),
        Problem::Tail {
            x, generators, kind, ..
        } => {
            let n = report
                .truncation
                .ok_or_else(|| CliError::Parse("report: truncation is required for tail problems".into()))?;
            let too_small = |what: &str| CliError::Parse(format!("report: truncation {n} does not cover the {what}"));
            if generators.iter().any(|g| g.support() > n) {
                return Err(too_small("subspace generators"));
            }
            let floor = match kind {
                NormKind::Trace => {
                    if x.support() > n {
                        return Err(too_small("coupling of x"));
                    }
                    0.0
                }
                // The weighted shift is untouched by head-supported generators.
                NormKind::Operator => {
                    if n != x.head_dim() || x.support() > n {
                        return Err(too_small("head of x"));
                    }
                    x.weights().sup_from(0)
                }
            };
            let xe = AlgebraElement::from_matrix(x.truncate(n)?.element)?;
            let elems = generators
                .iter()
                .map(|g| AlgebraElement::from_matrix(g.truncate(n)?.element))
                .collect::<Result<Vec<_>, Error>>()?;
            Ok((xe, SubspaceBasis::new(elems)?, floor))
        }
    }
}

/// Recomputes the certificate's feasibility and value from the raw problem.
pub fn run_verify(input: &Path, report_path: &Path) -> Result<VerifyOutcome, CliError> {
    let bytes = read(input)?;
    let report = format::parse_report(&read(report_path)?)?;
    let found = digest(&bytes);
    if found != report.input_digest {
        return Err(CliError::DigestMismatch {
            expected: report.input_digest,
            found,
        });
    }
    let problem = format::parse_problem(&bytes)?.validate()?;
    if NormKind::from(report.norm) != problem.kind() {
        return Err(CliError::Parse("report: norm differs from the problem".into()));
    }
    if !(report.tol > 0.0 && report.tol.is_finite()) || !report.distance.is_finite() {
        return Err(CliError::Parse(
            "report: tol and distance must be finite, tol positive".into(),
        ));
    }
    let (x, basis, floor) = certificate_problem(&problem, &report)?;

    let (cert_bound, feasible) = match &report.certificate {
        Some(c) => {
            let witness = format::witness_element(&c.witness, x.signature())?;
            let cert = DualCertificate {
                witness,
                kind: problem.kind(),
                feasibility_residual: c.feasibility_residual,
                dual_norm: c.dual_norm,
                value: c.value,
            };
            let check = verify_certificate(&x, &basis, &cert)?;
            (if check.feasible { check.lower_bound } else { 0.0 }, check.feasible)
        }
        None => (0.0, false),
    };
    let lower_bound = cert_bound.max(floor);
    let gap = report.distance - lower_bound;
    let accepted = feasible && gap.abs() <= 10.0 * report.tol;
    Ok(VerifyOutcome {
        lower_bound,
        gap,
        feasible,
        accepted,
        exit_code: if accepted { EXIT_OK } else { EXIT_REJECTED },
    })
}

/// Essential norm of the shift part, and the distance when a basis is given.
pub fn run_delta(input: &Path) -> Result<DeltaOutcome, CliError> {
    let (_, problem) = load_problem(input)?;
    let Problem::Tail {
        x,
        generators,
        kind,
        opts,
    } = problem
    else {
        return Err(CliError::Invalid("tail: delta needs a tail problem".into()));
    };
    let unsupported = |e: Error| match e {
        Error::UnsupportedForm(m) => CliError::Unsupported(m),
        other => CliError::Core(other),
    };
    let delta = x.delta_ess().map_err(unsupported)?;
    if generators.is_empty() {
        return Ok(DeltaOutcome {
            delta,
            distance: None,
            strict: None,
        });
    }
    let t = tail_distance(&x, &generators, kind, &opts).map_err(unsupported)?;
    Ok(DeltaOutcome {
        delta,
        distance: Some(Interval { lo: t.lo, hi: t.hi }),
        strict: Some(delta < t.lo),
    })
}
