//! Problem and report files.
//!
//! Both are JSON. Complex scalars are `[re, im]` pairs, matrices are lists of
//! rows, and algebra elements are lists of square blocks.

use cstar_approx::infinite::{CouplingEntry, TailOperator, WeightRule};
use cstar_approx::{AlgebraElement, AlgebraSignature, Matrix, NormKind, SolveOptions, SubspaceBasis, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

pub type Complex = [f64; 2];
pub type MatrixRows = Vec<Vec<Complex>>;
pub type Element = Vec<MatrixRows>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormName {
    Operator,
    Trace,
}

impl From<NormName> for NormKind {
    fn from(n: NormName) -> Self {
        match n {
            NormName::Operator => NormKind::Operator,
            NormName::Trace => NormKind::Trace,
        }
    }
}

impl From<NormKind> for NormName {
    fn from(k: NormKind) -> Self {
        match k {
            NormKind::Operator => NormName::Operator,
            NormKind::Trace => NormName::Trace,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<usize>>,
    pub norm: NormName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Element>,
    /// Subspace generators. For tail problems each one is a single block
    /// holding a finitely supported matrix.
    #[serde(default)]
    pub basis: Vec<Element>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

/// Head matrix followed by a weighted forward shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailFile {
    pub head: MatrixRows,
    pub weights: WeightsFile,
    #[serde(default)]
    pub coupling: Vec<CouplingFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsFile {
    Constant { value: f64 },
    Geometric { first: f64, ratio: f64 },
    Explicit { values: Vec<f64>, tail: f64 },
    Harmonic { base: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingFile {
    pub row: usize,
    pub col: usize,
    pub value: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: String,
    pub tool_version: String,
    /// SHA-256 of the problem file bytes, hex encoded.
    pub input_digest: String,
    pub norm: NormName,
    /// Primal value for finite problems, interval midpoint for tail problems.
    pub distance: f64,
    pub tol: f64,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub best_coeffs: Vec<Complex>,
    pub best_approx: Element,
    pub certificate: Option<CertificateFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    /// Truncation order of the corner problem behind a tail result.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub witness: Element,
    pub dual_norm: f64,
    pub feasibility_residual: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// A validated problem, ready to solve.
#[derive(Debug, Clone)]
pub enum Problem {
    Finite {
        x: AlgebraElement,
        basis: SubspaceBasis,
        kind: NormKind,
        opts: SolveOptions,
    },
    Tail {
        x: TailOperator,
        generators: Vec<TailOperator>,
        kind: NormKind,
        opts: SolveOptions,
    },
}

impl Problem {
    pub fn kind(&self) -> NormKind {
        match self {
            Problem::Finite { kind, .. } | Problem::Tail { kind, .. } => *kind,
        }
    }

    pub fn options(&self) -> &SolveOptions {
        match self {
            Problem::Finite { opts, .. } | Problem::Tail { opts, .. } => opts,
        }
    }

    pub fn options_mut(&mut self) -> &mut SolveOptions {
        match self {
            Problem::Finite { opts, .. } | Problem::Tail { opts, .. } => opts,
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{field}: {msg}"))
}

pub fn parse_problem(bytes: &[u8]) -> Result<ProblemFile, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn parse_report(bytes: &[u8]) -> Result<ReportFile, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Parse(format!("report: {e}")))
}

impl ProblemFile {
    /// Checks every structural invariant and builds the core types.
    pub fn validate(&self) -> Result<Problem, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected \"{SCHEMA_VERSION}\", got \"{}\"", self.schema_version),
            ));
        }
        let opts = self.solve_options()?;
        let kind = NormKind::from(self.norm);
        match &self.tail {
            Some(tail) => {
                if self.signature.is_some() || self.x.is_some() {
                    return Err(invalid("tail", "cannot be combined with signature or x"));
                }
                let x = tail.to_operator("tail")?;
                let generators = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        let field = format!("basis[{i}]");
                        if e.len() != 1 {
                            return Err(invalid(&field, "tail generators take exactly one block"));
                        }
                        let m = to_matrix(&e[0], &field)?;
                        TailOperator::finite(m).map_err(|err| invalid(&field, err))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Problem::Tail {
                    x,
                    generators,
                    kind,
                    opts,
                })
            }
            None => {
                let dims = self.signature.clone().ok_or_else(|| invalid("signature", "missing"))?;
                let sig = AlgebraSignature::new(dims).map_err(|e| invalid("signature", e))?;
                let x = self.x.as_ref().ok_or_else(|| invalid("x", "missing"))?;
                let x = to_element(x, &sig, "x")?;
                if self.basis.is_empty() {
                    return Err(invalid("basis", "needs at least one element"));
                }
                let elems = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, e)| to_element(e, &sig, &format!("basis[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let basis = SubspaceBasis::new(elems).map_err(|e| invalid("basis", e))?;
                Ok(Problem::Finite { x, basis, kind, opts })
            }
        }
    }

    fn solve_options(&self) -> Result<SolveOptions, CliError> {
        let mut opts = SolveOptions::default();
        if let Some(o) = &self.options {
            opts.tol = o.tol.unwrap_or(opts.tol);
            opts.max_iter = o.max_iter.unwrap_or(opts.max_iter);
            opts.penalty = o.penalty.unwrap_or(opts.penalty);
            opts.seed = o.seed.unwrap_or(opts.seed);
            opts.restarts = o.restarts.unwrap_or(opts.restarts);
        }
        opts.validate().map_err(|e| invalid("options", e))?;
        Ok(opts)
    }
}

impl TailFile {
    pub fn to_operator(&self, field: &str) -> Result<TailOperator, CliError> {
        let head = to_matrix(&self.head, &format!("{field}.head"))?;
        let weights = match &self.weights {
            WeightsFile::Constant { value } => WeightRule::Constant(*value),
            WeightsFile::Geometric { first, ratio } => WeightRule::Geometric {
                first: *first,
                ratio: *ratio,
            },
            WeightsFile::Explicit { values, tail } => WeightRule::Explicit {
                values: values.clone(),
                tail: *tail,
            },
            WeightsFile::Harmonic { base, scale } => WeightRule::Harmonic {
                base: *base,
                scale: *scale,
            },
        };
        let coupling = self
            .coupling
            .iter()
            .map(|c| CouplingEntry {
                row: c.row,
                col: c.col,
                value: C64::new(c.value[0], c.value[1]),
            })
            .collect();
        TailOperator::new(head, weights, coupling).map_err(|e| invalid(field, e))
    }
}

pub fn to_matrix(rows: &MatrixRows, field: &str) -> Result<Matrix, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(invalid(field, "matrix is empty"));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(invalid(
                field,
                format!("row {i} has {} entries, expected {n}", row.len()),
            ));
        }
        data.extend(row.iter().map(|z| C64::new(z[0], z[1])));
    }
    let m = Matrix::from_vec(n, n, data).map_err(|e| invalid(field, e))?;
    if !m.is_finite() {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(m)
}

fn to_element(e: &Element, sig: &AlgebraSignature, field: &str) -> Result<AlgebraElement, CliError> {
    let dims = sig.block_dims();
    if e.len() != dims.len() {
        return Err(invalid(
            "signature",
            format!("{field} has {} blocks, signature lists {}", e.len(), dims.len()),
        ));
    }
    let mut blocks = Vec::with_capacity(e.len());
    for (b, (rows, &d)) in e.iter().zip(dims).enumerate() {
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            let cols = rows.first().map_or(0, Vec::len);
            return Err(invalid(
                "signature",
                format!("block {b} of {field} is {}x{cols}, expected {d}x{d}", rows.len()),
            ));
        }
        blocks.push(to_matrix(rows, &format!("{field}[{b}]"))?);
    }
    AlgebraElement::new(sig.clone(), blocks).map_err(|err| invalid(field, err))
}

pub fn complex(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn matrix_rows(m: &Matrix) -> MatrixRows {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| complex(m[(i, j)])).collect())
        .collect()
}

pub fn element(e: &AlgebraElement) -> Element {
    e.blocks().iter().map(matrix_rows).collect()
}

/// Parses a witness against a known signature.
pub fn witness_element(e: &Element, sig: &AlgebraSignature) -> Result<AlgebraElement, CliError> {
    to_element(e, sig, "certificate.witness").map_err(|err| match err {
        CliError::Invalid(msg) => CliError::Parse(format!("report: {msg}")),
        other => other,
    })
}
