//! Block-diagonal algebras `M_{n_1}(C) (+) ... (+) M_{n_p}(C)`.
//!
//! Elements carry their signature. The operator norm is the maximum of block
//! operator norms and the trace norm is the sum of block trace norms. The
//! bilinear trace pairing `(a, x) -> sum_i Tr(a_i x_i)` identifies the algebra
//! with its dual, and the annihilator `N_V` of a subspace is taken with respect
//! to that pairing.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::matrix::{complete_orthonormal, svd, Matrix, NormKind, C64, ZERO};

/// Relative independence threshold for subspace generators.
pub const INDEPENDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraSignature {
    block_dims: Vec<usize>,
}

impl AlgebraSignature {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidSignature("at least one block is required".into()));
        }
        if let Some(i) = block_dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidSignature(format!("block {i} has dimension 0")));
        }
        Ok(AlgebraSignature { block_dims })
    }

    pub fn single(n: usize) -> Result<Self> {
        AlgebraSignature::new(vec![n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Complex dimension `sum n_i^2`.
    pub fn dimension(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    signature: AlgebraSignature,
    blocks: Vec<Matrix>,
}

impl AlgebraElement {
    pub fn new(signature: AlgebraSignature, blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.len() != signature.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for a signature with {}",
                blocks.len(),
                signature.num_blocks()
            )));
        }
        for (i, (b, &n)) in blocks.iter().zip(signature.block_dims()).enumerate() {
            if b.rows() != n || b.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "block {i} is {}x{}, signature requires {n}x{n}",
                    b.rows(),
                    b.cols()
                )));
            }
            if !b.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(AlgebraElement { signature, blocks })
    }

    /// Single-block element.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("blocks must be square".into()));
        }
        let sig = AlgebraSignature::single(m.rows())?;
        AlgebraElement::new(sig, vec![m])
    }

    pub fn zeros(signature: &AlgebraSignature) -> Self {
        let blocks = signature.block_dims().iter().map(|&n| Matrix::zeros(n, n)).collect();
        AlgebraElement {
            signature: signature.clone(),
            blocks,
        }
    }

    pub fn identity(signature: &AlgebraSignature) -> Self {
        let blocks = signature.block_dims().iter().map(|&n| Matrix::identity(n)).collect();
        AlgebraElement {
            signature: signature.clone(),
            blocks,
        }
    }

    /// Inverse of [`AlgebraElement::to_vec`].
    pub fn from_vec(signature: &AlgebraSignature, data: &[C64]) -> Result<Self> {
        if data.len() != signature.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for an algebra of dimension {}",
                data.len(),
                signature.dimension()
            )));
        }
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(signature.num_blocks());
        for &n in signature.block_dims() {
            blocks.push(Matrix::from_vec(n, n, data[offset..offset + n * n].to_vec())?);
            offset += n * n;
        }
        Ok(AlgebraElement {
            signature: signature.clone(),
            blocks,
        })
    }

    /// Concatenated row-major block entries.
    pub fn to_vec(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.signature.dimension());
        for b in &self.blocks {
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.signature
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Matrix {
        &self.blocks[i]
    }

    pub(crate) fn from_blocks_unchecked(signature: &AlgebraSignature, blocks: Vec<Matrix>) -> Self {
        debug_assert_eq!(blocks.len(), signature.num_blocks());
        AlgebraElement {
            signature: signature.clone(),
            blocks,
        }
    }

    pub fn map_blocks(&self, mut f: impl FnMut(&Matrix) -> Matrix) -> Self {
        AlgebraElement {
            signature: self.signature.clone(),
            blocks: self.blocks.iter().map(&mut f).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map_blocks(|b| b.scale_real(s))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(Matrix::adjoint)
    }

    /// `self += alpha * other`; panics on signature mismatch.
    pub fn axpy(&mut self, alpha: C64, other: &AlgebraElement) {
        assert_eq!(self.signature, other.signature, "signature mismatch");
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(alpha, b);
        }
    }

    pub fn frobenius_inner(&self, other: &AlgebraElement) -> C64 {
        assert_eq!(self.signature, other.signature, "signature mismatch");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.frobenius_inner(b))
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(Matrix::max_abs).fold(0.0, f64::max)
    }

    /// Operator norm: max over blocks. Trace norm: sum over blocks.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        let mut acc = 0.0f64;
        for b in &self.blocks {
            let r = svd(b)?;
            match kind {
                NormKind::Operator => acc = acc.max(r.max_singular()),
                NormKind::Trace => acc += r.s.iter().sum::<f64>(),
            }
        }
        Ok(acc)
    }

    fn check_same(&self, other: &AlgebraElement) -> Result<()> {
        if self.signature == other.signature {
            Ok(())
        } else {
            Err(Error::SignatureMismatch)
        }
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;

    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.signature, rhs.signature, "signature mismatch");
        AlgebraElement {
            signature: self.signature.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.signature, rhs.signature, "signature mismatch");
        AlgebraElement {
            signature: self.signature.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `sum_i Tr(a_i x_i)`; bilinear, no conjugation.
pub fn pairing(a: &AlgebraElement, x: &AlgebraElement) -> Result<C64> {
    a.check_same(x)?;
    Ok(a.blocks
        .iter()
        .zip(&x.blocks)
        .map(|(ai, xi)| ai.trace_product(xi))
        .sum())
}

/// Linearly independent generators `y_1, ..., y_k` of a subspace `V`.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    signature: AlgebraSignature,
    basis: Vec<AlgebraElement>,
}

impl SubspaceBasis {
    pub fn new(basis: Vec<AlgebraElement>) -> Result<Self> {
        let first = basis
            .first()
            .ok_or_else(|| Error::InvalidArgument("subspace basis must be nonempty".into()))?;
        let signature = first.signature.clone();
        if basis.iter().any(|b| b.signature != signature) {
            return Err(Error::SignatureMismatch);
        }
        let stacked = Matrix::from_columns(
            signature.dimension(),
            &basis.iter().map(AlgebraElement::to_vec).collect::<Vec<_>>(),
        );
        let r = svd(&stacked)?;
        let smax = r.max_singular();
        let smin = r.s.last().copied().unwrap_or(0.0);
        if smax == 0.0 || smin <= INDEPENDENCE_TOL * smax || basis.len() > signature.dimension() {
            return Err(Error::DependentBasis {
                ratio: if smax > 0.0 { smin / smax } else { 0.0 },
            });
        }
        Ok(SubspaceBasis { signature, basis })
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.signature
    }

    pub fn elements(&self) -> &[AlgebraElement] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `sum_j c_j y_j`.
    pub fn combination(&self, coeffs: &[C64]) -> AlgebraElement {
        assert_eq!(coeffs.len(), self.basis.len());
        let mut out = AlgebraElement::zeros(&self.signature);
        for (c, y) in coeffs.iter().zip(&self.basis) {
            out.axpy(*c, y);
        }
        out
    }

    /// `max_j |pairing(a, y_j)|`.
    pub fn pairing_residual(&self, a: &AlgebraElement) -> Result<f64> {
        let mut worst = 0.0f64;
        for y in &self.basis {
            worst = worst.max(pairing(a, y)?.norm());
        }
        Ok(worst)
    }
}

/// Frobenius-orthonormal basis of `N_V = {a : pairing(a, y_j) = 0 for all j}`.
#[derive(Debug, Clone)]
pub struct AnnihilatorBasis {
    signature: AlgebraSignature,
    basis: Vec<AlgebraElement>,
}

impl AnnihilatorBasis {
    pub fn signature(&self) -> &AlgebraSignature {
        &self.signature
    }

    pub fn elements(&self) -> &[AlgebraElement] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// `pairing(a, y) = <y^H, a>_F`, so `N_V` is the Frobenius orthogonal
/// complement of `span{y_j^H}`. The span is computed from an SVD of the
/// stacked `y_j^H` and completed to a basis of the whole algebra.
pub fn annihilator_basis(v: &SubspaceBasis) -> Result<AnnihilatorBasis> {
    let sig = v.signature();
    let dim = sig.dimension();
    let k = v.len();
    let cols: Vec<Vec<C64>> = v.elements().iter().map(|y| y.adjoint().to_vec()).collect();
    let r = svd(&Matrix::from_columns(dim, &cols))?;
    if r.rank() < k {
        let smax = r.max_singular();
        return Err(Error::DependentBasis {
            ratio: if smax > 0.0 { r.s[k - 1] / smax } else { 0.0 },
        });
    }
    let mut q: Vec<Vec<C64>> = (0..k).map(|j| r.u.column(j)).collect();
    complete_orthonormal(&mut q, dim, dim);
    let basis = q[k..]
        .iter()
        .map(|vec| AlgebraElement::from_vec(sig, vec))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnnihilatorBasis {
        signature: sig.clone(),
        basis,
    })
}

/// Frobenius-orthogonal projection onto `span(N)`.
pub fn project_to_annihilator(a: &AlgebraElement, n: &AnnihilatorBasis) -> Result<AlgebraElement> {
    if a.signature != n.signature {
        return Err(Error::SignatureMismatch);
    }
    let mut out = AlgebraElement::zeros(&n.signature);
    for b in &n.basis {
        out.axpy(b.frobenius_inner(a), b);
    }
    Ok(out)
}

/// Orthonormalized generators with their triangular factor: `Y = Q R`.
///
/// Serves both the least-squares coefficient update (`span{y_j}`) and the
/// cheap projection onto `N_V` (via `span{y_j^H}`).
#[derive(Debug, Clone)]
pub(crate) struct OrthoFactor {
    q: Vec<AlgebraElement>,
    r: Vec<Vec<C64>>,
}

impl OrthoFactor {
    pub(crate) fn new(elements: &[AlgebraElement]) -> Self {
        let k = elements.len();
        let mut q: Vec<AlgebraElement> = Vec::with_capacity(k);
        let mut r = vec![vec![ZERO; k]; k];
        for (j, y) in elements.iter().enumerate() {
            let mut w = y.clone();
            for _ in 0..2 {
                for (i, qi) in q.iter().enumerate() {
                    let h = qi.frobenius_inner(&w);
                    w.axpy(-h, qi);
                    r[i][j] += h;
                }
            }
            let nrm = w.frobenius_norm();
            r[j][j] = C64::new(nrm, 0.0);
            q.push(w.scale_real(if nrm > 0.0 { 1.0 / nrm } else { 0.0 }));
        }
        OrthoFactor { q, r }
    }

    /// Coefficients `c` minimizing `||w - sum c_j y_j||_F`.
    pub(crate) fn least_squares(&self, w: &AlgebraElement) -> Vec<C64> {
        let k = self.q.len();
        let rhs: Vec<C64> = self.q.iter().map(|qi| qi.frobenius_inner(w)).collect();
        let mut c = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut acc = rhs[i];
            for j in i + 1..k {
                acc -= self.r[i][j] * c[j];
            }
            c[i] = acc / self.r[i][i];
        }
        c
    }

    /// Removes the component in `span(Q)`.
    pub(crate) fn project_out(&self, a: &AlgebraElement) -> AlgebraElement {
        let mut out = a.clone();
        for _ in 0..2 {
            for qi in &self.q {
                let h = qi.frobenius_inner(&out);
                out.axpy(-h, qi);
            }
        }
        out
    }
}

/// Projector onto `N_V` built from the adjoints of the generators.
pub(crate) fn annihilator_projector(v: &SubspaceBasis) -> OrthoFactor {
    let adj: Vec<AlgebraElement> = v.elements().iter().map(AlgebraElement::adjoint).collect();
    OrthoFactor::new(&adj)
}
