//! Seeded random instance generators shared by unit tests, the acceptance
//! suite and the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraSignature, SubspaceBasis};
use crate::matrix::{Matrix, C64};

pub type TestRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Entries i.i.d. standard complex Gaussian.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| random_complex(rng)).collect();
    Matrix::from_vec(rows, cols, data).expect("finite gaussian entries")
}

pub fn random_signature<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_dim: usize) -> AlgebraSignature {
    let p = rng.random_range(1..=max_blocks);
    let dims = (0..p).map(|_| rng.random_range(1..=max_dim)).collect();
    AlgebraSignature::new(dims).expect("positive dims")
}

pub fn random_element<R: Rng + ?Sized>(rng: &mut R, signature: &AlgebraSignature) -> AlgebraElement {
    let blocks = signature
        .block_dims()
        .iter()
        .map(|&n| random_matrix(rng, n, n))
        .collect();
    AlgebraElement::new(signature.clone(), blocks).expect("valid blocks")
}

/// `k` random generators; retries the (measure-zero) dependent draws.
///
/// Panics if `k` exceeds the algebra dimension.
pub fn random_basis<R: Rng + ?Sized>(rng: &mut R, signature: &AlgebraSignature, k: usize) -> SubspaceBasis {
    assert!(
        k <= signature.dimension(),
        "{k} generators in a {}-dimensional algebra",
        signature.dimension()
    );
    loop {
        let elems = (0..k).map(|_| random_element(rng, signature)).collect();
        if let Ok(b) = SubspaceBasis::new(elems) {
            return b;
        }
    }
}

/// Random element scaled to operator norm uniform in (0, 1].
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, signature: &AlgebraSignature) -> AlgebraElement {
    let x = random_element(rng, signature);
    let n = x.norm(crate::NormKind::Operator).expect("finite");
    let target: f64 = 1.0 - rng.random::<f64>();
    x.scale_real(target / n)
}
