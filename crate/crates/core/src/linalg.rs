//! Small complex-matrix helpers shared by the encoder, the receiver, and the
//! rank checkers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One draw of CN(0, variance): real and imaginary parts each N(0, variance/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    CVector::from_iterator(len, (0..len).map(|_| complex_gaussian(rng, variance)))
}

/// Entries are drawn in column-major order.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    CMatrix::from_iterator(
        rows,
        cols,
        (0..rows * cols).map(|_| complex_gaussian(rng, variance)),
    )
}

/// diag(blocks[0], blocks[1], ...), zero off the diagonal blocks.
pub fn block_diagonal(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Stacks matrices with equal column counts on top of each other.
pub fn vstack(parts: &[&CMatrix]) -> CMatrix {
    let cols = parts.first().map_or(0, |p| p.ncols());
    debug_assert!(parts.iter().all(|p| p.ncols() == cols));
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    out
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc))
                .copy_from(&(b * aij));
        }
    }
    out
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// log det(I + scale·M·Mᴴ) via a Cholesky factorization of the Hermitian
/// positive-definite argument.
pub fn logdet_identity_plus(m: &CMatrix, scale: f64) -> Option<f64> {
    let n = m.nrows();
    if n == 0 {
        return Some(0.0);
    }
    let gram = m * m.adjoint() * Complex64::new(scale, 0.0) + identity(n);
    let chol = gram.cholesky()?;
    let l = chol.l();
    let v: f64 = (0..n).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
    v.is_finite().then_some(v)
}

/// Rows `start..start+len` of every `stride`-row slot of a slot-stacked
/// matrix. Used to pick a subset of receive antennas out of `G^n X`.
pub fn select_slot_rows(m: &CMatrix, stride: usize, start: usize, len: usize) -> CMatrix {
    assert!(start + len <= stride && stride > 0 && m.nrows().is_multiple_of(stride));
    let slots = m.nrows() / stride;
    let rows: Vec<usize> = (0..slots)
        .flat_map(|s| (start..start + len).map(move |r| s * stride + r))
        .collect();
    m.select_rows(rows.iter())
}
