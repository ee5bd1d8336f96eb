//! Dense complex linear-algebra kernels used by every solver in the crate:
//! Hermitian eigendecomposition, Hermitian-definite generalized
//! eigendecomposition, thin SVD, and the Hermitian PSD square root.
//!
//! All decompositions order eigen/singular values descending. Ties keep the
//! order in which the backend produced them. Degenerate eigenspaces are only
//! ever compared through projectors or objective values downstream, never
//! through raw eigenvectors.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;
/// Dense complex matrix.
pub type CMat = DMatrix<Cx>;
/// Dense complex column vector.
pub type CVec = DVector<Cx>;

/// Relative tolerance below which an eigenvalue of a nominally PSD matrix is
/// clamped to zero rather than rejected.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Relative positive-definiteness threshold for the pencil denominator.
pub const PD_TOL: f64 = 1e-12;

/// Square complex matrix with enforced conjugate symmetry.
///
/// Construction symmetrizes the input as `(A + A^H) / 2`, which makes the
/// stored matrix exactly Hermitian and its diagonal exactly real. This kills
/// the accumulation of asymmetric round-off before any factorization runs.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMat,
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from an arbitrary square complex matrix.
    ///
    /// Rejects non-square matrices, empty matrices, and non-finite entries.
    pub fn new(a: CMat) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(
                "Hermitian matrix contains non-finite entries".into(),
            ));
        }
        let sym = (&a + a.adjoint()) * Cx::new(0.5, 0.0);
        Ok(Self { inner: sym })
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        Self {
            inner: CMat::identity(dim, dim),
        }
    }

    /// All-zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: CMat::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.inner
    }

    pub fn into_matrix(self) -> CMat {
        self.inner
    }

    /// Real trace of the matrix.
    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.inner.norm()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are sorted descending; column `k` of `vectors` is the unit-norm
/// eigenvector paired with `values[k]`.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Thin singular value decomposition `A = U · diag(S) · Vt` of an `m x n`
/// matrix with `m >= n`: `U` is `m x n` with orthonormal columns, `S` holds
/// the `n` singular values descending, `Vt` is `n x n` unitary.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub vt: CMat,
}

/// Full Hermitian eigendecomposition with eigenvalues sorted descending.
pub fn hermitian_eig(a: &HermitianMatrix) -> EigDecomposition {
    let eig = SymmetricEigen::new(a.inner.clone());
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: ties keep the backend's computation order.
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    EigDecomposition { values, vectors }
}

/// Orthonormal basis of the invariant subspace spanned by the `k` dominant
/// eigenvectors of `a`. The trace of `U^H A U` equals the sum of the `k`
/// largest eigenvalues.
pub fn top_k_eigvecs(a: &HermitianMatrix, k: usize) -> Result<CMat> {
    if k == 0 || k > a.dim() {
        return Err(Error::InvalidInput(format!(
            "requested {k} dominant eigenvectors of a {}x{} matrix",
            a.dim(),
            a.dim()
        )));
    }
    let eig = hermitian_eig(a);
    Ok(eig.vectors.columns(0, k).into_owned())
}

/// Dominant generalized eigenpairs of the Hermitian-definite pencil
/// `(A, B)`: solves `A x = lambda B x` for the `k` largest eigenvalues.
///
/// The returned vectors are `B`-orthonormal (`x_i^H B x_j = delta_ij`), not
/// mutually orthonormal in the Euclidean sense. Solved by Cholesky reduction:
/// factor `B = L L^H`, solve the standard Hermitian problem on
/// `L^-1 A L^-H`, and back-transform the eigenvectors.
pub fn generalized_eig_hpd(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    k: usize,
) -> Result<(Vec<f64>, CMat)> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::InvalidInput(format!(
            "pencil dimension mismatch: {}x{} vs {}x{}",
            n,
            n,
            b.dim(),
            b.dim()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} generalized eigenvectors of a dimension-{n} pencil"
        )));
    }
    let b_eig = hermitian_eig(b);
    let b_min = *b_eig.values.last().unwrap();
    if b_min <= PD_TOL * b.norm() {
        return Err(Error::NotPositiveDefinite(format!(
            "smallest eigenvalue {b_min:.3e} below tolerance"
        )));
    }
    let chol = Cholesky::new(b.inner.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
    let l = chol.l();
    // C = L^-1 A L^-H, re-symmetrized before the standard solve.
    let x = l
        .solve_lower_triangular(&a.inner)
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let z = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    let c = HermitianMatrix::new(z.adjoint())?;
    let eig = hermitian_eig(&c);
    let u = eig.vectors.columns(0, k).into_owned();
    // Back-transform: xi = L^-H u, then rescale so xi^H B xi = 1 exactly.
    let mut xi = l
        .adjoint()
        .solve_upper_triangular(&u)
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;
    for j in 0..k {
        let col = xi.column(j).into_owned();
        let s = (col.adjoint() * &b.inner * &col)[(0, 0)].re;
        let scale = Cx::new(1.0 / s.sqrt(), 0.0);
        for r in 0..n {
            xi[(r, j)] *= scale;
        }
    }
    Ok((eig.values[..k].to_vec(), xi))
}

/// Thin SVD of an `m x n` complex matrix with `m >= n`.
pub fn thin_svd(a: &CMat) -> Result<ThinSvd> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::InvalidInput(format!(
            "thin SVD requires rows >= cols, got {m}x{n}"
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(
            "matrix contains non-finite entries".into(),
        ));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    Ok(ThinSvd {
        u,
        singular_values: svd.singular_values.iter().copied().collect(),
        vt,
    })
}

/// Hermitian PSD square root `S` of `R`, with `S · S = R`.
///
/// Eigenvalues in `[-PSD_CLAMP_TOL * ||R||_F, 0)` are clamped to zero;
/// anything more negative is rejected as not PSD.
pub fn hermitian_sqrt(r: &HermitianMatrix) -> Result<CMat> {
    let eig = hermitian_eig(r);
    let floor = -PSD_CLAMP_TOL * r.norm();
    let min = *eig.values.last().unwrap();
    if min < floor {
        return Err(Error::NotPsd(format!(
            "eigenvalue {min:.3e} below the PSD tolerance {floor:.3e}"
        )));
    }
    let sqrt_diag = CMat::from_diagonal(&DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&v| Cx::new(v.max(0.0).sqrt(), 0.0)),
    ));
    let s = &eig.vectors * sqrt_diag * eig.vectors.adjoint();
    // Re-symmetrize to kill rounding from the triple product.
    Ok(HermitianMatrix::new(s)?.into_matrix())
}

/// Draws a `rows x cols` complex matrix with orthonormal columns, uniformly
/// from the complex Stiefel manifold (QR of a Ginibre matrix).
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    assert!(cols >= 1 && cols <= rows, "need 1 <= cols <= rows");
    let g = CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cx::new(re, im)
    });
    g.qr().q()
}

/// Frobenius distance between the orthogonal projectors onto the column
/// spans of `a` and `b`. Zero iff the two subspaces coincide.
pub fn projector_distance(a: &CMat, b: &CMat) -> f64 {
    let pa = a * a.adjoint();
    let pb = b * b.adjoint();
    (pa - pb).norm()
}

/// `||V^H V - I||_F`, the orthonormality defect of a column frame.
pub fn orthonormality_defect(v: &CMat) -> f64 {
    let g = v.adjoint() * v;
    (g - CMat::identity(v.ncols(), v.ncols())).norm()
}
