//! Dense complex linear-algebra kernel used by every other module.
//!
//! Operators are plain `DMatrix<Complex<f64>>` values ([`CMat`]). The module
//! fixes two conventions used throughout the crate:
//!
//! - **Hilbert-Schmidt inner product** `<A, B> = Tr(A† B)`, under which
//!   operator bases are orthonormalized;
//! - **column-stacking vectorization**: `vectorize(A)` stacks the columns of
//!   `A`, so `vec(A X B) = (B^T ⊗ A) vec(X)`. All linear systems built on
//!   vectorized operators (commutants, noiseless conditions) use this
//!   convention.
//!
//! Rank decisions are relative: singular values below `eps * sigma_max` are
//! treated as zero. A system whose largest singular value is itself below
//! `eps` is treated as the zero map; callers assemble systems from
//! HS-normalized operators, so legitimate nonzero systems have norm of
//! order one.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, Tol};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `d x d` identity.
pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Multiply by a real scalar.
pub fn scale(m: &CMat, x: f64) -> CMat {
    m * C64::new(x, 0.0)
}

/// `(A + A†) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    scale(&(m + m.adjoint()), 0.5)
}

/// Frobenius norm (the Hilbert-Schmidt norm).
pub fn fro_norm(m: &CMat) -> f64 {
    m.norm()
}

/// Operator (spectral) norm: the largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// True when every entry is finite.
pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hilbert-Schmidt inner product `Tr(a† b)`, conjugate-linear in `a`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "hs_inner: shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// An HS-orthonormal list of same-shape matrices spanning an operator
/// subspace. Produced by [`orthonormalize`]; the elements are pairwise
/// HS-orthogonal with unit HS norm.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    rows: usize,
    cols: usize,
    mats: Vec<CMat>,
}

impl OperatorBasis {
    /// Basis of the zero subspace.
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self { rows, cols, mats: Vec::new() }
    }

    /// Wrap matrices that are already HS-orthonormal. Checked in debug
    /// builds only.
    pub(crate) fn from_orthonormal(mats: Vec<CMat>, rows: usize, cols: usize) -> Self {
        debug_assert!(mats.iter().all(|m| m.shape() == (rows, cols)));
        Self { rows, cols, mats }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CMat> {
        self.mats.iter()
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &CMat) -> Result<CMat> {
        self.check_shape(x)?;
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for b in &self.mats {
            let c = hs_inner(b, x)?;
            out += b * c;
        }
        Ok(out)
    }

    /// `‖x − P_span(x)‖_F`.
    pub fn residual(&self, x: &CMat) -> Result<f64> {
        Ok(fro_norm(&(x - self.project(x)?)))
    }

    /// True when the relative projection residual is within `eps`.
    pub fn contains(&self, x: &CMat, tol: Tol) -> Result<bool> {
        Ok(self.residual(x)? <= tol.eps() * fro_norm(x).max(f64::MIN_POSITIVE))
    }

    /// Largest residual of the other basis' elements against this span;
    /// zero when `other` is contained in `self`.
    pub fn containment_residual(&self, other: &OperatorBasis) -> Result<f64> {
        let mut worst = 0.0f64;
        for m in other.iter() {
            worst = worst.max(self.residual(m)?);
        }
        Ok(worst)
    }

    fn check_shape(&self, x: &CMat) -> Result<()> {
        if !self.mats.is_empty() && x.shape() != (self.rows, self.cols) {
            return Err(Error::Dimension(format!(
                "operator basis of {}x{} matrices applied to {:?}",
                self.rows,
                self.cols,
                x.shape()
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for OperatorBasis {
    type Output = CMat;
    fn index(&self, k: usize) -> &CMat {
        &self.mats[k]
    }
}

/// HS-orthonormal basis of the span of `mats`, computed from one SVD of the
/// stacked vectorizations. Linearly dependent inputs are dropped; an empty
/// input yields an empty basis.
pub fn orthonormalize(mats: &[CMat], tol: Tol) -> Result<OperatorBasis> {
    let Some(first) = mats.first() else {
        return Ok(OperatorBasis::empty(0, 0));
    };
    let (rows, cols) = first.shape();
    for m in mats {
        if m.shape() != (rows, cols) {
            return Err(Error::Dimension(format!(
                "orthonormalize: shapes {:?} and {:?} differ",
                (rows, cols),
                m.shape()
            )));
        }
    }
    let dim = rows * cols;
    let mut stacked = CMat::zeros(dim, mats.len());
    for (j, m) in mats.iter().enumerate() {
        stacked.set_column(j, &vectorize(m));
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("u requested");
    let s = &svd.singular_values;
    let smax = if s.is_empty() { 0.0 } else { s.max() };
    let rank = if smax <= tol.eps() {
        0
    } else {
        s.iter().filter(|&&x| x > tol.eps() * smax).count()
    };
    let basis = (0..rank)
        .map(|k| unvectorize(&u.column(k).into_owned(), rows, cols))
        .collect();
    Ok(OperatorBasis::from_orthonormal(basis, rows, cols))
}

/// Orthonormal basis of the (numerical) kernel of `l`: vectors `v` with
/// `‖l v‖ ≲ eps ‖l‖`. The count is `cols − rank` at the relative threshold.
pub fn nullspace(l: &CMat, tol: Tol) -> Vec<CVec> {
    let (rows, cols) = l.shape();
    if cols == 0 {
        return Vec::new();
    }
    // Tall stacked systems are QR-compressed first; R has the same singular
    // values and right singular vectors as l.
    let mut work = if rows > 2 * cols && rows > 64 {
        l.clone().qr().r()
    } else {
        l.clone()
    };
    // The thin SVD only returns min(rows, cols) right singular vectors; pad
    // with zero rows so the full right basis is available.
    let short = work.nrows();
    if short < cols {
        work = work.insert_rows(short, cols - short, ZERO);
    }
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let s = &svd.singular_values;
    let smax = if s.is_empty() { 0.0 } else { s.max() };
    let rank = if smax <= tol.eps() {
        0
    } else {
        s.iter().filter(|&&x| x > tol.eps() * smax).count()
    };
    (rank..cols)
        .map(|k| v_t.row(k).adjoint())
        .collect()
}

/// `K = a^{-1/2}` on the support of a Hermitian PSD `a`, zero on its kernel,
/// so that `K a K` is the support projector.
pub fn inv_sqrt_on_support(a: &CMat, tol: Tol) -> Result<CMat> {
    let d = square_dim(a, "inv_sqrt_on_support")?;
    let herm_res = fro_norm(&(a - a.adjoint()));
    if herm_res > tol.eps() * fro_norm(a).max(1.0) {
        return Err(Error::Domain(format!(
            "inv_sqrt_on_support: input not Hermitian (residual {herm_res:.3e})"
        )));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if eig.eigenvalues.iter().any(|&x| x < -tol.eps() * lmax.max(1.0)) {
        return Err(Error::Domain(format!(
            "inv_sqrt_on_support: input not positive semidefinite (min eigenvalue {:.3e})",
            eig.eigenvalues.min()
        )));
    }
    let mut k = CMat::zeros(d, d);
    if lmax <= tol.eps() {
        return Ok(k); // numerically zero operator: empty support
    }
    for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol.eps() * lmax {
            let v = eig.eigenvectors.column(idx);
            k += (v * v.adjoint()) * C64::new(lam.powf(-0.5), 0.0);
        }
    }
    Ok(k)
}

/// Rank of a Hermitian PSD matrix at the relative eigenvalue threshold.
pub fn psd_rank(a: &CMat, tol: Tol) -> usize {
    let eig = hermitian_part(a).symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if lmax <= tol.eps() {
        return 0;
    }
    eig.eigenvalues.iter().filter(|&&x| x > tol.eps() * lmax).count()
}

/// Matrix exponential (scaling-and-squaring with Padé approximation).
pub fn expm(a: &CMat) -> Result<CMat> {
    square_dim(a, "expm")?;
    Ok(a.exp())
}

pub(crate) fn square_dim(m: &CMat, who: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{who}: expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Trace out the left factor of an operator on `C^{d_left} ⊗ C^{d_right}`.
pub fn partial_trace_left(m: &CMat, d_left: usize, d_right: usize) -> Result<CMat> {
    check_factored(m, d_left, d_right)?;
    let mut out = CMat::zeros(d_right, d_right);
    for s in 0..d_right {
        for t in 0..d_right {
            let mut acc = ZERO;
            for a in 0..d_left {
                acc += m[(a * d_right + s, a * d_right + t)];
            }
            out[(s, t)] = acc;
        }
    }
    Ok(out)
}

/// Trace out the right factor of an operator on `C^{d_left} ⊗ C^{d_right}`.
pub fn partial_trace_right(m: &CMat, d_left: usize, d_right: usize) -> Result<CMat> {
    check_factored(m, d_left, d_right)?;
    let mut out = CMat::zeros(d_left, d_left);
    for i in 0..d_left {
        for j in 0..d_left {
            let mut acc = ZERO;
            for s in 0..d_right {
                acc += m[(i * d_right + s, j * d_right + s)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

fn check_factored(m: &CMat, d_left: usize, d_right: usize) -> Result<()> {
    let d = d_left * d_right;
    if m.shape() != (d, d) {
        return Err(Error::Dimension(format!(
            "partial trace: matrix is {:?}, expected {d}x{d} = ({d_left}·{d_right})²",
            m.shape()
        )));
    }
    Ok(())
}

/// Deterministic RNG for seeded constructions.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase fix).
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let (q, r) = complex_gaussian(d, d, rng).qr().unpack();
    let mut q = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> CMat {
    hermitian_part(&complex_gaussian(d, d, rng))
}
