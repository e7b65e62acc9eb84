//! Quantum channels in operator-sum (Kraus) form.
//!
//! A channel `E(rho) = sum_k E_k rho E_k†` is stored as its list of Kraus
//! elements. The dual (Heisenberg-picture) map `E*(A) = sum_k E_k† A E_k`
//! satisfies `Tr(E(rho) A) = Tr(rho E*(A))` and is unital exactly when `E`
//! is trace preserving. Kraus lists are determined only up to an isometric
//! mixing, so channel equality is always decided through the Choi matrix,
//! never element-wise.

use crate::linalg::{
    self, all_finite, complex_gaussian, expm, fro_norm, hermitian_part, identity, op_norm,
    orthonormalize, scale, unvectorize, vectorize, CMat, CVec, OperatorBasis, C64, ONE, ZERO,
};
use crate::{Error, Result, Tol};

/// A channel `B_t(C^{d_in}) -> B_t(C^{d_out})` given by Kraus elements of
/// shape `d_out x d_in`. Trace preservation is a property checked by
/// [`KrausChannel::validate`], not enforced by construction.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMat>,
}

/// Residuals from [`KrausChannel::validate`].
///
/// `tp_residual` is the operator norm of `sum E_k† E_k − 1`; complete
/// positivity is automatic for a Kraus form, so the Choi minimum eigenvalue
/// is a redundancy check.
#[derive(Debug, Clone, Copy)]
pub struct ValidationReport {
    pub tp_residual: f64,
    pub choi_min_eigenvalue: f64,
    pub pass: bool,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::Dimension("channel needs at least one Kraus element".into()));
        };
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 {
            return Err(Error::Dimension("channel dimensions must be positive".into()));
        }
        for e in &kraus {
            if e.shape() != (d_out, d_in) {
                return Err(Error::Dimension(format!(
                    "Kraus elements disagree in shape: {:?} vs {:?}",
                    (d_out, d_in),
                    e.shape()
                )));
            }
            if !all_finite(e) {
                return Err(Error::Domain("Kraus element has non-finite entries".into()));
            }
        }
        Ok(Self { d_in, d_out, kraus })
    }

    /// The identity channel on `C^d`.
    pub fn identity_channel(d: usize) -> Self {
        Self { d_in: d, d_out: d, kraus: vec![identity(d)] }
    }

    /// Single-element channel `rho -> U rho U†`.
    pub fn from_unitary(u: &CMat, tol: Tol) -> Result<Self> {
        let d = linalg::square_dim(u, "from_unitary")?;
        if fro_norm(&(u.adjoint() * u - identity(d))) > tol.eps() * (d as f64) {
            return Err(Error::Domain("from_unitary: matrix is not unitary".into()));
        }
        Self::new(vec![u.clone()])
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a constructed channel always has at least one element
    }

    /// `sum_k E_k† E_k`.
    pub fn dual_of_identity(&self) -> CMat {
        let mut acc = CMat::zeros(self.d_in, self.d_in);
        for e in &self.kraus {
            acc += e.adjoint() * e;
        }
        acc
    }

    /// Schroedinger picture: `rho -> sum_k E_k rho E_k†`.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.shape() != (self.d_in, self.d_in) {
            return Err(Error::Dimension(format!(
                "apply: state is {shape:?}, channel expects {d}x{d}",
                shape = rho.shape(),
                d = self.d_in
            )));
        }
        let mut acc = CMat::zeros(self.d_out, self.d_out);
        for e in &self.kraus {
            acc += e * rho * e.adjoint();
        }
        Ok(acc)
    }

    /// Heisenberg picture: `A -> sum_k E_k† A E_k`.
    pub fn apply_dual(&self, a: &CMat) -> Result<CMat> {
        if a.shape() != (self.d_out, self.d_out) {
            return Err(Error::Dimension(format!(
                "apply_dual: effect is {shape:?}, channel expects {d}x{d}",
                shape = a.shape(),
                d = self.d_out
            )));
        }
        let mut acc = CMat::zeros(self.d_in, self.d_in);
        for e in &self.kraus {
            acc += e.adjoint() * a * e;
        }
        Ok(acc)
    }

    /// Choi matrix `sum_k vec(E_k) vec(E_k)†` on `C^{d_in} ⊗ C^{d_out}`,
    /// i.e. `(id ⊗ E)` applied to the unnormalized maximally entangled
    /// matrix. Its partial trace over the output factor is `1_{d_in}` for a
    /// trace-preserving channel.
    pub fn choi(&self) -> CMat {
        let dim = self.d_in * self.d_out;
        let mut c = CMat::zeros(dim, dim);
        for e in &self.kraus {
            let w = vectorize(e);
            c += &w * w.adjoint();
        }
        c
    }

    /// Frobenius distance between Choi matrices; the channel metric used for
    /// every equality decision.
    pub fn choi_distance(&self, other: &Self) -> Result<f64> {
        if (self.d_in, self.d_out) != (other.d_in, other.d_out) {
            return Err(Error::Dimension(format!(
                "choi_distance: channels {}x{} vs {}x{}",
                self.d_in, self.d_out, other.d_in, other.d_out
            )));
        }
        Ok(fro_norm(&(self.choi() - other.choi())))
    }

    /// Trace-preservation and complete-positivity residuals.
    pub fn validate(&self, tol: Tol) -> ValidationReport {
        let tp_residual = op_norm(&(self.dual_of_identity() - identity(self.d_in)));
        let eig = hermitian_part(&self.choi()).symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let choi_min_eigenvalue = eig.eigenvalues.min();
        let pass = tp_residual <= tol.eps() && choi_min_eigenvalue >= -tol.eps() * lmax.max(1.0);
        ValidationReport { tp_residual, choi_min_eigenvalue, pass }
    }

    /// Composition `self ∘ first`: apply `first`, then `self`. The Kraus
    /// list is all products `F_j E_i`; duals compose in the reverse order.
    pub fn after(&self, first: &Self) -> Result<Self> {
        if first.d_out != self.d_in {
            return Err(Error::Dimension(format!(
                "compose: inner dimensions {} and {} differ",
                first.d_out, self.d_in
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for f in &self.kraus {
            for e in &first.kraus {
                kraus.push(f * e);
            }
        }
        Self::new(kraus)
    }

    /// Restriction to a subspace embedded by the isometry `v`
    /// (`v† v = 1`): the channel with elements `E_k v`.
    pub fn restrict(&self, v: &CMat, tol: Tol) -> Result<Self> {
        check_isometry(v, self.d_in, tol)?;
        Self::new(self.kraus.iter().map(|e| e * v).collect())
    }

    /// Remix the Kraus elements: `F_i = sum_j gamma[i,j] E_j`. An isometric
    /// `gamma` yields the same channel; a general `gamma` yields a channel
    /// whose elements live in the same operator span.
    pub fn remix(&self, gamma: &CMat) -> Result<Self> {
        if gamma.ncols() != self.kraus.len() {
            return Err(Error::Dimension(format!(
                "remix: gamma has {} columns, channel has {} elements",
                gamma.ncols(),
                self.kraus.len()
            )));
        }
        if gamma.nrows() == 0 {
            return Err(Error::Dimension("remix: gamma has no rows".into()));
        }
        let mut kraus = Vec::with_capacity(gamma.nrows());
        for i in 0..gamma.nrows() {
            let mut f = CMat::zeros(self.d_out, self.d_in);
            for (j, e) in self.kraus.iter().enumerate() {
                f += e * gamma[(i, j)];
            }
            kraus.push(f);
        }
        Self::new(kraus)
    }

    /// Minimal Kraus list for the same channel, from the eigendecomposition
    /// of the Choi matrix. Dilations produce many numerically zero elements;
    /// this drops them.
    pub fn compress(&self, tol: Tol) -> Self {
        let eig = hermitian_part(&self.choi()).symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let mut kraus = Vec::new();
        if lmax > 0.0 {
            for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam > tol.eps() * lmax {
                    let w = eig.eigenvectors.column(idx) * C64::new(lam.sqrt(), 0.0);
                    kraus.push(unvectorize(&w.into_owned(), self.d_out, self.d_in));
                }
            }
        }
        if kraus.is_empty() {
            // the zero map has no Kraus form; keep a zero element
            kraus.push(CMat::zeros(self.d_out, self.d_in));
        }
        Self { d_in: self.d_in, d_out: self.d_out, kraus }
    }

    /// HS-orthonormal basis of the span of the Kraus elements.
    pub fn element_span(&self, tol: Tol) -> Result<OperatorBasis> {
        orthonormalize(&self.kraus, tol)
    }
}

/// Checks `v† v = 1` for a `d x d0` isometry into `C^d`.
pub fn check_isometry(v: &CMat, d: usize, tol: Tol) -> Result<()> {
    if v.nrows() != d {
        return Err(Error::Dimension(format!(
            "isometry: has {} rows, ambient space is C^{d}",
            v.nrows()
        )));
    }
    let d0 = v.ncols();
    if d0 == 0 || d0 > d {
        return Err(Error::Dimension(format!("isometry: maps C^{d0} into C^{d}")));
    }
    let res = fro_norm(&(v.adjoint() * v - identity(d0)));
    if res > tol.eps() * (d0 as f64).max(1.0) {
        return Err(Error::Domain(format!("not an isometry: ‖v†v − 1‖ = {res:.3e}")));
    }
    Ok(())
}

/// A system-environment interaction: total Hamiltonian on
/// `C^{d_sys} ⊗ C^{d_env}`, a pure environment state, and an evolution time.
#[derive(Debug, Clone)]
pub struct DilationModel {
    h_total: CMat,
    psi_env: CVec,
    t: f64,
    d_sys: usize,
    d_env: usize,
}

impl DilationModel {
    pub fn new(h_total: CMat, psi_env: CVec, t: f64, tol: Tol) -> Result<Self> {
        let dim = linalg::square_dim(&h_total, "DilationModel")?;
        let d_env = psi_env.len();
        if d_env == 0 || dim % d_env != 0 {
            return Err(Error::Dimension(format!(
                "total dimension {dim} does not factor over environment dimension {d_env}"
            )));
        }
        let herm = fro_norm(&(&h_total - h_total.adjoint()));
        if herm > tol.eps() * fro_norm(&h_total).max(1.0) {
            return Err(Error::Domain(format!(
                "Hamiltonian is not Hermitian (residual {herm:.3e})"
            )));
        }
        if (psi_env.norm() - 1.0).abs() > tol.eps() * 10.0 {
            return Err(Error::Domain(format!(
                "environment state has norm {:.12}, expected 1",
                psi_env.norm()
            )));
        }
        if !t.is_finite() {
            return Err(Error::Domain("time must be finite".into()));
        }
        let d_sys = dim / d_env;
        Ok(Self { h_total, psi_env, t, d_sys, d_env })
    }

    pub fn d_sys(&self) -> usize {
        self.d_sys
    }

    pub fn d_env(&self) -> usize {
        self.d_env
    }

    /// Kraus elements `E_k = (1 ⊗ <k|) e^{-itH} (1 ⊗ |psi>)`, indexed by an
    /// orthonormal environment basis (computational basis when `None`). The
    /// result is trace preserving by unitarity of the evolution.
    pub fn to_kraus(&self, env_basis: Option<&[CVec]>, tol: Tol) -> Result<KrausChannel> {
        let u = expm(&(&self.h_total * C64::new(0.0, -self.t)))?;
        let basis_storage;
        let basis: &[CVec] = match env_basis {
            Some(b) => b,
            None => {
                basis_storage = (0..self.d_env)
                    .map(|k| {
                        let mut v = CVec::zeros(self.d_env);
                        v[k] = ONE;
                        v
                    })
                    .collect::<Vec<_>>();
                &basis_storage
            }
        };
        if basis.len() != self.d_env {
            return Err(Error::Dimension(format!(
                "environment basis has {} vectors, need {}",
                basis.len(),
                self.d_env
            )));
        }
        for (i, bi) in basis.iter().enumerate() {
            if bi.len() != self.d_env {
                return Err(Error::Dimension(
                    "environment basis vector has wrong length".into(),
                ));
            }
            for (j, bj) in basis.iter().enumerate() {
                let ip = (bi.adjoint() * bj)[(0, 0)];
                let expect = if i == j { ONE } else { ZERO };
                if (ip - expect).norm() > tol.eps() * 10.0 {
                    return Err(Error::Domain("environment basis is not orthonormal".into()));
                }
            }
        }
        // u_psi = U (1 ⊗ |psi>), a (d_sys·d_env) x d_sys map
        let mut u_psi = CMat::zeros(self.d_sys * self.d_env, self.d_sys);
        for b in 0..self.d_sys {
            for row in 0..self.d_sys * self.d_env {
                let mut acc = ZERO;
                for n in 0..self.d_env {
                    acc += u[(row, b * self.d_env + n)] * self.psi_env[n];
                }
                u_psi[(row, b)] = acc;
            }
        }
        let mut kraus = Vec::with_capacity(self.d_env);
        for k in basis {
            let mut e = CMat::zeros(self.d_sys, self.d_sys);
            for a in 0..self.d_sys {
                for b in 0..self.d_sys {
                    let mut acc = ZERO;
                    for m in 0..self.d_env {
                        acc += k[m].conj() * u_psi[(a * self.d_env + m, b)];
                    }
                    e[(a, b)] = acc;
                }
            }
            kraus.push(e);
        }
        KrausChannel::new(kraus)
    }
}

/// HS-orthonormal basis of `span{1}` together with all products of at most
/// `order` interaction operators: the operator space an interaction
/// generates to the given order in time.
pub fn error_span(interaction_ops: &[CMat], order: usize, tol: Tol) -> Result<OperatorBasis> {
    Ok(error_span_levels(interaction_ops, order, tol)?.1)
}

/// Cumulative span dimension for each order `0..=max_order`; the `order = 0`
/// entry is 1 (the identity alone).
pub fn error_span_table(
    interaction_ops: &[CMat],
    max_order: usize,
    tol: Tol,
) -> Result<Vec<usize>> {
    Ok(error_span_levels(interaction_ops, max_order, tol)?.0)
}

fn error_span_levels(
    ops: &[CMat],
    order: usize,
    tol: Tol,
) -> Result<(Vec<usize>, OperatorBasis)> {
    let d = match ops.first() {
        Some(first) => linalg::square_dim(first, "error_span")?,
        None => {
            // no interactions: only the identity at every order
            let basis = orthonormalize(&[identity(1)], tol)?;
            return Ok((vec![1; order + 1], basis));
        }
    };
    for m in ops {
        if m.shape() != (d, d) {
            return Err(Error::Dimension("error_span: operators disagree in shape".into()));
        }
    }
    let mut cumulative = vec![identity(d)];
    let mut cum_basis = orthonormalize(&cumulative, tol)?;
    let mut table = vec![cum_basis.len()];
    // span(words of length n) = span{ J·w : J in ops, w in basis of words of
    // length n-1 }, by bilinearity of the product
    let mut level = orthonormalize(&[identity(d)], tol)?;
    for _ in 1..=order {
        if cum_basis.len() == d * d {
            table.push(d * d);
            continue;
        }
        let mut products = Vec::with_capacity(ops.len() * level.len());
        for j in ops {
            for w in level.iter() {
                products.push(j * w);
            }
        }
        level = orthonormalize(&products, tol)?;
        cumulative.extend(level.mats().iter().cloned());
        cum_basis = orthonormalize(&cumulative, tol)?;
        table.push(cum_basis.len());
    }
    Ok((table, cum_basis))
}

/// Operator Schmidt decomposition of an operator on
/// `C^{d_sys} ⊗ C^{d_env}`: terms `(s, J, K)` with `H = sum s·J ⊗ K`,
/// `J` and `K` HS-normalized and `s > 0` decreasing. The system factors span
/// the interaction operators up to linear combinations, which is all the
/// order-N span depends on.
pub fn operator_schmidt(
    h: &CMat,
    d_sys: usize,
    d_env: usize,
    tol: Tol,
) -> Result<Vec<(f64, CMat, CMat)>> {
    let dim = d_sys * d_env;
    if h.shape() != (dim, dim) {
        return Err(Error::Dimension(format!(
            "operator_schmidt: matrix is {:?}, expected {dim}x{dim}",
            h.shape()
        )));
    }
    // realign: R[(a,b), (m,n)] = H[(a m),(b n)]
    let mut r = CMat::zeros(d_sys * d_sys, d_env * d_env);
    for a in 0..d_sys {
        for b in 0..d_sys {
            for m in 0..d_env {
                for n in 0..d_env {
                    r[(a * d_sys + b, m * d_env + n)] = h[(a * d_env + m, b * d_env + n)];
                }
            }
        }
    }
    let svd = r.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = &svd.singular_values;
    let smax = if s.is_empty() { 0.0 } else { s.max() };
    let mut terms = Vec::new();
    if smax <= tol.eps() {
        return Ok(terms);
    }
    for (idx, &sv) in s.iter().enumerate() {
        if sv > tol.eps() * smax {
            let mut j = CMat::zeros(d_sys, d_sys);
            for a in 0..d_sys {
                for b in 0..d_sys {
                    j[(a, b)] = u[(a * d_sys + b, idx)];
                }
            }
            // R = sum_idx s·u_idx·(row idx of v_t), so the row enters as is
            let mut k = CMat::zeros(d_env, d_env);
            for m in 0..d_env {
                for n in 0..d_env {
                    k[(m, n)] = v_t[(idx, m * d_env + n)];
                }
            }
            terms.push((sv, j, k));
        }
    }
    Ok(terms)
}

/// Gaussian Kraus elements normalized through `S^{-1/2}` so the channel is
/// exactly trace preserving.
pub fn random_channel<R: rand::Rng>(d: usize, n_kraus: usize, rng: &mut R) -> KrausChannel {
    let raw: Vec<CMat> = (0..n_kraus).map(|_| complex_gaussian(d, d, rng)).collect();
    let mut s = CMat::zeros(d, d);
    for e in &raw {
        s += e.adjoint() * e;
    }
    let eig = hermitian_part(&s).symmetric_eigen();
    let mut s_inv_sqrt = CMat::zeros(d, d);
    for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(idx);
        s_inv_sqrt += (v * v.adjoint()) * C64::new(lam.powf(-0.5), 0.0);
    }
    KrausChannel::new(raw.into_iter().map(|e| e * &s_inv_sqrt).collect())
        .expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_inner, rng_from_seed, I};

    fn tol() -> Tol {
        Tol::default()
    }

    fn sx() -> CMat {
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn sy() -> CMat {
        CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
    }

    fn sz() -> CMat {
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    fn bit_flip(p: f64) -> KrausChannel {
        KrausChannel::new(vec![scale(&identity(2), (1.0 - p).sqrt()), scale(&sx(), p.sqrt())])
            .unwrap()
    }

    #[test]
    fn validate_identity() {
        let r = KrausChannel::identity_channel(3).validate(tol());
        assert!(r.pass);
        assert!(r.tp_residual < 1e-14);
        assert!(r.choi_min_eigenvalue > -1e-12);
    }

    #[test]
    fn validate_probability_mixture() {
        let r = bit_flip(0.3).validate(tol());
        assert!(r.pass);
        assert!(r.tp_residual < 1e-14);
    }

    #[test]
    fn validate_overcomplete_fails() {
        // {I, I}: sum E†E = 2I, operator-norm residual 1
        let ch = KrausChannel::new(vec![identity(2), identity(2)]).unwrap();
        let r = ch.validate(tol());
        assert!(!r.pass);
        assert!((r.tp_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn new_rejects_mixed_shapes() {
        assert!(matches!(
            KrausChannel::new(vec![identity(2), identity(3)]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(KrausChannel::new(vec![]), Err(Error::Dimension(_))));
    }

    #[test]
    fn apply_identity_channel() {
        let mut rng = rng_from_seed(20);
        let rho = complex_gaussian(3, 3, &mut rng);
        let out = KrausChannel::identity_channel(3).apply(&rho).unwrap();
        assert!(fro_norm(&(out - rho)) < 1e-14);
    }

    #[test]
    fn apply_bit_flip_on_ground_state() {
        // hand computation: diag(1,0) -> diag(1-p, p)
        let rho = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let out = bit_flip(0.3).apply(&rho).unwrap();
        assert!((out[(0, 0)].re - 0.7).abs() < 1e-14);
        assert!((out[(1, 1)].re - 0.3).abs() < 1e-14);
        assert!(out[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn dual_of_depolarizing_scales_pauli() {
        // brute-force 2x2 oracle: with elements {sqrt(1-3p/4) I, sqrt(p/4) X, Y, Z},
        // the dual maps sigma_z to (1-p) sigma_z
        let p = 0.6_f64;
        let ch = KrausChannel::new(vec![
            scale(&identity(2), (1.0 - 0.75 * p).sqrt()),
            scale(&sx(), (p / 4.0).sqrt()),
            scale(&sy(), (p / 4.0).sqrt()),
            scale(&sz(), (p / 4.0).sqrt()),
        ])
        .unwrap();
        assert!(ch.validate(tol()).pass);
        let out = ch.apply_dual(&sz()).unwrap();
        let mut oracle = CMat::zeros(2, 2);
        for e in ch.kraus() {
            oracle += e.adjoint() * sz() * e;
        }
        assert!(fro_norm(&(&out - &oracle)) < 1e-14);
        assert!(fro_norm(&(out - scale(&sz(), 1.0 - p))) < 1e-12);
    }

    #[test]
    fn duality_identity_on_random_pairs() {
        let mut rng = rng_from_seed(21);
        for d in [2usize, 3, 4] {
            let ch = random_channel(d, 3, &mut rng);
            for _ in 0..50 {
                let rho = complex_gaussian(d, d, &mut rng);
                let a = complex_gaussian(d, d, &mut rng);
                let lhs = (ch.apply(&rho).unwrap() * &a).trace();
                let rhs = (&rho * ch.apply_dual(&a).unwrap()).trace();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dual_is_unital_for_tp_channels() {
        let mut rng = rng_from_seed(22);
        for d in [2usize, 4] {
            let ch = random_channel(d, 4, &mut rng);
            let out = ch.apply_dual(&identity(d)).unwrap();
            assert!(fro_norm(&(out - identity(d))) < 1e-12);
        }
    }

    #[test]
    fn choi_of_identity() {
        let c = KrausChannel::identity_channel(2).choi();
        assert!((c.trace().re - 2.0).abs() < 1e-13);
        let eig = hermitian_part(&c).symmetric_eigen().eigenvalues;
        let rank = eig.iter().filter(|&&x| x > 1e-9 * eig.max()).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn choi_of_unitary_is_rank_one() {
        let ch = KrausChannel::from_unitary(&sx(), tol()).unwrap();
        let eig = hermitian_part(&ch.choi()).symmetric_eigen().eigenvalues;
        let rank = eig.iter().filter(|&&x| x > 1e-9 * eig.max()).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn choi_of_bit_flip_eigenvalues() {
        // 4x4 eigen-oracle: eigenvalues {2(1-p), 2p} = {1.4, 0.6} at p = 0.3
        let mut eig: Vec<f64> = hermitian_part(&bit_flip(0.3).choi())
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((eig[0] - 1.4).abs() < 1e-12);
        assert!((eig[1] - 0.6).abs() < 1e-12);
        assert!(eig[2].abs() < 1e-12 && eig[3].abs() < 1e-12);
    }

    #[test]
    fn choi_partial_trace_over_output() {
        let mut rng = rng_from_seed(23);
        let ch = random_channel(3, 2, &mut rng);
        // index (i, a) = i*d_out + a: the output is the right factor
        let pt = linalg::partial_trace_right(&ch.choi(), 3, 3).unwrap();
        assert!(fro_norm(&(pt - identity(3))) < 1e-12);
    }

    #[test]
    fn compose_with_identity() {
        let mut rng = rng_from_seed(24);
        let ch = random_channel(3, 3, &mut rng);
        let composed = KrausChannel::identity_channel(3).after(&ch).unwrap();
        assert!(ch.choi_distance(&composed).unwrap() < 1e-12);
    }

    #[test]
    fn compose_involution() {
        let x = KrausChannel::from_unitary(&sx(), tol()).unwrap();
        let both = x.after(&x).unwrap();
        assert!(both.choi_distance(&KrausChannel::identity_channel(2)).unwrap() < 1e-13);
    }

    #[test]
    fn compose_bit_flips() {
        // probability oracle: flip(p) then flip(q) = flip(p + q - 2pq)
        let (p, q): (f64, f64) = (0.3, 0.2);
        let composed = bit_flip(q).after(&bit_flip(p)).unwrap();
        let oracle = bit_flip(p + q - 2.0 * p * q);
        assert!(composed.choi_distance(&oracle).unwrap() < 1e-12);
    }

    #[test]
    fn compose_duality_reversed() {
        let mut rng = rng_from_seed(25);
        let ch1 = random_channel(3, 2, &mut rng);
        let ch2 = random_channel(3, 2, &mut rng);
        let composed = ch2.after(&ch1).unwrap();
        let a = complex_gaussian(3, 3, &mut rng);
        let lhs = composed.apply_dual(&a).unwrap();
        let rhs = ch1.apply_dual(&ch2.apply_dual(&a).unwrap()).unwrap();
        assert!(fro_norm(&(lhs - rhs)) < 1e-11);
    }

    #[test]
    fn restrict_with_identity_isometry() {
        let mut rng = rng_from_seed(26);
        let ch = random_channel(3, 2, &mut rng);
        let r = ch.restrict(&identity(3), tol()).unwrap();
        assert!(ch.choi_distance(&r).unwrap() < 1e-13);
    }

    #[test]
    fn restrict_to_single_vector_prepares_state() {
        let mut rng = rng_from_seed(27);
        let ch = random_channel(3, 2, &mut rng);
        let mut v = CMat::zeros(3, 1);
        v[(1, 0)] = ONE;
        let r = ch.restrict(&v, tol()).unwrap();
        let out = r.apply(&identity(1)).unwrap();
        let expect = ch.apply(&(&v * v.adjoint())).unwrap();
        assert!(fro_norm(&(out - expect)) < 1e-13);
    }

    #[test]
    fn restrict_three_qubit_code() {
        // explicit construction oracle for the bit-flip code restriction
        let x1 = sx().kronecker(&identity(4));
        let x2 = identity(2).kronecker(&sx()).kronecker(&identity(2));
        let x3 = identity(4).kronecker(&sx());
        let p: [f64; 4] = [0.4, 0.3, 0.2, 0.1];
        let ch = KrausChannel::new(vec![
            scale(&identity(8), p[0].sqrt()),
            scale(&x1, p[1].sqrt()),
            scale(&x2, p[2].sqrt()),
            scale(&x3, p[3].sqrt()),
        ])
        .unwrap();
        let mut v = CMat::zeros(8, 2);
        v[(0, 0)] = ONE; // |000>
        v[(7, 1)] = ONE; // |111>
        let r = ch.restrict(&v, tol()).unwrap();
        assert_eq!(r.d_in(), 2);
        assert_eq!(r.d_out(), 8);
        assert_eq!(r.kraus().len(), 4);
        // X1 V maps |000> -> |100> = e4 and |111> -> |011> = e3
        let mut expect = CMat::zeros(8, 2);
        expect[(4, 0)] = C64::new(p[1].sqrt(), 0.0);
        expect[(3, 1)] = C64::new(p[1].sqrt(), 0.0);
        assert!(fro_norm(&(&r.kraus()[1] - &expect)) < 1e-14);
        assert!(r.validate(tol()).pass);
    }

    #[test]
    fn restrict_rejects_non_isometry() {
        let ch = KrausChannel::identity_channel(2);
        let v = scale(&identity(2), 2.0);
        assert!(matches!(ch.restrict(&v, tol()), Err(Error::Domain(_))));
    }

    #[test]
    fn remix_isometric_preserves_choi() {
        let mut rng = rng_from_seed(28);
        let ch = random_channel(3, 3, &mut rng);
        let u = linalg::haar_unitary(5, &mut rng);
        let gamma = u.view((0, 0), (5, 3)).into_owned(); // isometric 5x3 mixing
        let remixed = ch.remix(&gamma).unwrap();
        assert!(remixed.validate(tol()).pass);
        assert!(ch.choi_distance(&remixed).unwrap() < 1e-11);
    }

    #[test]
    fn compress_drops_zero_elements() {
        let ch = KrausChannel::new(vec![identity(2), CMat::zeros(2, 2)]).unwrap();
        let c = ch.compress(tol());
        assert_eq!(c.kraus().len(), 1);
        assert!(ch.choi_distance(&c).unwrap() < 1e-12);
    }

    #[test]
    fn dilation_at_time_zero() {
        let mut rng = rng_from_seed(29);
        let h = linalg::random_hermitian(6, &mut rng);
        let mut psi = CVec::zeros(3);
        psi[0] = ONE;
        let dm = DilationModel::new(h, psi, 0.0, tol()).unwrap();
        let ch = dm.to_kraus(None, tol()).unwrap().compress(tol());
        assert!(ch.choi_distance(&KrausChannel::identity_channel(2)).unwrap() < 1e-12);
    }

    #[test]
    fn dilation_commuting_closed_form() {
        // H = sz ⊗ sz with env |0>: E(t) = e^{-it sz}, a single unitary element
        let h = sz().kronecker(&sz());
        let mut psi = CVec::zeros(2);
        psi[0] = ONE;
        let t = 0.77;
        let dm = DilationModel::new(h, psi, t, tol()).unwrap();
        let ch = dm.to_kraus(None, tol()).unwrap().compress(tol());
        assert_eq!(ch.kraus().len(), 1);
        let expect =
            KrausChannel::from_unitary(&expm(&(sz() * C64::new(0.0, -t))).unwrap(), tol()).unwrap();
        assert!(ch.choi_distance(&expect).unwrap() < 1e-11);
    }

    #[test]
    fn dilation_off_diagonal_element() {
        // closed-form oracle: (sx ⊗ sx)^2 = 1, so
        // e^{-it sx⊗sx} = cos(t) 1 - i sin(t) sx⊗sx; at t = pi/2 the only
        // element left is -i sx, reached through the flipped environment
        let h = sx().kronecker(&sx());
        let mut psi = CVec::zeros(2);
        psi[0] = ONE;
        let t = std::f64::consts::FRAC_PI_2;
        let dm = DilationModel::new(h, psi, t, tol()).unwrap();
        let ch = dm.to_kraus(None, tol()).unwrap();
        assert!(fro_norm(&ch.kraus()[0]) < 1e-12);
        assert!(fro_norm(&(&ch.kraus()[1] - sx() * (-I))) < 1e-12);
        assert!(ch.validate(tol()).pass);
    }

    #[test]
    fn dilation_is_trace_preserving() {
        let mut rng = rng_from_seed(30);
        for _ in 0..5 {
            let h = linalg::random_hermitian(8, &mut rng);
            let mut psi: CVec = complex_gaussian(4, 1, &mut rng).column(0).into_owned();
            psi /= C64::new(psi.norm(), 0.0);
            let dm = DilationModel::new(h, psi, 0.9, tol()).unwrap();
            let ch = dm.to_kraus(None, tol()).unwrap();
            assert!(ch.validate(tol()).pass);
        }
    }

    #[test]
    fn dilation_basis_independent_choi() {
        let mut rng = rng_from_seed(31);
        let h = linalg::random_hermitian(4, &mut rng);
        let mut psi = CVec::zeros(2);
        psi[0] = ONE;
        let dm = DilationModel::new(h, psi, 1.3, tol()).unwrap();
        let ch1 = dm.to_kraus(None, tol()).unwrap();
        let u = linalg::haar_unitary(2, &mut rng);
        let basis: Vec<CVec> = (0..2).map(|k| u.column(k).into_owned()).collect();
        let ch2 = dm.to_kraus(Some(&basis), tol()).unwrap();
        assert!(ch1.choi_distance(&ch2).unwrap() < 1e-12);
    }

    #[test]
    fn dilation_rejects_non_hermitian() {
        let mut h = sz().kronecker(&sz());
        h[(0, 1)] = ONE;
        let mut psi = CVec::zeros(2);
        psi[0] = ONE;
        assert!(matches!(DilationModel::new(h, psi, 1.0, tol()), Err(Error::Domain(_))));
    }

    #[test]
    fn error_span_single_pauli() {
        let b = error_span(&[sx()], 1, tol()).unwrap();
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn error_span_two_paulis_saturate() {
        // products reach sigma_y up to phase: order 2 spans all of B(C^2)
        let table = error_span_table(&[sx(), sz()], 2, tol()).unwrap();
        assert_eq!(table, vec![1, 3, 4]);
    }

    #[test]
    fn error_span_identity_only() {
        let b = error_span(&[identity(2)], 7, tol()).unwrap();
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn error_span_monotone_and_stable() {
        let mut rng = rng_from_seed(32);
        let ops = vec![complex_gaussian(3, 3, &mut rng), complex_gaussian(3, 3, &mut rng)];
        let table = error_span_table(&ops, 6, tol()).unwrap();
        for w in table.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert_eq!(*table.last().unwrap(), 9);
    }

    #[test]
    fn operator_schmidt_reconstructs() {
        let mut rng = rng_from_seed(33);
        let h = linalg::random_hermitian(6, &mut rng);
        let terms = operator_schmidt(&h, 2, 3, tol()).unwrap();
        let mut acc = CMat::zeros(6, 6);
        for (s, j, k) in &terms {
            acc += j.kronecker(k) * C64::new(*s, 0.0);
        }
        assert!(fro_norm(&(acc - h)) < 1e-10);
    }

    #[test]
    fn operator_schmidt_of_pure_tensor() {
        let h = sx().kronecker(&sz());
        let terms = operator_schmidt(&h, 2, 2, tol()).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].0 - 2.0).abs() < 1e-12); // ‖sx‖_HS · ‖sz‖_HS
    }

    #[test]
    fn element_span_is_mixing_invariant() {
        let mut rng = rng_from_seed(34);
        let ch = random_channel(3, 3, &mut rng);
        let gamma = linalg::haar_unitary(3, &mut rng);
        let remixed = ch.remix(&gamma).unwrap();
        let s1 = ch.element_span(tol()).unwrap();
        let s2 = remixed.element_span(tol()).unwrap();
        assert_eq!(s1.len(), s2.len());
        assert!(s1.containment_residual(&s2).unwrap() < 1e-10);
    }

    #[test]
    fn hs_inner_of_choi_vectors() {
        // <vec(A), vec(B)> = Tr(A†B); the Choi convention relies on it
        let mut rng = rng_from_seed(35);
        let a = complex_gaussian(3, 2, &mut rng);
        let b = complex_gaussian(3, 2, &mut rng);
        let lhs = (vectorize(&a).adjoint() * vectorize(&b))[(0, 0)];
        let rhs = hs_inner(&a, &b).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
