//! Dense complex linear algebra on the quantum space `(C^2)^{⊗n}`.
//!
//! Basis states are ordered lexicographically with site 1 as the most
//! significant tensor factor and spin-up as the first component, so the
//! all-up state is basis vector 0 and the all-down state is the last one.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix2, Schur};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest chain length for which operators are built.
pub const OPERATOR_SITE_CAP: usize = 8;
/// Largest matrix dimension handed to the dense eigensolver.
pub const EIGEN_DIM_CAP: usize = 1 << 8;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// 2x2 complex block acting on a single site.
pub type Local = Matrix2<C64>;

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 { 0.0 } else { (a - b).norm() / scale }
}

pub fn id2() -> Local {
    Local::identity()
}
pub fn sigma_z() -> Local {
    Local::new(ONE, ZERO, ZERO, -ONE)
}
pub fn sigma_plus() -> Local {
    Local::new(ZERO, ONE, ZERO, ZERO)
}
pub fn sigma_minus() -> Local {
    Local::new(ZERO, ZERO, ONE, ZERO)
}
pub fn sigma_x() -> Local {
    sigma_plus() + sigma_minus()
}
pub fn sigma_y() -> Local {
    (sigma_minus() - sigma_plus()) * I
}
/// Projector on spin up, `(1 + σ^z)/2`.
pub fn proj_up() -> Local {
    Local::new(ONE, ZERO, ZERO, ZERO)
}
/// Projector on spin down, `(1 - σ^z)/2`.
pub fn proj_down() -> Local {
    Local::new(ZERO, ZERO, ZERO, ONE)
}

pub fn check_sites(n: usize) -> Result<()> {
    if n > OPERATOR_SITE_CAP {
        return Err(Error::DimensionCap { n, cap: OPERATOR_SITE_CAP });
    }
    Ok(())
}

/// Dense operator on the quantum space of `n_sites` spins.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    n_sites: usize,
    mat: DMatrix<C64>,
}

impl QOperator {
    pub fn from_matrix(n_sites: usize, mat: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << n_sites;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: mat.nrows().max(mat.ncols()) });
        }
        Ok(Self { n_sites, mat })
    }

    pub fn identity(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self { n_sites, mat: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self { n_sites, mat: DMatrix::zeros(dim, dim) }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n_sites: self.n_sites, mat: &self.mat * s }
    }

    pub fn frobenius(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { n_sites: self.n_sites, mat: self.mat.adjoint() }
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.n_sites, v.n_sites, "operator/state size mismatch");
        StateVector { n_sites: v.n_sites, amps: &self.mat * &v.amps }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Returns `s` when the operator equals `s·Id` within `tol` (relative),
    /// otherwise `None`.
    pub fn as_scalar(&self, tol: f64) -> Option<C64> {
        let s = self.mat[(0, 0)];
        let dev = (&self.mat - DMatrix::<C64>::identity(self.dim(), self.dim()) * s)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        (dev <= tol * self.frobenius().max(1.0)).then_some(s)
    }
}

impl<'a> Mul<&'a QOperator> for &'a QOperator {
    type Output = QOperator;
    fn mul(self, rhs: &'a QOperator) -> QOperator {
        assert_eq!(self.n_sites, rhs.n_sites, "operator size mismatch");
        QOperator { n_sites: self.n_sites, mat: &self.mat * &rhs.mat }
    }
}

impl<'a> Add<&'a QOperator> for &'a QOperator {
    type Output = QOperator;
    fn add(self, rhs: &'a QOperator) -> QOperator {
        assert_eq!(self.n_sites, rhs.n_sites, "operator size mismatch");
        QOperator { n_sites: self.n_sites, mat: &self.mat + &rhs.mat }
    }
}

impl<'a> Sub<&'a QOperator> for &'a QOperator {
    type Output = QOperator;
    fn sub(self, rhs: &'a QOperator) -> QOperator {
        assert_eq!(self.n_sites, rhs.n_sites, "operator size mismatch");
        QOperator { n_sites: self.n_sites, mat: &self.mat - &rhs.mat }
    }
}

impl Mul<C64> for &QOperator {
    type Output = QOperator;
    fn mul(self, s: C64) -> QOperator {
        self.scale(s)
    }
}

impl Neg for &QOperator {
    type Output = QOperator;
    fn neg(self) -> QOperator {
        self.scale(-ONE)
    }
}

impl AddAssign<&QOperator> for QOperator {
    fn add_assign(&mut self, rhs: &QOperator) {
        self.mat += &rhs.mat;
    }
}

/// Linear combination `Σ c_k·op_k`; all operators must share one size.
pub fn combine(terms: &[(C64, &QOperator)]) -> QOperator {
    let n = terms.first().map(|(_, op)| op.n_sites).unwrap_or(0);
    let mut acc = QOperator::zeros(n);
    for (coef, op) in terms {
        acc.mat.zip_apply(&op.mat, |a, b| *a += *coef * b);
    }
    acc
}

/// Dense state on `n_sites` spins.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn from_vec(n_sites: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_sites;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: amps.len() });
        }
        Ok(Self { n_sites, amps: DVector::from_vec(amps) })
    }

    pub fn basis(n_sites: usize, index: usize) -> Self {
        let dim = 1usize << n_sites;
        let mut amps = DVector::zeros(dim);
        amps[index] = ONE;
        Self { n_sites, amps }
    }

    pub fn zeros(n_sites: usize) -> Self {
        Self { n_sites, amps: DVector::zeros(1usize << n_sites) }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn get(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n_sites: self.n_sites, amps: &self.amps * s }
    }

    pub fn axpy(&mut self, s: C64, other: &StateVector) {
        self.amps.axpy(s, &other.amps, ONE);
    }

    pub fn sub(&self, other: &StateVector) -> Self {
        Self { n_sites: self.n_sites, amps: &self.amps - &other.amps }
    }

    /// `⟨self|other⟩` without conjugation of either side (bilinear pairing).
    pub fn pairing(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a * b).sum()
    }

    /// Norm of the component in the sector with `down` flipped spins.
    pub fn sector_norm(&self, down: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx.count_ones() as usize == down)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Standard Kronecker product.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `Id ⊗ … ⊗ op2 ⊗ … ⊗ Id` with `op2` in slot `site` (1-based).
pub fn embed_local(op2: &Local, site: usize, n: usize) -> Result<QOperator> {
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    check_sites(n)?;
    let left = DMatrix::<C64>::identity(1 << (site - 1), 1 << (site - 1));
    let right = DMatrix::<C64>::identity(1 << (n - site), 1 << (n - site));
    let local = DMatrix::from_iterator(2, 2, op2.iter().copied());
    let mat = kron(&kron(&left, &local), &right);
    Ok(QOperator { n_sites: n, mat })
}

/// `J^z = ½ Σ σ^z_i`.
pub fn total_spin_z(n: usize) -> Result<QOperator> {
    check_sites(n)?;
    let dim = 1usize << n;
    let diag = DVector::from_iterator(
        dim,
        (0..dim).map(|idx| C64::from((n as f64 - 2.0 * idx.count_ones() as f64) / 2.0)),
    );
    Ok(QOperator { n_sites: n, mat: DMatrix::from_diagonal(&diag) })
}

/// `‖lhs − rhs‖_F / max(1, ‖lhs‖_F, ‖rhs‖_F)`.
pub fn residual(lhs: &QOperator, rhs: &QOperator) -> Result<f64> {
    if lhs.dim() != rhs.dim() {
        return Err(Error::DimensionMismatch { left: lhs.dim(), right: rhs.dim() });
    }
    let diff = (&lhs.mat - &rhs.mat).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(diff / 1f64.max(lhs.frobenius()).max(rhs.frobenius()))
}

/// Same normalisation as [`residual`] for states.
pub fn vector_residual(lhs: &StateVector, rhs: &StateVector) -> f64 {
    let diff = (&lhs.amps - &rhs.amps).norm();
    diff / 1f64.max(lhs.norm()).max(rhs.norm())
}

/// Eigenvalues of a general complex matrix, unordered.
pub fn spectrum(op: &QOperator) -> Result<Vec<C64>> {
    spectrum_of(op.matrix())
}

pub fn spectrum_of(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let dim = m.nrows();
    if dim > EIGEN_DIM_CAP {
        return Err(Error::DimensionCap { n: dim, cap: EIGEN_DIM_CAP });
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), 1e-15, 100_000)
        .ok_or(Error::NonConvergence { residual: f64::INFINITY })?;
    let (_, t) = schur.unpack();
    let mut vals = Vec::with_capacity(dim);
    let mut k = 0;
    while k < dim {
        let sub = if k + 1 < dim { t[(k + 1, k)].norm() } else { 0.0 };
        let scale = t[(k, k)].norm() + if k + 1 < dim { t[(k + 1, k + 1)].norm() } else { 0.0 };
        if k + 1 < dim && sub > 1e-14 * scale.max(1e-300) {
            // unreduced 2x2 block
            let (a, b, cc, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let half_tr = (a + d) / 2.0;
            let disc = ((a - d) / 2.0).powi(2) + b * cc;
            let root = disc.sqrt();
            vals.push(half_tr + root);
            vals.push(half_tr - root);
            k += 2;
        } else {
            vals.push(t[(k, k)]);
            k += 1;
        }
    }
    let trace = m.trace();
    let sum: C64 = vals.iter().sum();
    let fro = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let dev = (sum - trace).norm() / fro.max(1.0);
    if !dev.is_finite() || dev > 1e-8 {
        return Err(Error::NonConvergence { residual: dev });
    }
    Ok(vals)
}

/// Distance from `z` to the nearest entry of `set`, relative to `max(1,|z|)`.
pub fn nearest(z: C64, set: &[C64]) -> Option<(usize, f64)> {
    set.iter()
        .enumerate()
        .map(|(k, w)| (k, (z - w).norm() / z.norm().max(1.0)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Solves `m x = rhs` by LU with partial pivoting.
pub fn solve(m: &DMatrix<C64>, rhs: &DVector<C64>) -> Result<DVector<C64>> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Degenerate("singular linear system".into()))
}

/// Dense determinant by LU.
pub fn det(m: &DMatrix<C64>) -> C64 {
    m.clone().lu().determinant()
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
