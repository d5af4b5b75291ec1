//! Bulk layer: the trigonometric R-matrix, the inhomogeneous monodromy and
//! its co-matrix, the quantum determinant and the domain-wall partition
//! function.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, check_sites, det, Local, QOperator, StateVector, ONE, ZERO};
use crate::scalar::ScalarFns;

/// Anisotropy and inhomogeneities of the bulk chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkParams {
    pub q: C64,
    pub v: Vec<C64>,
}

impl BulkParams {
    pub fn new(q: C64, v: Vec<C64>) -> Result<Self> {
        let p = Self { q, v };
        p.validate()?;
        Ok(p)
    }

    /// Homogeneous chain `v_i = 1`.
    pub fn homogeneous(q: C64, n: usize) -> Result<Self> {
        Self::new(q, vec![ONE; n])
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn delta(&self) -> C64 {
        (self.q + self.q.inv()) / 2.0
    }

    pub fn fns(&self) -> ScalarFns {
        ScalarFns::new(self.q).expect("validated q")
    }

    /// Genericity conditions: `q` away from low-order roots of unity and the
    /// inhomogeneities away from `q^{±1}, q^{±2}` ratios. Equal inhomogeneities
    /// are allowed (homogeneous chain).
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        check_sites(n)?;
        ScalarFns::new(self.q)?;
        for k in 1..=(2 * n as i32 + 4) {
            if (self.q.powi(k) - ONE).norm() <= 1e-6 {
                return Err(Error::Inadmissible(format!("q^{k} = 1 within 1e-6")));
            }
        }
        for (i, vi) in self.v.iter().enumerate() {
            if vi.norm() < 1e-12 {
                return Err(Error::Inadmissible(format!("v_{} = 0", i + 1)));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let ratio = self.v[i] / self.v[j];
                for m in [-2, -1, 1, 2] {
                    if (ratio - self.q.powi(m)).norm() <= 1e-8 {
                        return Err(Error::Inadmissible(format!(
                            "v_{}/v_{} = q^{m}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The 4x4 R-matrix in the basis `|11⟩,|12⟩,|21⟩,|22⟩`.
pub fn build_r(u: C64, fns: &ScalarFns) -> Matrix4<C64> {
    let (bq, b1) = (fns.b(fns.q() * u), fns.b(u));
    #[rustfmt::skip]
    let r = Matrix4::new(
        bq,   ZERO, ZERO, ZERO,
        ZERO, b1,   ONE,  ZERO,
        ZERO, ONE,  b1,   ZERO,
        ZERO, ZERO, ZERO, bq,
    );
    r
}

/// Auxiliary-space entries of `R_{ak}(u)` as 2x2 operators on site `k`:
/// `[[b(q^{(1+σ^z)/2}u), σ^-], [σ^+, b(q^{(1-σ^z)/2}u)]]`.
pub fn r_blocks(u: C64, fns: &ScalarFns) -> [[Local; 2]; 2] {
    let (bq, b1) = (fns.b(fns.q() * u), fns.b(u));
    let up = kernel::proj_up();
    let dn = kernel::proj_down();
    [
        [up * bq + dn * b1, kernel::sigma_minus()],
        [kernel::sigma_plus(), up * b1 + dn * bq],
    ]
}

fn dense4(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| m[(r, c)])
}

/// Embeds a two-site operator at positions `(s1, s2)` (0-based, `s1 ≠ s2`) of
/// `n` two-dimensional spaces.
pub fn embed_pair(m: &Matrix4<C64>, s1: usize, s2: usize, n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let bit = |idx: usize, s: usize| (idx >> (n - 1 - s)) & 1;
    DMatrix::from_fn(dim, dim, |row, col| {
        let rest_mask = !((1usize << (n - 1 - s1)) | (1usize << (n - 1 - s2)));
        if row & rest_mask != col & rest_mask {
            return ZERO;
        }
        let r = 2 * bit(row, s1) + bit(row, s2);
        let c = 2 * bit(col, s1) + bit(col, s2);
        m[(r, c)]
    })
}

/// Frobenius residual of the Yang–Baxter equation
/// `R_ab(ua/ub) R_ac(ua/uc) R_bc(ub/uc) = R_bc(ub/uc) R_ac(ua/uc) R_ab(ua/ub)`.
pub fn ybe_residual(ua: C64, ub: C64, uc: C64, fns: &ScalarFns) -> f64 {
    let rab = embed_pair(&build_r(ua / ub, fns), 0, 1, 3);
    let rac = embed_pair(&build_r(ua / uc, fns), 0, 2, 3);
    let rbc = embed_pair(&build_r(ub / uc, fns), 1, 2, 3);
    let lhs = &rab * &rac * &rbc;
    let rhs = &rbc * &rac * &rab;
    dense_residual(&lhs, &rhs)
}

pub(crate) fn dense_residual(lhs: &DMatrix<C64>, rhs: &DMatrix<C64>) -> f64 {
    (lhs - rhs).norm() / 1f64.max(lhs.norm()).max(rhs.norm())
}

/// Multiplies `m` on the right by the local operator `op` acting on `site`
/// (1-based) without forming the embedding.
pub(crate) fn right_mul_local(m: &DMatrix<C64>, op: &Local, site: usize, n: usize) -> DMatrix<C64> {
    let shift = n - site;
    let mask = 1usize << shift;
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for col in 0..m.ncols() {
        let bj = (col >> shift) & 1;
        let c0 = col & !mask;
        let c1 = col | mask;
        let (a0, a1) = (op[(0, bj)], op[(1, bj)]);
        for row in 0..m.nrows() {
            out[(row, col)] = m[(row, c0)] * a0 + m[(row, c1)] * a1;
        }
    }
    out
}

/// A 2x2 matrix in auxiliary space whose entries are quantum operators.
#[derive(Clone, Debug)]
pub struct OpBlock {
    pub e: [[QOperator; 2]; 2],
}

impl OpBlock {
    pub fn identity(n: usize) -> Self {
        let id = QOperator::identity(n);
        let z = QOperator::zeros(n);
        Self { e: [[id.clone(), z.clone()], [z, id]] }
    }

    pub fn n_sites(&self) -> usize {
        self.e[0][0].n_sites()
    }

    /// Right multiplication by `R_{a,site}(u)`.
    pub fn mul_r(&self, u: C64, site: usize, fns: &ScalarFns) -> Self {
        let n = self.n_sites();
        let r = r_blocks(u, fns);
        let entry = |i: usize, j: usize| {
            let t0 = right_mul_local(self.e[i][0].matrix(), &r[0][j], site, n);
            let t1 = right_mul_local(self.e[i][1].matrix(), &r[1][j], site, n);
            QOperator::from_matrix(n, t0 + t1).expect("dimension preserved")
        };
        Self { e: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]] }
    }

    /// Right multiplication by a scalar 2x2 matrix.
    pub fn mul_scalar_block(&self, k: &[[C64; 2]; 2]) -> Self {
        let entry = |i: usize, j: usize| {
            kernel::combine(&[(k[0][j], &self.e[i][0]), (k[1][j], &self.e[i][1])])
        };
        Self { e: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]] }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { e: self.e.clone().map(|row| row.map(|op| op.scale(s))) }
    }

    /// Dense `2·2^n` matrix with the auxiliary index most significant.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.e[0][0].dim();
        let mut out = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..2 {
            for j in 0..2 {
                out.view_mut((i * d, j * d), (d, d)).copy_from(self.e[i][j].matrix());
            }
        }
        out
    }
}

/// One-row monodromy `L(u)` with entries `l_ij(u)`.
#[derive(Clone, Debug)]
pub struct Monodromy(pub OpBlock);

impl Monodromy {
    pub fn l11(&self) -> &QOperator {
        &self.0.e[0][0]
    }
    pub fn l12(&self) -> &QOperator {
        &self.0.e[0][1]
    }
    pub fn l21(&self) -> &QOperator {
        &self.0.e[1][0]
    }
    pub fn l22(&self) -> &QOperator {
        &self.0.e[1][1]
    }
}

/// `L_a(u) = R_{a1}(u/v_1) … R_{aN}(u/v_N)`.
pub fn build_monodromy(u: C64, p: &BulkParams) -> Result<Monodromy> {
    let n = p.n();
    check_sites(n)?;
    let fns = p.fns();
    let mut block = OpBlock::identity(n);
    for (k, vk) in p.v.iter().enumerate() {
        block = block.mul_r(u / vk, k + 1, &fns);
    }
    Ok(Monodromy(block))
}

/// Reversed product `(-1)^N R_{aN}(u v_N) … R_{a1}(u v_1)`, which equals the
/// co-matrix `L̂` evaluated at `q^{-2} u^{-1}`.
pub fn build_comonodromy(u: C64, p: &BulkParams) -> Result<OpBlock> {
    let n = p.n();
    check_sites(n)?;
    let sign = if n.is_multiple_of(2) { ONE } else { -ONE };
    Ok(reversed_product(OpBlock::identity(n), u, p).scale(sign))
}

/// `block · R_{aN}(u v_N) … R_{a1}(u v_1)`.
pub(crate) fn reversed_product(mut block: OpBlock, u: C64, p: &BulkParams) -> OpBlock {
    let fns = p.fns();
    for (k, vk) in p.v.iter().enumerate().rev() {
        block = block.mul_r(u * vk, k + 1, &fns);
    }
    block
}

/// Co-matrix from the transposition formula
/// `L̂(x) = [[l22(qx), -l12(qx)], [-l21(qx), l11(qx)]]`.
pub fn comonodromy_from_transpose(x: C64, p: &BulkParams) -> Result<OpBlock> {
    let l = build_monodromy(p.q * x, p)?;
    Ok(OpBlock {
        e: [[l.l22().clone(), -l.l12()], [-l.l21(), l.l11().clone()]],
    })
}

/// `Det_q L(u) = l11(qu) l22(u) − l12(qu) l21(u)` as an operator.
pub fn quantum_determinant_operator(u: C64, p: &BulkParams) -> Result<QOperator> {
    let lq = build_monodromy(p.q * u, p)?;
    let l = build_monodromy(u, p)?;
    Ok(&(lq.l11() * l.l22()) - &(lq.l12() * l.l21()))
}

/// Scalar value of the quantum determinant; fails if the operator is not
/// proportional to the identity.
pub fn quantum_determinant(u: C64, p: &BulkParams) -> Result<C64> {
    let op = quantum_determinant_operator(u, p)?;
    op.as_scalar(1e-10)
        .ok_or_else(|| Error::Degenerate("quantum determinant is not central".into()))
}

/// Closed form `Π_i b(q²u/v_i) b(u/v_i)`.
pub fn quantum_determinant_product(u: C64, p: &BulkParams) -> C64 {
    let fns = p.fns();
    let q = p.q;
    p.v.iter().fold(ONE, |acc, v| acc * fns.b(q * q * u / v) * fns.b(u / v))
}

/// `(λ1(u), λ2(u)) = (Π b(qu/v_i), Π b(u/v_i))`.
pub fn vacuum_lambdas(u: C64, p: &BulkParams) -> (C64, C64) {
    let fns = p.fns();
    p.v.iter().fold((ONE, ONE), |(l1, l2), v| {
        (l1 * fns.b(p.q * u / v), l2 * fns.b(u / v))
    })
}

/// Domain-wall partition function (Izergin determinant) `Z(ū|v̄)`.
pub fn izergin_z(us: &[C64], p: &BulkParams) -> Result<C64> {
    let n = p.n();
    if us.len() != n {
        return Err(Error::Inadmissible(format!("expected {n} spectral parameters, got {}", us.len())));
    }
    let fns = p.fns();
    let q = p.q;
    for i in 0..n {
        for j in (i + 1)..n {
            if fns.b(us[i] / us[j]).norm() < 1e-12 {
                return Err(Error::Pole(format!("coincident u_{} and u_{}", i + 1, j + 1)));
            }
        }
    }
    let a = |x: C64, y: C64| ONE / (fns.b(x / y) * fns.b(q * x / y));
    let m = DMatrix::from_fn(n, n, |i, j| a(us[i], p.v[j]));
    let mut den = ONE;
    for &x in us {
        for &y in &p.v {
            den *= a(x, y);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            den *= fns.b(us[i] / us[j]) * fns.b(p.v[j] / p.v[i]);
        }
    }
    let z = det(&m) / den;
    if !z.is_finite() {
        return Err(Error::Pole("Izergin determinant denominator vanishes".into()));
    }
    Ok(z)
}

/// `l12(u_1) … l12(u_k) |Ω⟩` by sequential application.
pub fn l12_chain(us: &[C64], p: &BulkParams) -> Result<StateVector> {
    let mut v = StateVector::basis(p.n(), 0);
    for &u in us.iter().rev() {
        v = build_monodromy(u, p)?.l12().apply(&v);
    }
    Ok(v)
}

/// Residual of `R_ab(u/v) L_a(u) L_b(v) = L_b(v) L_a(u) R_ab(u/v)` on
/// `C^2 ⊗ C^2 ⊗ H`.
pub fn rll_residual(u: C64, v: C64, p: &BulkParams) -> Result<f64> {
    let lu = build_monodromy(u, p)?;
    let lv = build_monodromy(v, p)?;
    let fns = p.fns();
    let d = 1usize << p.n();
    let id2 = DMatrix::<C64>::identity(2, 2);
    let unit = |i: usize, j: usize| {
        let mut e = DMatrix::<C64>::zeros(2, 2);
        e[(i, j)] = ONE;
        e
    };
    let mut la = DMatrix::<C64>::zeros(4 * d, 4 * d);
    let mut lb = DMatrix::<C64>::zeros(4 * d, 4 * d);
    for i in 0..2 {
        for j in 0..2 {
            la += kernel::kron(&kernel::kron(&unit(i, j), &id2), lu.0.e[i][j].matrix());
            lb += kernel::kron(&kernel::kron(&id2, &unit(i, j)), lv.0.e[i][j].matrix());
        }
    }
    let r = kernel::kron(&dense4(&build_r(u / v, &fns)), &DMatrix::identity(d, d));
    let lhs = &r * &la * &lb;
    let rhs = &lb * &la * &r;
    Ok(dense_residual(&lhs, &rhs))
}

/// The four exchange relations between `l_ij` and `l12` used to order
/// products; returns residuals in the order (l12 l12, l11 l12, l22 l12, l21 l12).
pub fn l_relation_residuals(u: C64, v: C64, p: &BulkParams) -> Result<[f64; 4]> {
    let fns = p.fns();
    let q = p.q;
    let a = build_monodromy(u, p)?;
    let b = build_monodromy(v, p)?;
    let res = |x: QOperator, y: QOperator| kernel::residual(&x, &y).expect("same size");

    let r12 = res(a.l12() * b.l12(), b.l12() * a.l12());
    let r11 = res(
        a.l11() * b.l12(),
        kernel::combine(&[
            (fns.b(q * v / u) / fns.b(v / u), &(b.l12() * a.l11())),
            (ONE / fns.b(u / v), &(a.l12() * b.l11())),
        ]),
    );
    let r22 = res(
        a.l22() * b.l12(),
        kernel::combine(&[
            (fns.b(q * u / v) / fns.b(u / v), &(b.l12() * a.l22())),
            (ONE / fns.b(v / u), &(a.l12() * b.l22())),
        ]),
    );
    let inv = ONE / fns.b(u / v);
    let r21 = res(
        a.l21() * b.l12(),
        kernel::combine(&[
            (ONE, &(b.l12() * a.l21())),
            (inv, &(b.l11() * a.l22())),
            (-inv, &(a.l11() * b.l22())),
        ]),
    );
    Ok([r12, r11, r22, r21])
}

/// Lagrange form of `l12` on a two-site chain:
/// `l12(u) = b(u/u2)/b(u1/u2) l12(u1) + b(u/u1)/b(u2/u1) l12(u2)`.
pub fn lagrange_residual(u: C64, u1: C64, u2: C64, p: &BulkParams) -> Result<f64> {
    if p.n() != 2 {
        return Err(Error::Inadmissible("Lagrange form of l12 holds for two sites".into()));
    }
    let fns = p.fns();
    let l = build_monodromy(u, p)?;
    let l1 = build_monodromy(u1, p)?;
    let l2 = build_monodromy(u2, p)?;
    let rhs = kernel::combine(&[
        (fns.b(u / u2) / fns.b(u1 / u2), l1.l12()),
        (fns.b(u / u1) / fns.b(u2 / u1), l2.l12()),
    ]);
    kernel::residual(l.l12(), &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::c;

    fn q() -> C64 {
        C64::from_polar(1.3, 0.21)
    }

    fn params(n: usize) -> BulkParams {
        let v = (0..n).map(|k| C64::from_polar(0.8 + 0.15 * k as f64, 0.4 * k as f64 - 0.3)).collect();
        BulkParams::new(q(), v).unwrap()
    }

    #[test]
    fn r_at_one_is_permutation() {
        let fns = ScalarFns::new(q()).unwrap();
        let r = build_r(ONE, &fns);
        #[rustfmt::skip]
        let perm = Matrix4::new(
            ONE, ZERO, ZERO, ZERO,
            ZERO, ZERO, ONE, ZERO,
            ZERO, ONE, ZERO, ZERO,
            ZERO, ZERO, ZERO, ONE,
        );
        assert!((r - perm).norm() < 1e-14);
    }

    #[test]
    fn r_entries() {
        let fns = ScalarFns::new(q()).unwrap();
        let u = c(0.7, 0.9);
        let r = build_r(u, &fns);
        assert_eq!(r[(0, 0)], r[(3, 3)]);
        assert_eq!(r[(0, 0)], fns.b(q() * u));
        let r = build_r(q().inv(), &fns);
        assert!((r[(1, 1)] + ONE).norm() < 1e-14);
    }

    #[test]
    fn r_is_symmetric_under_factor_swap() {
        let fns = ScalarFns::new(q()).unwrap();
        let r = dense4(&build_r(c(1.4, -0.2), &fns));
        let swapped = embed_pair(&build_r(c(1.4, -0.2), &fns), 1, 0, 2);
        assert!(dense_residual(&r, &swapped) < 1e-15);
    }

    #[test]
    fn ybe_degenerate_ratio() {
        let fns = ScalarFns::new(q()).unwrap();
        let u = c(0.6, 0.8);
        assert!(ybe_residual(u, u, c(1.5, 0.1), &fns) < 1e-12);
        assert!(ybe_residual(u, c(1.2, -0.7), c(-0.4, 0.5), &fns) < 1e-12);
    }

    #[test]
    fn single_site_monodromy_is_r() {
        let p = BulkParams::new(q(), vec![ONE]).unwrap();
        let fns = p.fns();
        let u = c(1.1, 0.3);
        let l = build_monodromy(u, &p).unwrap();
        assert_eq!(l.l11().get(0, 0), fns.b(q() * u));
        assert_eq!(l.l11().get(1, 1), fns.b(u));
        // l21 carries σ^+
        assert_eq!(l.l21().get(0, 1), ONE);
        assert_eq!(l.l21().get(1, 0), ZERO);
    }

    #[test]
    fn vacuum_actions_of_l() {
        let p = params(3);
        let u = c(0.9, -0.6);
        let l = build_monodromy(u, &p).unwrap();
        let om = StateVector::basis(3, 0);
        let (l1, l2) = vacuum_lambdas(u, &p);
        assert!(kernel::vector_residual(&l.l11().apply(&om), &om.scale(l1)) < 1e-12);
        assert!(kernel::vector_residual(&l.l22().apply(&om), &om.scale(l2)) < 1e-12);
        assert!(l.l21().apply(&om).norm() < 1e-14);
        let (_, l2) = vacuum_lambdas(p.v[0], &p);
        assert_eq!(l2, ZERO);
        let empty = BulkParams::new(q(), vec![]).unwrap();
        assert_eq!(vacuum_lambdas(u, &empty), (ONE, ONE));
    }

    #[test]
    fn comonodromy_single_site() {
        let p = BulkParams::new(q(), vec![ONE]).unwrap();
        let u = c(0.8, 0.5);
        let co = build_comonodromy(u, &p).unwrap();
        let fns = p.fns();
        let r = r_blocks(u, &fns);
        for i in 0..2 {
            for j in 0..2 {
                let want = kernel::embed_local(&(r[i][j] * -ONE), 1, 1).unwrap();
                assert!(kernel::residual(&co.e[i][j], &want).unwrap() < 1e-14);
            }
        }
    }

    #[test]
    fn comonodromy_matches_transpose_form() {
        let p = params(2);
        let u = c(1.2, 0.4);
        let co = build_comonodromy(u, &p).unwrap();
        let x = (p.q * p.q * u).inv();
        let tr = comonodromy_from_transpose(x, &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(kernel::residual(&co.e[i][j], &tr.e[i][j]).unwrap() < 1e-11);
            }
        }
    }

    #[test]
    fn inverse_relation() {
        // L(w) L̂(w q^{-2}) = Det_q L(w/q) · Id
        let p = params(2);
        let w = c(0.6, 1.1);
        let l = build_monodromy(w, &p).unwrap();
        let co = build_comonodromy(w.inv(), &p).unwrap();
        let det = quantum_determinant(w / p.q, &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let prod = &(&l.0.e[i][0] * &co.e[0][j]) + &(&l.0.e[i][1] * &co.e[1][j]);
                let want = if i == j { QOperator::identity(2).scale(det) } else { QOperator::zeros(2) };
                assert!(kernel::residual(&prod, &want).unwrap() < 1e-11);
            }
        }
    }

    #[test]
    fn quantum_determinant_examples() {
        let p = BulkParams::new(q(), vec![ONE]).unwrap();
        let fns = p.fns();
        let u = c(0.7, 0.2);
        let d = quantum_determinant(u, &p).unwrap();
        let want = fns.b(q() * q() * u) * fns.b(u);
        assert!((d - want).norm() / want.norm() < 1e-12);
        let p3 = params(3);
        assert!(quantum_determinant(p3.v[0], &p3).unwrap().norm() < 1e-12);
        let d3 = quantum_determinant(u, &p3).unwrap();
        let want = quantum_determinant_product(u, &p3);
        assert!((d3 - want).norm() / want.norm() < 1e-10);
    }

    #[test]
    fn izergin_single_site_is_one() {
        let p = BulkParams::new(q(), vec![c(0.9, 0.3)]).unwrap();
        let z = izergin_z(&[c(1.3, -0.4)], &p).unwrap();
        assert!((z - ONE).norm() < 1e-14);
    }

    #[test]
    fn izergin_matches_l12_chain() {
        let p = params(2);
        let us = [c(1.1, 0.5), c(-0.6, 0.9)];
        let v = l12_chain(&us, &p).unwrap();
        let z = izergin_z(&us, &p).unwrap();
        assert!((v.get(3) - z).norm() / z.norm() < 1e-10);
        let v3 = l12_chain(&[c(0.5, -1.0), us[0], us[1]], &p).unwrap();
        assert!(v3.norm() < 1e-13);
    }

    #[test]
    fn izergin_rejects_coincident() {
        let p = params(2);
        let u = c(1.1, 0.5);
        assert!(matches!(izergin_z(&[u, u], &p), Err(Error::Pole(_))));
    }

    #[test]
    fn validation() {
        assert!(BulkParams::new(c(1.0, 0.0), vec![ONE]).is_err());
        let i = C64::new(0.0, 1.0);
        assert!(BulkParams::new(i, vec![ONE]).is_err());
        assert!(BulkParams::new(q(), vec![ONE, q()]).is_err());
        assert!(BulkParams::homogeneous(q(), 4).is_ok());
    }

    #[test]
    fn lagrange_two_sites() {
        let p = params(2);
        let r = lagrange_residual(c(0.3, 1.7), c(1.1, 0.5), c(-0.6, 0.9), &p).unwrap();
        assert!(r < 1e-11);
    }
}
