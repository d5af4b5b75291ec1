//! Reflection layer: K-matrices, the double-row monodromy and its entries
//! `A, B, C, D`, transfer matrices, the Hamiltonian, and the shifted operators
//! that bring the triangular transfer matrices into diagonal form.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, combine, QOperator, ONE, ZERO};
use crate::scalar::ScalarFns;
use crate::vertex::{self, build_monodromy, build_r, BulkParams, OpBlock};

/// Right boundary `K^-`: `k^-(u) = ν_- u + ν_+ u^{-1}` on the diagonal,
/// `τ c(u)` above and `τ̃ c(u)` below.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RightBoundary {
    pub nu_plus: C64,
    pub nu_minus: C64,
    pub tau: C64,
    pub tau_tilde: C64,
}

impl RightBoundary {
    pub fn k(&self, u: C64) -> C64 {
        self.nu_minus * u + self.nu_plus * u.inv()
    }

    pub fn matrix(&self, u: C64, fns: &ScalarFns) -> [[C64; 2]; 2] {
        let c = fns.c(u);
        [[self.k(u), self.tau * c], [self.tau_tilde * c, self.k(u.inv())]]
    }
}

/// Left (dual) boundary `K^+`: `k^+(u) = ε_+ u + ε_- u^{-1}`, with `κ̃ c(qu)`
/// above and `κ c(qu)` below the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeftBoundary {
    pub eps_plus: C64,
    pub eps_minus: C64,
    pub kappa: C64,
    pub kappa_tilde: C64,
}

impl LeftBoundary {
    pub fn k(&self, u: C64) -> C64 {
        self.eps_plus * u + self.eps_minus * u.inv()
    }

    pub fn matrix(&self, u: C64, fns: &ScalarFns) -> [[C64; 2]; 2] {
        let q = fns.q();
        let cq = fns.c(q * u);
        [[self.k(q * u), self.kappa_tilde * cq], [self.kappa * cq, self.k(fns.cross(u))]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub bulk: BulkParams,
    pub left: LeftBoundary,
    pub right: RightBoundary,
}

/// Which off-diagonal boundary fields enter the transfer matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum TransferCase {
    /// `κ = κ̃ = 0`
    Diag,
    /// `κ = 0`
    UpperUpper,
    /// `κ̃ = 0`
    LowerUpper,
    /// both `κ` and `κ̃`; not covered by the Bethe ansatz
    GeneralTriangular,
}

impl TransferCase {
    pub const ANSATZ: [TransferCase; 3] =
        [TransferCase::Diag, TransferCase::UpperUpper, TransferCase::LowerUpper];

    pub fn as_str(self) -> &'static str {
        match self {
            TransferCase::Diag => "diag",
            TransferCase::UpperUpper => "upper-upper",
            TransferCase::LowerUpper => "lower-upper",
            TransferCase::GeneralTriangular => "general-triangular",
        }
    }
}

impl fmt::Display for TransferCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransferCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "diag" => Ok(TransferCase::Diag),
            "upper-upper" => Ok(TransferCase::UpperUpper),
            "lower-upper" => Ok(TransferCase::LowerUpper),
            "general-triangular" => Ok(TransferCase::GeneralTriangular),
            other => Err(Error::InvalidConfig { path: "case".into(), msg: format!("unknown case `{other}`") }),
        }
    }
}

impl ModelParams {
    pub fn n(&self) -> usize {
        self.bulk.n()
    }

    pub fn fns(&self) -> ScalarFns {
        self.bulk.fns()
    }

    pub fn q(&self) -> C64 {
        self.bulk.q
    }

    /// Copy with the boundary fields not allowed by `case` set to zero
    /// (`τ̃` is always cleared).
    pub fn restricted(&self, case: TransferCase) -> Self {
        let mut p = self.clone();
        p.right.tau_tilde = ZERO;
        match case {
            TransferCase::Diag => {
                p.left.kappa = ZERO;
                p.left.kappa_tilde = ZERO;
            }
            TransferCase::UpperUpper => p.left.kappa = ZERO,
            TransferCase::LowerUpper => p.left.kappa_tilde = ZERO,
            TransferCase::GeneralTriangular => {}
        }
        p
    }

    pub fn check_case(&self, case: TransferCase) -> Result<()> {
        let mismatch = |reason: &str| {
            Err(Error::CaseMismatch { case: case.to_string(), reason: reason.to_string() })
        };
        if self.right.tau_tilde != ZERO {
            return mismatch("tau_tilde must vanish for triangular right boundaries");
        }
        match case {
            TransferCase::Diag if self.left.kappa != ZERO || self.left.kappa_tilde != ZERO => {
                mismatch("diag requires kappa = kappa_tilde = 0")
            }
            TransferCase::UpperUpper if self.left.kappa != ZERO => mismatch("upper-upper requires kappa = 0"),
            TransferCase::LowerUpper if self.left.kappa_tilde != ZERO => {
                mismatch("lower-upper requires kappa_tilde = 0")
            }
            _ => Ok(()),
        }
    }
}

fn dense2(k: &[[C64; 2]; 2]) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |r, c| k[r][c])
}

fn dense4(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| m[(r, c)])
}

/// Residual of the reflection equation
/// `R(u1/u2) K_a(u1) R(u1 u2) K_b(u2) = K_b(u2) R(u1 u2) K_a(u1) R(u1/u2)`.
pub fn re_residual(u1: C64, u2: C64, right: &RightBoundary, fns: &ScalarFns) -> f64 {
    let id = DMatrix::<C64>::identity(2, 2);
    let ka = kernel::kron(&dense2(&right.matrix(u1, fns)), &id);
    let kb = kernel::kron(&id, &dense2(&right.matrix(u2, fns)));
    let r1 = dense4(&build_r(u1 / u2, fns));
    let r2 = dense4(&build_r(u1 * u2, fns));
    let lhs = &r1 * &ka * &r2 * &kb;
    let rhs = &kb * &r2 * &ka * &r1;
    vertex::dense_residual(&lhs, &rhs)
}

/// Residual of the dual reflection equation
/// `R(u2/u1) K⁺_a(u1) R(q^{-2}/(u1 u2)) K⁺_b(u2) = K⁺_b(u2) R(q^{-2}/(u1 u2)) K⁺_a(u1) R(u2/u1)`.
pub fn dre_residual(u1: C64, u2: C64, left: &LeftBoundary, fns: &ScalarFns) -> f64 {
    let q = fns.q();
    let id = DMatrix::<C64>::identity(2, 2);
    let ka = kernel::kron(&dense2(&left.matrix(u1, fns)), &id);
    let kb = kernel::kron(&id, &dense2(&left.matrix(u2, fns)));
    let r1 = dense4(&build_r(u2 / u1, fns));
    let r2 = dense4(&build_r((q * q * u1 * u2).inv(), fns));
    let lhs = &r1 * &ka * &r2 * &kb;
    let rhs = &kb * &r2 * &ka * &r1;
    vertex::dense_residual(&lhs, &rhs)
}

/// Entries of the double-row monodromy at one spectral point. `d` is the
/// dressed entry: the raw (2,2) block minus `a / b(qu²)`.
#[derive(Clone, Debug)]
pub struct DoubleRowEntries {
    pub a: QOperator,
    pub b: QOperator,
    pub c: QOperator,
    pub d: QOperator,
    pub at_point: C64,
}

/// Two-sided product `L(u) K^-(u) R_{aN}(u v_N) … R_{a1}(u v_1)` without the
/// triangularity requirement.
pub(crate) fn double_row_block(u: C64, p: &ModelParams) -> Result<OpBlock> {
    let fns = p.fns();
    let l = build_monodromy(u, &p.bulk)?;
    let dressed = l.0.mul_scalar_block(&p.right.matrix(u, &fns));
    Ok(vertex::reversed_product(dressed, u, &p.bulk))
}

fn split_entries(block: OpBlock, u: C64, fns: &ScalarFns) -> Result<DoubleRowEntries> {
    let bq = fns.b(fns.q() * u * u);
    if bq.norm() < 1e-12 {
        return Err(Error::Pole("b(qu^2) vanishes".into()));
    }
    let [[a, b], [c, k22]] = block.e;
    let d = combine(&[(ONE, &k22), (-bq.inv(), &a)]);
    Ok(DoubleRowEntries { a, b, c, d, at_point: u })
}

/// Double-row entries for a triangular right boundary (`τ̃ = 0`).
pub fn build_double_row(u: C64, p: &ModelParams) -> Result<DoubleRowEntries> {
    if p.right.tau_tilde != ZERO {
        return Err(Error::CaseMismatch {
            case: "double-row".into(),
            reason: "tau_tilde must vanish".into(),
        });
    }
    build_double_row_unchecked(u, p)
}

/// Same as [`build_double_row`] but accepts `τ̃ ≠ 0`.
pub fn build_double_row_unchecked(u: C64, p: &ModelParams) -> Result<DoubleRowEntries> {
    split_entries(double_row_block(u, p)?, u, &p.fns())
}

/// Double-row entries assembled from products of `l_ij(u)` and
/// `l_ij(q^{-1}u^{-1})`; an independent route to [`build_double_row`].
pub fn double_row_closed_form(u: C64, p: &ModelParams) -> Result<DoubleRowEntries> {
    if p.right.tau_tilde != ZERO {
        return Err(Error::CaseMismatch { case: "closed-form".into(), reason: "tau_tilde must vanish".into() });
    }
    let fns = p.fns();
    let q = fns.q();
    let w = fns.cross(u);
    let l = build_monodromy(u, &p.bulk)?;
    let lw = build_monodromy(w, &p.bulk)?;
    let sign = if p.n().is_multiple_of(2) { ONE } else { -ONE };
    let km = |x: C64| p.right.k(x);
    let tau = p.right.tau;
    let cu = fns.c(u);
    let phi_w = fns.phi(w);

    let a = combine(&[
        (sign * km(u), &(l.l11() * lw.l22())),
        (-sign * km(u.inv()), &(l.l12() * lw.l21())),
        (sign * tau * cu / fns.b(q * u * u), &(l.l21() * lw.l11())),
        (-sign * tau * cu * fns.phi(u), &(lw.l21() * l.l11())),
    ]);
    let b = combine(&[
        (sign * phi_w * km(w), &(l.l12() * lw.l11())),
        (-sign * phi_w * km(u), &(lw.l12() * l.l11())),
        (sign * tau * cu, &(l.l11() * lw.l11())),
    ]);
    let c = combine(&[
        (sign * km(u), &(l.l21() * lw.l22())),
        (-sign * km(u.inv()), &(l.l22() * lw.l21())),
        (-sign * tau * cu, &(l.l21() * lw.l21())),
    ]);
    let cw = fns.c(w);
    let d = combine(&[
        (sign * phi_w * km(w), &(lw.l11() * l.l22())),
        (-sign * phi_w * km(q * u), &(lw.l12() * l.l21())),
        (sign * tau * cw * phi_w / fns.b(q.inv() * u.inv() * u.inv()), &(lw.l21() * l.l11())),
        (-sign * tau * cw * phi_w * phi_w, &(l.l21() * lw.l11())),
    ]);
    Ok(DoubleRowEntries { a, b, c, d, at_point: u })
}

/// `t(u) = φ(u)k⁺(u)A + k⁺(q^{-1}u^{-1})D + c(qu)(κB + κ̃C)` from given entries.
pub fn transfer_from_entries(e: &DoubleRowEntries, p: &ModelParams) -> QOperator {
    let fns = p.fns();
    let u = e.at_point;
    let cq = fns.c(fns.q() * u);
    combine(&[
        (fns.phi(u) * p.left.k(u), &e.a),
        (p.left.k(fns.cross(u)), &e.d),
        (cq * p.left.kappa, &e.b),
        (cq * p.left.kappa_tilde, &e.c),
    ])
}

/// Transfer matrix for one of the triangular cases.
pub fn build_transfer(u: C64, p: &ModelParams, case: TransferCase) -> Result<QOperator> {
    p.check_case(case)?;
    Ok(transfer_from_entries(&build_double_row(u, p)?, p))
}

/// `tr_a K⁺_a(u) K_a(u)` by explicit trace, for any boundary fields.
pub fn transfer_trace_form(u: C64, p: &ModelParams) -> Result<QOperator> {
    let fns = p.fns();
    let k = double_row_block(u, p)?;
    let kp = p.left.matrix(u, &fns);
    Ok(combine(&[
        (kp[0][0], &k.e[0][0]),
        (kp[0][1], &k.e[1][0]),
        (kp[1][0], &k.e[0][1]),
        (kp[1][1], &k.e[1][1]),
    ]))
}

/// Couplings of the spin-chain Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub eps: C64,
    pub kappa_minus: C64,
    pub kappa_plus: C64,
    pub delta: C64,
    pub nu: C64,
    pub tau_minus: C64,
    pub tau_plus: C64,
}

/// Hamiltonian couplings from K-matrix parameters. Note the crossed
/// assignment `τ^- ∝ τ̃`, `τ^+ ∝ τ`.
pub fn map_boundary_params(left: &LeftBoundary, right: &RightBoundary, q: C64) -> Result<HamiltonianParams> {
    let qq = q - q.inv();
    let es = left.eps_plus + left.eps_minus;
    let ns = right.nu_plus + right.nu_minus;
    if es.norm() < 1e-12 {
        return Err(Error::Pole("eps_plus + eps_minus vanishes".into()));
    }
    if ns.norm() < 1e-12 {
        return Err(Error::Pole("nu_plus + nu_minus vanishes".into()));
    }
    Ok(HamiltonianParams {
        eps: qq / 2.0 * (left.eps_plus - left.eps_minus) / es,
        kappa_minus: 2.0 * qq / es * left.kappa,
        kappa_plus: 2.0 * qq / es * left.kappa_tilde,
        delta: (q + q.inv()) / 2.0,
        nu: qq / 2.0 * (right.nu_minus - right.nu_plus) / ns,
        tau_minus: 2.0 * qq / ns * right.tau_tilde,
        tau_plus: 2.0 * qq / ns * right.tau,
    })
}

/// Explicit open-chain Hamiltonian with boundary fields on sites 1 and N.
pub fn build_hamiltonian_direct(n: usize, h: &HamiltonianParams) -> Result<QOperator> {
    if n == 0 {
        return Err(Error::Inadmissible("Hamiltonian needs at least one site".into()));
    }
    let e = |op: &kernel::Local, site: usize| kernel::embed_local(op, site, n);
    let (sz, sp, sm) = (kernel::sigma_z(), kernel::sigma_plus(), kernel::sigma_minus());
    let (sx, sy) = (kernel::sigma_x(), kernel::sigma_y());
    let mut terms: Vec<(C64, QOperator)> = vec![
        (h.eps, e(&sz, 1)?),
        (h.kappa_minus, e(&sm, 1)?),
        (h.kappa_plus, e(&sp, 1)?),
        (h.nu, e(&sz, n)?),
        (h.tau_minus, e(&sm, n)?),
        (h.tau_plus, e(&sp, n)?),
    ];
    for k in 1..n {
        terms.push((ONE, &e(&sx, k)? * &e(&sx, k + 1)?));
        terms.push((ONE, &e(&sy, k)? * &e(&sy, k + 1)?));
        terms.push((h.delta, &e(&sz, k)? * &e(&sz, k + 1)?));
    }
    let refs: Vec<(C64, &QOperator)> = terms.iter().map(|(c, op)| (*c, op)).collect();
    Ok(combine(&refs))
}

/// Constant subtracted from the logarithmic derivative:
/// `N(q+q^{-1})/2 + (q-q^{-1})²/(2(q+q^{-1}))`.
pub fn hamiltonian_shift(n: usize, q: C64) -> C64 {
    let (s, d) = (q + q.inv(), q - q.inv());
    n as f64 * s / 2.0 + d * d / (2.0 * s)
}

/// `H = (q-q^{-1})/2 · t'(1) t(1)^{-1} − shift` at the homogeneous point,
/// with `t'` from fourth-order central differences plus one Richardson step.
pub fn build_hamiltonian_from_transfer(p: &ModelParams) -> Result<QOperator> {
    if p.bulk.v.iter().any(|v| (v - ONE).norm() > 1e-12) {
        return Err(Error::Inadmissible("Hamiltonian requires v_i = 1".into()));
    }
    let n = p.n();
    let q = p.q();
    let t = |u: C64| transfer_trace_form(u, p);
    let t1 = t(ONE)?;
    let s = t1
        .as_scalar(1e-8)
        .ok_or_else(|| Error::Degenerate("t(1) is not proportional to the identity".into()))?;
    if s.norm() < 1e-12 {
        return Err(Error::Degenerate("t(1) vanishes".into()));
    }
    let h = 1e-3;
    let d4 = |h: f64| -> Result<QOperator> {
        let hc = C64::from(h);
        Ok(combine(&[
            (C64::from(-1.0 / (12.0 * h)), &t(ONE + 2.0 * hc)?),
            (C64::from(8.0 / (12.0 * h)), &t(ONE + hc)?),
            (C64::from(-8.0 / (12.0 * h)), &t(ONE - hc)?),
            (C64::from(1.0 / (12.0 * h)), &t(ONE - 2.0 * hc)?),
        ]))
    };
    let coarse = d4(h)?;
    let fine = d4(h / 2.0)?;
    let deriv = combine(&[(C64::from(16.0 / 15.0), &fine), (C64::from(-1.0 / 15.0), &coarse)]);
    if deriv.matrix().iter().any(|z| !z.is_finite()) {
        return Err(Error::NonConvergence { residual: f64::INFINITY });
    }
    let id = QOperator::identity(n);
    Ok(combine(&[((q - q.inv()) / (2.0 * s), &deriv), (-hamiltonian_shift(n, q), &id)]))
}

/// Shifted operators `Ã(u,m), D̃(u,m), B̃(u,m)` for the upper/upper case.
#[derive(Clone, Debug)]
pub struct ModifiedUpper {
    pub a: QOperator,
    pub d: QOperator,
    pub b: QOperator,
}

fn check_eps_minus(p: &ModelParams) -> Result<()> {
    if p.left.eps_minus.norm() < 1e-12 {
        return Err(Error::Pole("eps_minus vanishes".into()));
    }
    Ok(())
}

impl ModifiedUpper {
    pub fn from_entries(e: &DoubleRowEntries, m: i32, p: &ModelParams) -> Result<Self> {
        check_eps_minus(p)?;
        let fns = p.fns();
        let q = fns.q();
        let u = e.at_point;
        let gam = fns.qpow(m) * p.left.kappa_tilde / (q * p.left.eps_minus);
        let gam2 = fns.qpow(m + 2) * p.left.kappa_tilde / (q * p.left.eps_minus);
        let a = combine(&[(ONE, &e.a), (-gam / u, &e.c)]);
        let d = combine(&[(ONE, &e.d), (gam * q * u * fns.phi(u), &e.c)]);
        let b = combine(&[
            (ONE, &e.b),
            (gam2 * q * u * fns.b(u * u) / fns.b(q * u * u), &e.a),
            (-gam2 / u, &e.d),
            (-gam2 * gam2, &e.c),
        ]);
        Ok(Self { a, d, b })
    }
}

pub fn build_modified_ops_upper(u: C64, m: i32, p: &ModelParams) -> Result<ModifiedUpper> {
    p.check_case(TransferCase::UpperUpper)?;
    ModifiedUpper::from_entries(&build_double_row(u, p)?, m, p)
}

/// Shifted operators `Ā(u,m), D̄(u,m)` for the lower/upper case.
#[derive(Clone, Debug)]
pub struct ModifiedLower {
    pub a: QOperator,
    pub d: QOperator,
}

impl ModifiedLower {
    pub fn from_entries(e: &DoubleRowEntries, m: i32, p: &ModelParams) -> Result<Self> {
        check_eps_minus(p)?;
        let fns = p.fns();
        let q = fns.q();
        let u = e.at_point;
        let gam = fns.qpow(m) * p.left.kappa / (q * p.left.eps_minus);
        Ok(Self {
            a: combine(&[(ONE, &e.a), (-gam / u, &e.b)]),
            d: combine(&[(ONE, &e.d), (gam * q * u * fns.phi(u), &e.b)]),
        })
    }
}

pub fn build_modified_ops_lower(u: C64, m: i32, p: &ModelParams) -> Result<ModifiedLower> {
    p.check_case(TransferCase::LowerUpper)?;
    ModifiedLower::from_entries(&build_double_row(u, p)?, m, p)
}

/// Labels of the reflection-algebra exchange relations, in the order
/// returned by [`abcd_relation_residuals`].
pub const ABCD_RELATIONS: [&str; 10] = ["ab", "ca", "db", "cd", "cb", "ad", "aa", "dd", "bb", "cc"];

/// Residuals of the exchange relations between the double-row entries at
/// `u` and `v`.
pub fn abcd_relation_residuals(u: C64, v: C64, p: &ModelParams) -> Result<[f64; 10]> {
    let x = build_double_row(u, p)?;
    let y = build_double_row(v, p)?;
    Ok(abcd_relations_from(&x, &y, &p.fns()))
}

pub fn abcd_relations_from(x: &DoubleRowEntries, y: &DoubleRowEntries, fns: &ScalarFns) -> [f64; 10] {
    let (u, v) = (x.at_point, y.at_point);
    let res = |l: QOperator, r: QOperator| kernel::residual(&l, &r).expect("same size");
    let bc = &(&x.b * &y.c) - &(&y.b * &x.c);
    [
        res(
            &x.a * &y.b,
            combine(&[(fns.f(u, v), &(&y.b * &x.a)), (fns.g(u, v), &(&x.b * &y.a)), (fns.w(u, v), &(&x.b * &y.d))]),
        ),
        res(
            &y.c * &x.a,
            combine(&[(fns.f(u, v), &(&x.a * &y.c)), (fns.g(u, v), &(&y.a * &x.c)), (fns.w(u, v), &(&y.d * &x.c))]),
        ),
        res(
            &x.d * &y.b,
            combine(&[(fns.h(u, v), &(&y.b * &x.d)), (fns.k_ex(u, v), &(&x.b * &y.d)), (fns.n(u, v), &(&x.b * &y.a))]),
        ),
        res(
            &y.c * &x.d,
            combine(&[(fns.h(u, v), &(&x.d * &y.c)), (fns.k_ex(u, v), &(&y.d * &x.c)), (fns.n(u, v), &(&y.a * &x.c))]),
        ),
        res(
            &x.c * &y.b,
            combine(&[
                (ONE, &(&y.b * &x.c)),
                (fns.s(u, v), &(&x.a * &y.a)),
                (fns.x(u, v), &(&y.a * &x.a)),
                (fns.y(u, v), &(&x.d * &y.a)),
                (fns.r(u, v), &(&x.a * &y.d)),
                (fns.p(u, v), &(&y.a * &x.d)),
                (fns.w(u, v), &(&x.d * &y.d)),
            ]),
        ),
        res(&x.a * &y.d, combine(&[(ONE, &(&y.d * &x.a)), (fns.k_ex(v, u), &bc)])),
        res(&x.a * &y.a, combine(&[(ONE, &(&y.a * &x.a)), (fns.w(u, v), &bc)])),
        res(
            &x.d * &y.d,
            combine(&[(ONE, &(&y.d * &x.d)), (-fns.phi(u) * fns.phi(v) * fns.w(u, v), &bc)]),
        ),
        res(&x.b * &y.b, &y.b * &x.b),
        res(&x.c * &y.c, &y.c * &x.c),
    ]
}

/// Residuals of `B̃(u,m)B̃(v,m-2) = B̃(v,m)B̃(u,m-2)` and the shifted
/// `Ã`/`D̃` exchange relations, in that order.
pub fn modified_upper_residuals(u: C64, v: C64, m: i32, p: &ModelParams) -> Result<[f64; 3]> {
    p.check_case(TransferCase::UpperUpper)?;
    let fns = p.fns();
    let eu = build_double_row(u, p)?;
    let ev = build_double_row(v, p)?;
    let u_m = ModifiedUpper::from_entries(&eu, m, p)?;
    let u_m2 = ModifiedUpper::from_entries(&eu, m - 2, p)?;
    let u_p2 = ModifiedUpper::from_entries(&eu, m + 2, p)?;
    let v_m = ModifiedUpper::from_entries(&ev, m, p)?;
    let v_m2 = ModifiedUpper::from_entries(&ev, m - 2, p)?;
    let res = |l: QOperator, r: QOperator| kernel::residual(&l, &r).expect("same size");
    let bb = res(&u_m.b * &v_m2.b, &v_m.b * &u_m2.b);
    let ab = res(
        &u_p2.a * &v_m.b,
        combine(&[
            (fns.f(u, v), &(&v_m.b * &u_m.a)),
            (fns.g(u, v), &(&u_m.b * &v_m.a)),
            (fns.w(u, v), &(&u_m.b * &v_m.d)),
        ]),
    );
    let db = res(
        &u_p2.d * &v_m.b,
        combine(&[
            (fns.h(u, v), &(&v_m.b * &u_m.d)),
            (fns.k_ex(u, v), &(&u_m.b * &v_m.d)),
            (fns.n(u, v), &(&u_m.b * &v_m.a)),
        ]),
    );
    Ok([bb, ab, db])
}

/// Residuals of the shifted `Ā`/`D̄` exchange relations with `B` for the
/// lower/upper case.
pub fn modified_lower_residuals(u: C64, v: C64, m: i32, p: &ModelParams) -> Result<[f64; 2]> {
    p.check_case(TransferCase::LowerUpper)?;
    let fns = p.fns();
    let eu = build_double_row(u, p)?;
    let ev = build_double_row(v, p)?;
    let u_m = ModifiedLower::from_entries(&eu, m, p)?;
    let u_p2 = ModifiedLower::from_entries(&eu, m + 2, p)?;
    let v_m = ModifiedLower::from_entries(&ev, m, p)?;
    let res = |l: QOperator, r: QOperator| kernel::residual(&l, &r).expect("same size");
    let ab = res(
        &u_p2.a * &ev.b,
        combine(&[
            (fns.f(u, v), &(&ev.b * &u_m.a)),
            (fns.g(u, v), &(&eu.b * &v_m.a)),
            (fns.w(u, v), &(&eu.b * &v_m.d)),
        ]),
    );
    let db = res(
        &u_p2.d * &ev.b,
        combine(&[
            (fns.h(u, v), &(&ev.b * &u_m.d)),
            (fns.k_ex(u, v), &(&eu.b * &v_m.d)),
            (fns.n(u, v), &(&eu.b * &v_m.a)),
        ]),
    );
    Ok([ab, db])
}

/// Pointwise residuals of the two scalar identities relating `g, n, k, w, F`
/// and `φ`, for both `k⁺` and `k⁻`: `[id1(k⁺), id2(k⁺), id1(k⁻), id2(k⁻)]`.
pub fn uwt_residuals(u: C64, v: C64, p: &ModelParams) -> [f64; 4] {
    let fns = p.fns();
    let cu = fns.cross(u);
    let cv = fns.cross(v);
    let rel = |a: C64, b: C64| (a - b).norm() / a.norm().max(b.norm()).max(1.0);
    let check = |k: &dyn Fn(C64) -> C64| {
        let id1 = rel(
            fns.g(u, v) * fns.phi(u) * k(u) + fns.n(u, v) * k(cu),
            fns.big_f(u, v) * fns.phi(cv) * fns.phi(v) * k(v),
        );
        let id2 = rel(
            fns.k_ex(u, v) * k(cu) + fns.w(u, v) * fns.phi(u) * k(u),
            -fns.big_f(u, v) * fns.phi(v) * k(cv),
        );
        (id1, id2)
    };
    let (p1, p2) = check(&|x| p.left.k(x));
    let (m1, m2) = check(&|x| p.right.k(x));
    [p1, p2, m1, m2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{c, StateVector};

    fn model(n: usize) -> ModelParams {
        let v = (0..n).map(|k| C64::from_polar(0.8 + 0.15 * k as f64, 0.4 * k as f64 - 0.3)).collect();
        ModelParams {
            bulk: BulkParams::new(C64::from_polar(1.3, 0.21), v).unwrap(),
            left: LeftBoundary { eps_plus: c(0.7, 0.2), eps_minus: c(-0.3, 0.9), kappa: c(0.5, -0.4), kappa_tilde: c(0.2, 0.6) },
            right: RightBoundary { nu_plus: c(1.1, -0.3), nu_minus: c(0.4, 0.5), tau: c(-0.6, 0.3), tau_tilde: ZERO },
        }
    }

    fn lambda(u: C64, p: &ModelParams) -> C64 {
        let fns = p.fns();
        let q = p.q();
        p.bulk.v.iter().fold(ONE, |acc, v| acc * fns.b(q * u / v) * fns.b(q * u * v))
    }

    #[test]
    fn k_minus_examples() {
        let p = model(1);
        let fns = p.fns();
        let mut diag = p.right;
        diag.tau = ZERO;
        let u = c(0.9, 0.5);
        let k = diag.matrix(u, &fns);
        assert_eq!(k[0][1], ZERO);
        assert_eq!(k[0][0], diag.k(u));
        assert_eq!(k[1][1], diag.k(u.inv()));
        let k1 = p.right.matrix(ONE, &fns);
        assert_eq!(k1[0][1], ZERO);
        assert_eq!(k1[0][0], p.right.nu_minus + p.right.nu_plus);
        assert_eq!(k1[1][1], k1[0][0]);
    }

    #[test]
    fn k_plus_examples() {
        let p = model(1);
        let fns = p.fns();
        let q = p.q();
        let mut diag = p.left;
        diag.kappa = ZERO;
        diag.kappa_tilde = ZERO;
        let u = c(0.9, 0.5);
        let k = diag.matrix(u, &fns);
        assert_eq!((k[0][1], k[1][0]), (ZERO, ZERO));
        assert_eq!(k[0][0], diag.k(q * u));
        let k = p.left.matrix(q.inv(), &fns);
        assert!(k[0][1].norm() < 1e-14 && k[1][0].norm() < 1e-14);
    }

    #[test]
    fn reflection_equations() {
        let p = model(1);
        let fns = p.fns();
        let mut right = p.right;
        right.tau_tilde = c(0.3, 0.1);
        assert!(re_residual(c(0.8, 0.6), c(1.3, -0.2), &right, &fns) < 1e-12);
        assert!(dre_residual(c(0.8, 0.6), c(1.3, -0.2), &p.left, &fns) < 1e-12);
    }

    #[test]
    fn vacuum_actions() {
        let p = model(3).restricted(TransferCase::LowerUpper);
        let fns = p.fns();
        let u = c(1.2, 0.3);
        let e = build_double_row(u, &p).unwrap();
        let om = StateVector::basis(3, 0);
        let a = e.a.apply(&om);
        assert!(kernel::vector_residual(&a, &om.scale(p.right.k(u) * lambda(u, &p))) < 1e-12);
        let w = fns.cross(u);
        let d = e.d.apply(&om);
        let want = om.scale(fns.phi(w) * p.right.k(w) * lambda(w, &p));
        assert!(kernel::vector_residual(&d, &want) < 1e-12);
        assert!(e.c.apply(&om).norm() < 1e-13);
    }

    #[test]
    fn closed_form_entries_agree() {
        for n in 1..=3 {
            let p = model(n).restricted(TransferCase::Diag);
            let u = c(0.7, -0.8);
            let x = build_double_row(u, &p).unwrap();
            let y = double_row_closed_form(u, &p).unwrap();
            for (l, r) in [(&x.a, &y.a), (&x.b, &y.b), (&x.c, &y.c), (&x.d, &y.d)] {
                assert!(kernel::residual(l, r).unwrap() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn transfer_matches_trace_and_commutes() {
        let p = model(3).restricted(TransferCase::LowerUpper);
        let (u, v) = (c(0.9, 0.4), c(-0.5, 1.2));
        let t = build_transfer(u, &p, TransferCase::LowerUpper).unwrap();
        assert!(kernel::residual(&t, &transfer_trace_form(u, &p).unwrap()).unwrap() < 1e-12);
        let tv = build_transfer(v, &p, TransferCase::LowerUpper).unwrap();
        assert!(kernel::residual(&(&t * &tv), &(&tv * &t)).unwrap() < 1e-10);
    }

    #[test]
    fn diag_transfer_conserves_spin() {
        let mut p = model(3).restricted(TransferCase::Diag);
        p.right.tau = ZERO;
        let t = build_transfer(c(1.1, 0.2), &p, TransferCase::Diag).unwrap();
        let jz = kernel::total_spin_z(3).unwrap();
        assert!(kernel::residual(&t.commutator(&jz), &QOperator::zeros(3)).unwrap() < 1e-12);
    }

    #[test]
    fn lower_upper_vacuum_action() {
        let p = model(2).restricted(TransferCase::LowerUpper);
        let fns = p.fns();
        let u = c(0.8, -0.7);
        let e = build_double_row(u, &p).unwrap();
        let t = transfer_from_entries(&e, &p);
        let om = StateVector::basis(2, 0);
        let psi = |x: C64| fns.phi(x) * p.left.k(x) * p.right.k(x) * lambda(x, &p);
        let mut want = om.scale(psi(u) + psi(fns.cross(u)));
        want.axpy(p.left.kappa * fns.c(p.q() * u), &e.b.apply(&om));
        assert!(kernel::vector_residual(&t.apply(&om), &want) < 1e-12);
    }

    #[test]
    fn case_mismatch_rejected() {
        let p = model(2);
        assert!(matches!(build_transfer(ONE, &p, TransferCase::Diag), Err(Error::CaseMismatch { .. })));
        assert!(build_modified_ops_lower(c(0.9, 0.1), 0, &p).is_err());
        let mut q = p.restricted(TransferCase::LowerUpper);
        q.right.tau_tilde = c(0.1, 0.0);
        assert!(build_transfer(c(0.9, 0.1), &q, TransferCase::LowerUpper).is_err());
    }

    #[test]
    fn hamiltonian_single_site() {
        let h = HamiltonianParams {
            eps: c(0.3, 0.0),
            kappa_minus: c(0.1, 0.2),
            kappa_plus: c(-0.4, 0.0),
            delta: c(0.9, 0.0),
            nu: c(0.5, 0.1),
            tau_minus: c(0.2, 0.0),
            tau_plus: c(0.0, 0.7),
        };
        let hm = build_hamiltonian_direct(1, &h).unwrap();
        assert_eq!(hm.get(0, 0), h.eps + h.nu);
        assert_eq!(hm.get(1, 1), -(h.eps + h.nu));
        assert_eq!(hm.get(1, 0), h.kappa_minus + h.tau_minus);
        assert_eq!(hm.get(0, 1), h.kappa_plus + h.tau_plus);
    }

    #[test]
    fn hamiltonian_xxx_two_sites() {
        let h = HamiltonianParams {
            eps: ZERO,
            kappa_minus: ZERO,
            kappa_plus: ZERO,
            delta: ONE,
            nu: ZERO,
            tau_minus: ZERO,
            tau_plus: ZERO,
        };
        let hm = build_hamiltonian_direct(2, &h).unwrap();
        #[rustfmt::skip]
        let want = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 2.0, 0.0],
            [0.0, 2.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for r in 0..4 {
            for col in 0..4 {
                assert!((hm.get(r, col) - C64::from(want[r][col])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hamiltonian_hermitian_for_real_couplings() {
        let h = HamiltonianParams {
            eps: c(0.3, 0.0),
            kappa_minus: c(0.2, 0.1),
            kappa_plus: c(0.2, -0.1),
            delta: c(0.8, 0.0),
            nu: c(-0.4, 0.0),
            tau_minus: c(0.5, 0.0),
            tau_plus: c(0.5, 0.0),
        };
        let hm = build_hamiltonian_direct(3, &h).unwrap();
        assert!(kernel::residual(&hm, &hm.adjoint()).unwrap() < 1e-15);
    }

    #[test]
    fn shift_constant() {
        // N = 2, q = 2: 2·(5/4)/... = 2.5 + (9/4)/5 = 2.95
        let s = hamiltonian_shift(2, c(2.0, 0.0));
        assert!((s - c(2.95, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn boundary_map_examples() {
        let p = model(1);
        let mut left = p.left;
        left.eps_minus = left.eps_plus;
        left.kappa = ZERO;
        left.kappa_tilde = ZERO;
        let h = map_boundary_params(&left, &p.right, p.q()).unwrap();
        assert_eq!(h.eps, ZERO);
        assert_eq!((h.kappa_minus, h.kappa_plus), (ZERO, ZERO));
        left.eps_minus = -left.eps_plus;
        assert!(map_boundary_params(&left, &p.right, p.q()).is_err());
    }

    #[test]
    fn hamiltonian_from_transfer_matches() {
        for (n, case) in [(1, TransferCase::LowerUpper), (3, TransferCase::Diag)] {
            let mut p = model(n).restricted(case);
            p.bulk = BulkParams::homogeneous(p.q(), n).unwrap();
            let ht = build_hamiltonian_from_transfer(&p).unwrap();
            let hp = map_boundary_params(&p.left, &p.right, p.q()).unwrap();
            let hd = build_hamiltonian_direct(n, &hp).unwrap();
            assert!((&ht - &hd).max_abs() < 1e-7, "n={n}");
        }
    }

    #[test]
    fn modified_ops_reduce_without_kappa_tilde() {
        let mut p = model(2).restricted(TransferCase::UpperUpper);
        p.left.kappa_tilde = ZERO;
        let u = c(0.9, -0.3);
        let e = build_double_row(u, &p).unwrap();
        let m = build_modified_ops_upper(u, -2, &p).unwrap();
        assert_eq!(m.a, e.a);
        assert_eq!(m.d, e.d);
        assert_eq!(m.b, e.b);
        let mut p = model(2).restricted(TransferCase::LowerUpper);
        p.left.kappa = ZERO;
        let ml = build_modified_ops_lower(u, 0, &p).unwrap();
        assert_eq!(ml.a, e.a);
    }

    #[test]
    fn modified_diagonal_forms() {
        let u = c(1.3, 0.4);
        let p = model(2).restricted(TransferCase::UpperUpper);
        let fns = p.fns();
        let m = build_modified_ops_upper(u, 0, &p).unwrap();
        let t = build_transfer(u, &p, TransferCase::UpperUpper).unwrap();
        let rebuilt = combine(&[(fns.phi(u) * p.left.k(u), &m.a), (p.left.k(fns.cross(u)), &m.d)]);
        assert!(kernel::residual(&t, &rebuilt).unwrap() < 1e-10);

        let p = model(2).restricted(TransferCase::LowerUpper);
        let m = build_modified_ops_lower(u, 0, &p).unwrap();
        let t = build_transfer(u, &p, TransferCase::LowerUpper).unwrap();
        let rebuilt = combine(&[(fns.phi(u) * p.left.k(u), &m.a), (p.left.k(fns.cross(u)), &m.d)]);
        assert!(kernel::residual(&t, &rebuilt).unwrap() < 1e-10);
    }

    #[test]
    fn eps_minus_zero_rejected() {
        let mut p = model(1).restricted(TransferCase::UpperUpper);
        p.left.eps_minus = ZERO;
        assert!(matches!(build_modified_ops_upper(c(0.9, 0.2), 0, &p), Err(Error::Pole(_))));
    }

    #[test]
    fn shifted_vacuum_actions() {
        let p = model(2).restricted(TransferCase::UpperUpper);
        let fns = p.fns();
        let u = c(0.6, 0.9);
        let om = StateVector::basis(2, 0);
        for m in [-4, 0, 2] {
            let ops = build_modified_ops_upper(u, m, &p).unwrap();
            let want = om.scale(p.right.k(u) * lambda(u, &p));
            assert!(kernel::vector_residual(&ops.a.apply(&om), &want) < 1e-12);
            let w = fns.cross(u);
            let want = om.scale(fns.phi(w) * p.right.k(w) * lambda(w, &p));
            assert!(kernel::vector_residual(&ops.d.apply(&om), &want) < 1e-12);
        }
    }

    #[test]
    fn relation_suites_small() {
        let p = model(2).restricted(TransferCase::Diag);
        let r = abcd_relation_residuals(c(0.8, 0.3), c(-0.4, 1.1), &p).unwrap();
        for (name, val) in ABCD_RELATIONS.iter().zip(r) {
            assert!(val < 1e-10, "{name}: {val}");
        }
        let p = model(2).restricted(TransferCase::UpperUpper);
        for val in modified_upper_residuals(c(0.8, 0.3), c(-0.4, 1.1), 0, &p).unwrap() {
            assert!(val < 1e-10);
        }
        let p = model(2).restricted(TransferCase::LowerUpper);
        for val in modified_lower_residuals(c(0.8, 0.3), c(-0.4, 1.1), -2, &p).unwrap() {
            assert!(val < 1e-10);
        }
        for val in uwt_residuals(c(0.8, 0.3), c(-0.4, 1.1), &p) {
            assert!(val < 1e-12);
        }
    }
}
