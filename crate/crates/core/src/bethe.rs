//! Eigenvalue functions, Bethe-equation residuals and the reflecting-end
//! partition function.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::boundary::{ModelParams, TransferCase};
use crate::error::{Error, Result};
use crate::kernel::{self, ONE, ZERO};
use crate::scalar::{ScalarFns, POLE_EPS};
use crate::vertex::BulkParams;

/// Minimal `|b(u_i/u_j)|` between two roots of one set.
pub const DISTINCT_EPS: f64 = 1e-8;

/// `Λ(u) = Π_i b(qu/v_i) b(quv_i)`.
pub fn lambda_vacuum(u: C64, p: &BulkParams) -> C64 {
    let fns = p.fns();
    let q = p.q;
    p.v.iter().fold(ONE, |acc, v| acc * fns.b(q * u / v) * fns.b(q * u * v))
}

/// `ψ(u) = φ(u) k⁺(u) k⁻(u) Λ(u)`.
pub fn psi(u: C64, p: &ModelParams) -> C64 {
    p.fns().phi(u) * p.left.k(u) * p.right.k(u) * lambda_vacuum(u, &p.bulk)
}

fn prod(fns: &ScalarFns, fun: fn(&ScalarFns, C64, C64) -> C64, u: C64, us: &[C64]) -> C64 {
    fns.prod(fun, u, us)
}

fn without(us: &[C64], i: usize) -> Vec<C64> {
    us.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect()
}

fn check_point(u: C64, us: &[C64], fns: &ScalarFns) -> Result<()> {
    let q = fns.q();
    if u.norm() < POLE_EPS || fns.b(q * u * u).norm() < POLE_EPS {
        return Err(Error::Pole(format!("b(qu^2) vanishes at u = {u}")));
    }
    for &x in us {
        if fns.b(u / x).norm() < POLE_EPS {
            return Err(Error::Pole(format!("b(u/u_j) vanishes at u = {u}")));
        }
        if fns.b(q * u * x).norm() < POLE_EPS {
            return Err(Error::Pole(format!("b(quu_j) vanishes at u = {u}")));
        }
    }
    Ok(())
}

fn check_index(i: usize, us: &[C64]) -> Result<()> {
    if i >= us.len() {
        return Err(Error::Inadmissible(format!("root index {i} out of range for {} roots", us.len())));
    }
    Ok(())
}

/// `Λ_d(u, ū) = ψ(u) f(u,ū) + ψ(q^{-1}u^{-1}) h(u,ū)`.
pub fn lambda_d(u: C64, us: &[C64], p: &ModelParams) -> Result<C64> {
    let fns = p.fns();
    check_point(u, us, &fns)?;
    Ok(psi(u, p) * prod(&fns, ScalarFns::f, u, us) + psi(fns.cross(u), p) * prod(&fns, ScalarFns::h, u, us))
}

/// The two terms of `E_d(u_i, ū_i)`: `φ(q^{-1}u_i^{-1}) ψ(u_i) f(u_i,ū_i)` and
/// `φ(u_i) ψ(q^{-1}u_i^{-1}) h(u_i,ū_i)`.
fn terms_d(i: usize, us: &[C64], p: &ModelParams) -> Result<(C64, C64)> {
    check_index(i, us)?;
    let fns = p.fns();
    let ui = us[i];
    let rest = without(us, i);
    check_point(ui, &rest, &fns)?;
    let w = fns.cross(ui);
    Ok((
        fns.phi(w) * psi(ui, p) * prod(&fns, ScalarFns::f, ui, &rest),
        fns.phi(ui) * psi(w, p) * prod(&fns, ScalarFns::h, ui, &rest),
    ))
}

/// `E_d(u_i, ū_i) = φ(q^{-1}u_i^{-1}) ψ(u_i) f(u_i,ū_i) − φ(u_i) ψ(q^{-1}u_i^{-1}) h(u_i,ū_i)`.
pub fn bethe_residual_d(i: usize, us: &[C64], p: &ModelParams) -> Result<C64> {
    let (x, y) = terms_d(i, us, p)?;
    Ok(x - y)
}

fn check_lower_upper(us: &[C64], p: &ModelParams) -> Result<()> {
    if us.len() != p.n() {
        return Err(Error::CaseMismatch {
            case: TransferCase::LowerUpper.to_string(),
            reason: format!("needs exactly {} roots, got {}", p.n(), us.len()),
        });
    }
    Ok(())
}

/// Extra eigenvalue branch `−τκ c(u) c(q^{-1}u^{-1}) Λ(u) Λ(q^{-1}u^{-1}) m(u,ū)`
/// of the lower/upper case; needs exactly `N` roots.
pub fn lambda_g(u: C64, us: &[C64], p: &ModelParams) -> Result<C64> {
    check_lower_upper(us, p)?;
    let fns = p.fns();
    check_point(u, us, &fns)?;
    let w = fns.cross(u);
    Ok(-p.right.tau
        * p.left.kappa
        * fns.c(u)
        * fns.c(w)
        * lambda_vacuum(u, &p.bulk)
        * lambda_vacuum(w, &p.bulk)
        * prod(&fns, ScalarFns::m_fn, u, us))
}

/// `E_g(u_i) = τκ c(u_i) c(q^{-1}u_i^{-1}) / b(qu_i²) · Λ(u_i) Λ(q^{-1}u_i^{-1}) m(u_i,ū_i)`.
pub fn bethe_residual_g(i: usize, us: &[C64], p: &ModelParams) -> Result<C64> {
    check_lower_upper(us, p)?;
    check_index(i, us)?;
    let fns = p.fns();
    let ui = us[i];
    let rest = without(us, i);
    check_point(ui, &rest, &fns)?;
    let w = fns.cross(ui);
    Ok(p.right.tau * p.left.kappa * fns.c(ui) * fns.c(w) / fns.b(fns.q() * ui * ui)
        * lambda_vacuum(ui, &p.bulk)
        * lambda_vacuum(w, &p.bulk)
        * prod(&fns, ScalarFns::m_fn, ui, &rest))
}

pub fn lambda_total(u: C64, us: &[C64], p: &ModelParams) -> Result<C64> {
    Ok(lambda_d(u, us, p)? + lambda_g(u, us, p)?)
}

pub fn bethe_residual_total(i: usize, us: &[C64], p: &ModelParams) -> Result<C64> {
    Ok(bethe_residual_d(i, us, p)? + bethe_residual_g(i, us, p)?)
}

/// Eigenvalue for `case`: `Λ_d` for the diagonal and upper/upper cases, the
/// sum `Λ_d + Λ_g` for lower/upper.
pub fn eigenvalue(case: TransferCase, u: C64, us: &[C64], p: &ModelParams) -> Result<C64> {
    match case {
        TransferCase::LowerUpper => lambda_total(u, us, p),
        TransferCase::Diag | TransferCase::UpperUpper => lambda_d(u, us, p),
        TransferCase::GeneralTriangular => Err(unsupported()),
    }
}

/// Bethe residuals divided by their leading term `φ(q^{-1}u_i^{-1}) ψ(u_i) f(u_i,ū_i)`.
/// Same zeros as [`bethe_residuals`] away from zeros of that term, but of
/// order one and finite on the trivial orbit `u_i² = ±1`, where the raw
/// residual vanishes identically.
pub fn normalized_residuals(case: TransferCase, us: &[C64], p: &ModelParams) -> Result<Vec<C64>> {
    (0..us.len())
        .map(|i| {
            let (x, y) = terms_d(i, us, p)?;
            let g = match case {
                TransferCase::LowerUpper => bethe_residual_g(i, us, p)?,
                TransferCase::Diag | TransferCase::UpperUpper => ZERO,
                TransferCase::GeneralTriangular => return Err(unsupported()),
            };
            if x.norm() < f64::MIN_POSITIVE {
                return Err(Error::Pole("leading Bethe term vanishes".into()));
            }
            Ok((x - y + g) / x)
        })
        .collect()
}

/// Vector of Bethe-equation residuals for `case`.
pub fn bethe_residuals(case: TransferCase, us: &[C64], p: &ModelParams) -> Result<Vec<C64>> {
    (0..us.len())
        .map(|i| match case {
            TransferCase::LowerUpper => bethe_residual_total(i, us, p),
            TransferCase::Diag | TransferCase::UpperUpper => bethe_residual_d(i, us, p),
            TransferCase::GeneralTriangular => Err(unsupported()),
        })
        .collect()
}

fn unsupported() -> Error {
    Error::CaseMismatch {
        case: TransferCase::GeneralTriangular.to_string(),
        reason: "no Bethe ansatz for both kappa and kappa_tilde".into(),
    }
}

/// Limit `lim_{u→u_i} b(u_i/u) g(u)` from samples at `u = u_i(1+10^{-k})`,
/// `k = 4..7`, extrapolated to zero offset by Neville's scheme.
pub fn weighted_limit(ui: C64, fns: &ScalarFns, g: impl Fn(C64) -> Result<C64>) -> Result<C64> {
    let eps: Vec<f64> = (4..=7).map(|k| 10f64.powi(-k)).collect();
    let mut vals = eps
        .iter()
        .map(|&e| {
            let u = ui * (1.0 + e);
            Ok(fns.b(ui / u) * g(u)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = vals.len();
    for level in 1..n {
        for j in 0..n - level {
            let (e0, e1) = (eps[j], eps[j + level]);
            vals[j] = (vals[j + 1] * e0 - vals[j] * e1) / (e0 - e1);
        }
    }
    Ok(vals[0])
}

/// Reflecting-end partition function `Z_d(ū | v̄)` for a diagonal-type right
/// boundary, as a determinant with kernel
/// `M(u,v) = φ(q^{-1}u^{-1}) / (b(quv) b(v/u)) · (k⁻(u)/b(uv) + k⁻(q^{-1}u^{-1})/b(qu/v))`.
pub fn zd_partition(us: &[C64], p: &ModelParams) -> Result<C64> {
    let n = p.n();
    if us.len() != n {
        return Err(Error::Inadmissible(format!("Z_d needs {n} roots, got {}", us.len())));
    }
    let fns = p.fns();
    let q = fns.q();
    let vs = &p.bulk.v;
    let km = |x: C64| p.right.k(x);
    let mut den = ONE;
    for i in 0..n {
        for j in i + 1..n {
            den *= fns.b(us[i] / us[j]) * fns.b(q * us[i] * us[j]) * fns.b(vs[j] / vs[i]) * fns.b(vs[i] * vs[j]);
        }
    }
    if den.norm() < POLE_EPS {
        return Err(Error::Pole("Z_d prefactor: coincident roots or inhomogeneities".into()));
    }
    let mut num = ONE;
    let mut kernel_m = DMatrix::<C64>::zeros(n, n);
    for (a, &u) in us.iter().enumerate() {
        let w = fns.cross(u);
        for (bi, &v) in vs.iter().enumerate() {
            num *= fns.b(u / v) * fns.b(u * v) * fns.b(q * u / v) * fns.b(q * u * v);
            let d = fns.b(q * u * v) * fns.b(v / u) * fns.b(u * v) * fns.b(q * u / v);
            if d.norm() < POLE_EPS || fns.b(q * w * w).norm() < POLE_EPS {
                return Err(Error::Pole("Z_d kernel".into()));
            }
            kernel_m[(a, bi)] = fns.phi(w) / (fns.b(q * u * v) * fns.b(v / u))
                * (km(u) / fns.b(u * v) + km(w) / fns.b(q * u / v));
        }
    }
    let sign = if n.is_multiple_of(2) { ONE } else { -ONE };
    Ok(sign * num / den * kernel::det(&kernel_m))
}

/// Bethe roots of one sector, canonicalized and ordered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub sector_m: usize,
    pub roots: Vec<C64>,
    pub case: TransferCase,
}

/// Representative of the orbit `{±u, ±q^{-1}u^{-1}}`. Every eigenvalue and
/// residual function is even in each root and invariant under crossing, so
/// the four points label one physical root. Picks the larger modulus
/// (tie: larger imaginary part) after moving both candidates to the right
/// half-plane.
pub fn canonical_root(u: C64, fns: &ScalarFns) -> C64 {
    let half = |z: C64| if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) { -z } else { z };
    let a = half(u);
    let b = half(fns.cross(u));
    let (ma, mb) = (a.norm(), b.norm());
    if (ma - mb).abs() > 1e-12 * ma.max(mb) {
        if ma > mb { a } else { b }
    } else if a.im >= b.im {
        a
    } else {
        b
    }
}

fn order(a: &C64, b: &C64) -> Ordering {
    a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg()))
}

impl RootSet {
    /// Canonicalizes and sorts `roots`; rejects coincident roots.
    pub fn new(roots: &[C64], case: TransferCase, fns: &ScalarFns) -> Result<Self> {
        if roots.iter().any(|z| !z.is_finite() || z.norm() < POLE_EPS) {
            return Err(Error::Degenerate("root is zero or not finite".into()));
        }
        let mut rs: Vec<C64> = roots.iter().map(|&u| canonical_root(u, fns)).collect();
        rs.sort_by(order);
        let q = fns.q();
        for i in 0..rs.len() {
            for j in i + 1..rs.len() {
                // b(quv) tests coincidence after crossing
                if fns.b(rs[i] / rs[j]).norm() < DISTINCT_EPS
                    || fns.b(rs[i] * rs[j]).norm() < DISTINCT_EPS
                    || fns.b(q * rs[i] * rs[j]).norm() < DISTINCT_EPS
                {
                    return Err(Error::Degenerate(format!("coincident roots {} and {}", rs[i], rs[j])));
                }
            }
        }
        Ok(Self { sector_m: rs.len(), roots: rs, case })
    }

    /// Same root orbits up to relative distance `tol`.
    pub fn matches(&self, other: &RootSet, tol: f64) -> bool {
        if self.sector_m != other.sector_m || self.case != other.case {
            return false;
        }
        let mut used = vec![false; other.roots.len()];
        self.roots.iter().all(|a| {
            let hit = other
                .roots
                .iter()
                .enumerate()
                .find(|&(j, b)| !used[j] && (a - b).norm() <= tol * a.norm().max(1.0));
            match hit {
                Some((j, _)) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        })
    }
}

impl Default for RootSet {
    fn default() -> Self {
        Self { sector_m: 0, roots: Vec::new(), case: TransferCase::Diag }
    }
}

pub(crate) fn max_abs(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rel_diff as rel;
    use crate::boundary::{LeftBoundary, RightBoundary};
    use crate::kernel::c;
    use crate::kernel::ZERO;
    use crate::vertex::vacuum_lambdas;

    fn model(n: usize) -> ModelParams {
        let v = (0..n).map(|k| C64::from_polar(0.8 + 0.15 * k as f64, 0.4 * k as f64 - 0.3)).collect();
        ModelParams {
            bulk: BulkParams::new(C64::from_polar(1.3, 0.21), v).unwrap(),
            left: LeftBoundary { eps_plus: c(0.7, 0.2), eps_minus: c(-0.3, 0.9), kappa: c(0.5, -0.4), kappa_tilde: ZERO },
            right: RightBoundary { nu_plus: c(1.1, -0.3), nu_minus: c(0.4, 0.5), tau: c(-0.6, 0.3), tau_tilde: ZERO },
        }
    }

    fn roots(m: usize) -> Vec<C64> {
        (0..m).map(|k| C64::from_polar(0.7 + 0.3 * k as f64, 1.1 * k as f64 + 0.5)).collect()
    }

    #[test]
    fn vacuum_eigenvalue_examples() {
        let p = model(3);
        let q = p.q();
        assert!(lambda_vacuum(q.inv() * p.bulk.v[0], &p.bulk).norm() < 1e-14);
        let empty = BulkParams { q, v: vec![] };
        assert_eq!(lambda_vacuum(c(0.4, 0.9), &empty), ONE);
        let u = c(0.8, -0.6);
        let (l1, _) = vacuum_lambdas(u, &p.bulk);
        let (_, l2w) = vacuum_lambdas(p.fns().cross(u), &p.bulk);
        assert!(rel(lambda_vacuum(u, &p.bulk), -l1 * l2w) < 1e-12);
    }

    #[test]
    fn lambda_d_empty_and_crossing() {
        let p = model(2);
        let fns = p.fns();
        let u = c(0.9, 0.7);
        assert!(rel(lambda_d(u, &[], &p).unwrap(), psi(u, &p) + psi(fns.cross(u), &p)) < 1e-15);
        let us = roots(2);
        let a = lambda_d(u, &us, &p).unwrap();
        assert!(rel(lambda_d(fns.cross(u), &us, &p).unwrap(), a) < 1e-10);
        let flipped = [us[0], fns.cross(us[1])];
        assert!(rel(lambda_d(u, &flipped, &p).unwrap(), a) < 1e-10);
        let negated = [-us[0], us[1]];
        assert!(rel(lambda_d(u, &negated, &p).unwrap(), a) < 1e-10);
        assert!(rel(lambda_d(u, &[us[1], us[0]], &p).unwrap(), a) < 1e-13);
    }

    #[test]
    fn lambda_g_branches() {
        let p = model(2);
        let us = roots(2);
        let u = c(1.2, -0.4);
        let mut z = p.clone();
        z.right.tau = ZERO;
        assert_eq!(lambda_g(u, &us, &z).unwrap(), ZERO);
        z = p.clone();
        z.left.kappa = ZERO;
        assert_eq!(lambda_g(u, &us, &z).unwrap(), ZERO);
        assert!(lambda_g(u, &us[..1], &p).is_err());
        let fns = p.fns();
        assert!(rel(lambda_g(fns.cross(u), &us, &p).unwrap(), lambda_g(u, &us, &p).unwrap()) < 1e-10);
    }

    #[test]
    fn residuals_are_weighted_limits() {
        let p = model(3);
        let fns = p.fns();
        let us = roots(3);
        for i in 0..3 {
            let ld = weighted_limit(us[i], &fns, |u| lambda_d(u, &us, &p)).unwrap();
            assert!(rel(ld, bethe_residual_d(i, &us, &p).unwrap()) < 1e-7, "E_d {i}");
            let lg = weighted_limit(us[i], &fns, |u| lambda_g(u, &us, &p)).unwrap();
            assert!(rel(lg, bethe_residual_g(i, &us, &p).unwrap()) < 1e-7, "E_g {i}");
        }
    }

    #[test]
    fn total_reduces_without_tau() {
        let mut p = model(2);
        p.right.tau = ZERO;
        let us = roots(2);
        assert_eq!(bethe_residual_total(0, &us, &p).unwrap(), bethe_residual_d(0, &us, &p).unwrap());
        assert!(bethe_residual_total(1, &us, &model(2)).unwrap().norm() > 1e-6);
    }

    #[test]
    fn zd_single_site_closed_form() {
        let p = model(1);
        let fns = p.fns();
        let q = p.q();
        let (u, v) = (c(0.6, 0.9), p.bulk.v[0]);
        let w = fns.cross(u);
        let m = fns.phi(w) / (fns.b(q * u * v) * fns.b(v / u))
            * (p.right.k(u) / fns.b(u * v) + p.right.k(w) / fns.b(q * u / v));
        let want = -fns.b(u / v) * fns.b(u * v) * fns.b(q * u / v) * fns.b(q * u * v) * m;
        assert!(rel(zd_partition(&[u], &p).unwrap(), want) < 1e-14);
    }

    #[test]
    fn zd_symmetric() {
        let p = model(3);
        let us = roots(3);
        let a = zd_partition(&us, &p).unwrap();
        let b = zd_partition(&[us[2], us[0], us[1]], &p).unwrap();
        assert!(rel(a, b) < 1e-11);
        assert!(zd_partition(&us[..2], &p).is_err());
    }

    #[test]
    fn canonical_orbit() {
        let fns = model(1).fns();
        let u = c(0.3, -0.5);
        let r = canonical_root(u, &fns);
        for z in [u, -u, fns.cross(u), -fns.cross(u)] {
            assert!((canonical_root(z, &fns) - r).norm() < 1e-14);
        }
        assert!(r.re >= 0.0);
        assert!(r.norm() >= fns.cross(r).norm());
    }

    #[test]
    fn rootset_rejects_coincident() {
        let fns = model(1).fns();
        let u = c(0.8, 0.4);
        assert!(RootSet::new(&[u, u], TransferCase::Diag, &fns).is_err());
        assert!(RootSet::new(&[u, fns.cross(u)], TransferCase::Diag, &fns).is_err());
        let a = RootSet::new(&[u, c(1.5, 0.1)], TransferCase::Diag, &fns).unwrap();
        let b = RootSet::new(&[c(1.5, 0.1), -fns.cross(u)], TransferCase::Diag, &fns).unwrap();
        assert!(a.matches(&b, 1e-12));
        assert!(a.roots[0].norm() <= a.roots[1].norm());
    }
}
