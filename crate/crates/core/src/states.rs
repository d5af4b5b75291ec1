//! Vacua, Bethe vectors, scalar products and the off-shell equations they
//! satisfy.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bethe::{self, lambda_d, lambda_g};
use crate::boundary::{
    build_double_row, transfer_from_entries, ModelParams, ModifiedUpper, TransferCase,
};
use crate::error::{Error, Result};
use crate::kernel::{self, QOperator, StateVector, ONE};
use crate::vertex::{build_monodromy, vacuum_lambdas};

/// Condition number above which the projection basis counts as degenerate.
pub const BASIS_COND_MAX: f64 = 1e12;

/// Highest-weight vector: all spins up.
pub fn vacuum(n: usize) -> StateVector {
    StateVector::basis(n, 0)
}

/// Lowest-weight vector: all spins down.
pub fn covacuum(n: usize) -> StateVector {
    StateVector::basis(n, (1usize << n) - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetheVector {
    pub state: StateVector,
    /// Roots in the order the creation operators were applied, left to right.
    pub roots: Vec<C64>,
    pub case: TransferCase,
    /// Product of the RMS norms of the creation operators; `‖state‖/scale`
    /// is the scale-free size used to call a vector null.
    pub scale: f64,
}

impl BetheVector {
    fn from_ops(n: usize, ops: &[QOperator], roots: &[C64], case: TransferCase) -> Self {
        let rms = ((1usize << n) as f64).sqrt();
        let scale = ops.iter().map(|op| op.frobenius() / rms).product();
        Self { state: apply_chain(n, ops), roots: roots.to_vec(), case, scale }
    }

    pub fn relative_norm(&self) -> f64 {
        if self.scale == 0.0 { 0.0 } else { self.state.norm() / self.scale }
    }
}

fn apply_chain(n: usize, ops: &[QOperator]) -> StateVector {
    ops.iter().rev().fold(vacuum(n), |v, op| op.apply(&v))
}

fn b_operators(us: &[C64], p: &ModelParams) -> Result<Vec<QOperator>> {
    us.iter().map(|&u| Ok(build_double_row(u, p)?.b)).collect()
}

/// `ℬ(u_1)…ℬ(u_M)|Ω⟩`.
pub fn build_phi_d(us: &[C64], p: &ModelParams) -> Result<BetheVector> {
    if us.len() > p.n() {
        return Err(Error::Inadmissible(format!("{} roots on {} sites", us.len(), p.n())));
    }
    Ok(BetheVector::from_ops(p.n(), &b_operators(us, p)?, us, TransferCase::Diag))
}

/// `B̃(u_1,−2) B̃(u_2,−4) … B̃(u_M,−2M)|Ω⟩` for the upper/upper case.
pub fn build_phi_up(us: &[C64], p: &ModelParams) -> Result<BetheVector> {
    p.check_case(TransferCase::UpperUpper)?;
    if us.len() > p.n() {
        return Err(Error::Inadmissible(format!("{} roots on {} sites", us.len(), p.n())));
    }
    let ops = us
        .iter()
        .enumerate()
        .map(|(k, &u)| Ok(ModifiedUpper::from_entries(&build_double_row(u, p)?, -2 * (k as i32 + 1), p)?.b))
        .collect::<Result<Vec<_>>>()?;
    Ok(BetheVector::from_ops(p.n(), &ops, us, TransferCase::UpperUpper))
}

/// `ℬ(u_1)…ℬ(u_N)|Ω⟩` for the lower/upper case; needs exactly `N` roots.
pub fn build_phi_lo_up(us: &[C64], p: &ModelParams) -> Result<BetheVector> {
    p.check_case(TransferCase::LowerUpper)?;
    if us.len() != p.n() {
        return Err(Error::CaseMismatch {
            case: TransferCase::LowerUpper.to_string(),
            reason: format!("needs exactly {} roots, got {}", p.n(), us.len()),
        });
    }
    Ok(BetheVector::from_ops(p.n(), &b_operators(us, p)?, us, TransferCase::LowerUpper))
}

/// Bethe vector of the ansatz for `case`.
pub fn build_phi(case: TransferCase, us: &[C64], p: &ModelParams) -> Result<BetheVector> {
    match case {
        TransferCase::Diag => build_phi_d(us, p),
        TransferCase::UpperUpper => build_phi_up(us, p),
        TransferCase::LowerUpper => build_phi_lo_up(us, p),
        TransferCase::GeneralTriangular => Err(Error::CaseMismatch {
            case: case.to_string(),
            reason: "no Bethe vector".into(),
        }),
    }
}

/// `⟨Ω̂| ℬ(w̄) ℬ(ū) |Ω⟩` by direct evaluation.
pub fn scalar_product_sup(ws: &[C64], us: &[C64], p: &ModelParams) -> Result<C64> {
    let all: Vec<C64> = ws.iter().chain(us).copied().collect();
    let ops = b_operators(&all, p)?;
    let v = apply_chain(p.n(), &ops);
    Ok(v.pairing(&covacuum(p.n())))
}

/// Right side of the recursion for `S(w|ū)` with `#ū = N`:
/// `[Λ_g(w,ū) S(∅|ū) + Σ_i F(w,u_i) E_g(u_i,ū_i) S(w|ū_i)] / (κ c(qw))`.
pub fn scalar_product_recursion(w: C64, us: &[C64], p: &ModelParams) -> Result<C64> {
    let fns = p.fns();
    let denom = p.left.kappa * fns.c(fns.q() * w);
    if denom.norm() < 1e-12 {
        return Err(Error::Pole("kappa c(qw) vanishes".into()));
    }
    let mut acc = lambda_g(w, us, p)? * scalar_product_sup(&[], us, p)?;
    for i in 0..us.len() {
        let rest: Vec<C64> = us.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
        acc += fns.big_f(w, us[i]) * bethe::bethe_residual_g(i, us, p)? * scalar_product_sup(&[w], &rest, p)?;
    }
    Ok(acc / denom)
}

/// `l̃_12(u) = k⁻(q^{-1}u^{-1}) λ_1(q^{-1}u^{-1}) l_12(u)`.
pub fn l12_tilde(u: C64, p: &ModelParams) -> Result<QOperator> {
    let w = p.fns().cross(u);
    let (l1, _) = vacuum_lambdas(w, &p.bulk);
    Ok(build_monodromy(u, &p.bulk)?.l12().scale(p.right.k(w) * l1))
}

/// Single-site lower/upper Bethe vector assembled from `l_ij` operators.
pub fn explicit_phi_n1(u1: C64, p: &ModelParams) -> Result<StateVector> {
    if p.n() != 1 {
        return Err(Error::Inadmissible("explicit form is for one site".into()));
    }
    let fns = p.fns();
    let w1 = fns.cross(u1);
    let (l1u, _) = vacuum_lambdas(u1, &p.bulk);
    let (l1w, _) = vacuum_lambdas(w1, &p.bulk);
    let op = &(&l12_tilde(w1, p)? - &l12_tilde(u1, p)?).scale(fns.phi(w1));
    let om = vacuum(1);
    let mut v = op.apply(&om);
    v.axpy(-p.right.tau * fns.c(u1) * l1u * l1w, &om);
    Ok(v)
}

/// Two-site lower/upper Bethe vector assembled from `l_ij` operators.
pub fn explicit_phi_n2(u1: C64, u2: C64, p: &ModelParams) -> Result<StateVector> {
    if p.n() != 2 {
        return Err(Error::Inadmissible("explicit form is for two sites".into()));
    }
    let fns = p.fns();
    let q = fns.q();
    let sq = q.sqrt();
    let (w1, w2) = (fns.cross(u1), fns.cross(u2));
    let l1 = |z: C64| vacuum_lambdas(z, &p.bulk).0;
    let tau = p.right.tau;
    let (t1, t2, tw1, tw2) = (l12_tilde(u1, p)?, l12_tilde(u2, p)?, l12_tilde(w1, p)?, l12_tilde(w2, p)?);
    let om = vacuum(2);
    let cq = |x: C64| fns.c(sq * x);

    let mut v = om.scale(tau * tau * l1(u1) * l1(w1) * l1(u2) * l1(w2));
    let pair = combine_apply(&[(fns.h(u1, u2), &t1), (-fns.f(u1, u2), &tw1)], &om);
    v.axpy(tau * l1(u2) * l1(w2) / cq(u1), &pair);
    let pair = combine_apply(&[(fns.h(u2, u1), &t2), (-fns.f(u2, u1), &tw2)], &om);
    v.axpy(tau * l1(u1) * l1(w1) / cq(u2), &pair);
    let mut out = v.scale(fns.c(u1) * fns.c(u2));

    let two = kernel::combine(&[
        (fns.b(q * q * u1 * u2) / fns.b(q * u1 * u2), &(&t1 * &t2)),
        (fns.b(u1 * u2) / fns.b(q * u1 * u2), &(&tw1 * &tw2)),
        (-fns.b(q * u1 / u2) / fns.b(u1 / u2), &(&t1 * &tw2)),
        (-fns.b(q * u2 / u1) / fns.b(u2 / u1), &(&t2 * &tw1)),
    ]);
    out.axpy(fns.phi(w1) * fns.phi(w2), &two.apply(&om));
    Ok(out)
}

fn combine_apply(terms: &[(C64, &QOperator)], v: &StateVector) -> StateVector {
    kernel::combine(terms).apply(v)
}

/// Coefficient of one basis vector `l_12(u_{s_1}) l_12(u_{s_2}) … |Ω⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisCoefficient {
    pub subset: Vec<usize>,
    pub coefficient: C64,
}

/// Root-index subsets ordered by size, then lexicographically.
pub fn basis_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> =
        (0..1usize << n).map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect()).collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    subsets
}

/// Coordinates of `vector` in the basis built from `l_12(u_i)` products on
/// `|Ω⟩`, with one `u_i` per site.
pub fn project_basis(vector: &StateVector, us: &[C64], p: &ModelParams) -> Result<Vec<BasisCoefficient>> {
    let n = p.n();
    if us.len() != n || vector.n_sites() != n {
        return Err(Error::DimensionMismatch { left: us.len(), right: n });
    }
    let l12: Vec<QOperator> = us
        .iter()
        .map(|&u| Ok(build_monodromy(u, &p.bulk)?.l12().clone()))
        .collect::<Result<_>>()?;
    let subsets = basis_subsets(n);
    let dim = 1usize << n;
    let mut basis = DMatrix::<C64>::zeros(dim, dim);
    for (col, s) in subsets.iter().enumerate() {
        let ops: Vec<QOperator> = s.iter().map(|&i| l12[i].clone()).collect();
        let v = apply_chain(n, &ops);
        basis.set_column(col, v.amplitudes());
    }
    let cond = kernel::condition_number(&basis);
    if cond.is_nan() || cond > BASIS_COND_MAX {
        return Err(Error::IllConditioned(cond));
    }
    let coeffs = kernel::solve(&basis, &DVector::from(vector.amplitudes().clone()))?;
    Ok(subsets
        .into_iter()
        .zip(coeffs.iter())
        .map(|(subset, &coefficient)| BasisCoefficient { subset, coefficient })
        .collect())
}

/// `‖lhs − Σ terms‖` over the largest norm among `lhs` and the terms.
pub fn offshell_residual(lhs: &StateVector, terms: &[StateVector]) -> f64 {
    let mut rhs = StateVector::zeros(lhs.n_sites());
    let mut scale = lhs.norm();
    for t in terms {
        rhs.axpy(ONE, t);
        scale = scale.max(t.norm());
    }
    if scale == 0.0 {
        return 0.0;
    }
    lhs.sub(&rhs).norm() / scale
}

fn with_front(u: C64, us: &[C64], i: usize) -> Vec<C64> {
    std::iter::once(u).chain(us.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x)).collect()
}

/// Which eigenvalue branches enter an off-shell check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Branch {
    D,
    G,
    Total,
}

fn unwanted_terms(
    u: C64,
    us: &[C64],
    p: &ModelParams,
    branch: Branch,
    rebuild: &dyn Fn(&[C64]) -> Result<BetheVector>,
) -> Result<Vec<StateVector>> {
    let fns = p.fns();
    (0..us.len())
        .map(|i| {
            let e = match branch {
                Branch::D => bethe::bethe_residual_d(i, us, p)?,
                Branch::G => bethe::bethe_residual_g(i, us, p)?,
                Branch::Total => bethe::bethe_residual_total(i, us, p)?,
            };
            Ok(rebuild(&with_front(u, us, i))?.state.scale(fns.big_f(u, us[i]) * e))
        })
        .collect()
}

/// Residual of `t(u)Φ_d = Λ_d Φ_d + Σ F(u,u_i) E_d(u_i) Φ_d({u,ū_i})` for
/// the diagonal case.
pub fn offshell_diag(u: C64, us: &[C64], p: &ModelParams) -> Result<f64> {
    p.check_case(TransferCase::Diag)?;
    offshell_with(u, us, p, Branch::D, &|r| build_phi_d(r, p))
}

/// Same equation for the upper/upper case with the factorized vectors.
pub fn offshell_upper(u: C64, us: &[C64], p: &ModelParams) -> Result<f64> {
    p.check_case(TransferCase::UpperUpper)?;
    offshell_with(u, us, p, Branch::D, &|r| build_phi_up(r, p))
}

/// Full lower/upper off-shell equation with `Λ = Λ_d + Λ_g`, `E = E_d + E_g`.
pub fn offshell_lower_upper(u: C64, us: &[C64], p: &ModelParams) -> Result<f64> {
    p.check_case(TransferCase::LowerUpper)?;
    offshell_with(u, us, p, Branch::Total, &|r| build_phi_lo_up(r, p))
}

fn offshell_with(
    u: C64,
    us: &[C64],
    p: &ModelParams,
    branch: Branch,
    rebuild: &dyn Fn(&[C64]) -> Result<BetheVector>,
) -> Result<f64> {
    let phi = rebuild(us)?.state;
    let t = transfer_from_entries(&build_double_row(u, p)?, p);
    let lam = match branch {
        Branch::Total => bethe::lambda_total(u, us, p)?,
        _ => lambda_d(u, us, p)?,
    };
    let mut terms = vec![phi.scale(lam)];
    terms.extend(unwanted_terms(u, us, p, branch, rebuild)?);
    Ok(offshell_residual(&t.apply(&phi), &terms))
}

/// Residual of the conjectured action
/// `κ c(qu) ℬ(u) Φ = Λ_g Φ + Σ F(u,u_i) E_g(u_i) Φ({u,ū_i})` on lower/upper
/// Bethe vectors.
pub fn offshell_b_action(u: C64, us: &[C64], p: &ModelParams) -> Result<f64> {
    p.check_case(TransferCase::LowerUpper)?;
    let fns = p.fns();
    let phi = build_phi_lo_up(us, p)?.state;
    let b = build_double_row(u, p)?.b;
    let lhs = b.apply(&phi).scale(p.left.kappa * fns.c(fns.q() * u));
    let mut terms = vec![phi.scale(lambda_g(u, us, p)?)];
    terms.extend(unwanted_terms(u, us, p, Branch::G, &|r| build_phi_lo_up(r, p))?);
    Ok(offshell_residual(&lhs, &terms))
}

/// Lower/upper off-shell equation in the split form: diagonal-type terms
/// plus the explicit `κ c(qu) ℬ(u) Φ`.
pub fn offshell_lower_upper_split(u: C64, us: &[C64], p: &ModelParams) -> Result<f64> {
    p.check_case(TransferCase::LowerUpper)?;
    let fns = p.fns();
    let phi = build_phi_lo_up(us, p)?.state;
    let e = build_double_row(u, p)?;
    let t = transfer_from_entries(&e, p);
    let mut terms = vec![phi.scale(lambda_d(u, us, p)?)];
    terms.extend(unwanted_terms(u, us, p, Branch::D, &|r| build_phi_lo_up(r, p))?);
    terms.push(e.b.apply(&phi).scale(p.left.kappa * fns.c(fns.q() * u)));
    Ok(offshell_residual(&t.apply(&phi), &terms))
}

/// On-shell test: `‖t(u)Φ − ΛΦ‖ / ‖Φ‖` and the relative norm of `Φ`.
pub fn eigen_residual(case: TransferCase, u: C64, us: &[C64], p: &ModelParams) -> Result<(f64, f64)> {
    let bv = build_phi(case, us, p)?;
    let phi = &bv.state;
    let t = transfer_from_entries(&build_double_row(u, p)?, p);
    let lam = bethe::eigenvalue(case, u, us, p)?;
    let norm = phi.norm();
    if norm == 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    Ok((t.apply(phi).sub(&phi.scale(lam)).norm() / norm, bv.relative_norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{LeftBoundary, RightBoundary};
    use crate::kernel::{c, ZERO};
    use crate::vertex::{izergin_z, BulkParams};

    fn model(n: usize, case: TransferCase) -> ModelParams {
        let v = (0..n).map(|k| C64::from_polar(0.8 + 0.15 * k as f64, 0.4 * k as f64 - 0.3)).collect();
        ModelParams {
            bulk: BulkParams::new(C64::from_polar(1.3, 0.21), v).unwrap(),
            left: LeftBoundary { eps_plus: c(0.7, 0.2), eps_minus: c(-0.3, 0.9), kappa: c(0.5, -0.4), kappa_tilde: c(0.3, 0.2) },
            right: RightBoundary { nu_plus: c(1.1, -0.3), nu_minus: c(0.4, 0.5), tau: c(-0.6, 0.3), tau_tilde: ZERO },
        }
        .restricted(case)
    }

    fn roots(m: usize) -> Vec<C64> {
        (0..m).map(|k| C64::from_polar(0.7 + 0.3 * k as f64, 1.1 * k as f64 + 0.5)).collect()
    }

    #[test]
    fn vacua() {
        let om = vacuum(2);
        assert_eq!(om.amplitudes().as_slice(), &[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(covacuum(2).amplitudes().as_slice(), &[ZERO, ZERO, ZERO, ONE]);
        let jz = kernel::total_spin_z(2).unwrap();
        assert_eq!(jz.apply(&om), om);
        let p = model(2, TransferCase::Diag);
        let e = build_double_row(c(0.8, 0.3), &p).unwrap();
        assert!(e.c.apply(&om).norm() < 1e-13);
    }

    #[test]
    fn diag_vector_sectors() {
        let mut p = model(3, TransferCase::Diag);
        let us = roots(2);
        assert_eq!(build_phi_d(&[], &p).unwrap().state, vacuum(3));
        p.right.tau = ZERO;
        let v = build_phi_d(&us, &p).unwrap().state;
        assert!((v.sector_norm(2) - v.norm()).abs() < 1e-12 * v.norm());
        let p = model(3, TransferCase::Diag);
        let v = build_phi_d(&roots(3), &p).unwrap().state;
        for m in 0..=3 {
            assert!(v.sector_norm(m) > 1e-8 * v.norm(), "sector {m}");
        }
    }

    #[test]
    fn upper_vector_reduces_and_is_symmetric() {
        let mut p = model(3, TransferCase::UpperUpper);
        let us = roots(2);
        let a = build_phi_up(&us, &p).unwrap().state;
        let b = build_phi_up(&[us[1], us[0]], &p).unwrap().state;
        assert!(kernel::vector_residual(&a, &b) < 1e-10);
        p.left.kappa_tilde = ZERO;
        let up = build_phi_up(&us, &p).unwrap().state;
        assert!(kernel::vector_residual(&up, &build_phi_d(&us, &p).unwrap().state) < 1e-14);
    }

    #[test]
    fn explicit_small_vectors() {
        let p = model(1, TransferCase::LowerUpper);
        let u1 = c(0.9, 0.6);
        let v = build_phi_lo_up(&[u1], &p).unwrap().state;
        assert!(kernel::vector_residual(&explicit_phi_n1(u1, &p).unwrap(), &v) < 1e-12);
        let p = model(2, TransferCase::LowerUpper);
        let us = roots(2);
        let v = build_phi_lo_up(&us, &p).unwrap().state;
        assert!(kernel::vector_residual(&explicit_phi_n2(us[0], us[1], &p).unwrap(), &v) < 1e-11);
    }

    #[test]
    fn lowest_weight_overlap_is_zd() {
        let mut p = model(3, TransferCase::LowerUpper);
        p.right.tau = ZERO;
        let us = roots(3);
        let v = build_phi_lo_up(&us, &p).unwrap().state;
        let zd = bethe::zd_partition(&us, &p).unwrap();
        assert!(kernel::rel_diff(v.pairing(&covacuum(3)), zd) < 1e-10);
    }

    #[test]
    fn scalar_product_laws() {
        let p = model(3, TransferCase::LowerUpper);
        let us = roots(3);
        assert!(scalar_product_sup(&[us[0]], &[us[1]], &p).unwrap().norm() < 1e-12);
        let s = scalar_product_sup(&[us[0]], &us[1..], &p).unwrap();
        assert!(kernel::rel_diff(s, bethe::zd_partition(&us, &p).unwrap()) < 1e-10);
        let w = c(1.2, -0.5);
        let direct = scalar_product_sup(&[w], &us, &p).unwrap();
        assert!(kernel::rel_diff(direct, scalar_product_recursion(w, &us, &p).unwrap()) < 1e-9);
    }

    #[test]
    fn projection_examples() {
        let p = model(2, TransferCase::LowerUpper);
        let us = roots(2);
        let fns = p.fns();
        let coeffs = project_basis(&vacuum(2), &us, &p).unwrap();
        assert!((coeffs[0].coefficient - ONE).norm() < 1e-12);
        assert!(coeffs[1..].iter().all(|x| x.coefficient.norm() < 1e-12));
        let w = c(1.4, 0.3);
        let lw = build_monodromy(w, &p.bulk).unwrap().l12().apply(&vacuum(2));
        let coeffs = project_basis(&lw, &us, &p).unwrap();
        assert_eq!(coeffs[1].subset, vec![0]);
        let want0 = fns.b(w / us[1]) / fns.b(us[0] / us[1]);
        let want1 = fns.b(w / us[0]) / fns.b(us[1] / us[0]);
        assert!(kernel::rel_diff(coeffs[1].coefficient, want0) < 1e-10);
        assert!(kernel::rel_diff(coeffs[2].coefficient, want1) < 1e-10);
        assert!(coeffs[3].coefficient.norm() < 1e-10);
        let full = apply_chain(2, &[
            build_monodromy(us[0], &p.bulk).unwrap().l12().clone(),
            build_monodromy(us[1], &p.bulk).unwrap().l12().clone(),
        ]);
        assert!(kernel::rel_diff(full.pairing(&covacuum(2)), izergin_z(&us, &p.bulk).unwrap()) < 1e-12);
        assert!(matches!(project_basis(&vacuum(2), &[us[0], us[0]], &p), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn offshell_small() {
        let u = c(1.1, 0.35);
        for n in 1..=3 {
            for m in 0..=n {
                let us = roots(m);
                assert!(offshell_diag(u, &us, &model(n, TransferCase::Diag)).unwrap() < 1e-9);
                assert!(offshell_upper(u, &us, &model(n, TransferCase::UpperUpper)).unwrap() < 1e-9);
            }
            let p = model(n, TransferCase::LowerUpper);
            let us = roots(n);
            assert!(offshell_b_action(u, &us, &p).unwrap() < 1e-9, "n={n}");
            assert!(offshell_lower_upper(u, &us, &p).unwrap() < 1e-9);
            assert!(offshell_lower_upper_split(u, &us, &p).unwrap() < 1e-9);
        }
    }
}
