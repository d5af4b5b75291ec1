//! Multi-start damped Newton solver for the Bethe equations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{self, RootSet};
use crate::boundary::{ModelParams, TransferCase};
use crate::error::{Error, Result};
use crate::kernel;
use crate::par::Executor;
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Stop as soon as `‖E‖_∞` drops below this.
    pub tol: f64,
    /// Accept a stalled iteration whose `‖E‖_∞` is below this.
    pub accept: f64,
    pub jacobian_step: f64,
    pub executor: Executor,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_starts: 64,
            seed: 0,
            max_iter: 200,
            max_halvings: 30,
            tol: 1e-11,
            accept: 1e-9,
            jacobian_step: 1e-6,
            executor: Executor::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedSet {
    pub roots: RootSet,
    /// Normalized residuals, see [`bethe::normalized_residuals`].
    pub residuals: Vec<C64>,
    pub max_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub root_sets: Vec<SolvedSet>,
    pub starts: usize,
    /// Starts that did not converge or converged onto a rejected set.
    pub failed: usize,
}

/// Roots in the orbit of `u² = ±1` solve every Bethe equation identically
/// and carry a vanishing creation operator.
const TRIVIAL_EPS: f64 = 1e-6;

fn is_trivial(u: C64, fns: &crate::scalar::ScalarFns) -> bool {
    let q = fns.q();
    fns.b(u * u).norm().min(fns.b(q * q * u * u).norm()) < TRIVIAL_EPS
}

/// Newton on the normalized equations can also converge onto a common pole
/// of both terms; sets this close to a denominator zero are rejected.
const POLE_GUARD: f64 = 1e-5;

fn near_pole(us: &[C64], fns: &crate::scalar::ScalarFns) -> bool {
    let q = fns.q();
    us.iter().enumerate().any(|(i, &u)| {
        fns.b(q * u * u).norm() < POLE_GUARD
            || us[i + 1..].iter().any(|&v| fns.b(u / v).norm() < POLE_GUARD || fns.b(q * u * v).norm() < POLE_GUARD)
    })
}

fn residual_in_log(case: TransferCase, z: &[C64], p: &ModelParams) -> Option<Vec<C64>> {
    let us: Vec<C64> = z.iter().map(|z| z.exp()).collect();
    let e = bethe::normalized_residuals(case, &us, p).ok()?;
    e.iter().all(|x| x.is_finite()).then_some(e)
}

fn norm_inf(e: &[C64]) -> f64 {
    bethe::max_abs(e)
}

/// Damped Newton iteration in `z = log u` from one start.
fn newton(case: TransferCase, start: &[C64], p: &ModelParams, opts: &SolverOptions) -> Option<Vec<C64>> {
    let m = start.len();
    let mut z: Vec<C64> = start.iter().map(|u| u.ln()).collect();
    let mut e = residual_in_log(case, &z, p)?;
    let mut nrm = norm_inf(&e);
    for _ in 0..opts.max_iter {
        if nrm < opts.tol {
            break;
        }
        let h = opts.jacobian_step;
        let mut jac = DMatrix::<C64>::zeros(m, m);
        for j in 0..m {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            let ep = residual_in_log(case, &zp, p)?;
            let em = residual_in_log(case, &zm, p)?;
            for i in 0..m {
                jac[(i, j)] = (ep[i] - em[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(m, e.iter().map(|x| -x));
        let delta = kernel::solve(&jac, &rhs).ok()?;
        if delta.iter().any(|d| !d.is_finite()) {
            return None;
        }
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let zt: Vec<C64> = z.iter().zip(delta.iter()).map(|(a, d)| a + d * lam).collect();
            if let Some(et) = residual_in_log(case, &zt, p) {
                let nt = norm_inf(&et);
                if nt < nrm {
                    z = zt;
                    e = et;
                    nrm = nt;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (nrm < opts.accept).then(|| z.iter().map(|z| z.exp()).collect())
}

fn starts(m: usize, p: &ModelParams, opts: &SolverOptions) -> Vec<Vec<C64>> {
    let mut rng = sampling::stream(opts.seed, "solve");
    let sq = p.q().sqrt();
    (0..opts.n_starts)
        .map(|_| {
            (0..m)
                .map(|_| {
                    if p.n() > 0 && rng.random_bool(0.5) {
                        let v = p.bulk.v[rng.random_range(0..p.n())];
                        let shift = if rng.random_bool(0.5) { sq } else { sq.inv() };
                        v * shift * (1.0 + sampling::small(&mut rng, 0.2))
                    } else {
                        sampling::annulus(&mut rng)
                    }
                })
                .collect()
        })
        .collect()
}

/// Solves the Bethe equations of `case` in sector `sector_m` from
/// `opts.n_starts` seeded starts. Converged sets are canonicalized,
/// deduplicated and returned in canonical order.
pub fn solve_bethe(case: TransferCase, sector_m: usize, p: &ModelParams, opts: &SolverOptions) -> Result<SolveOutcome> {
    p.check_case(case)?;
    match case {
        TransferCase::GeneralTriangular => {
            return Err(Error::CaseMismatch { case: case.to_string(), reason: "no Bethe equations".into() })
        }
        TransferCase::LowerUpper if sector_m != p.n() => {
            return Err(Error::CaseMismatch {
                case: case.to_string(),
                reason: format!("sector must equal N = {}", p.n()),
            })
        }
        _ if sector_m > p.n() => {
            return Err(Error::Inadmissible(format!("sector {sector_m} exceeds N = {}", p.n())));
        }
        _ => {}
    }
    let fns = p.fns();
    if sector_m == 0 {
        let roots = RootSet::new(&[], case, &fns)?;
        return Ok(SolveOutcome {
            root_sets: vec![SolvedSet { roots, residuals: vec![], max_residual: 0.0 }],
            starts: 1,
            failed: 0,
        });
    }
    let all_starts = starts(sector_m, p, opts);
    let results = opts.executor.map(&all_starts, |s| newton(case, s, p, opts));

    let mut found: Vec<SolvedSet> = Vec::new();
    let mut failed = 0;
    for us in results {
        let Some(us) = us else {
            failed += 1;
            continue;
        };
        if us.iter().any(|&u| is_trivial(u, &fns)) || near_pole(&us, &fns) {
            failed += 1;
            continue;
        }
        let Ok(roots) = RootSet::new(&us, case, &fns) else {
            failed += 1;
            continue;
        };
        if found.iter().any(|s| s.roots.matches(&roots, 1e-7)) {
            continue;
        }
        let Ok(residuals) = bethe::normalized_residuals(case, &roots.roots, p) else {
            failed += 1;
            continue;
        };
        let max_residual = norm_inf(&residuals);
        found.push(SolvedSet { roots, residuals, max_residual });
    }
    found.sort_by(|a, b| {
        let key = |s: &SolvedSet| s.roots.roots.iter().map(|z| (z.norm(), z.arg())).collect::<Vec<_>>();
        key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(SolveOutcome { root_sets: found, starts: opts.n_starts, failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{build_transfer, LeftBoundary, RightBoundary};
    use crate::kernel::{c, ZERO};
    use crate::vertex::BulkParams;

    fn model(n: usize, case: TransferCase) -> ModelParams {
        let v = (0..n).map(|k| C64::from_polar(0.8 + 0.15 * k as f64, 0.4 * k as f64 - 0.3)).collect();
        ModelParams {
            bulk: BulkParams::new(C64::from_polar(1.3, 0.21), v).unwrap(),
            left: LeftBoundary { eps_plus: c(0.7, 0.2), eps_minus: c(-0.3, 0.9), kappa: c(0.5, -0.4), kappa_tilde: c(0.3, 0.2) },
            right: RightBoundary { nu_plus: c(1.1, -0.3), nu_minus: c(0.4, 0.5), tau: c(-0.6, 0.3), tau_tilde: ZERO },
        }
        .restricted(case)
    }

    fn matched(case: TransferCase, p: &ModelParams, set: &RootSet) -> f64 {
        let u = c(0.73, 0.41);
        let spec = kernel::spectrum(&build_transfer(u, p, case).unwrap()).unwrap();
        let lam = bethe::eigenvalue(case, u, &set.roots, p).unwrap();
        kernel::nearest(lam, &spec).unwrap().1 / lam.norm().max(1.0)
    }

    #[test]
    fn lower_upper_single_site() {
        let p = model(1, TransferCase::LowerUpper);
        let out = solve_bethe(TransferCase::LowerUpper, 1, &p, &SolverOptions::default()).unwrap();
        assert!(!out.root_sets.is_empty());
        for s in &out.root_sets {
            assert!(s.max_residual < 1e-9);
            assert!(matched(TransferCase::LowerUpper, &p, &s.roots) < 1e-8);
        }
    }

    #[test]
    fn diag_two_sites_one_root() {
        let p = model(2, TransferCase::Diag);
        let out = solve_bethe(TransferCase::Diag, 1, &p, &SolverOptions::default()).unwrap();
        assert!(!out.root_sets.is_empty());
        for s in &out.root_sets {
            assert!(matched(TransferCase::Diag, &p, &s.roots) < 1e-8);
        }
    }

    #[test]
    fn deterministic_across_executors() {
        let p = model(2, TransferCase::LowerUpper);
        let seq = SolverOptions { executor: Executor::Sequential, n_starts: 24, ..Default::default() };
        let par = SolverOptions { executor: Executor::Parallel, ..seq };
        let a = solve_bethe(TransferCase::LowerUpper, 2, &p, &seq).unwrap();
        let b = solve_bethe(TransferCase::LowerUpper, 2, &p, &par).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sector_checks() {
        let p = model(2, TransferCase::LowerUpper);
        assert!(solve_bethe(TransferCase::LowerUpper, 1, &p, &SolverOptions::default()).is_err());
        let p = model(2, TransferCase::Diag);
        assert!(solve_bethe(TransferCase::Diag, 3, &p, &SolverOptions::default()).is_err());
        let out = solve_bethe(TransferCase::Diag, 0, &p, &SolverOptions::default()).unwrap();
        assert_eq!(out.root_sets.len(), 1);
    }
}
