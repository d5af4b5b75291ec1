//! Solver runs compared against exact diagonalization, and the spectrum and
//! Hamiltonian commands.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bethe;
use crate::boundary::{
    build_hamiltonian_direct, build_hamiltonian_from_transfer, build_transfer, hamiltonian_shift,
    map_boundary_params, ModelParams, TransferCase,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::kernel::{self, c, ONE};
use crate::sampling;
use crate::solver::{solve_bethe, SolverOptions};
use crate::states;

/// Relative distance at which a Bethe eigenvalue counts as matched.
pub const MATCH_TOL: f64 = 1e-8;
/// Same for energies, which go through a finite difference.
pub const ENERGY_TOL: f64 = 1e-6;
/// Relative norm (norm over the product of creation-operator norms) below
/// which a Bethe vector counts as null.
pub const NULL_VECTOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeMatch {
    pub u: C64,
    pub lambda: C64,
    pub nearest: C64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSetReport {
    pub roots: Vec<C64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Norm relative to the creation operators, see [`states::BetheVector::relative_norm`].
    pub vector_norm: f64,
    pub null_vector: bool,
    /// `‖tΦ − ΛΦ‖/‖Φ‖` at the first probe; absent for null vectors.
    pub eigenvector_residual: Option<f64>,
    pub matches: Vec<ProbeMatch>,
    pub energy: Option<C64>,
    pub energy_distance: Option<f64>,
}

impl RootSetReport {
    pub fn max_match_distance(&self) -> f64 {
        self.matches.iter().map(|m| m.distance).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub sector_m: usize,
    pub starts: usize,
    pub failed: usize,
    pub root_sets: Vec<RootSetReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianMatch {
    pub spectrum: Vec<C64>,
    pub matched: usize,
    pub unmatched: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub case: TransferCase,
    pub n: usize,
    pub probes: Vec<C64>,
    pub sectors: Vec<SectorReport>,
    /// Exact transfer eigenvalues at the first probe, with multiplicity.
    pub exact: Vec<C64>,
    pub matched: usize,
    pub unmatched: Vec<C64>,
    /// Present for homogeneous chains only.
    pub hamiltonian: Option<HamiltonianMatch>,
}

impl SolveReport {
    pub fn root_sets(&self) -> impl Iterator<Item = &RootSetReport> {
        self.sectors.iter().flat_map(|s| s.root_sets.iter())
    }

    pub fn complete(&self) -> bool {
        self.unmatched.is_empty()
    }
}

/// Sectors solved for `case` on `n` sites.
pub fn sectors_for(case: TransferCase, n: usize) -> Vec<usize> {
    match case {
        TransferCase::LowerUpper => vec![n],
        _ => (0..=n).collect(),
    }
}

/// Spectral probe points: pole-free samples of the annulus.
pub fn probes(p: &ModelParams, count: usize, seed: u64) -> Vec<C64> {
    let mut rng = sampling::stream(seed, "probes");
    let fns = p.fns();
    let q = p.q();
    sampling::annulus_set(&mut rng, count, |u, _| {
        fns.b(q * u * u).norm() > 1e-3 && p.bulk.v.iter().all(|v| fns.b(u / v).norm() > 1e-3 && fns.b(q * u * v).norm() > 1e-3)
    })
}

fn relative(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// `(q−q^{-1})/2 · Λ'(1)/Λ(1) − shift`, with `Λ'` by the same stencil as the
/// operator formula.
pub fn energy_from_eigenvalue(case: TransferCase, us: &[C64], p: &ModelParams) -> Result<C64> {
    let lam = |u: C64| bethe::eigenvalue(case, u, us, p);
    let l1 = lam(ONE)?;
    if l1.norm() < 1e-14 {
        return Err(Error::Degenerate("eigenvalue vanishes at u = 1".into()));
    }
    let d4 = |h: f64| -> Result<C64> {
        Ok((-lam(c(1.0 + 2.0 * h, 0.0))? + 8.0 * lam(c(1.0 + h, 0.0))? - 8.0 * lam(c(1.0 - h, 0.0))?
            + lam(c(1.0 - 2.0 * h, 0.0))?)
            / (12.0 * h))
    };
    let h = 1e-3;
    let d = (16.0 * d4(h / 2.0)? - d4(h)?) / 15.0;
    let q = p.q();
    Ok((q - q.inv()) / 2.0 * d / l1 - hamiltonian_shift(p.n(), q))
}

fn match_multiset(exact: &[C64], candidates: &[C64], tol: f64) -> (usize, Vec<C64>) {
    let mut claimed = vec![false; exact.len()];
    for cand in candidates {
        let best = exact
            .iter()
            .enumerate()
            .filter(|(i, _)| !claimed[*i])
            .map(|(i, e)| (i, relative(*cand, *e)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, d)) = best {
            if d < tol {
                claimed[i] = true;
            }
        }
    }
    let unmatched: Vec<C64> = exact.iter().zip(&claimed).filter(|(_, &c)| !c).map(|(e, _)| *e).collect();
    (exact.len() - unmatched.len(), unmatched)
}

/// Solves every sector of `case`, evaluates each root set at three probes
/// against the exact transfer spectrum, tests the Bethe vector, and for a
/// homogeneous chain compares energies with the Hamiltonian spectrum.
pub fn run_solve_model(case: TransferCase, p: &ModelParams, opts: &SolverOptions) -> Result<SolveReport> {
    if case == TransferCase::GeneralTriangular {
        return Err(Error::CaseMismatch { case: case.to_string(), reason: "no Bethe ansatz".into() });
    }
    let n = p.n();
    let dim = 1usize << n;
    if dim > kernel::EIGEN_DIM_CAP {
        return Err(Error::DimensionCap { n, cap: kernel::EIGEN_DIM_CAP.trailing_zeros() as usize });
    }
    let probes = probes(p, 3, opts.seed);
    let spectra = probes
        .iter()
        .map(|&u| kernel::spectrum(&build_transfer(u, p, case)?))
        .collect::<Result<Vec<_>>>()?;
    let homogeneous = p.bulk.v.iter().all(|v| (v - ONE).norm() < 1e-14);
    let hspec = if homogeneous {
        let hp = map_boundary_params(&p.left, &p.right, p.q())?;
        Some(kernel::spectrum(&build_hamiltonian_direct(n, &hp)?)?)
    } else {
        None
    };

    let mut sectors = Vec::new();
    for m in sectors_for(case, n) {
        let out = solve_bethe(case, m, p, opts)?;
        let mut root_sets = Vec::new();
        for set in out.root_sets {
            let us = &set.roots.roots;
            let matches = probes
                .iter()
                .zip(&spectra)
                .map(|(&u, spec)| {
                    let lambda = bethe::eigenvalue(case, u, us, p)?;
                    let (i, _) = kernel::nearest(lambda, spec).ok_or(Error::Degenerate("empty spectrum".into()))?;
                    Ok(ProbeMatch { u, lambda, nearest: spec[i], distance: relative(lambda, spec[i]) })
                })
                .collect::<Result<Vec<_>>>()?;
            let (eig_res, norm) = states::eigen_residual(case, probes[0], us, p)?;
            let null_vector = norm < NULL_VECTOR;
            let (energy, energy_distance) = match &hspec {
                Some(hs) => match energy_from_eigenvalue(case, us, p) {
                    Ok(e) => {
                        let d = kernel::nearest(e, hs).map(|(i, _)| relative(e, hs[i]));
                        (Some(e), d)
                    }
                    Err(_) => (None, None),
                },
                None => (None, None),
            };
            root_sets.push(RootSetReport {
                roots: us.clone(),
                residuals: set.residuals.iter().map(|z| z.norm()).collect(),
                max_residual: set.max_residual,
                vector_norm: norm,
                null_vector,
                eigenvector_residual: (!null_vector).then_some(eig_res),
                matches,
                energy,
                energy_distance,
            });
        }
        sectors.push(SectorReport { sector_m: m, starts: out.starts, failed: out.failed, root_sets });
    }

    let lambdas: Vec<C64> =
        sectors.iter().flat_map(|s| s.root_sets.iter()).filter(|r| !r.null_vector).map(|r| r.matches[0].lambda).collect();
    let (matched, unmatched) = match_multiset(&spectra[0], &lambdas, MATCH_TOL);
    let hamiltonian = hspec.map(|hs| {
        let energies: Vec<C64> = sectors
            .iter()
            .flat_map(|s| s.root_sets.iter())
            .filter(|r| !r.null_vector)
            .filter_map(|r| r.energy)
            .collect();
        let (matched, unmatched) = match_multiset(&hs, &energies, ENERGY_TOL);
        HamiltonianMatch { spectrum: hs, matched, unmatched }
    });
    Ok(SolveReport { case, n, probes, sectors, exact: spectra[0].clone(), matched, unmatched, hamiltonian })
}

pub fn run_solve(cfg: &RunConfig, case: TransferCase, n: usize, opts: &SolverOptions) -> Result<SolveReport> {
    run_solve_model(case, &cfg.model(n, case)?, opts)
}

/// Eigenvalues of `t(u)` for the configured model.
pub fn transfer_spectrum(cfg: &RunConfig, case: TransferCase, n: usize, u: C64) -> Result<Vec<C64>> {
    let p = cfg.model(n, case)?;
    let dim = 1usize << n;
    if dim > kernel::EIGEN_DIM_CAP {
        return Err(Error::DimensionCap { n, cap: kernel::EIGEN_DIM_CAP.trailing_zeros() as usize });
    }
    kernel::spectrum(&build_transfer(u, &p, case)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianReport {
    pub n: usize,
    pub spectrum: Vec<C64>,
    /// Entrywise max deviation between the transfer-matrix formula and the
    /// explicit Hamiltonian, when requested.
    pub check_residual: Option<f64>,
}

/// Hamiltonian with the configured boundary fields (all of them, including
/// `τ̃`), its spectrum, and optionally the transfer-matrix cross-check.
pub fn hamiltonian(cfg: &RunConfig, n: usize, check: bool) -> Result<HamiltonianReport> {
    let p = cfg.model(n, TransferCase::GeneralTriangular)?;
    let mut p = p;
    p.right.tau_tilde = cfg.tau_tilde;
    let hp = map_boundary_params(&p.left, &p.right, p.q())?;
    let h = build_hamiltonian_direct(n, &hp)?;
    let spectrum = if (1usize << n) <= kernel::EIGEN_DIM_CAP { kernel::spectrum(&h)? } else { Vec::new() };
    let check_residual = if check {
        let mut hom = p.clone();
        hom.bulk = crate::vertex::BulkParams::homogeneous(p.q(), n)?;
        Some((&build_hamiltonian_from_transfer(&hom)? - &h).max_abs())
    } else {
        None
    };
    Ok(HamiltonianReport { n, spectrum, check_residual })
}
