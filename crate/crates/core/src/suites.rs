//! Property suites. Each suite draws generic parameters from its own seeded
//! stream, evaluates residuals (concurrently when the executor allows) and
//! reports the worst one per check.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bethe::{self, weighted_limit};
use crate::boundary::{
    self, build_double_row, build_hamiltonian_direct, build_hamiltonian_from_transfer, build_modified_ops_lower,
    build_modified_ops_upper, build_transfer, double_row_closed_form, map_boundary_params,
    transfer_trace_form, LeftBoundary, ModelParams, RightBoundary, TransferCase,
};
use crate::config::{RunConfig, OPERATOR_TOL};
use crate::error::{Error, Result};
use crate::kernel::{self, rel_diff as rel, QOperator, StateVector, ONE, ZERO};
use crate::par::Executor;
use crate::report::{digest, CheckReport};
use crate::runs::{self, run_solve_model};
use crate::sampling;
use crate::scalar::ScalarFns;
use crate::solver::SolverOptions;
use crate::states::{self, covacuum, vacuum};
use crate::vertex::{self, build_monodromy, izergin_z, l12_chain, vacuum_lambdas, BulkParams};

/// Modulus below which a sampled rational factor is rejected.
pub const POLE_REJECT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub executor: Executor,
    /// Fill `elapsed_ms`; off by default so reports are byte-stable.
    pub record_timing: bool,
}

type SuiteFn = fn(&mut Ctx) -> Result<Vec<CheckReport>>;

pub struct SuiteInfo {
    pub id: &'static str,
    pub description: &'static str,
    run: SuiteFn,
}

macro_rules! suite {
    ($id:literal, $desc:literal, $f:ident) => {
        SuiteInfo { id: $id, description: $desc, run: $f }
    };
}

pub static SUITES: &[SuiteInfo] = &[
    suite!("abcd-relations", "exchange relations of the double-row entries, N = 2..4", abcd_relations),
    suite!("bethe-limits", "E_d, E_g equal the weighted limits of their eigenvalue branches", bethe_limits),
    suite!("bv-symmetry", "Bethe vectors are symmetric in their roots", bv_symmetry),
    suite!("closed-form", "double-row entries from l_ij products match the R-product", closed_form),
    suite!("conjecture", "off-shell action of B(u) on lower/upper Bethe vectors", conjecture),
    suite!("crossing", "f, h, m crossing invariance and f(q^-1 u^-1, v) = h(u, v)", crossing),
    suite!("diag-nilpotency", "B(u) annihilates the lowest-weight vector when tau = 0", diag_nilpotency),
    suite!("dre", "dual reflection equation", dre),
    suite!("explicit-vectors", "one- and two-site Bethe vectors from l_ij operators", explicit_vectors),
    suite!("hamiltonian", "Hamiltonian from the transfer matrix matches the explicit chain", hamiltonian),
    suite!("izergin-symmetry", "Izergin determinant symmetric in both parameter sets", izergin_symmetry),
    suite!("kernel", "embedding, Kronecker and eigenvalue sanity checks", kernel_suite),
    suite!("l-relations", "exchange relations of l_ij with l_12, N = 2..4", l_relations),
    suite!("lagrange", "two-site Lagrange form of l_12", lagrange),
    suite!("lambda-symmetry", "eigenvalue branches: root permutations and crossing", lambda_symmetry),
    suite!("main-result", "full lower/upper off-shell equation, direct and split forms", main_result),
    suite!("modified-lower", "shifted A, D for lower/upper: transfer rewrite and exchange relations", modified_lower),
    suite!("modified-upper", "shifted A, D, B for upper/upper: transfer rewrite and exchange relations", modified_upper),
    suite!("nilpotency", "l_12 chains: N+1 factors vanish, N factors give the Izergin coefficient", nilpotency),
    suite!("offshell-diag", "off-shell equation for the diagonal case", offshell_diag),
    suite!("offshell-upper", "off-shell equation for the upper/upper case", offshell_upper),
    suite!("onshell", "solver roots: eigenvalues in the exact spectrum, Bethe vectors are eigenvectors", onshell),
    suite!("projection", "coordinates in the l_12 product basis", projection),
    suite!("re", "reflection equation", re),
    suite!("rll", "RLL relation on C^2 x C^2 x H, N = 1..4", rll),
    suite!("scalar-products", "S_up vanishing, Z_d and recursion laws", scalar_products),
    suite!("transfer", "transfer matrices commute and equal the trace form", transfer),
    suite!("uwt", "scalar identities between g, n, k, w, F and phi for k+ and k-", uwt),
    suite!("vacuum", "actions of A, D, C on the highest-weight vector", vacuum_actions),
    suite!("ybe", "Yang-Baxter equation", ybe),
    suite!("zd", "Z_d determinant equals the lowest-weight overlap", zd),
];

pub fn list_suites() -> &'static [SuiteInfo] {
    SUITES
}

pub fn suite_ids() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.id).collect()
}

pub fn run_suite(id: &str, cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    let info = SUITES.iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownSuite(id.to_string()))?;
    let mut cx = Ctx::new(info.id, cfg, opts)?;
    let mut reports = (info.run)(&mut cx)?;
    reports.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(reports)
}

/// Suites selected by the config (all when the list is empty), ordered by id.
pub fn run_suites(cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckReport>> {
    let mut ids: Vec<String> =
        if cfg.suites.is_empty() { suite_ids().into_iter().map(String::from).collect() } else { cfg.suites.clone() };
    ids.sort();
    ids.dedup();
    let mut out = Vec::new();
    for id in ids {
        out.extend(run_suite(&id, cfg, opts)?);
    }
    Ok(out)
}

struct Ctx<'a> {
    suite: &'static str,
    cfg: &'a RunConfig,
    opts: &'a RunOptions,
    rng: ChaCha8Rng,
    fns: ScalarFns,
}

#[derive(Serialize)]
struct DigestInput<'a> {
    check_id: &'a str,
    seed: u64,
    q: C64,
    n: Option<usize>,
    samples: usize,
}

impl<'a> Ctx<'a> {
    fn new(suite: &'static str, cfg: &'a RunConfig, opts: &'a RunOptions) -> Result<Self> {
        Ok(Self { suite, cfg, opts, rng: sampling::stream(cfg.seed, suite), fns: ScalarFns::new(cfg.q)? })
    }

    fn q(&self) -> C64 {
        self.cfg.q
    }

    fn ns(&self, lo: usize, hi: usize) -> Vec<usize> {
        match self.cfg.n {
            Some(n) => vec![n],
            None => (lo..=hi).collect(),
        }
    }

    /// `all` narrowed to the configured case when one is set.
    fn cases(&self, all: &[TransferCase]) -> Vec<TransferCase> {
        all.iter().copied().filter(|c| self.cfg.case.is_none_or(|k| k == *c)).collect()
    }

    fn count(&self, default: usize) -> usize {
        self.cfg.samples.unwrap_or(default)
    }

    fn id(&self, name: &str) -> String {
        if name.is_empty() { self.suite.to_string() } else { format!("{}.{name}", self.suite) }
    }

    /// Runs `f` on every sample; `f` returns one residual per name. Emits
    /// nothing when there are no samples, which happens only when `--n` or
    /// `--case` excludes the check.
    fn checks<S: Sync>(
        &self,
        names: &[&str],
        default_tol: f64,
        operator: bool,
        samples: &[S],
        f: impl Fn(&S) -> Result<Vec<f64>> + Sync + Send,
    ) -> Vec<CheckReport> {
        if samples.is_empty() {
            return Vec::new();
        }
        let start = Instant::now();
        let results = self.opts.executor.map(samples, |s| f(s));
        let elapsed = start.elapsed().as_millis() as u64;
        names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let id = self.id(name);
                let worst = results
                    .iter()
                    .map(|r| match r {
                        Ok(v) => v.get(k).copied().unwrap_or(f64::INFINITY),
                        Err(_) => f64::INFINITY,
                    })
                    .fold(0.0, |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) });
                let tol = self.cfg.tolerance(&id, default_tol, operator);
                let d = digest(&DigestInput { check_id: &id, seed: self.cfg.seed, q: self.cfg.q, n: self.cfg.n, samples: samples.len() });
                let mut r = CheckReport::new(id, d, samples.len(), worst, tol);
                if self.opts.record_timing {
                    r.elapsed_ms = elapsed;
                }
                r
            })
            .collect()
    }

    fn check<S: Sync>(
        &self,
        name: &str,
        default_tol: f64,
        operator: bool,
        samples: &[S],
        f: impl Fn(&S) -> Result<f64> + Sync + Send,
    ) -> Vec<CheckReport> {
        self.checks(&[name], default_tol, operator, samples, |s| Ok(vec![f(s)?]))
    }

    fn z(&mut self) -> C64 {
        sampling::annulus(&mut self.rng)
    }

    fn bulk(&mut self, n: usize) -> BulkParams {
        let fns = self.fns;
        let q = self.q();
        loop {
            let v = sampling::annulus_set(&mut self.rng, n, |z, prev| {
                prev.iter().all(|w| fns.b(z / w).norm() > 1e-3 && fns.b(z * w).norm() > 1e-3)
            });
            if let Ok(b) = BulkParams::new(q, v) {
                return b;
            }
        }
    }

    fn left(&mut self) -> LeftBoundary {
        loop {
            let l = LeftBoundary { eps_plus: self.z(), eps_minus: self.z(), kappa: self.z(), kappa_tilde: self.z() };
            if (l.eps_plus + l.eps_minus).norm() > 0.1 {
                return l;
            }
        }
    }

    fn right(&mut self) -> RightBoundary {
        loop {
            let r = RightBoundary { nu_plus: self.z(), nu_minus: self.z(), tau: self.z(), tau_tilde: ZERO };
            if (r.nu_plus + r.nu_minus).norm() > 0.1 {
                return r;
            }
        }
    }

    fn model(&mut self, n: usize, case: TransferCase) -> ModelParams {
        let bulk = self.bulk(n);
        let left = self.left();
        let right = self.right();
        ModelParams { bulk, left, right }.restricted(case)
    }

    /// Spectral points clear of the poles of every rational function used
    /// against `p` and against each other and `avoid`.
    fn points(&mut self, count: usize, p: &ModelParams, avoid: &[C64]) -> Vec<C64> {
        let fns = self.fns;
        let q = self.q();
        let ok_pair = |a: C64, b: C64| {
            fns.b(a / b).norm() > POLE_REJECT && fns.b(q * a * b).norm() > POLE_REJECT && fns.b(a * b).norm() > POLE_REJECT
        };
        sampling::annulus_set(&mut self.rng, count, |u, prev| {
            fns.b(q * u * u).norm() > POLE_REJECT
                && fns.b(q * q * u * u).norm() > POLE_REJECT
                && fns.b(u * u).norm() > POLE_REJECT
                && p.bulk.v.iter().all(|&v| {
                    fns.b(u / v).norm() > POLE_REJECT
                        && fns.b(q * u * v).norm() > POLE_REJECT
                        && fns.b(q * u / v).norm() > POLE_REJECT
                        && fns.b(u * v).norm() > POLE_REJECT
                })
                && prev.iter().chain(avoid).all(|&w| ok_pair(u, w))
        })
    }

    fn local(&mut self) -> kernel::Local {
        kernel::Local::new(self.z(), self.z(), self.z(), self.z())
    }
}

fn op_res(a: &QOperator, b: &QOperator) -> f64 {
    kernel::residual(a, b).unwrap_or(f64::INFINITY)
}

fn vec_rel(a: &StateVector, b: &StateVector) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 { 0.0 } else { a.sub(b).norm() / scale }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn kernel_suite(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let count = cx.count(50);
    let mut out = Vec::new();

    let embeds: Vec<_> = (0..count)
        .map(|k| {
            let n = 2 + k % 3;
            let mut sites: Vec<usize> = (1..=n).collect();
            sites.shuffle(&mut cx.rng);
            (n, sites[0], sites[1], cx.local(), cx.local())
        })
        .collect();
    out.extend(cx.check("embed-commute", 1e-14, false, &embeds, |(n, i, j, a, b)| {
        let ea = kernel::embed_local(a, *i, *n)?;
        let eb = kernel::embed_local(b, *j, *n)?;
        Ok(op_res(&(&ea * &eb), &(&eb * &ea)))
    }));

    let dense = |m: &kernel::Local| DMatrix::from_fn(2, 2, |r, c| m[(r, c)]);
    let krons: Vec<_> = (0..count).map(|_| [cx.local(), cx.local(), cx.local(), cx.local()]).collect();
    out.extend(cx.check("kron-mixed", 1e-13, false, &krons, |[a, b, c, d]| {
        let (a, b, c, d) = (dense(a), dense(b), dense(c), dense(d));
        let lhs = kernel::kron(&a, &b) * kernel::kron(&c, &d);
        let rhs = kernel::kron(&(&a * &c), &(&b * &d));
        Ok(vertex::dense_residual(&lhs, &rhs))
    }));

    let mats: Vec<DMatrix<C64>> = (0..count).map(|_| DMatrix::from_fn(8, 8, |_, _| sampling::annulus(&mut cx.rng))).collect();
    out.extend(cx.check("spectrum-triangular", 1e-10, false, &mats, |m| {
        let t = DMatrix::from_fn(8, 8, |r, c| if r <= c { m[(r, c)] } else { ZERO });
        let spec = kernel::spectrum_of(&t)?;
        Ok(max_of((0..8).map(|i| {
            let d = t[(i, i)];
            kernel::nearest(d, &spec).map(|(_, dist)| dist / d.norm().max(1.0)).unwrap_or(f64::INFINITY)
        })))
    }));
    out.extend(cx.check("spectrum-trace", 1e-10, false, &mats, |m| {
        let spec = kernel::spectrum_of(m)?;
        let sum: C64 = spec.iter().sum();
        Ok((sum - m.trace()).norm() / m.trace().norm().max(1.0))
    }));
    Ok(out)
}

fn ybe(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples: Vec<_> = (0..cx.count(100)).map(|_| (cx.z(), cx.z(), cx.z())).collect();
    let fns = cx.fns;
    Ok(cx.check("", 1e-11, false, &samples, |&(a, b, c)| Ok(vertex::ybe_residual(a, b, c, &fns))))
}

fn rll(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let ns = cx.ns(1, 4);
    let per = cx.count(100).div_ceil(ns.len());
    let mut samples = Vec::new();
    for &n in &ns {
        for _ in 0..per {
            let b = cx.bulk(n);
            samples.push((b, cx.z(), cx.z()));
        }
    }
    Ok(cx.check("", 1e-11, false, &samples, |(b, u, v)| vertex::rll_residual(*u, *v, b)))
}

fn re(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples: Vec<_> = (0..cx.count(100))
        .map(|_| {
            let mut r = cx.right();
            r.tau_tilde = cx.z();
            (r, cx.z(), cx.z())
        })
        .collect();
    let fns = cx.fns;
    Ok(cx.check("", 1e-12, false, &samples, |(r, u, v)| Ok(boundary::re_residual(*u, *v, r, &fns))))
}

fn dre(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples: Vec<_> = (0..cx.count(100)).map(|_| (cx.left(), cx.z(), cx.z())).collect();
    let fns = cx.fns;
    Ok(cx.check("", 1e-12, false, &samples, |(l, u, v)| Ok(boundary::dre_residual(*u, *v, l, &fns))))
}

fn l_relations(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(2, 4) {
        for _ in 0..cx.count(20) {
            let p = cx.model(n, TransferCase::Diag);
            let pts = cx.points(2, &p, &[]);
            samples.push((p.bulk, pts[0], pts[1]));
        }
    }
    Ok(cx.checks(&["l11-l12", "l12-l12", "l21-l12", "l22-l12"], OPERATOR_TOL, true, &samples, |(b, u, v)| {
        let [r12, r11, r22, r21] = vertex::l_relation_residuals(*u, *v, b)?;
        Ok(vec![r11, r12, r21, r22])
    }))
}

fn izergin_symmetry(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(2, 4) {
        for _ in 0..cx.count(20) {
            let p = cx.model(n, TransferCase::Diag);
            let us = cx.points(n, &p, &[]);
            let mut pu = us.clone();
            pu.shuffle(&mut cx.rng);
            let mut pv = p.bulk.v.clone();
            pv.shuffle(&mut cx.rng);
            samples.push((p.bulk, us, pu, pv));
        }
    }
    Ok(cx.check("", 1e-10, false, &samples, |(b, us, pu, pv)| {
        let z = izergin_z(us, b)?;
        let bp = BulkParams { q: b.q, v: pv.clone() };
        Ok(rel(z, izergin_z(pu, b)?).max(rel(z, izergin_z(us, &bp)?)))
    }))
}

fn lagrange(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples: Vec<_> = (0..cx.count(50))
        .map(|_| {
            let p = cx.model(2, TransferCase::Diag);
            let pts = cx.points(3, &p, &[]);
            (p.bulk, pts)
        })
        .collect();
    Ok(cx.check("", 1e-11, false, &samples, |(b, pts)| vertex::lagrange_residual(pts[0], pts[1], pts[2], b)))
}

fn vacuum_actions(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let u = cx.points(1, &p, &[])[0];
            samples.push((p, u));
        }
    }
    Ok(cx.checks(&["a", "c", "d", "lambda"], 1e-9, false, &samples, |(p, u)| {
        let fns = p.fns();
        let n = p.n();
        let e = build_double_row(*u, p)?;
        let om = vacuum(n);
        let w = fns.cross(*u);
        let lam = |x: C64| bethe::lambda_vacuum(x, &p.bulk);
        let a = vec_rel(&e.a.apply(&om), &om.scale(p.right.k(*u) * lam(*u)));
        let d = vec_rel(&e.d.apply(&om), &om.scale(fns.phi(w) * p.right.k(w) * lam(w)));
        let c = e.c.apply(&om).norm() / e.c.frobenius().max(1.0);
        let (l1, _) = vacuum_lambdas(*u, &p.bulk);
        let (_, l2w) = vacuum_lambdas(w, &p.bulk);
        let sign = if n % 2 == 0 { ONE } else { -ONE };
        Ok(vec![a, c, d, rel(lam(*u), sign * l1 * l2w)])
    }))
}

fn nilpotency(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::Diag);
            let pts = cx.points(n + 1, &p, &[]);
            samples.push((p.bulk, pts));
        }
    }
    Ok(cx.checks(&["izergin", "overflow"], 1e-9, false, &samples, |(b, pts)| {
        let n = b.n();
        let us = &pts[..n];
        let chain = l12_chain(us, b)?;
        let last = (1usize << n) - 1;
        let coef = chain.get(last);
        let rest = chain.sub(&covacuum(n).scale(coef)).norm() / coef.norm();
        let z = rel(coef, izergin_z(us, b)?).max(rest);
        let more = l12_chain(pts, b)?.norm() / chain.norm().max(1.0);
        Ok(vec![z, more])
    }))
}

fn diag_nilpotency(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for _ in 0..cx.count(10) {
            let mut p = cx.model(n, TransferCase::Diag);
            p.right.tau = ZERO;
            let u = cx.points(1, &p, &[])[0];
            samples.push((p, u));
        }
    }
    Ok(cx.check("", 1e-12, false, &samples, |(p, u)| {
        let b = build_double_row(*u, p)?.b;
        Ok(b.apply(&covacuum(p.n())).norm() / b.frobenius().max(1.0))
    }))
}

fn zd(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for _ in 0..cx.count(10) {
            let mut p = cx.model(n, TransferCase::Diag);
            p.right.tau = ZERO;
            let us = cx.points(n, &p, &[]);
            samples.push((p, us));
        }
    }
    Ok(cx.check("", 1e-9, false, &samples, |(p, us)| {
        let overlap = states::build_phi_d(us, p)?.state.pairing(&covacuum(p.n()));
        Ok(rel(overlap, bethe::zd_partition(us, p)?))
    }))
}

fn closed_form(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 3) {
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let u = cx.points(1, &p, &[])[0];
            samples.push((p, u));
        }
    }
    Ok(cx.checks(&["a", "b", "c", "d"], OPERATOR_TOL, true, &samples, |(p, u)| {
        let x = build_double_row(*u, p)?;
        let y = double_row_closed_form(*u, p)?;
        Ok(vec![op_res(&x.a, &y.a), op_res(&x.b, &y.b), op_res(&x.c, &y.c), op_res(&x.d, &y.d)])
    }))
}

fn abcd_relations(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(2, 4) {
        for _ in 0..cx.count(20) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let pts = cx.points(2, &p, &[]);
            samples.push((p, pts[0], pts[1]));
        }
    }
    Ok(cx.checks(&boundary::ABCD_RELATIONS, OPERATOR_TOL, true, &samples, |(p, u, v)| {
        Ok(boundary::abcd_relation_residuals(*u, *v, p)?.to_vec())
    }))
}

fn uwt(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples: Vec<_> = (0..cx.count(50))
        .map(|_| {
            let p = cx.model(1, TransferCase::GeneralTriangular);
            let pts = cx.points(2, &p, &[]);
            (p, pts[0], pts[1])
        })
        .collect();
    Ok(cx.checks(&["k-minus", "k-plus"], 1e-12, false, &samples, |(p, u, v)| {
        let [p1, p2, m1, m2] = boundary::uwt_residuals(*u, *v, p);
        Ok(vec![m1.max(m2), p1.max(p2)])
    }))
}

fn crossing(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples: Vec<_> = (0..cx.count(50))
        .map(|_| {
            let p = cx.model(1, TransferCase::Diag);
            let pts = cx.points(2, &p, &[]);
            (pts[0], pts[1])
        })
        .collect();
    let fns = cx.fns;
    Ok(cx.checks(&["f", "f-to-h", "h", "m"], 1e-11, false, &samples, |&(u, v)| {
        let vc = fns.cross(v);
        Ok(vec![
            rel(fns.f(u, vc), fns.f(u, v)),
            rel(fns.f(fns.cross(u), v), fns.h(u, v)),
            rel(fns.h(u, vc), fns.h(u, v)),
            rel(fns.m_fn(u, vc), fns.m_fn(u, v)),
        ])
    }))
}

fn modified_upper(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 3) {
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::UpperUpper);
            let pts = cx.points(2, &p, &[]);
            samples.push((p, pts[0], pts[1]));
        }
    }
    Ok(cx.checks(&["ab", "bb", "db", "transfer"], OPERATOR_TOL, true, &samples, |(p, u, v)| {
        let fns = p.fns();
        let m0 = build_modified_ops_upper(*u, 0, p)?;
        let t = build_transfer(*u, p, TransferCase::UpperUpper)?;
        let rebuilt = kernel::combine(&[(fns.phi(*u) * p.left.k(*u), &m0.a), (p.left.k(fns.cross(*u)), &m0.d)]);
        let mut worst = [0.0f64; 3];
        for m in [-4, -2, 0, 2] {
            let r = boundary::modified_upper_residuals(*u, *v, m, p)?;
            for k in 0..3 {
                worst[k] = worst[k].max(r[k]);
            }
        }
        Ok(vec![worst[1], worst[0], worst[2], op_res(&t, &rebuilt)])
    }))
}

fn modified_lower(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 3) {
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let pts = cx.points(2, &p, &[]);
            samples.push((p, pts[0], pts[1]));
        }
    }
    Ok(cx.checks(&["ab", "db", "transfer"], OPERATOR_TOL, true, &samples, |(p, u, v)| {
        let fns = p.fns();
        let m0 = build_modified_ops_lower(*u, 0, p)?;
        let t = build_transfer(*u, p, TransferCase::LowerUpper)?;
        let rebuilt = kernel::combine(&[(fns.phi(*u) * p.left.k(*u), &m0.a), (p.left.k(fns.cross(*u)), &m0.d)]);
        let mut worst = [0.0f64; 2];
        for m in [-4, -2, 0, 2] {
            let r = boundary::modified_lower_residuals(*u, *v, m, p)?;
            worst[0] = worst[0].max(r[0]);
            worst[1] = worst[1].max(r[1]);
        }
        Ok(vec![worst[0], worst[1], op_res(&t, &rebuilt)])
    }))
}

fn transfer(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for case in cx.cases(&TransferCase::ANSATZ) {
            for _ in 0..cx.count(5) {
                let p = cx.model(n, case);
                let pts = cx.points(2, &p, &[]);
                samples.push((p, case, pts[0], pts[1]));
            }
        }
    }
    Ok(cx.checks(&["commute", "trace-form"], OPERATOR_TOL, true, &samples, |(p, case, u, v)| {
        let tu = build_transfer(*u, p, *case)?;
        let tv = build_transfer(*v, p, *case)?;
        Ok(vec![op_res(&(&tu * &tv), &(&tv * &tu)), op_res(&tu, &transfer_trace_form(*u, p)?)])
    }))
}

fn hamiltonian(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let ns = cx.ns(1, 5);
    let per = cx.count(2);
    let mut out = Vec::new();
    let cases = [
        ("diag", TransferCase::Diag),
        ("general", TransferCase::GeneralTriangular),
        ("lower-upper", TransferCase::LowerUpper),
        ("upper-upper", TransferCase::UpperUpper),
    ];
    for (name, case) in cases {
        if cx.cases(&[case]).is_empty() {
            continue;
        }
        let mut samples = Vec::new();
        for &n in &ns {
            for _ in 0..per {
                let mut p = cx.model(n, case);
                p.bulk = BulkParams::homogeneous(cx.q(), n)?;
                if case == TransferCase::GeneralTriangular {
                    p.right.tau_tilde = cx.z();
                }
                samples.push(p);
            }
        }
        out.extend(cx.check(name, 1e-7, false, &samples, |p| {
            let ht = build_hamiltonian_from_transfer(p)?;
            let hp = map_boundary_params(&p.left, &p.right, p.q())?;
            Ok((&ht - &build_hamiltonian_direct(p.n(), &hp)?).max_abs())
        }));
    }
    Ok(out)
}

fn lambda_symmetry(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let us = cx.points(n, &p, &[]);
            let u = cx.points(1, &p, &us)[0];
            let mut perm = us.clone();
            perm.shuffle(&mut cx.rng);
            samples.push((p, u, us, perm));
        }
    }
    Ok(cx.checks(&["crossing-root", "crossing-u", "permutation"], 1e-10, false, &samples, |(p, u, us, perm)| {
        let fns = p.fns();
        let branches = |x: C64, r: &[C64]| -> Result<[C64; 3]> {
            Ok([bethe::lambda_d(x, r, p)?, bethe::lambda_g(x, r, p)?, bethe::lambda_total(x, r, p)?])
        };
        let base = branches(*u, us)?;
        let cmp = |other: [C64; 3]| max_of((0..3).map(|k| rel(base[k], other[k])));
        let mut flipped = us.clone();
        flipped[0] = fns.cross(flipped[0]);
        if flipped.len() > 1 {
            flipped[1] = -flipped[1];
        }
        Ok(vec![cmp(branches(*u, &flipped)?), cmp(branches(fns.cross(*u), us)?), cmp(branches(*u, perm)?)])
    }))
}

fn bethe_limits(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let us = cx.points(n, &p, &[]);
            samples.push((p, us));
        }
    }
    Ok(cx.checks(&["e-d", "e-g"], 1e-7, false, &samples, |(p, us)| {
        let fns = p.fns();
        let mut worst = [0.0f64; 2];
        for (i, &ui) in us.iter().enumerate() {
            let ld = weighted_limit(ui, &fns, |u| bethe::lambda_d(u, us, p))?;
            let lg = weighted_limit(ui, &fns, |u| bethe::lambda_g(u, us, p))?;
            worst[0] = worst[0].max(rel(ld, bethe::bethe_residual_d(i, us, p)?));
            worst[1] = worst[1].max(rel(lg, bethe::bethe_residual_g(i, us, p)?));
        }
        Ok(worst.to_vec())
    }))
}

fn onshell(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut models = Vec::new();
    for n in cx.ns(1, 4) {
        for case in cx.cases(&TransferCase::ANSATZ) {
            models.push((cx.model(n, case), case));
        }
    }
    let opts = SolverOptions { seed: cx.cfg.seed, executor: cx.opts.executor, ..SolverOptions::default() };
    let reports: Vec<_> = models.iter().map(|(p, case)| run_solve_model(*case, p, &opts)).collect::<Result<_>>()?;
    // One sample per model; a model without a single non-null root set fails.
    Ok(cx.checks(&["eigenvalue", "eigenvector"], runs::MATCH_TOL, false, &reports, |r| {
        let sets: Vec<_> = r.root_sets().filter(|s| !s.null_vector).collect();
        if sets.is_empty() {
            return Ok(vec![f64::INFINITY; 2]);
        }
        Ok(vec![
            max_of(sets.iter().map(|s| s.max_match_distance())),
            max_of(sets.iter().map(|s| s.eigenvector_residual.unwrap_or(f64::INFINITY))),
        ])
    }))
}

fn bv_symmetry(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for case in cx.cases(&TransferCase::ANSATZ) {
            for _ in 0..cx.count(5) {
                let p = cx.model(n, case);
                let m = if case == TransferCase::LowerUpper { n } else { 1 + samples.len() % n };
                let us = cx.points(m, &p, &[]);
                let mut perm = us.clone();
                perm.reverse();
                samples.push((p, case, us, perm));
            }
        }
    }
    Ok(cx.check("", 1e-10, false, &samples, |(p, case, us, perm)| {
        Ok(vec_rel(&states::build_phi(*case, us, p)?.state, &states::build_phi(*case, perm, p)?.state))
    }))
}

fn offshell_samples(cx: &mut Ctx, case: TransferCase, lo: usize, hi: usize, all_sectors: bool) -> Vec<(ModelParams, C64, Vec<C64>)> {
    let mut samples = Vec::new();
    for n in cx.ns(lo, hi) {
        let sectors: Vec<usize> = if all_sectors { (0..=n).collect() } else { vec![n] };
        for m in sectors {
            for _ in 0..cx.count(3) {
                let p = cx.model(n, case);
                let us = cx.points(m, &p, &[]);
                let u = cx.points(1, &p, &us)[0];
                samples.push((p, u, us));
            }
        }
    }
    samples
}

fn offshell_diag(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples = offshell_samples(cx, TransferCase::Diag, 1, 4, true);
    Ok(cx.check("", 1e-9, false, &samples, |(p, u, us)| states::offshell_diag(*u, us, p)))
}

fn offshell_upper(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples = offshell_samples(cx, TransferCase::UpperUpper, 1, 3, true);
    Ok(cx.check("", 1e-9, false, &samples, |(p, u, us)| states::offshell_upper(*u, us, p)))
}

fn conjecture(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples = offshell_samples(cx, TransferCase::LowerUpper, 1, 4, false);
    Ok(cx.check("", 1e-9, false, &samples, |(p, u, us)| states::offshell_b_action(*u, us, p)))
}

fn main_result(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let samples = offshell_samples(cx, TransferCase::LowerUpper, 1, 4, false);
    Ok(cx.checks(&["direct", "split"], 1e-9, false, &samples, |(p, u, us)| {
        Ok(vec![states::offshell_lower_upper(*u, us, p)?, states::offshell_lower_upper_split(*u, us, p)?])
    }))
}

fn scalar_products(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 3) {
        for _ in 0..cx.count(5) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let pts = cx.points(n + 1, &p, &[]);
            let split = if n > 1 { 1 + samples.len() % (n - 1) } else { 0 };
            samples.push((p, pts, split));
        }
    }
    Ok(cx.checks(&["recursion", "vanishing", "zd"], 1e-9, false, &samples, |(p, pts, split)| {
        let n = p.n();
        let (ws, us) = pts[..n - 1].split_at((*split).min(n - 1));
        let all: Vec<C64> = ws.iter().chain(us).copied().collect();
        let vanishing = states::scalar_product_sup(ws, us, p)?.norm() / states::build_phi_d(&all, p)?.state.norm();
        let mut diag = p.clone();
        diag.right.tau = ZERO;
        let us = &pts[..n];
        let (ws, rest) = us.split_at(*split);
        let zd = rel(states::scalar_product_sup(ws, rest, &diag)?, bethe::zd_partition(us, &diag)?);
        let w = pts[n];
        let rec = rel(states::scalar_product_sup(&[w], us, p)?, states::scalar_product_recursion(w, us, p)?);
        Ok(vec![rec, vanishing, zd])
    }))
}

fn projection(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in cx.ns(1, 4) {
        for _ in 0..cx.count(5) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let pts = cx.points(n + 1, &p, &[]);
            samples.push((p, pts));
        }
    }
    Ok(cx.checks(&["lagrange", "reconstruct"], 1e-9, false, &samples, |(p, pts)| {
        let n = p.n();
        let us = &pts[..n];
        let phi = states::build_phi_lo_up(us, p)?.state;
        let coeffs = states::project_basis(&phi, us, p)?;
        let mut rebuilt = StateVector::zeros(n);
        for c in &coeffs {
            let roots: Vec<C64> = c.subset.iter().map(|&i| us[i]).collect();
            rebuilt.axpy(c.coefficient, &l12_chain(&roots, &p.bulk)?);
        }
        let recon = vec_rel(&rebuilt, &phi);
        let lag = if n == 2 {
            let fns = p.fns();
            let w = pts[2];
            let lw = build_monodromy(w, &p.bulk)?.l12().apply(&vacuum(2));
            let c = states::project_basis(&lw, us, p)?;
            let a = fns.b(w / us[1]) / fns.b(us[0] / us[1]);
            let b = fns.b(w / us[0]) / fns.b(us[1] / us[0]);
            max_of([rel(c[1].coefficient, a), rel(c[2].coefficient, b), c[0].coefficient.norm(), c[3].coefficient.norm()])
        } else {
            0.0
        };
        Ok(vec![lag, recon])
    }))
}

fn explicit_vectors(cx: &mut Ctx) -> Result<Vec<CheckReport>> {
    let mut samples = Vec::new();
    for n in [1, 2] {
        if cx.cfg.n.is_some_and(|m| m != n) {
            continue;
        }
        for _ in 0..cx.count(10) {
            let p = cx.model(n, TransferCase::LowerUpper);
            let us = cx.points(n, &p, &[]);
            samples.push((p, us));
        }
    }
    Ok(cx.check("", 1e-10, false, &samples, |(p, us)| {
        let v = states::build_phi_lo_up(us, p)?.state;
        let e = if us.len() == 1 { states::explicit_phi_n1(us[0], p)? } else { states::explicit_phi_n2(us[0], us[1], p)? };
        Ok(vec_rel(&e, &v))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_sorted_and_unique() {
        let ids = suite_ids();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn unknown_suite() {
        let cfg = RunConfig::default();
        assert!(matches!(run_suite("nope", &cfg, &RunOptions::default()), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn ybe_seed_seven() {
        let cfg = RunConfig { seed: 7, ..RunConfig::default() };
        let r = run_suite("ybe", &cfg, &RunOptions::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].samples, 100);
        assert!(r[0].passed, "{:?}", r[0]);
    }
}
