//! Rational scalar functions of the multiplicative spectral parameter.
//!
//! Every function here depends on the anisotropy `q` only, so they live on a
//! small copyable table. Boundary-dependent scalars (`k^±`) are methods of the
//! boundary types in [`crate::boundary`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ONE;

/// Modulus below which a denominator is treated as a pole.
pub const POLE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarFns {
    q: C64,
    inv_denom: C64,
}

impl ScalarFns {
    pub fn new(q: C64) -> Result<Self> {
        let denom = q - q.inv();
        if q.norm() < POLE_EPS || denom.norm() < POLE_EPS {
            return Err(Error::Pole(format!("q - 1/q vanishes for q = {q}")));
        }
        Ok(Self { q, inv_denom: denom.inv() })
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    /// `q^m` for integer `m`.
    pub fn qpow(&self, m: i32) -> C64 {
        self.q.powi(m)
    }

    /// Crossing image `q^{-1} u^{-1}`.
    pub fn cross(&self, u: C64) -> C64 {
        (self.q * u).inv()
    }

    /// `b(u) = (u - u^{-1}) / (q - q^{-1})`.
    pub fn b(&self, u: C64) -> C64 {
        (u - u.inv()) * self.inv_denom
    }

    /// `c(u) = u^2 - u^{-2}`.
    pub fn c(&self, u: C64) -> C64 {
        u * u - (u * u).inv()
    }

    /// `φ(u) = b(q²u²) / b(qu²)`.
    pub fn phi(&self, u: C64) -> C64 {
        let q = self.q;
        self.b(q * q * u * u) / self.b(q * u * u)
    }

    pub fn m_fn(&self, u: C64, v: C64) -> C64 {
        ONE / (self.b(u / v) * self.b(self.q * u * v))
    }

    /// `F(u,v) = m(u,v) b(q²u²) / φ(v)`.
    pub fn big_f(&self, u: C64, v: C64) -> C64 {
        let q = self.q;
        self.m_fn(u, v) * self.b(q * q * u * u) / self.phi(v)
    }

    pub fn f(&self, u: C64, v: C64) -> C64 {
        let q = self.q;
        self.b(q * v / u) * self.b(u * v) / (self.b(v / u) * self.b(q * u * v))
    }

    pub fn g(&self, u: C64, v: C64) -> C64 {
        self.phi(self.cross(v)) / self.b(u / v)
    }

    pub fn w(&self, u: C64, v: C64) -> C64 {
        -ONE / self.b(self.q * u * v)
    }

    pub fn h(&self, u: C64, v: C64) -> C64 {
        let q = self.q;
        self.b(q * q * u * v) * self.b(q * u / v) / (self.b(q * u * v) * self.b(u / v))
    }

    /// Exchange function `k(u,v) = φ(u) / b(v/u)`.
    pub fn k_ex(&self, u: C64, v: C64) -> C64 {
        self.phi(u) / self.b(v / u)
    }

    pub fn n(&self, u: C64, v: C64) -> C64 {
        self.phi(u) * self.phi(self.cross(v)) / self.b(self.q * u * v)
    }

    pub fn s(&self, u: C64, v: C64) -> C64 {
        self.phi(self.cross(u)) / (self.b(v / u) * self.b(self.q * v * v))
    }

    pub fn x(&self, u: C64, v: C64) -> C64 {
        let q = self.q;
        self.phi(self.cross(u)) * self.b(q * u / v) / (self.b(u / v) * self.b(q * u * v))
    }

    pub fn y(&self, u: C64, v: C64) -> C64 {
        let q = self.q;
        -ONE / (self.b(q * v * v) * self.b(q * u * v))
    }

    pub fn r(&self, u: C64, v: C64) -> C64 {
        self.phi(self.cross(u)) / self.b(v / u)
    }

    pub fn p(&self, u: C64, v: C64) -> C64 {
        self.b(u * v) / (self.b(u / v) * self.b(self.q * u * v))
    }

    /// Product `Π_k fun(u, v_k)` over a set.
    pub fn prod(&self, fun: impl Fn(&Self, C64, C64) -> C64, u: C64, set: &[C64]) -> C64 {
        set.iter().fold(ONE, |acc, &v| acc * fun(self, u, v))
    }
}

/// Named entry of the scalar function table, for dispatch by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FnName {
    B,
    C,
    Phi,
    F,
    G,
    W,
    H,
    KEx,
    N,
    MFn,
    BigF,
    S,
    X,
    Y,
    R,
    P,
}

impl FnName {
    pub const ALL: [FnName; 16] = [
        FnName::B,
        FnName::C,
        FnName::Phi,
        FnName::F,
        FnName::G,
        FnName::W,
        FnName::H,
        FnName::KEx,
        FnName::N,
        FnName::MFn,
        FnName::BigF,
        FnName::S,
        FnName::X,
        FnName::Y,
        FnName::R,
        FnName::P,
    ];

    pub fn arity(self) -> usize {
        match self {
            FnName::B | FnName::C | FnName::Phi => 1,
            _ => 2,
        }
    }
}

impl ScalarFns {
    /// Denominator factors of `name` at `args`, labelled for error reports.
    fn denominators(&self, name: FnName, u: C64, v: C64) -> Vec<(&'static str, C64)> {
        let q = self.q;
        let cr = |z: C64| self.cross(z);
        let phi_den = |z: C64| self.b(q * z * z);
        match name {
            FnName::B | FnName::C => vec![("u", u)],
            FnName::Phi => vec![("u", u), ("b(qu^2)", phi_den(u))],
            FnName::F => vec![("b(v/u)", self.b(v / u)), ("b(quv)", self.b(q * u * v))],
            FnName::G => vec![("b(u/v)", self.b(u / v)), ("b(q(q^-1v^-1)^2)", phi_den(cr(v)))],
            FnName::W => vec![("b(quv)", self.b(q * u * v))],
            FnName::H => vec![("b(quv)", self.b(q * u * v)), ("b(u/v)", self.b(u / v))],
            FnName::KEx => vec![("b(v/u)", self.b(v / u)), ("b(qu^2)", phi_den(u))],
            FnName::N => vec![
                ("b(quv)", self.b(q * u * v)),
                ("b(qu^2)", phi_den(u)),
                ("b(q(q^-1v^-1)^2)", phi_den(cr(v))),
            ],
            FnName::MFn => vec![("b(u/v)", self.b(u / v)), ("b(quv)", self.b(q * u * v))],
            FnName::BigF => vec![
                ("b(u/v)", self.b(u / v)),
                ("b(quv)", self.b(q * u * v)),
                ("phi(v)", self.phi(v)),
                ("b(qv^2)", phi_den(v)),
            ],
            FnName::S => vec![
                ("b(v/u)", self.b(v / u)),
                ("b(qv^2)", self.b(q * v * v)),
                ("b(q(q^-1u^-1)^2)", phi_den(cr(u))),
            ],
            FnName::X => vec![
                ("b(u/v)", self.b(u / v)),
                ("b(quv)", self.b(q * u * v)),
                ("b(q(q^-1u^-1)^2)", phi_den(cr(u))),
            ],
            FnName::Y => vec![("b(qv^2)", self.b(q * v * v)), ("b(quv)", self.b(q * u * v))],
            FnName::R => vec![("b(v/u)", self.b(v / u)), ("b(q(q^-1u^-1)^2)", phi_den(cr(u)))],
            FnName::P => vec![("b(u/v)", self.b(u / v)), ("b(quv)", self.b(q * u * v))],
        }
    }

    /// Checked evaluation by name. Reports the vanishing denominator on a pole.
    pub fn eval(&self, name: FnName, args: &[C64]) -> Result<C64> {
        if args.len() != name.arity() {
            return Err(Error::Inadmissible(format!(
                "{name:?} takes {} arguments, got {}",
                name.arity(),
                args.len()
            )));
        }
        let u = args[0];
        let v = args.get(1).copied().unwrap_or(ONE);
        if u.norm() < POLE_EPS || v.norm() < POLE_EPS {
            return Err(Error::Pole(format!("{name:?}: zero spectral argument")));
        }
        for (label, den) in self.denominators(name, u, v) {
            if den.norm() < POLE_EPS {
                return Err(Error::Pole(format!("{name:?}: factor {label} vanishes")));
            }
        }
        Ok(match name {
            FnName::B => self.b(u),
            FnName::C => self.c(u),
            FnName::Phi => self.phi(u),
            FnName::F => self.f(u, v),
            FnName::G => self.g(u, v),
            FnName::W => self.w(u, v),
            FnName::H => self.h(u, v),
            FnName::KEx => self.k_ex(u, v),
            FnName::N => self.n(u, v),
            FnName::MFn => self.m_fn(u, v),
            FnName::BigF => self.big_f(u, v),
            FnName::S => self.s(u, v),
            FnName::X => self.x(u, v),
            FnName::Y => self.y(u, v),
            FnName::R => self.r(u, v),
            FnName::P => self.p(u, v),
        })
    }
}

/// Checked `b(u)`; fails when `q - q^{-1}` vanishes.
pub fn fn_b(u: C64, q: C64) -> Result<C64> {
    ScalarFns::new(q)?.eval(FnName::B, &[u])
}
