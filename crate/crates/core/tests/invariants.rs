use bethe_segment::bethe::canonical_root;
use bethe_segment::boundary::{build_transfer, re_residual, dre_residual, LeftBoundary, ModelParams, RightBoundary, TransferCase};
use bethe_segment::kernel::{self, ZERO};
use bethe_segment::scalar::ScalarFns;
use bethe_segment::vertex::{ybe_residual, BulkParams};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = C64> {
    (0.6f64..1.8, -3.1f64..3.1).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn q() -> impl Strategy<Value = C64> {
    (1.1f64..1.6, 0.05f64..0.6).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn far(a: C64, b: C64) -> bool {
    (a - b).norm() > 0.05
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn yang_baxter(q in q(), a in point(), b in point(), c in point()) {
        let fns = ScalarFns::new(q).unwrap();
        prop_assert!(ybe_residual(a, b, c, &fns) < 1e-11);
    }

    #[test]
    fn reflection(q in q(), u in point(), v in point(), k in prop::array::uniform4(point())) {
        let fns = ScalarFns::new(q).unwrap();
        let right = RightBoundary { nu_plus: k[0], nu_minus: k[1], tau: k[2], tau_tilde: k[3] };
        let left = LeftBoundary { eps_plus: k[0], eps_minus: k[1], kappa: k[2], kappa_tilde: k[3] };
        prop_assert!(re_residual(u, v, &right, &fns) < 1e-12);
        prop_assert!(dre_residual(u, v, &left, &fns) < 1e-12);
    }

    #[test]
    fn canonical_root_is_orbit_invariant(q in q(), u in point()) {
        let fns = ScalarFns::new(q).unwrap();
        let c0 = canonical_root(u, &fns);
        for image in [-u, fns.cross(u), -fns.cross(u)] {
            prop_assert!((canonical_root(image, &fns) - c0).norm() < 1e-12 * c0.norm().max(1.0));
        }
        prop_assert!((canonical_root(c0, &fns) - c0).norm() < 1e-12 * c0.norm().max(1.0));
    }

    #[test]
    fn transfer_commutes_two_sites(q in q(), v in prop::array::uniform2(point()), u in point(), w in point(), k in prop::array::uniform4(point())) {
        prop_assume!(far(v[0], v[1]) && far(u, w));
        let Ok(bulk) = BulkParams::new(q, v.to_vec()) else { return Ok(()) };
        let p = ModelParams {
            bulk,
            left: LeftBoundary { eps_plus: k[0], eps_minus: k[1], kappa: k[2], kappa_tilde: ZERO },
            right: RightBoundary { nu_plus: k[3], nu_minus: k[1], tau: k[0], tau_tilde: ZERO },
        };
        let tu = build_transfer(u, &p, TransferCase::LowerUpper).unwrap();
        let tw = build_transfer(w, &p, TransferCase::LowerUpper).unwrap();
        prop_assert!(kernel::residual(&(&tu * &tw), &(&tw * &tu)).unwrap() < 1e-10);
    }
}
