//! Randomized structural properties of the potential and the tilts.

use proptest::prelude::*;

use mane::func::{HamiltonianFn, PotentialFn, ScalarFn};
use mane::model::{BirthDeathModel, DiffusionModel, ProcessModel, StateIndependentModel, WorkingDomain};
use mane::potential::{gradient_pc, PotentialQuery};
use mane::subsolution::Subsolution;

fn double_well() -> ProcessModel {
    ProcessModel::Diffusion(DiffusionModel {
        potential: PotentialFn::DoubleWell,
        sigma: ScalarFn::Constant { value: 1.0 },
    })
}

fn sis() -> ProcessModel {
    ProcessModel::BirthDeath(BirthDeathModel {
        birth: ScalarFn::Sis { rho: 3.0 },
        death: ScalarFn::Linear {
            intercept: 0.0,
            slope: 1.0,
        },
    })
}

fn dw_domain() -> WorkingDomain {
    WorkingDomain::new(-1.42, 1.42, 1.0, 0.25).unwrap()
}

fn potential(model: &ProcessModel, domain: &WorkingDomain, c: f64, x: f64, y: f64) -> f64 {
    PotentialQuery::new(model, domain, c, x, y)
        .unwrap()
        .evaluate()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(
        x in -1.4f64..1.4,
        y in -1.4f64..1.4,
        z in -1.4f64..1.4,
        c in 0.05f64..5.0,
    ) {
        let m = double_well();
        let d = dw_domain();
        let xz = potential(&m, &d, c, x, z);
        let xy = potential(&m, &d, c, x, y);
        let yz = potential(&m, &d, c, y, z);
        prop_assert!(xz <= xy + yz + 1e-8);
    }

    #[test]
    fn nondecreasing_and_concave_in_c(
        x in -1.4f64..1.4,
        y in -1.4f64..1.4,
        c1 in 0.05f64..5.0,
        c2 in 0.05f64..5.0,
    ) {
        let m = double_well();
        let d = dw_domain();
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let s_lo = potential(&m, &d, lo, x, y);
        let s_hi = potential(&m, &d, hi, x, y);
        prop_assert!(s_lo <= s_hi + 1e-9);
        let s_mid = potential(&m, &d, 0.5 * (lo + hi), x, y);
        prop_assert!(s_mid >= 0.5 * (s_lo + s_hi) - 1e-9);
    }

    #[test]
    fn zero_on_the_diagonal(x in -1.4f64..1.4, c in 0.05f64..5.0) {
        let m = double_well();
        let d = dw_domain();
        prop_assert_eq!(potential(&m, &d, c, x, x), 0.0);
    }

    #[test]
    fn gradient_solves_the_stationary_equation(
        anchor in 0.51f64..0.83,
        z in 0.51f64..0.83,
        c in 0.01f64..2.0,
    ) {
        let m = sis();
        let p = gradient_pc(&m, anchor, z, c).unwrap();
        prop_assert!((m.hamiltonian(z, p) - c).abs() <= 1e-9);
    }

    #[test]
    fn tilt_preserves_the_rate_product(x in 0.52f64..0.82, c in 0.01f64..1.0) {
        let model = sis();
        let domain = WorkingDomain::new(0.5, 5.0 / 6.0, 2.0 / 3.0, 0.5).unwrap();
        let sub = Subsolution::ucyk(model.clone(), domain, 0.5, c, 0.5, 0.0).unwrap();
        let (lq, mq) = sub.tilted_rates(x).unwrap();
        let bd = model.as_birth_death().unwrap();
        let product = bd.birth(x) * bd.death(x);
        prop_assert!((lq * mq - product).abs() <= 1e-12 * product.max(1.0));
    }

    #[test]
    fn state_independent_potential_is_linear_in_the_gap(
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
        c in 0.01f64..4.0,
    ) {
        // For H = p²/2 the potential is |y - x| sqrt(2c).
        let m = ProcessModel::StateIndependent(StateIndependentModel {
            hamiltonian: HamiltonianFn::Quadratic,
        });
        let d = WorkingDomain::new(-2.0, 2.0, 0.0, 1.0).unwrap();
        let s = potential(&m, &d, c, x, y);
        prop_assert!((s - (y - x).abs() * (2.0 * c).sqrt()).abs() <= 1e-8);
    }
}
