use degenpop::model::{DispersionCoefficient, Lattice};
use degenpop::weights::{theta, CarlemanParams, WeightField, WeightKind};
use proptest::prelude::*;

proptest! {
    #[test]
    fn log_product_is_finite_and_nonnegative(alpha in 0.1f64..1.9, s in 1e-3f64..10.0, t in 0.0f64..=1.0, a in 0.0f64..=2.0, g in -5.0f64..5.0) {
        let k = DispersionCoefficient::boundary0(alpha).unwrap();
        let lattice = Lattice::new(17, 16, 1.0, 2.0).unwrap();
        let field = WeightField::new(WeightKind::VarphiBoundary0, CarlemanParams::new(s), &k, &lattice).unwrap();
        for i in 0..17 {
            let v = field.log_weighted_product(3, t, a, i, g);
            prop_assert!(v.is_finite() && v >= 0.0);
        }
    }

    #[test]
    fn theta_is_symmetric_in_time(t in 0.01f64..0.99, a in 0.01f64..2.0) {
        let l = theta(t, a, 1.0).unwrap();
        let r = theta(1.0 - t, a, 1.0).unwrap();
        prop_assert!((l - r).abs() <= 1e-12 * l);
    }

    #[test]
    fn profiles_are_negative(alpha in 0.1f64..0.95, x0 in 0.25f64..0.75) {
        let x0 = (x0 * 16.0).round() / 16.0;
        let lattice = Lattice::new(17, 16, 1.0, 2.0).unwrap();
        let k = DispersionCoefficient::interior(alpha, x0).unwrap();
        let field = WeightField::new(WeightKind::GammaInterior, CarlemanParams::new(1.0), &k, &lattice).unwrap();
        prop_assert!(field.profile().iter().all(|&v| v < 0.0));
    }
}
