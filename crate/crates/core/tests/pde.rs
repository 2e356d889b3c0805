use degenpop::model::Field;
use degenpop::pde::{characteristics_adjoint, solve_adjoint_transpose, solve_forward, Renewal, Scheme};
use degenpop::scenarios;
use degenpop::selftest::{adjoint_gap, separable_error};
use degenpop::verify::{check_duality, check_energy_decay, random_field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_abs(u: &Field) -> f64 {
    u.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

#[test]
fn duality_on_all_reference_problems() {
    for p in [
        scenarios::reference_boundary(17, 16).unwrap(),
        scenarios::reference_interior(17, 16).unwrap(),
        scenarios::reference_nondegenerate(17, 16).unwrap(),
    ] {
        for scheme in [Scheme::ImplicitEuler, Scheme::CrankNicolson] {
            let r = check_duality(&p, 6, 5, scheme).unwrap();
            assert!(r.pass, "{}", r.to_table());
            assert!(r.effective_constant <= 1e-12, "{}", r.effective_constant);
            assert_eq!(r.ratios[0], 0.0);
        }
    }
}

#[test]
fn separable_orders() {
    let e: Vec<f64> = [16, 32, 64].iter().map(|&nt| separable_error(65, nt, Scheme::CrankNicolson).unwrap()).collect();
    assert!((e[0] / e[1]).log2() >= 1.9 && (e[1] / e[2]).log2() >= 1.9, "{e:?}");
    let ie: Vec<f64> = [128, 256].iter().map(|&nt| separable_error(65, nt, Scheme::ImplicitEuler).unwrap()).collect();
    let order = (ie[0] / ie[1]).log2();
    assert!(order > 0.8 && order < 1.3, "implicit Euler order {order}");
}

#[test]
fn characteristics_and_transpose_agree_without_births() {
    let p = scenarios::reference_boundary(17, 16).unwrap();
    let p = p.with_rates(degenpop::model::Rates::mortality_only(0.1, 0.5)).unwrap();
    let mut v_t = scenarios::gaussian_datum(&p, 0.6, 0.2);
    v_t.row_mut(p.lattice().na()).fill(0.0);
    let a = solve_adjoint_transpose(&p, &v_t, 0, Renewal::Integral, Scheme::CrankNicolson).unwrap();
    let (c, report) = characteristics_adjoint(&p, &v_t, 0, Scheme::CrankNicolson).unwrap();
    assert_eq!(report.sweeps, 1);
    for n in 0..=16 {
        assert!(max_abs(&(a.at(n) - c.at(n))) < 1e-13);
    }
    assert!(adjoint_gap(33, 32).unwrap() < adjoint_gap(17, 16).unwrap());
}

#[test]
fn energy_decays_faster_with_larger_mortality() {
    let p = scenarios::reference_boundary(33, 32).unwrap();
    let y0 = random_field(&p, &mut ChaCha8Rng::seed_from_u64(2), 0..65);
    let base = check_energy_decay(&p, &y0, Scheme::ImplicitEuler).unwrap();
    let heavy = p.with_rates(p.rates().with_scaled_mortality(10.0)).unwrap();
    let fast = check_energy_decay(&heavy, &y0, Scheme::ImplicitEuler).unwrap();
    assert!(base.pass && fast.pass);
    assert!(fast.lhs.last().unwrap() < base.lhs.last().unwrap());
    let zero = check_energy_decay(&p, &p.zero_field(), Scheme::ImplicitEuler).unwrap();
    assert!(zero.lhs.iter().all(|&v| v == 0.0));
}

#[test]
fn implicit_euler_preserves_sign_and_bound() {
    // ∫β da = 3/4 for the reference fertility, so the sup norm cannot grow
    let p = scenarios::reference_boundary(33, 32).unwrap();
    let mut y0 = random_field(&p, &mut ChaCha8Rng::seed_from_u64(9), 0..65);
    y0.mapv_inplace(f64::abs);
    let traj = solve_forward(&p, &y0, None, 0, 32, Renewal::Integral, Scheme::ImplicitEuler).unwrap();
    let bound = max_abs(&y0);
    for y in traj.slices() {
        assert!(y.iter().all(|&v| v >= 0.0));
        assert!(max_abs(y) <= bound * (1.0 + 1e-14));
    }
}

#[test]
fn forward_rejects_bad_shapes() {
    let p = scenarios::reference_boundary(17, 16).unwrap();
    let bad = Field::zeros((3, 3));
    assert!(solve_forward(&p, &bad, None, 0, 16, Renewal::Integral, Scheme::ImplicitEuler).is_err());
    assert!(solve_forward(&p, &p.zero_field(), None, 10, 5, Renewal::Integral, Scheme::ImplicitEuler).is_err());
}
