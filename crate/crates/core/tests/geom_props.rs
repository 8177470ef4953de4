use ncphase_core::geom::{
    closedness_residual, coordinate_jacobi_residual, gradient, invert_bivector, invert_form, jacobi_triple_residual,
    jacobiator_residual, poisson_bracket,
};
use ncphase_core::poly::{random_bivector, random_form, Polynomial};
use ncphase_core::sampling::default_points;
use ncphase_core::{BivectorField, DiffConfig, Matrix, PhaseSpace, ScalarField, TwoFormField, DEFAULT_PIVOT_TOL};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exotic_sigma(theta: f64, b: &str) -> (PhaseSpace, TwoFormField) {
    let s = PhaseSpace::canonical(2).with_param("theta", theta);
    let bf = s.field(b).unwrap();
    let z = ScalarField::zero();
    let one = ScalarField::constant(1.0);
    let rows = vec![
        vec![z.clone(), bf.clone(), one.neg(), z.clone()],
        vec![bf.neg(), z.clone(), z.clone(), one.neg()],
        vec![one.clone(), z.clone(), z.clone(), ScalarField::constant(theta)],
        vec![z.clone(), one, ScalarField::constant(-theta), z],
    ];
    (s, TwoFormField::from_rows(rows).unwrap())
}

#[test]
fn gradient_examples() {
    let s = PhaseSpace::canonical(2);
    let cfg = DiffConfig::default();
    let g = gradient(&s.field("q1^2+q2^2").unwrap(), &[1.0, 2.0, 0.0, 0.0], &cfg).unwrap();
    for (a, b) in g.iter().zip([2.0, 4.0, 0.0, 0.0]) {
        assert!((a - b).abs() < 1e-8);
    }
    assert_eq!(gradient(&ScalarField::constant(3.0), &[1.0, 2.0, 3.0, 4.0], &cfg).unwrap(), vec![0.0; 4]);
    let g = gradient(&s.field("q1*p1").unwrap(), &[3.0, 0.7, 5.0, -0.2], &cfg).unwrap();
    for (a, b) in g.iter().zip([5.0, 0.0, 3.0, 0.0]) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn radial_magnetic_field_is_closed_and_poisson() {
    let (_, w) = exotic_sigma(0.3, "0.4 + 0.5*(q1^2+q2^2)");
    let pts = default_points(4, 0);
    let cfg = DiffConfig::default();
    assert!(closedness_residual(&w, &pts, &cfg).unwrap().max <= 1e-6);
    // θB < 1 on the unit box: 0.3·(0.4 + 0.5·2) = 0.42
    let lam = BivectorField::inverse_of(&w, DEFAULT_PIVOT_TOL);
    assert!(jacobiator_residual(&lam, &pts, &cfg).unwrap().max <= 1e-5);
}

#[test]
fn exotic_nested_jacobi_vanishes() {
    let (_, w) = exotic_sigma(0.7, "0");
    let lam = BivectorField::inverse_of(&w, DEFAULT_PIVOT_TOL);
    let c: Vec<ScalarField> = (0..4).map(ScalarField::coordinate).collect();
    let r = jacobi_triple_residual(&lam, &c[0], &c[1], &c[2], &[0.1, 0.2, 0.3, 0.4], &DiffConfig::default()).unwrap();
    assert!(r.abs() <= 1e-6);
    let s = PhaseSpace::canonical(2);
    let canon = BivectorField::constant(&ncphase_core::poly::canonical_flat(4).scale(-1.0));
    let f = s.field("q1^2*p2 + q2").unwrap();
    let g = s.field("p1*p2 - q1^3").unwrap();
    let h = s.field("q1*q2*p1 + p2^2").unwrap();
    for p in default_points(4, 5).iter().take(8) {
        let r = jacobi_triple_residual(&canon, &f, &g, &h, p, &DiffConfig::default()).unwrap();
        assert!(r.abs() <= 1e-5, "{r}");
    }
}

#[test]
fn duality_on_random_regular_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let w = random_form(&mut rng, 4, k % 2 == 0, 0.1);
        for p in default_points(4, k).iter().take(8) {
            let m = w.at(p).unwrap();
            let lam = invert_form(&w, p, DEFAULT_PIVOT_TOL).unwrap();
            let back = invert_bivector(&BivectorField::constant(&lam), &[0.0; 4], DEFAULT_PIVOT_TOL).unwrap();
            assert!(back.sub(&m).max_abs() <= 1e-10);
        }
    }
}

#[test]
fn closedness_and_jacobi_decide_alike() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts = default_points(4, 8);
    let cfg = DiffConfig::default();
    let tol = 1e-5;
    for k in 0..24 {
        let closed = k % 2 == 0;
        let w = random_form(&mut rng, 4, closed, 0.1);
        let c = closedness_residual(&w, &pts, &cfg).unwrap();
        let j = jacobiator_residual(&BivectorField::inverse_of(&w, DEFAULT_PIVOT_TOL), &pts, &cfg).unwrap();
        assert_eq!(c.passes(tol), closed, "closedness {c:?}");
        assert_eq!(j.passes(tol), closed, "jacobiator {j:?}");
    }
}

#[test]
fn jacobiator_and_nested_sum_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = default_points(4, 2);
    let cfg = DiffConfig::default();
    for k in 0..16 {
        let lam = random_bivector(&mut rng, 4, k % 2 == 1, 0.1);
        let t = jacobiator_residual(&lam, &pts, &cfg).unwrap();
        let nested = coordinate_jacobi_residual(&lam, &pts, &cfg).unwrap();
        assert_eq!(t.passes(1e-5), nested.passes(1e-5), "{t:?} vs {nested:?}");
        assert_eq!(t.passes(1e-5), k % 2 == 1);
    }
}

fn poly_field(coeffs: &[f64]) -> ScalarField {
    // c0 q1 p2 + c1 q2^2 + c2 p1^3 + c3 q1 q2 p1
    use ncphase_core::poly::Monomial;
    let m = |c: f64, p: [u32; 4]| Monomial { coeff: c, powers: p.to_vec() };
    Polynomial::new(
        4,
        vec![
            m(coeffs[0], [1, 0, 0, 1]),
            m(coeffs[1], [0, 2, 0, 0]),
            m(coeffs[2], [0, 0, 3, 0]),
            m(coeffs[3], [1, 1, 1, 0]),
        ],
    )
    .to_field()
}

fn lambda_theta_sigma(theta: f64, b: f64) -> BivectorField {
    let k = 1.0 / (1.0 - theta * b);
    BivectorField::constant(
        &Matrix::from_rows(&[
            [0.0, theta, 1.0, 0.0],
            [-theta, 0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, b],
            [0.0, -1.0, -b, 0.0],
        ])
        .scale(k),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(
        cf in prop::array::uniform4(-1.0f64..1.0),
        cg in prop::array::uniform4(-1.0f64..1.0),
        p in prop::array::uniform4(-1.0f64..1.0),
        theta in -2.0f64..2.0,
        b in -0.4f64..0.4,
    ) {
        let lam = lambda_theta_sigma(theta, b);
        let (f, g) = (poly_field(&cf), poly_field(&cg));
        let cfg = DiffConfig::default();
        let fg = poisson_bracket(&lam, &f, &g, &p, &cfg).unwrap();
        let gf = poisson_bracket(&lam, &g, &f, &p, &cfg).unwrap();
        prop_assert!((fg + gf).abs() <= 1e-10);
        prop_assert_eq!(poisson_bracket(&lam, &f, &f, &p, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn bracket_obeys_leibniz(
        cf in prop::array::uniform4(-1.0f64..1.0),
        cg in prop::array::uniform4(-1.0f64..1.0),
        ch in prop::array::uniform4(-1.0f64..1.0),
        p in prop::array::uniform4(-1.0f64..1.0),
        theta in -2.0f64..2.0,
    ) {
        let lam = lambda_theta_sigma(theta, 0.0);
        let (f, g, h) = (poly_field(&cf), poly_field(&cg), poly_field(&ch));
        let cfg = DiffConfig::default();
        // the product has no gradient override, so this exercises differencing
        let fg = f.mul(&g);
        let lhs = poisson_bracket(&lam, &fg, &h, &p, &cfg).unwrap();
        let rhs = f.eval(&p).unwrap() * poisson_bracket(&lam, &g, &h, &p, &cfg).unwrap()
            + g.eval(&p).unwrap() * poisson_bracket(&lam, &f, &h, &p, &cfg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-5, "{} vs {}", lhs, rhs);
    }
}
