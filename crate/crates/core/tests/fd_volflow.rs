use ncphase_core::fd::{dyson_consistency, extract_fields, modified_maxwell_residuals, nc_consistency, ForceLaw};
use ncphase_core::geom::hamiltonian_vf;
use ncphase_core::poly::{canonical_flat, random_antisym_block, Monomial, Polynomial};
use ncphase_core::sampling::default_points;
use ncphase_core::volflow::{build_volume_flow, verify_volume_preservation, Prefactor, VolumeFlowSpec};
use ncphase_core::{AntisymBlock, BivectorField, DiffConfig, PhaseSpace, ScalarField, VectorFieldSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space() -> PhaseSpace {
    PhaseSpace::with_prefixes(3, "x", "xd")
}

fn triple(src: [&str; 3]) -> [ScalarField; 3] {
    let s = space();
    src.map(|e| s.field(e).unwrap())
}

#[test]
fn lorentz_force_gives_back_its_fields() {
    let (e, b0, e0) = (1.7, [0.3, -1.2, 0.8], [2.0, 0.5, -0.4]);
    let f = ScalarField::constant;
    // F = e(E0 + ẋ × B0)
    let force = [
        f(e * e0[0]).add(&space().field(&format!("{e}*(xd2*{} - xd3*{})", b0[2], b0[1])).unwrap()),
        f(e * e0[1]).add(&space().field(&format!("{e}*(xd3*{} - xd1*{})", b0[0], b0[2])).unwrap()),
        f(e * e0[2]).add(&space().field(&format!("{e}*(xd1*{} - xd2*{})", b0[1], b0[0])).unwrap()),
    ];
    let fields = extract_fields(&ForceLaw::new(force.clone(), 1.0).unwrap(), DiffConfig::default());
    for p in default_points(6, 2) {
        for k in 0..3 {
            assert!((fields.b[k].eval(&p).unwrap() - e * b0[k]).abs() <= 1e-10);
            assert!((fields.e[k].eval(&p).unwrap() - e * e0[k]).abs() <= 1e-10);
        }
    }
}

#[test]
fn fields_reassemble_any_force() {
    let force = triple(["x1*xd2^2 + sin(x3)", "xd1*xd3 - x2", "exp(0.3*xd2)*x1"]);
    let fields = extract_fields(&ForceLaw::new(force.clone(), 1.0).unwrap(), DiffConfig::default());
    for p in default_points(6, 5) {
        let got = fields.force_at(&p).unwrap();
        for j in 0..3 {
            assert!((got[j] - force[j].eval(&p).unwrap()).abs() <= 1e-10);
        }
    }
}

#[test]
fn extraction_commutes_with_cyclic_relabelling() {
    // F'_k(ξ) = F_{k+1}(σξ) where (σξ)_{l+1} = ξ_l on both triples gives
    // B'_k(ξ) = B_{k+1}(σξ)
    let sigma = |p: &[f64]| vec![p[2], p[0], p[1], p[5], p[3], p[4]];
    let f = triple(["x1*xd2^2 + xd3*x2", "xd1*xd3 - x2*xd2", "sin(xd2)*x1"]);
    let shifted: [ScalarField; 3] = std::array::from_fn(|k| {
        let g = f[(k + 1) % 3].clone();
        ScalarField::try_from_fn("shifted", move |p| g.eval(&sigma(p)))
    });
    let a = extract_fields(&ForceLaw::new(f, 1.0).unwrap(), DiffConfig::default());
    let b = extract_fields(&ForceLaw::new(shifted, 1.0).unwrap(), DiffConfig::default());
    for p in default_points(6, 1).iter().take(16) {
        let sp = sigma(p);
        for k in 0..3 {
            let want = a.b[(k + 1) % 3].eval(&sp).unwrap();
            assert!((b.b[k].eval(p).unwrap() - want).abs() <= 1e-8);
            let want = a.e[(k + 1) % 3].eval(&sp).unwrap();
            assert!((b.e[k].eval(p).unwrap() - want).abs() <= 1e-8);
        }
    }
}

#[test]
fn planted_monopole_is_flagged() {
    // B = (x1, x2, x3), div B = 3
    let f = triple(["xd2*x3 - xd3*x2", "xd3*x1 - xd1*x3", "xd1*x2 - xd2*x1"]);
    let fields = extract_fields(&ForceLaw::new(f, 1.0).unwrap(), DiffConfig::default());
    let pts = default_points(6, 3);
    let r = dyson_consistency(&fields, &pts, &DiffConfig::default()).unwrap();
    let div = r.iter().find(|r| r.name == "div B").unwrap();
    assert!((div.max - 3.0).abs() <= 1e-6 && !div.passes(1e-5));
    let bv = r.iter().find(|r| r.name == "B velocity dependence").unwrap();
    assert!(bv.max <= 1e-8);
}

#[test]
fn velocity_independent_fields_satisfy_modified_laws() {
    // div-free B = (x2, x3, x1), E = −∇(x1 x2 + x3²/2)
    let f = triple([
        "-x2 + xd2*x1 - xd3*x3",
        "-x1 + xd3*x2 - xd1*x1",
        "-x3 + xd1*x3 - xd2*x2",
    ]);
    let cfg = DiffConfig::default();
    let fields = extract_fields(&ForceLaw::new(f, 1.0).unwrap(), cfg);
    let pts = default_points(6, 7);
    for r in modified_maxwell_residuals(&fields, 1.0, &pts, &cfg).unwrap() {
        assert!(r.max <= 1e-8, "{r:?}");
    }
    for r in dyson_consistency(&fields, &pts, &cfg).unwrap() {
        assert!(r.max <= 1e-6, "{r:?}");
    }
}

#[test]
fn nc_conditions_with_velocity_dependent_g() {
    let s = space();
    let z = ScalarField::zero;
    let block = |g12: &str| {
        let g = s.field(g12).unwrap();
        [[z(), g.clone(), z()], [g.neg(), z(), z()], [z(), z(), z()]]
    };
    let vv = [[z(), z(), z()], [z(), z(), z()], [z(), z(), z()]];
    let pts = default_points(6, 4);
    let cfg = DiffConfig::default();
    let ok = nc_consistency(&block("xd1*xd2"), &vv, 2.0, &pts, &cfg).unwrap();
    for r in &ok {
        assert!(r.max <= 1e-8, "{r:?}");
    }
    let bad = nc_consistency(&block("xd3"), &vv, 2.0, &pts, &cfg).unwrap();
    let r2 = bad.iter().find(|r| r.name == "nc R2").unwrap();
    assert!((r2.max - 0.5).abs() <= 1e-8, "{r2:?}");
    // su(2) pattern g_ij = ε_ijk x_k is Poisson and velocity free
    let su2 = [
        [z(), s.field("x3").unwrap(), s.field("-x2").unwrap()],
        [s.field("-x3").unwrap(), z(), s.field("x1").unwrap()],
        [s.field("x2").unwrap(), s.field("-x1").unwrap(), z()],
    ];
    let r = nc_consistency(&su2, &vv, 1.0, &pts, &cfg).unwrap();
    assert!(r[1].max <= 1e-8 && r[3].max <= 1e-8, "{r:?}");
}

fn flow(g: AntisymBlock, b: AntisymBlock) -> VectorFieldSpec {
    build_volume_flow(&VolumeFlowSpec::new(g, b).unwrap(), DiffConfig::default()).unwrap()
}

#[test]
fn random_blocks_give_divergence_free_flows() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = DiffConfig::default();
    for n in 2..=4 {
        let dim = 2 * n;
        let all: Vec<usize> = (0..dim).collect();
        let pts = default_points(dim, n as u64);
        for _ in 0..20 {
            let g = random_antisym_block(&mut rng, n, dim, &all, 3, 3);
            let b = random_antisym_block(&mut rng, n, dim, &all, 3, 3);
            for pf in [Prefactor::EquationsOfMotion, Prefactor::Intrinsic] {
                let spec = VolumeFlowSpec::new(g.clone(), b.clone()).unwrap().with_prefactor(pf);
                let x = build_volume_flow(&spec, cfg).unwrap();
                let r = verify_volume_preservation(&x, &pts, &cfg).unwrap();
                assert!(r.max <= 1e-6, "n = {n}: {r:?}");
            }
        }
    }
}

#[test]
fn single_entry_example() {
    let s = PhaseSpace::canonical(2);
    let x = flow(AntisymBlock::zeros(2).with(0, 1, s.field("q1").unwrap()), AntisymBlock::zeros(2));
    for p in default_points(4, 0).iter().take(8) {
        let v = x.eval(p).unwrap();
        for (a, w) in v.iter().zip([0.0, 1.0, 0.0, 0.0]) {
            assert!((a - w).abs() <= 1e-9, "{v:?}");
        }
    }
}

fn momentum_only<R: rand::Rng>(rng: &mut R, n: usize, positions: bool) -> AntisymBlock {
    let vars: Vec<usize> = if positions { (0..n).collect() } else { (n..2 * n).collect() };
    random_antisym_block(rng, n, 2 * n, &vars, 3, 3)
}

fn sum_blocks(a: &AntisymBlock, b: &AntisymBlock) -> AntisymBlock {
    AntisymBlock::from_upper(a.n(), |i, j| a.get(i, j).add(b.get(i, j)))
}

#[test]
fn unused_derivative_directions_do_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=3 {
        let all: Vec<usize> = (0..2 * n).collect();
        let g = random_antisym_block(&mut rng, n, 2 * n, &all, 2, 3);
        let b = random_antisym_block(&mut rng, n, 2 * n, &all, 2, 3);
        let base = flow(g.clone(), b.clone());
        let g2 = sum_blocks(&g, &momentum_only(&mut rng, n, false));
        let b2 = sum_blocks(&b, &momentum_only(&mut rng, n, true));
        let pert = flow(g2, b2);
        for p in default_points(2 * n, 9) {
            let (u, v) = (base.eval(&p).unwrap(), pert.eval(&p).unwrap());
            for (a, c) in u.iter().zip(&v) {
                assert!((a - c).abs() <= 1e-10, "{u:?} vs {v:?}");
            }
        }
    }
}

#[test]
fn swapping_blocks_mirrors_the_flow() {
    // g' = B∘σ, B' = g∘σ with σ exchanging x_i and x_{n+i} gives X'(x) = −σX(σx)
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 2;
    let all: Vec<usize> = (0..4).collect();
    let swap = |p: &[f64]| vec![p[2], p[3], p[0], p[1]];
    let g = random_antisym_block(&mut rng, n, 4, &all, 3, 3);
    let b = random_antisym_block(&mut rng, n, 4, &all, 3, 3);
    let compose = |blk: &AntisymBlock| {
        AntisymBlock::from_upper(n, |i, j| {
            let f = blk.get(i, j).clone();
            ScalarField::try_from_fn("swapped", move |p| f.eval(&swap(p)))
        })
    };
    let x = flow(g.clone(), b.clone());
    let y = flow(compose(&b), compose(&g));
    for p in default_points(4, 12) {
        let want: Vec<f64> = swap(&x.eval(&swap(&p)).unwrap()).iter().map(|v| -v).collect();
        let got = y.eval(&p).unwrap();
        for (a, c) in got.iter().zip(&want) {
            assert!((a - c).abs() <= 1e-6, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn hamiltonian_fields_preserve_volume() {
    let lam = BivectorField::constant(&canonical_flat(4).scale(-1.0));
    let h = Polynomial::new(
        4,
        vec![
            Monomial { coeff: 0.5, powers: vec![2, 0, 1, 0] },
            Monomial { coeff: -1.0, powers: vec![0, 3, 0, 1] },
            Monomial { coeff: 0.7, powers: vec![0, 0, 2, 2] },
        ],
    )
    .to_field()
    .add(&PhaseSpace::canonical(2).field("sin(q1*p2)").unwrap());
    let cfg = DiffConfig::default();
    let x = hamiltonian_vf(&lam, &h, cfg);
    assert!(verify_volume_preservation(&x, &default_points(4, 6), &cfg).unwrap().max <= 1e-6);
    let bad = VectorFieldSpec::from_fn(4, "x1", |p| Ok(vec![p[0], 0.0, 0.0, 0.0]));
    let r = verify_volume_preservation(&bad, &default_points(4, 6), &cfg).unwrap();
    assert!((r.max - 1.0).abs() <= 1e-9 && !r.passes(1e-5));
}
