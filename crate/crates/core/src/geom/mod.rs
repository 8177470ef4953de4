//! Coordinate-level calculus on forms and bivectors: inversion, brackets,
//! Hamiltonian vector fields, and the closedness and Jacobi residuals.

mod field;

pub use field::{
    coarse_gradient, gradient, partial, second_partial, AntisymBlock, BivectorField, DiffConfig, FormBuilder,
    MatrixField, PhaseSpace, ScalarField, TwoFormField, VectorFieldSpec,
};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Matrix};
use crate::report::ResidualReport;

/// Default relative pivot threshold separating exact degeneracy from
/// conditioning noise.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-9;

fn invert_at(m: Matrix, p: &[f64], pivot_tol: f64) -> Result<Matrix> {
    let dim = m.rows();
    m.inverse(pivot_tol)
        .map(|inv| inv.antisymmetrized())
        .map_err(|rank| Error::Degenerate {
            rank,
            dim,
            point: p.to_vec(),
        })
}

/// The Poisson tensor matrix at `p`, or `Error::Degenerate` carrying the
/// numerical rank of `ω(p)`.
pub fn invert_form(omega: &TwoFormField, p: &[f64], pivot_tol: f64) -> Result<Matrix> {
    invert_at(omega.at(p)?, p, pivot_tol)
}

/// The symplectic matrix at `p` of a regular bivector.
pub fn invert_bivector(lambda: &BivectorField, p: &[f64], pivot_tol: f64) -> Result<Matrix> {
    invert_at(lambda.at(p)?, p, pivot_tol)
}

pub fn rank_at(m: &MatrixField, p: &[f64], pivot_tol: f64) -> Result<usize> {
    Ok(m.at(p)?.rank(pivot_tol))
}

/// `{f, g}(p) = Λ_ab ∂_a f ∂_b g`, summed over `a < b` as
/// `Λ_ab (∂_a f ∂_b g − ∂_b f ∂_a g)` so that antisymmetry holds exactly in
/// floating point.
pub fn poisson_bracket(
    lambda: &BivectorField,
    f: &ScalarField,
    g: &ScalarField,
    p: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    let l = lambda.at(p)?;
    let df = gradient(f, p, cfg)?;
    let dg = gradient(g, p, cfg)?;
    Ok(antisym_pairing(&l, &df, &dg))
}

pub(crate) fn antisym_pairing(m: &Matrix, u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..u.len() {
        for b in a + 1..v.len() {
            let lab = m[(a, b)];
            if lab != 0.0 {
                s += lab * (u[a] * v[b] - u[b] * v[a]);
            }
        }
    }
    s
}

/// `{f, g}` as a field of its own, for nesting. Its gradient uses
/// [`coarse_gradient`].
pub fn bracket_field(lambda: &BivectorField, f: &ScalarField, g: &ScalarField, cfg: DiffConfig) -> ScalarField {
    let (lambda, f2, g2) = (lambda.clone(), f.clone(), g.clone());
    let plain = ScalarField::try_from_fn(&format!("{{{}, {}}}", f.label(), g.label()), move |p| {
        poisson_bracket(&lambda, &f2, &g2, p, &cfg)
    });
    let inner = plain.clone();
    plain.with_gradient(move |p, c| coarse_gradient(&inner, p, c))
}

/// `(X_h)_a = {ξ_a, h} = Λ_ab ∂_b h`.
pub fn hamiltonian_vf(lambda: &BivectorField, h: &ScalarField, cfg: DiffConfig) -> VectorFieldSpec {
    let (lambda, h2) = (lambda.clone(), h.clone());
    let dim = lambda.dim();
    if h.as_constant().is_some() {
        return VectorFieldSpec::zero(dim);
    }
    VectorFieldSpec::from_fn(dim, &format!("X[{}]", h.label()), move |p| {
        let dh = gradient(&h2, p, &cfg)?;
        Ok(lambda.at(p)?.mul_vec(&dh))
    })
}

/// `(i(X)ω)_b = ω_ba X_a`, i.e. `M·X` in the `ω♭` matrix convention.
pub fn interior_product(x: &VectorFieldSpec, omega: &TwoFormField, p: &[f64]) -> Result<Vec<f64>> {
    Ok(omega.at(p)?.mul_vec(&x.eval(p)?))
}

/// `max ‖i(X)ω − df‖_∞` over the points.
pub fn verify_generating_function<P: AsRef<[f64]>>(
    x: &VectorFieldSpec,
    omega: &TwoFormField,
    f: &ScalarField,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<ResidualReport> {
    ResidualReport::collect("generating function", points, |p| {
        let ix = interior_product(x, omega, p)?;
        let df = gradient(f, p, cfg)?;
        Ok(ix.iter().zip(&df).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    })
}

/// Orthonormal basis of `ker ω(p)`; empty when `ω(p)` is regular.
pub fn kernel_basis(omega: &TwoFormField, p: &[f64], pivot_tol: f64) -> Result<Vec<Vec<f64>>> {
    Ok(omega.at(p)?.null_space(pivot_tol))
}

fn all_partials(m: &MatrixField, p: &[f64], cfg: &DiffConfig) -> Result<Vec<Matrix>> {
    (0..m.dim()).map(|l| m.partial(p, l, cfg)).collect()
}

/// Largest `|∂_a ω_bc + ∂_b ω_ca + ∂_c ω_ab|` over `a<b<c` at one point.
pub fn closedness_at(omega: &TwoFormField, p: &[f64], cfg: &DiffConfig) -> Result<f64> {
    let n = omega.dim();
    let d = all_partials(omega.matrix_field(), p, cfg)?;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let v = d[a][(b, c)] - d[b][(a, c)] + d[c][(a, b)];
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

pub fn closedness_residual<P: AsRef<[f64]>>(
    omega: &TwoFormField,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<ResidualReport> {
    ResidualReport::collect("closedness", points, |p| closedness_at(omega, p, cfg))
}

/// The coordinate trivector `T^abc = Λ^al ∂_l Λ^bc + Λ^bl ∂_l Λ^ca +
/// Λ^cl ∂_l Λ^ab` at one point, for `a<b<c`, as `((a,b,c), T)`.
pub fn jacobiator_at(lambda: &BivectorField, p: &[f64], cfg: &DiffConfig) -> Result<Vec<((usize, usize, usize), f64)>> {
    let n = lambda.dim();
    let l = lambda.at(p)?;
    let d = all_partials(lambda.matrix_field(), p, cfg)?;
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let mut t = 0.0;
                for (k, dk) in d.iter().enumerate() {
                    t += l[(a, k)] * dk[(b, c)] + l[(b, k)] * dk[(c, a)] + l[(c, k)] * dk[(a, b)];
                }
                out.push(((a, b, c), t));
            }
        }
    }
    Ok(out)
}

pub fn jacobiator_residual<P: AsRef<[f64]>>(
    lambda: &BivectorField,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<ResidualReport> {
    ResidualReport::collect("jacobiator", points, |p| {
        Ok(jacobiator_at(lambda, p, cfg)?
            .into_iter()
            .fold(0.0, |m: f64, (_, t)| m.max(t.abs())))
    })
}

/// `{f,{g,h}} + {h,{f,g}} + {g,{h,f}}` by nested finite-difference
/// brackets. Shares nothing with [`jacobiator_at`] beyond `Λ` itself.
pub fn jacobi_triple_residual(
    lambda: &BivectorField,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    p: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    let gh = bracket_field(lambda, g, h, *cfg);
    let fg = bracket_field(lambda, f, g, *cfg);
    let hf = bracket_field(lambda, h, f, *cfg);
    Ok(poisson_bracket(lambda, f, &gh, p, cfg)?
        + poisson_bracket(lambda, h, &fg, p, cfg)?
        + poisson_bracket(lambda, g, &hf, p, cfg)?)
}

/// Largest `|jacobi_triple_residual|` over coordinate triples `a<b<c` at
/// the given points.
pub fn coordinate_jacobi_residual<P: AsRef<[f64]>>(
    lambda: &BivectorField,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<ResidualReport> {
    let n = lambda.dim();
    let coords: Vec<ScalarField> = (0..n).map(ScalarField::coordinate).collect();
    ResidualReport::collect("nested jacobi", points, |p| {
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let r = jacobi_triple_residual(lambda, &coords[a], &coords[b], &coords[c], p, cfg)?;
                    worst = worst.max(r.abs());
                }
            }
        }
        Ok(worst)
    })
}

/// Fourth-order central difference of a vector field along `axis`, with
/// the coarse step: vector fields are often built from first derivatives
/// already, and the wider stencil keeps their rounding noise small.
fn vf_partial(x: &VectorFieldSpec, p: &[f64], axis: usize, cfg: &DiffConfig) -> Result<Vec<f64>> {
    let h = cfg.step_second(p[axis]);
    let mut q = p.to_vec();
    let mut at = |s: f64| {
        q[axis] = p[axis] + s * h;
        x.eval(&q)
    };
    let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
    Ok((0..x.dim())
        .map(|a| (-p2[a] + 8.0 * p1[a] - 8.0 * m1[a] + m2[a]) / (12.0 * h))
        .collect())
}

/// `Σ_a ∂X_a/∂ξ_a`, each term by a fourth-order central difference.
pub fn divergence(x: &VectorFieldSpec, p: &[f64], cfg: &DiffConfig) -> Result<f64> {
    let mut div = 0.0;
    for a in 0..x.dim() {
        div += vf_partial(x, p, a, cfg)?[a];
    }
    Ok(div)
}

/// Jacobian `∂X_a/∂ξ_b`, with the stencil of [`divergence`].
pub fn jacobian(x: &VectorFieldSpec, p: &[f64], cfg: &DiffConfig) -> Result<Matrix> {
    let n = x.dim();
    let mut j = Matrix::zeros(n, n);
    for b in 0..n {
        let col = vf_partial(x, p, b, cfg)?;
        for (a, v) in col.into_iter().enumerate() {
            j[(a, b)] = v;
        }
    }
    Ok(j)
}

/// `‖v‖_∞` of `ω(p)·v` for each candidate vector; zero means `v ∈ ker ω(p)`.
pub fn kernel_membership(omega: &TwoFormField, p: &[f64], v: &[f64]) -> Result<f64> {
    Ok(norm_inf(&omega.at(p)?.mul_vec(v)))
}

/// Distance of `v` from the span of an orthonormal family.
pub fn distance_from_span(basis: &[Vec<f64>], v: &[f64]) -> f64 {
    let mut r = v.to_vec();
    for b in basis {
        let c = crate::linalg::dot(&r, b);
        for (x, y) in r.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
    crate::linalg::dot(&r, &r).sqrt()
}
