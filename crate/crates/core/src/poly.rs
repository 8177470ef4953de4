//! Sparse multivariate polynomials with exact gradients, and random smooth
//! structures built from them for property checks.

use rand::Rng;

use crate::geom::{AntisymBlock, BivectorField, ScalarField, TwoFormField};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Polynomial {
            dim,
            terms: vec![Monomial {
                coeff: c,
                powers: vec![0; dim],
            }],
        }
    }

    pub fn new(dim: usize, terms: Vec<Monomial>) -> Self {
        assert!(terms.iter().all(|t| t.powers.len() == dim));
        Polynomial { dim, terms }
    }

    /// `nterms` monomials of total degree `1..=degree` in the variables
    /// listed in `vars`, coefficients uniform in `[-1, 1]`.
    pub fn random<R: Rng>(rng: &mut R, dim: usize, vars: &[usize], degree: u32, nterms: usize) -> Self {
        let mut terms = Vec::with_capacity(nterms);
        if vars.is_empty() || degree == 0 {
            return Polynomial::zero(dim);
        }
        for _ in 0..nterms {
            let deg = rng.gen_range(1..=degree);
            let mut powers = vec![0; dim];
            for _ in 0..deg {
                powers[vars[rng.gen_range(0..vars.len())]] += 1;
            }
            terms.push(Monomial {
                coeff: rng.gen_range(-1.0..=1.0),
                powers,
            });
        }
        Polynomial { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.powers
                    .iter()
                    .zip(p)
                    .fold(t.coeff, |acc, (&k, &x)| acc * x.powi(k as i32))
            })
            .sum()
    }

    pub fn derivative(&self, axis: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[axis] > 0)
            .map(|t| {
                let mut powers = t.powers.clone();
                powers[axis] -= 1;
                Monomial {
                    coeff: t.coeff * t.powers[axis] as f64,
                    powers,
                }
            })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|a| self.derivative(a).eval(p)).collect()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial { dim: self.dim, terms }
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial {
                coeff: s * t.coeff,
                powers: t.powers.clone(),
            })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    /// Expression text in the given variable names, parseable by
    /// [`crate::expr::parse`].
    pub fn to_expr_string(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let mut s = format!("({:?})", t.coeff);
                for (k, name) in t.powers.iter().zip(names) {
                    match k {
                        0 => {}
                        1 => s += &format!("*{name}"),
                        _ => s += &format!("*{name}^{k}"),
                    }
                }
                s
            })
            .collect();
        parts.join(" + ")
    }

    /// The polynomial as a field whose gradient is exact.
    pub fn to_field(&self) -> ScalarField {
        if self.terms.is_empty() {
            return ScalarField::zero();
        }
        let f = self.clone();
        let g = self.clone();
        ScalarField::from_fn("poly", move |p| f.eval(p)).with_gradient(move |p, _| Ok(g.gradient(p)))
    }
}

/// Antisymmetric block of random polynomials in `vars` (entries on
/// `dim` coordinates, upper triangle drawn, lower triangle negated).
pub fn random_antisym_block<R: Rng>(
    rng: &mut R,
    n: usize,
    dim: usize,
    vars: &[usize],
    degree: u32,
    nterms: usize,
) -> AntisymBlock {
    AntisymBlock::from_upper(n, |_, _| Polynomial::random(rng, dim, vars, degree, nterms).to_field())
}

/// Coefficients `S_ab = ∂_a α_b − ∂_b α_a` of `dα` for a random polynomial
/// one-form `α` of degree `degree + 1`; closed by construction.
pub fn random_exact_form<R: Rng>(rng: &mut R, dim: usize, degree: u32, nterms: usize) -> Vec<Vec<Polynomial>> {
    let all: Vec<usize> = (0..dim).collect();
    let alpha: Vec<Polynomial> = (0..dim)
        .map(|_| Polynomial::random(rng, dim, &all, degree + 1, nterms))
        .collect();
    (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| alpha[b].derivative(a).add(&alpha[a].derivative(b).scaled(-1.0)))
                .collect()
        })
        .collect()
}

/// The canonical flat matrix `[[0, −I], [I, 0]]` of `dim = 2n`.
pub fn canonical_flat(dim: usize) -> Matrix {
    let n = dim / 2;
    Matrix::from_fn(dim, dim, |a, b| {
        if b == a + n && a < n {
            -1.0
        } else if a == b + n && b < n {
            1.0
        } else {
            0.0
        }
    })
}

/// `canonical + scale·S` where `S` is either an exact (closed) random
/// polynomial form or, when `closed` is false, a random antisymmetric
/// polynomial matrix plus a planted non-closed term `x_{a+2}` in the
/// `(a, a+1)` slot.
pub fn random_form<R: Rng>(rng: &mut R, dim: usize, closed: bool, scale: f64) -> TwoFormField {
    let all: Vec<usize> = (0..dim).collect();
    let base = canonical_flat(dim);
    let pert: Vec<Vec<Polynomial>> = if closed {
        random_exact_form(rng, dim, 1, 3)
    } else {
        let mut m = vec![vec![Polynomial::zero(dim); dim]; dim];
        for a in 0..dim {
            for b in a + 1..dim {
                let p = Polynomial::random(rng, dim, &all, 2, 2);
                m[b][a] = p.scaled(-1.0);
                m[a][b] = p;
            }
        }
        let a = rng.gen_range(0..dim - 2);
        let planted = Polynomial::new(
            dim,
            vec![Monomial {
                coeff: 1.0,
                powers: (0..dim).map(|i| u32::from(i == a + 2)).collect(),
            }],
        );
        m[a][a + 1] = m[a][a + 1].add(&planted);
        m[a + 1][a] = m[a + 1][a].add(&planted.scaled(-1.0));
        m
    };
    let rows = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    Polynomial::constant(dim, base[(a, b)])
                        .add(&pert[a][b].scaled(scale))
                        .to_field()
                })
                .collect()
        })
        .collect();
    TwoFormField::from_rows(rows).expect("square by construction")
}

/// A random bivector: the inverse of a closed random form when `poisson`
/// is true, otherwise a canonical matrix plus random antisymmetric
/// polynomial entries with a planted `x_{a+2} ∂_a∧∂_{a+1}` term.
pub fn random_bivector<R: Rng>(rng: &mut R, dim: usize, poisson: bool, scale: f64) -> BivectorField {
    if poisson {
        return BivectorField::inverse_of(&random_form(rng, dim, true, scale), crate::geom::DEFAULT_PIVOT_TOL);
    }
    BivectorField::from_matrix_field(random_form(rng, dim, false, scale).matrix_field().clone())
}
