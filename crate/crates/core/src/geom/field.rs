//! Point-to-value maps on a single coordinate chart and their numeric
//! derivatives.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, Binding, BoundExpr, Expr};
use crate::linalg::Matrix;

/// A coordinate chart: one alias per axis plus named parameters that
/// expressions may reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpace {
    aliases: Vec<String>,
    params: BTreeMap<String, f64>,
}

impl PhaseSpace {
    pub fn new(
        aliases: impl IntoIterator<Item = impl Into<String>>,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let aliases: Vec<String> = aliases.into_iter().map(Into::into).collect();
        if aliases.len() < 2 || aliases.len() % 2 != 0 {
            return Err(Error::invalid(format!(
                "phase space dimension must be even and at least 2, got {}",
                aliases.len()
            )));
        }
        for (i, a) in aliases.iter().enumerate() {
            if aliases[..i].contains(a) {
                return Err(Error::invalid(format!("duplicate coordinate alias `{a}`")));
            }
            if params.contains_key(a) {
                return Err(Error::invalid(format!("`{a}` is both a coordinate and a parameter")));
            }
        }
        if let Some((k, v)) = params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("parameter `{k}` is not finite ({v})")));
        }
        Ok(PhaseSpace { aliases, params })
    }

    /// `(q1..qn, p1..pn)`.
    pub fn canonical(n: usize) -> Self {
        Self::with_prefixes(n, "q", "p")
    }

    /// `(prefix_a 1..n, prefix_b 1..n)`, e.g. `x1..x3, xd1..xd3`.
    pub fn with_prefixes(n: usize, a: &str, b: &str) -> Self {
        let aliases = (1..=n)
            .map(|i| format!("{a}{i}"))
            .chain((1..=n).map(|i| format!("{b}{i}")))
            .collect();
        PhaseSpace {
            aliases,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn dim(&self) -> usize {
        self.aliases.len()
    }

    pub fn aliases(&self) -> &[String] {
        &self.aliases
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn index_of(&self, alias: &str) -> Option<usize> {
        self.aliases.iter().position(|a| a == alias)
    }

    /// Binds an expression's identifiers to coordinates and parameters.
    pub fn bind(&self, e: &Expr) -> Result<ScalarField> {
        let bound = e.bind(&|name| {
            self.index_of(name)
                .map(Binding::Coord)
                .or_else(|| self.param(name).map(Binding::Value))
        })?;
        Ok(ScalarField::from_bound(bound))
    }

    /// Parses and binds `source`.
    pub fn field(&self, source: &str) -> Result<ScalarField> {
        self.bind(&expr::parse(source)?)
    }
}

/// Central-difference settings. The step along axis `a` is
/// `h0 * max(1, |x_a|)`. Second derivatives of scalar fields and first
/// derivatives of vector fields use the coarser `h0_second` the same way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConfig {
    pub h0: f64,
    pub h0_second: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            h0: 1e-5,
            h0_second: 1e-3,
        }
    }
}

impl DiffConfig {
    pub fn new(h0: f64) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(Error::invalid(format!("difference step must be positive, got {h0}")));
        }
        Ok(DiffConfig {
            h0,
            ..Default::default()
        })
    }

    pub fn step(&self, x: f64) -> f64 {
        self.h0 * x.abs().max(1.0)
    }

    pub fn step_second(&self, x: f64) -> f64 {
        self.h0_second * x.abs().max(1.0)
    }
}

type EvalFn = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;
type GradFn = dyn Fn(&[f64], &DiffConfig) -> Result<Vec<f64>> + Send + Sync;

/// A real-valued function on the chart.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<EvalFn>,
    grad: Option<Arc<GradFn>>,
    constant: Option<f64>,
    label: Arc<str>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.label)
    }
}

impl ScalarField {
    pub fn constant(c: f64) -> Self {
        ScalarField {
            eval: Arc::new(move |_| Ok(c)),
            grad: None,
            constant: Some(c),
            label: format!("{c:?}").into(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// The coordinate function `ξ_index`, with its exact gradient.
    pub fn coordinate(index: usize) -> Self {
        ScalarField {
            eval: Arc::new(move |p: &[f64]| {
                p.get(index)
                    .copied()
                    .ok_or_else(|| Error::dimension("point", index + 1, p.len()))
            }),
            grad: Some(Arc::new(move |p: &[f64], _: &DiffConfig| {
                let mut g = vec![0.0; p.len()];
                g[index] = 1.0;
                Ok(g)
            })),
            constant: None,
            label: format!("xi{}", index + 1).into(),
        }
    }

    pub fn from_fn(label: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::try_from_fn(label, move |p| Ok(f(p)))
    }

    pub fn try_from_fn(
        label: &str,
        f: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            eval: Arc::new(f),
            grad: None,
            constant: None,
            label: label.into(),
        }
    }

    pub fn from_bound(e: BoundExpr) -> Self {
        let label = e.to_string();
        ScalarField {
            eval: Arc::new(move |p: &[f64]| {
                e.eval(p).map_err(|source| Error::Eval {
                    point: p.to_vec(),
                    source,
                })
            }),
            grad: None,
            constant: None,
            label: label.into(),
        }
    }

    /// Installs an analytic gradient used in place of central differences.
    pub fn with_gradient(
        mut self,
        g: impl Fn(&[f64], &DiffConfig) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    pub fn has_gradient_override(&self) -> bool {
        self.grad.is_some()
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        (self.eval)(p)
    }

    pub fn neg(&self) -> ScalarField {
        self.scaled(-1.0)
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        if let Some(c) = self.constant {
            return Self::constant(s * c);
        }
        let inner = self.clone();
        let label = format!("{s:?}*({})", self.label);
        let mut out = Self::try_from_fn(&label, move |p| Ok(s * inner.eval(p)?));
        if let Some(g) = self.grad.clone() {
            out.grad = Some(Arc::new(move |p: &[f64], cfg: &DiffConfig| {
                Ok(g(p, cfg)?.into_iter().map(|v| s * v).collect())
            }));
        }
        out
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        match (self.constant, other.constant) {
            (Some(a), Some(b)) => return Self::constant(a + b),
            (Some(a), None) if a == 0.0 => return other.clone(),
            (None, Some(b)) if b == 0.0 => return self.clone(),
            _ => {}
        }
        let (a, b) = (self.clone(), other.clone());
        let label = format!("{} + {}", self.label, other.label);
        Self::try_from_fn(&label, move |p| Ok(a.eval(p)? + b.eval(p)?))
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        let (a, b) = (self.clone(), other.clone());
        let label = format!("({}) * ({})", self.label, other.label);
        Self::try_from_fn(&label, move |p| Ok(a.eval(p)? * b.eval(p)?))
    }

    pub(crate) fn gradient_override(&self, p: &[f64], cfg: &DiffConfig) -> Option<Result<Vec<f64>>> {
        self.grad.as_ref().map(|g| g(p, cfg))
    }
}

/// `∂f/∂ξ_axis` at `p`.
pub fn partial(f: &ScalarField, p: &[f64], axis: usize, cfg: &DiffConfig) -> Result<f64> {
    if f.as_constant().is_some() {
        return Ok(0.0);
    }
    if let Some(g) = f.gradient_override(p, cfg) {
        return Ok(g?[axis]);
    }
    let h = cfg.step(p[axis]);
    let mut x = p.to_vec();
    x[axis] = p[axis] + h;
    let fp = f.eval(&x)?;
    x[axis] = p[axis] - h;
    let fm = f.eval(&x)?;
    Ok((fp - fm) / (2.0 * h))
}

/// Gradient at `p`: the analytic override when the field has one,
/// central differences otherwise.
pub fn gradient(f: &ScalarField, p: &[f64], cfg: &DiffConfig) -> Result<Vec<f64>> {
    if f.as_constant().is_some() {
        return Ok(vec![0.0; p.len()]);
    }
    if let Some(g) = f.gradient_override(p, cfg) {
        let g = g?;
        if g.len() != p.len() {
            return Err(Error::dimension("gradient override", p.len(), g.len()));
        }
        return Ok(g);
    }
    (0..p.len()).map(|a| partial(f, p, a, cfg)).collect()
}

/// Fourth-order central-difference gradient with the coarse step, for
/// fields that are themselves computed from first derivatives. Ignores any
/// gradient override.
pub fn coarse_gradient(f: &ScalarField, p: &[f64], cfg: &DiffConfig) -> Result<Vec<f64>> {
    if f.as_constant().is_some() {
        return Ok(vec![0.0; p.len()]);
    }
    let mut x = p.to_vec();
    let mut g = Vec::with_capacity(p.len());
    for a in 0..p.len() {
        let h = cfg.step_second(p[a]);
        let mut at = |s: f64| {
            x[a] = p[a] + s * h;
            f.eval(&x)
        };
        let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
        x[a] = p[a];
        g.push((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h));
    }
    Ok(g)
}

/// `∂²f/∂ξ_a∂ξ_b` by the four-point mixed stencil (three-point when
/// `a == b`) with the second-derivative step. Exact up to rounding on
/// polynomials of degree three or less.
pub fn second_partial(f: &ScalarField, p: &[f64], a: usize, b: usize, cfg: &DiffConfig) -> Result<f64> {
    if f.as_constant().is_some() {
        return Ok(0.0);
    }
    let ha = cfg.step_second(p[a]);
    let mut x = p.to_vec();
    if a == b {
        let f0 = f.eval(p)?;
        x[a] = p[a] + ha;
        let fp = f.eval(&x)?;
        x[a] = p[a] - ha;
        let fm = f.eval(&x)?;
        return Ok((fp - 2.0 * f0 + fm) / (ha * ha));
    }
    let hb = cfg.step_second(p[b]);
    let mut at = |sa: f64, sb: f64| {
        x[a] = p[a] + sa * ha;
        x[b] = p[b] + sb * hb;
        f.eval(&x)
    };
    let pp = at(1.0, 1.0)?;
    let pm = at(1.0, -1.0)?;
    let mp = at(-1.0, 1.0)?;
    let mm = at(-1.0, -1.0)?;
    Ok(((pp - pm) - (mp - mm)) / (4.0 * ha * hb))
}

type MatrixFn = dyn Fn(&[f64]) -> Result<Matrix> + Send + Sync;

enum MatrixKind {
    Entries(Vec<ScalarField>),
    Inverse { of: MatrixField, pivot_tol: f64 },
    Computed(Arc<MatrixFn>),
}

/// A square matrix of functions on the chart.
#[derive(Clone)]
pub struct MatrixField {
    dim: usize,
    kind: Arc<MatrixKind>,
}

impl fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &*self.kind {
            MatrixKind::Entries(_) => "entries",
            MatrixKind::Inverse { .. } => "inverse",
            MatrixKind::Computed(_) => "computed",
        };
        write!(f, "MatrixField({}x{}, {kind})", self.dim, self.dim)
    }
}

impl MatrixField {
    /// Row-major `dim × dim` entries.
    pub fn from_entries(dim: usize, entries: Vec<ScalarField>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::dimension("matrix entries", dim * dim, entries.len()));
        }
        Ok(MatrixField {
            dim,
            kind: Arc::new(MatrixKind::Entries(entries)),
        })
    }

    pub fn from_rows(rows: Vec<Vec<ScalarField>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::dimension("matrix row", dim, bad.len()));
        }
        Self::from_entries(dim, rows.into_iter().flatten().collect())
    }

    pub fn constant(m: &Matrix) -> Self {
        assert!(m.is_square());
        let entries = (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .map(|(i, j)| ScalarField::constant(m[(i, j)]))
            .collect();
        MatrixField {
            dim: m.rows(),
            kind: Arc::new(MatrixKind::Entries(entries)),
        }
    }

    pub fn computed(dim: usize, f: impl Fn(&[f64]) -> Result<Matrix> + Send + Sync + 'static) -> Self {
        MatrixField {
            dim,
            kind: Arc::new(MatrixKind::Computed(Arc::new(f))),
        }
    }

    /// Pointwise antisymmetrized inverse of an antisymmetric matrix field.
    pub(crate) fn inverse_of(of: &MatrixField, pivot_tol: f64) -> Self {
        MatrixField {
            dim: of.dim,
            kind: Arc::new(MatrixKind::Inverse {
                of: of.clone(),
                pivot_tol,
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, p: &[f64]) -> Result<Matrix> {
        if p.len() != self.dim {
            return Err(Error::dimension("point", self.dim, p.len()));
        }
        match &*self.kind {
            MatrixKind::Entries(entries) => {
                let mut m = Matrix::zeros(self.dim, self.dim);
                for (k, e) in entries.iter().enumerate() {
                    m[(k / self.dim, k % self.dim)] = e.eval(p)?;
                }
                Ok(m)
            }
            MatrixKind::Inverse { of, pivot_tol } => {
                let m = of.at(p)?;
                m.inverse(*pivot_tol)
                    .map(|inv| inv.antisymmetrized())
                    .map_err(|rank| Error::Degenerate {
                        rank,
                        dim: self.dim,
                        point: p.to_vec(),
                    })
            }
            MatrixKind::Computed(f) => {
                let m = f(p)?;
                if m.rows() != self.dim || m.cols() != self.dim {
                    return Err(Error::dimension("computed matrix", self.dim, m.rows()));
                }
                Ok(m)
            }
        }
    }

    pub fn entry(&self, a: usize, b: usize) -> ScalarField {
        if let MatrixKind::Entries(entries) = &*self.kind {
            return entries[a * self.dim + b].clone();
        }
        let this = self.clone();
        ScalarField::try_from_fn(&format!("M[{a},{b}]"), move |p| Ok(this.at(p)?[(a, b)]))
    }

    /// `∂M/∂ξ_axis` at `p`, entry by entry, by central differences of the
    /// whole matrix.
    pub fn partial(&self, p: &[f64], axis: usize, cfg: &DiffConfig) -> Result<Matrix> {
        if let MatrixKind::Entries(entries) = &*self.kind {
            if entries.iter().all(|e| e.as_constant().is_some()) {
                return Ok(Matrix::zeros(self.dim, self.dim));
            }
        }
        let h = cfg.step(p[axis]);
        let mut x = p.to_vec();
        x[axis] = p[axis] + h;
        let plus = self.at(&x)?;
        x[axis] = p[axis] - h;
        let minus = self.at(&x)?;
        Ok(plus.sub(&minus).scale(1.0 / (2.0 * h)))
    }

    /// `max |M + Mᵀ|` over the points.
    pub fn antisymmetry_defect<P: AsRef<[f64]>>(&self, points: &[P]) -> Result<crate::ResidualReport> {
        crate::ResidualReport::collect("antisymmetry", points, |p| Ok(self.at(p)?.antisymmetry_defect()))
    }
}

/// Antisymmetric `n × n` block of fields, stored in full with the lower
/// triangle the exact negation of the upper one unless built from explicit
/// entries.
#[derive(Clone, Debug)]
pub struct AntisymBlock {
    n: usize,
    entries: Vec<ScalarField>,
}

impl AntisymBlock {
    pub fn zeros(n: usize) -> Self {
        AntisymBlock {
            n,
            entries: vec![ScalarField::zero(); n * n],
        }
    }

    /// Sets entry `(i, j)` and its mirror `(j, i) = -value`.
    pub fn set(&mut self, i: usize, j: usize, value: ScalarField) -> &mut Self {
        assert!(i != j, "diagonal of an antisymmetric block is zero");
        self.entries[j * self.n + i] = value.neg();
        self.entries[i * self.n + j] = value;
        self
    }

    pub fn with(mut self, i: usize, j: usize, value: ScalarField) -> Self {
        self.set(i, j, value);
        self
    }

    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> ScalarField) -> Self {
        let mut b = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                b.set(i, j, upper(i, j));
            }
        }
        b
    }

    /// Takes the block as given; antisymmetry is the caller's claim and can
    /// be checked with [`MatrixField::antisymmetry_defect`].
    pub fn from_rows(rows: Vec<Vec<ScalarField>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::dimension("block row", n, bad.len()));
        }
        Ok(AntisymBlock {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn constant(m: &Matrix) -> Self {
        Self::from_upper(m.rows(), |i, j| ScalarField::constant(m[(i, j)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.entries[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.as_constant() == Some(0.0))
    }

    pub fn as_matrix_field(&self) -> MatrixField {
        MatrixField::from_entries(self.n, self.entries.clone()).expect("square by construction")
    }
}

/// Matrix of the map `ω♭` in the chart's coordinate basis, so that
/// `i(X)ω = M·X` and a term `c dξ_a∧dξ_b` contributes `M[a][b] = -c`,
/// `M[b][a] = c`. In this convention `dq∧dp` on the plane is `[[0,-1],[1,0]]`.
#[derive(Clone, Debug)]
pub struct TwoFormField(pub(crate) MatrixField);

/// Matrix of fundamental brackets, `Λ[a][b] = {ξ_a, ξ_b}`.
#[derive(Clone, Debug)]
pub struct BivectorField(pub(crate) MatrixField);

macro_rules! antisym_field_common {
    ($ty:ident) => {
        impl $ty {
            pub fn from_matrix_field(m: MatrixField) -> Self {
                $ty(m)
            }

            pub fn from_rows(rows: Vec<Vec<ScalarField>>) -> Result<Self> {
                Ok($ty(MatrixField::from_rows(rows)?))
            }

            pub fn constant(m: &Matrix) -> Self {
                $ty(MatrixField::constant(m))
            }

            pub fn from_upper(n: usize, upper: impl FnMut(usize, usize) -> ScalarField) -> Self {
                $ty(AntisymBlock::from_upper(n, upper).as_matrix_field())
            }

            pub fn dim(&self) -> usize {
                self.0.dim()
            }

            pub fn at(&self, p: &[f64]) -> Result<Matrix> {
                self.0.at(p)
            }

            pub fn entry(&self, a: usize, b: usize) -> ScalarField {
                self.0.entry(a, b)
            }

            pub fn matrix_field(&self) -> &MatrixField {
                &self.0
            }
        }
    };
}

antisym_field_common!(TwoFormField);
antisym_field_common!(BivectorField);

impl TwoFormField {
    /// The pointwise inverse of a regular bivector.
    pub fn inverse_of(lambda: &BivectorField, pivot_tol: f64) -> Self {
        TwoFormField(MatrixField::inverse_of(&lambda.0, pivot_tol))
    }
}

impl BivectorField {
    /// The Poisson tensor of a symplectic form: its pointwise inverse.
    pub fn inverse_of(omega: &TwoFormField, pivot_tol: f64) -> Self {
        BivectorField(MatrixField::inverse_of(&omega.0, pivot_tol))
    }
}

/// Builds a two-form from wedge terms `Σ c·dξ_a∧dξ_b`.
#[derive(Clone, Debug)]
pub struct FormBuilder {
    n: usize,
    entries: Vec<ScalarField>,
}

impl FormBuilder {
    pub fn new(n: usize) -> Self {
        FormBuilder {
            n,
            entries: vec![ScalarField::zero(); n * n],
        }
    }

    /// Adds `coeff · dξ_a∧dξ_b`.
    pub fn wedge(mut self, a: usize, b: usize, coeff: ScalarField) -> Self {
        assert!(a != b && a < self.n && b < self.n);
        let (ab, ba) = (a * self.n + b, b * self.n + a);
        self.entries[ab] = self.entries[ab].add(&coeff.neg());
        self.entries[ba] = self.entries[ba].add(&coeff);
        self
    }

    pub fn wedge_const(self, a: usize, b: usize, c: f64) -> Self {
        self.wedge(a, b, ScalarField::constant(c))
    }

    pub fn build(self) -> TwoFormField {
        TwoFormField(MatrixField::from_entries(self.n, self.entries).expect("square by construction"))
    }
}

type VecFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A vector field, evaluated as a whole vector per point.
#[derive(Clone)]
pub struct VectorFieldSpec {
    dim: usize,
    eval: Arc<VecFn>,
    label: Arc<str>,
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorFieldSpec({}, dim {})", self.label, self.dim)
    }
}

impl VectorFieldSpec {
    pub fn from_components(components: Vec<ScalarField>) -> Self {
        let dim = components.len();
        let label = format!("({})", components.iter().map(|c| c.label().to_string()).collect::<Vec<_>>().join(", "));
        Self::from_fn(dim, &label, move |p| components.iter().map(|c| c.eval(p)).collect())
    }

    pub fn from_fn(
        dim: usize,
        label: &str,
        f: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        VectorFieldSpec {
            dim,
            eval: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_fn(dim, "0", move |_| Ok(vec![0.0; dim]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim {
            return Err(Error::dimension("point", self.dim, p.len()));
        }
        let v = (self.eval)(p)?;
        if v.len() != self.dim {
            return Err(Error::dimension("vector field value", self.dim, v.len()));
        }
        Ok(v)
    }

    pub fn component(&self, a: usize) -> ScalarField {
        let this = self.clone();
        ScalarField::try_from_fn(&format!("{}[{a}]", self.label), move |p| Ok(this.eval(p)?[a]))
    }

    pub fn negated(&self) -> VectorFieldSpec {
        let this = self.clone();
        Self::from_fn(self.dim, &format!("-{}", self.label), move |p| {
            Ok(this.eval(p)?.into_iter().map(|v| -v).collect())
        })
    }
}
