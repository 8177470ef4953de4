//! JSON model configuration and its translation into core objects.

use std::collections::BTreeMap;
use std::path::Path;

use ncphase_core::souriau::{
    kinetic_plus_potential, make_anyon, make_dual_magnetic, make_exotic_plane, make_generalized_lorentz,
};
use ncphase_core::volflow::{Prefactor, VolumeFlowSpec};
use ncphase_core::{
    AntisymBlock, BivectorField, Error, PhaseSpace, SampleBox, ScalarField, Scheme, SouriauModel, TwoFormField,
    DEFAULT_PROBES,
};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub space: Option<SpaceConfig>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub model: Option<ModelSection>,
    pub hamiltonian: Option<String>,
    pub probe: Option<ProbeConfig>,
    pub integrate: Option<IntegrateSection>,
    pub fd: Option<FdSection>,
    pub volume_flow: Option<VolumeFlowSection>,
    /// Default evaluation point for `brackets` and `kernel`.
    pub point: Option<Vec<f64>>,
    // accepted only so that they can be refused with a clear message
    charts: Option<serde_json::Value>,
    atlas: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub dim: Option<usize>,
    pub aliases: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub preset: Option<String>,
    pub omega: Option<Vec<Vec<String>>>,
    pub bivector: Option<Vec<Vec<String>>>,
    #[serde(rename = "B")]
    pub b: Option<FieldSpec>,
    #[serde(rename = "V")]
    pub v: Option<String>,
    pub g: Option<Vec<Vec<String>>>,
    pub f: Option<Vec<Vec<String>>>,
    pub phi: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Scalar(String),
    Vector(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSection {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub initial: Vec<f64>,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
}

fn default_scheme() -> Scheme {
    Scheme::Rk4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub name: String,
    pub expr: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    pub force: [String; 3],
    pub m: Option<f64>,
    pub checks: Option<Vec<FdCheck>>,
    pub nc_g: Option<Vec<Vec<String>>>,
    pub nc_vv: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdCheck {
    Dyson,
    ModifiedMaxwell,
    Nc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeFlowSection {
    pub g: Vec<Vec<String>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    pub prefactor: Option<Prefactor>,
}

/// What a model section turns into.
pub enum Structure {
    Form(SouriauModel),
    Bivector {
        space: PhaseSpace,
        lambda: BivectorField,
        hamiltonian: ScalarField,
    },
    Leibniz {
        space: PhaseSpace,
        g: Vec<Vec<ScalarField>>,
        hamiltonian: ScalarField,
    },
}

impl Structure {
    pub fn space(&self) -> &PhaseSpace {
        match self {
            Structure::Form(m) => &m.space,
            Structure::Bivector { space, .. } | Structure::Leibniz { space, .. } => space,
        }
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        match self {
            Structure::Form(m) => &m.hamiltonian,
            Structure::Bivector { hamiltonian, .. } | Structure::Leibniz { hamiltonian, .. } => hamiltonian,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Errors from building core objects: degeneracy is a check failure,
/// everything else a configuration problem.
fn build_err(what: &str, e: Error) -> Failure {
    match e {
        Error::Degenerate { .. } => Failure::Check(format!("{what}: {e}")),
        _ => Failure::Config(format!("{what}: {e}")),
    }
}

pub fn load(path: &Path) -> Result<ModelConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text).map_err(|f| match f {
        Failure::Config(m) => config_err(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_str(text: &str) -> Result<ModelConfig, Failure> {
    let cfg: ModelConfig = serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))?;
    if cfg.charts.is_some() || cfg.atlas.is_some() {
        return Err(config_err(
            "multi-chart atlases are not supported; a config describes a single chart",
        ));
    }
    Ok(cfg)
}

impl ModelConfig {
    fn param(&self, name: &str, preset: &str) -> Result<f64, Failure> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| config_err(format!("missing required field `params.{name}` for preset `{preset}`")))
    }

    /// Phase space with the given default aliases, overridden by
    /// `space.aliases` when present, and every parameter bound.
    fn space_with(&self, default_aliases: Vec<String>) -> Result<PhaseSpace, Failure> {
        let aliases = match self.space.as_ref().and_then(|s| s.aliases.clone()) {
            Some(a) if a.len() != default_aliases.len() => {
                return Err(config_err(format!(
                    "space.aliases: expected {} names, found {}",
                    default_aliases.len(),
                    a.len()
                )))
            }
            Some(a) => a,
            None => default_aliases,
        };
        if let Some(d) = self.space.as_ref().and_then(|s| s.dim) {
            if d != aliases.len() {
                return Err(config_err(format!("space.dim is {d} but the model has dimension {}", aliases.len())));
            }
        }
        PhaseSpace::new(aliases, self.params.clone()).map_err(|e| config_err(format!("space: {e}")))
    }

    fn model(&self) -> Result<&ModelSection, Failure> {
        self.model.as_ref().ok_or_else(|| config_err("missing field `model`"))
    }

    pub fn structure(&self) -> Result<Structure, Failure> {
        let m = self.model()?;
        match m.preset.as_deref() {
            Some("exotic_plane") => self.exotic(m),
            Some("anyon") => {
                let (kappa, mass) = (self.param("kappa", "anyon")?, self.param("m", "anyon")?);
                let (mut mdl, _) = make_anyon(kappa, mass).map_err(|e| build_err("anyon", e))?;
                mdl.space = self.space_with(mdl.space.aliases().to_vec())?;
                Ok(Structure::Form(mdl))
            }
            Some("generalized_lorentz") => self.lorentz(m),
            Some("dual_magnetic") => self.dual_magnetic(m),
            Some("leibniz") => {
                let rows = m.g.as_ref().ok_or_else(|| config_err("preset `leibniz` needs `model.g`"))?;
                let space = self.space_with(canonical_aliases(rows.len())?)?;
                let g = matrix(&space, rows, "model.g")?;
                Ok(Structure::Leibniz {
                    hamiltonian: self.hamiltonian_field(&space, true)?,
                    space,
                    g,
                })
            }
            Some(other) => Err(config_err(format!(
                "model.preset: unknown preset `{other}` (known: exotic_plane, anyon, generalized_lorentz, dual_magnetic, leibniz)"
            ))),
            None => self.custom(m),
        }
    }

    fn hamiltonian_field(&self, space: &PhaseSpace, required: bool) -> Result<ScalarField, Failure> {
        match &self.hamiltonian {
            Some(src) => field(space, src, "hamiltonian"),
            None if required => Err(config_err("missing field `hamiltonian`")),
            None => Ok(ScalarField::zero()),
        }
    }

    fn exotic(&self, m: &ModelSection) -> Result<Structure, Failure> {
        let theta = self.param("theta", "exotic_plane")?;
        let mass = self.param("m", "exotic_plane")?;
        let space = self.space_with(canonical_aliases(4)?)?;
        let b = match &m.b {
            None => ScalarField::zero(),
            Some(FieldSpec::Scalar(s)) => field(&space, s, "model.B")?,
            Some(FieldSpec::Vector(_)) => return Err(config_err("model.B: exotic_plane takes a single expression")),
        };
        let v = opt_field(&space, m.v.as_deref(), "model.V")?;
        let mut mdl = make_exotic_plane(theta, mass, b, v).map_err(|e| build_err("exotic_plane", e))?;
        mdl.space = space;
        Ok(Structure::Form(mdl))
    }

    fn lorentz(&self, m: &ModelSection) -> Result<Structure, Failure> {
        let mass = self.param("m", "generalized_lorentz")?;
        let space = self.space_with(PhaseSpace::with_prefixes(3, "x", "xd").aliases().to_vec())?;
        let b: [ScalarField; 3] = match &m.b {
            None => std::array::from_fn(|_| ScalarField::zero()),
            Some(FieldSpec::Vector(v)) if v.len() == 3 => {
                let f = |i: usize| field(&space, &v[i], &format!("model.B[{i}]"));
                [f(0)?, f(1)?, f(2)?]
            }
            Some(_) => return Err(config_err("model.B: generalized_lorentz takes three expressions")),
        };
        let g = match &m.g {
            None => AntisymBlock::zeros(3),
            Some(rows) => block(&space, rows, "model.g", Some(3))?,
        };
        let phi = opt_field(&space, m.phi.as_deref(), "model.phi")?;
        let mut mdl = make_generalized_lorentz(mass, b, g, phi).map_err(|e| build_err("generalized_lorentz", e))?;
        mdl.space = space;
        Ok(Structure::Form(mdl))
    }

    fn dual_magnetic(&self, m: &ModelSection) -> Result<Structure, Failure> {
        let n = match (&m.g, &m.f) {
            (Some(g), _) => g.len(),
            (None, Some(f)) => f.len(),
            (None, None) => return Err(config_err("preset `dual_magnetic` needs `model.g` or `model.f`")),
        };
        let space = self.space_with(canonical_aliases(2 * n)?)?;
        let g = match &m.g {
            Some(rows) => block(&space, rows, "model.g", Some(n))?,
            None => AntisymBlock::zeros(n),
        };
        let f = match &m.f {
            Some(rows) => block(&space, rows, "model.f", Some(n))?,
            None => AntisymBlock::zeros(n),
        };
        let h = match &self.hamiltonian {
            Some(src) => field(&space, src, "hamiltonian")?,
            None => {
                let mass = self.param("m", "dual_magnetic")?;
                let v = opt_field(&space, m.v.as_deref(), "model.V")?;
                kinetic_plus_potential(n, mass, &v)
            }
        };
        let mut mdl = make_dual_magnetic(n, g, f, h).map_err(|e| build_err("dual_magnetic", e))?;
        mdl.space = space;
        Ok(Structure::Form(mdl))
    }

    fn custom(&self, m: &ModelSection) -> Result<Structure, Failure> {
        match (&m.omega, &m.bivector) {
            (Some(rows), None) => {
                let space = self.space_with(canonical_aliases(rows.len())?)?;
                let omega = TwoFormField::from_rows(matrix(&space, rows, "model.omega")?)
                    .map_err(|e| config_err(format!("model.omega: {e}")))?;
                let h = self.hamiltonian_field(&space, false)?;
                let mdl = SouriauModel::custom("custom", space, omega, h).map_err(|e| build_err("custom", e))?;
                Ok(Structure::Form(mdl))
            }
            (None, Some(rows)) => {
                let space = self.space_with(canonical_aliases(rows.len())?)?;
                let lambda = BivectorField::from_rows(matrix(&space, rows, "model.bivector")?)
                    .map_err(|e| config_err(format!("model.bivector: {e}")))?;
                Ok(Structure::Bivector {
                    hamiltonian: self.hamiltonian_field(&space, false)?,
                    space,
                    lambda,
                })
            }
            (Some(_), Some(_)) => Err(config_err("model: give either `omega` or `bivector`, not both")),
            (None, None) => Err(config_err(
                "model: needs a `preset`, or custom `omega` or `bivector` entries",
            )),
        }
    }

    /// Probe box, count and seed after applying command-line overrides.
    pub fn probes(&self, dim: usize, count: Option<usize>, seed: Option<u64>) -> Result<(SampleBox, usize, u64), Failure> {
        let p = self.probe.as_ref();
        let lo = p.and_then(|p| p.lo.clone()).unwrap_or_else(|| vec![-1.0; dim]);
        let hi = p.and_then(|p| p.hi.clone()).unwrap_or_else(|| vec![1.0; dim]);
        if lo.len() != dim || hi.len() != dim {
            return Err(config_err(format!("probe: box bounds must have {dim} entries")));
        }
        let bbox = SampleBox::new(lo, hi).map_err(|e| config_err(format!("probe: {e}")))?;
        let count = count.or(p.and_then(|p| p.count)).unwrap_or(DEFAULT_PROBES);
        if count == 0 {
            return Err(config_err("probe: count must be positive"));
        }
        let seed = seed.or(p.and_then(|p| p.seed)).unwrap_or(0);
        Ok((bbox, count, seed))
    }

    pub fn fd_space(&self) -> Result<PhaseSpace, Failure> {
        PhaseSpace::new(PhaseSpace::with_prefixes(3, "x", "xd").aliases().to_vec(), self.params.clone())
            .map_err(|e| config_err(format!("space: {e}")))
    }

    pub fn volume_flow(&self) -> Result<(PhaseSpace, VolumeFlowSpec), Failure> {
        let vf = self
            .volume_flow
            .as_ref()
            .ok_or_else(|| config_err("missing field `volume_flow`"))?;
        let n = vf.g.len();
        let space = self.space_with(canonical_aliases(2 * n)?)?;
        let g = block(&space, &vf.g, "volume_flow.g", Some(n))?;
        let b = block(&space, &vf.b, "volume_flow.B", Some(n))?;
        let spec = VolumeFlowSpec::new(g, b)
            .map_err(|e| config_err(format!("volume_flow: {e}")))?
            .with_prefactor(vf.prefactor.unwrap_or(Prefactor::EquationsOfMotion));
        Ok((space, spec))
    }
}

fn canonical_aliases(dim: usize) -> Result<Vec<String>, Failure> {
    if dim < 2 || dim % 2 != 0 {
        return Err(config_err(format!("phase space dimension must be even and at least 2, got {dim}")));
    }
    Ok(PhaseSpace::canonical(dim / 2).aliases().to_vec())
}

pub fn field(space: &PhaseSpace, src: &str, at: &str) -> Result<ScalarField, Failure> {
    space.field(src).map_err(|e| config_err(format!("{at}: {e} in {src:?}")))
}

fn opt_field(space: &PhaseSpace, src: Option<&str>, at: &str) -> Result<ScalarField, Failure> {
    src.map_or(Ok(ScalarField::zero()), |s| field(space, s, at))
}

pub fn matrix(space: &PhaseSpace, rows: &[Vec<String>], at: &str) -> Result<Vec<Vec<ScalarField>>, Failure> {
    let n = rows.len();
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != n {
                return Err(config_err(format!("{at}[{i}]: expected {n} entries, found {}", row.len())));
            }
            row.iter()
                .enumerate()
                .map(|(j, s)| field(space, s, &format!("{at}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

pub fn block(space: &PhaseSpace, rows: &[Vec<String>], at: &str, n: Option<usize>) -> Result<AntisymBlock, Failure> {
    if let Some(n) = n {
        if rows.len() != n {
            return Err(config_err(format!("{at}: expected a {n}x{n} block, found {} rows", rows.len())));
        }
    }
    AntisymBlock::from_rows(matrix(space, rows, at)?).map_err(|e| config_err(format!("{at}: {e}")))
}
