//! Volume-preserving flows attached to a Souriau form
//! `ω = dx_{n+i}∧dx_i + ½ g_ij dx_{n+i}∧dx_{n+j} + ½ B_ij dx_i∧dx_j`
//! in Darboux coordinates `(x_1 … x_n, x_{n+1} … x_{2n})`.
//!
//! The field `X_ω` comes from `d(ω∧ω₀^{n−2})` through the volume form; in
//! coordinates only `∂g/∂(position)` and `∂B/∂(momentum)` survive:
//!
//! ```text
//! X_l     =  c Σ_k ∂g_kl/∂x_k
//! X_{n+l} = −c Σ_k ∂B_kl/∂x_{n+k}
//! ```
//!
//! Its divergence is `c Σ_kl ∂²g_kl/∂x_k∂x_l − c Σ_kl ∂²B_kl/∂x_{n+k}∂x_{n+l}`,
//! which vanishes by antisymmetry whatever the constant `c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{divergence, partial, AntisymBlock, DiffConfig, VectorFieldSpec};
use crate::report::ResidualReport;

/// Choice of the constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefactor {
    /// `(−1)ⁿ/(n−1)`, the constant in the coordinate equations of motion.
    EquationsOfMotion,
    /// `(−1)^{n(n−1)/2}/(n(n−1))`, the constant in front of the intrinsic
    /// formula for `X`.
    Intrinsic,
    Custom(f64),
}

impl Prefactor {
    pub fn value(self, n: usize) -> f64 {
        let nf = n as f64;
        let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        match self {
            Prefactor::EquationsOfMotion => sign(n) / (nf - 1.0),
            Prefactor::Intrinsic => sign(n * (n - 1) / 2) / (nf * (nf - 1.0)),
            Prefactor::Custom(c) => c,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VolumeFlowSpec {
    pub n: usize,
    /// Momentum-momentum block; entries may depend on all `2n` coordinates.
    pub g: AntisymBlock,
    /// Position-position block; entries may depend on all `2n` coordinates.
    pub b: AntisymBlock,
    pub prefactor: Prefactor,
}

impl VolumeFlowSpec {
    pub fn new(g: AntisymBlock, b: AntisymBlock) -> Result<Self> {
        let n = g.n();
        if n < 2 {
            return Err(Error::invalid(format!("volume flows need n >= 2, got n = {n}")));
        }
        if b.n() != n {
            return Err(Error::dimension("B block", n, b.n()));
        }
        Ok(VolumeFlowSpec {
            n,
            g,
            b,
            prefactor: Prefactor::EquationsOfMotion,
        })
    }

    pub fn with_prefactor(mut self, prefactor: Prefactor) -> Self {
        self.prefactor = prefactor;
        self
    }
}

/// Builds `X_ω`. Blocks with only constant entries give the zero field.
pub fn build_volume_flow(spec: &VolumeFlowSpec, cfg: DiffConfig) -> Result<VectorFieldSpec> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::invalid(format!("volume flows need n >= 2, got n = {n}")));
    }
    if spec.g.n() != n || spec.b.n() != n {
        return Err(Error::dimension("block", n, spec.g.n().max(spec.b.n())));
    }
    let constant = |blk: &AntisymBlock| (0..n).all(|i| (0..n).all(|j| blk.get(i, j).as_constant().is_some()));
    if constant(&spec.g) && constant(&spec.b) {
        return Ok(VectorFieldSpec::zero(2 * n));
    }
    let c = spec.prefactor.value(n);
    let (g, b) = (spec.g.clone(), spec.b.clone());
    Ok(VectorFieldSpec::from_fn(2 * n, "X_omega", move |p| {
        let mut x = vec![0.0; 2 * n];
        for l in 0..n {
            let mut sg = 0.0;
            let mut sb = 0.0;
            for k in 0..n {
                sg += partial(g.get(k, l), p, k, &cfg)?;
                sb += partial(b.get(k, l), p, n + k, &cfg)?;
            }
            x[l] = c * sg;
            x[n + l] = -c * sb;
        }
        Ok(x)
    }))
}

/// `max |div X|` over the points.
pub fn verify_volume_preservation<P: AsRef<[f64]>>(
    x: &VectorFieldSpec,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<ResidualReport> {
    ResidualReport::collect("divergence", points, |p| Ok(divergence(x, p, cfg)?.abs()))
}
