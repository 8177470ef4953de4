//! Souriau-modified models: dual-magnetic forms, the exotic plane, the
//! planar anyon on the Pontryagin bundle and the generalized Lorentz force.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::geom::{
    gradient, hamiltonian_vf, AntisymBlock, BivectorField, DiffConfig, FormBuilder, PhaseSpace, ScalarField,
    TwoFormField, VectorFieldSpec, DEFAULT_PIVOT_TOL,
};
use crate::linalg::Matrix;
use crate::report::ResidualReport;

/// Which blocks the form was assembled from.
#[derive(Debug, Clone)]
pub enum ModelKind {
    Custom,
    /// `ω = ω₀ + ½ g_ij dq_i∧dq_j + ½ f_ij dp_i∧dp_j`.
    DualMagnetic { g: AntisymBlock, f: AntisymBlock },
    /// The dual-magnetic case `n = 2`, `g_12 = −B`, `f_12 = −θ`.
    ExoticPlane { theta: f64, b: ScalarField },
    Anyon { kappa: f64 },
    GeneralizedLorentz {
        b: [ScalarField; 3],
        g: AntisymBlock,
        phi: ScalarField,
    },
}

#[derive(Debug, Clone)]
pub struct SouriauModel {
    pub name: String,
    pub space: PhaseSpace,
    pub omega: TwoFormField,
    pub hamiltonian: ScalarField,
    pub kind: ModelKind,
}

impl SouriauModel {
    pub fn custom(name: &str, space: PhaseSpace, omega: TwoFormField, hamiltonian: ScalarField) -> Result<Self> {
        if omega.dim() != space.dim() {
            return Err(Error::dimension("two-form", space.dim(), omega.dim()));
        }
        Ok(SouriauModel {
            name: name.to_string(),
            space,
            omega,
            hamiltonian,
            kind: ModelKind::Custom,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.space.param(name)
    }

    /// The Poisson tensor `Λ = ω⁻¹`, evaluated lazily; degenerate points
    /// surface as `Error::Degenerate`.
    pub fn poisson(&self) -> BivectorField {
        BivectorField::inverse_of(&self.omega, DEFAULT_PIVOT_TOL)
    }

    /// `(g, f)` for dual-magnetic models, including the exotic plane.
    pub fn dual_blocks(&self) -> Option<(AntisymBlock, AntisymBlock)> {
        match &self.kind {
            ModelKind::DualMagnetic { g, f } => Some((g.clone(), f.clone())),
            ModelKind::ExoticPlane { theta, b } => Some((
                AntisymBlock::zeros(2).with(0, 1, b.neg()),
                AntisymBlock::zeros(2).with(0, 1, ScalarField::constant(-theta)),
            )),
            _ => None,
        }
    }
}

/// Labelled constraint functions.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub constraints: Vec<(String, ScalarField)>,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ScalarField> {
        self.constraints.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// `C_ij = {λ_i, λ_j}` at `p`.
    pub fn bracket_matrix(&self, lambda: &BivectorField, p: &[f64], cfg: &DiffConfig) -> Result<Matrix> {
        let l = lambda.at(p)?;
        let grads: Vec<Vec<f64>> = self
            .constraints
            .iter()
            .map(|(_, f)| gradient(f, p, cfg))
            .collect::<Result<_>>()?;
        let k = grads.len();
        Ok(Matrix::from_fn(k, k, |i, j| crate::geom::antisym_pairing(&l, &grads[i], &grads[j])))
    }
}

/// `δ_ij p_i p_j / 2m + V(q)` on `(q1..qn, p1..pn)`, with the kinetic part
/// differentiated exactly.
pub fn kinetic_plus_potential(n: usize, m: f64, v: &ScalarField) -> ScalarField {
    let (v1, v2) = (v.clone(), v.clone());
    ScalarField::try_from_fn(&format!("p^2/(2m) + {}", v.label()), move |p| {
        let kin: f64 = p[n..2 * n].iter().map(|x| x * x).sum::<f64>() / (2.0 * m);
        Ok(kin + v1.eval(p)?)
    })
    .with_gradient(move |p, cfg| {
        let mut g = gradient(&v2, p, cfg)?;
        for i in 0..n {
            g[n + i] += p[n + i] / m;
        }
        Ok(g)
    })
}

fn check_mass(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("mass must be positive and finite, got {m}")))
    }
}

/// Assembles `ω₀ + ½ g_ij dq_i∧dq_j + ½ f_ij dp_i∧dp_j` on
/// `(q1..qn, p1..pn)`, with `ω₀ = dq_i∧dp_i` in this crate's sign
/// convention (flat matrix `[[−g, −I], [I, −f]]`).
pub fn make_dual_magnetic(n: usize, g: AntisymBlock, f: AntisymBlock, h: ScalarField) -> Result<SouriauModel> {
    if n == 0 {
        return Err(Error::invalid("dual-magnetic model needs n >= 1"));
    }
    if g.n() != n {
        return Err(Error::dimension("g block", n, g.n()));
    }
    if f.n() != n {
        return Err(Error::dimension("f block", n, f.n()));
    }
    let omega = dual_magnetic_form(n, &g, &f);
    Ok(SouriauModel {
        name: "dual_magnetic".into(),
        space: PhaseSpace::canonical(n),
        omega,
        hamiltonian: h,
        kind: ModelKind::DualMagnetic { g, f },
    })
}

fn dual_magnetic_form(n: usize, g: &AntisymBlock, f: &AntisymBlock) -> TwoFormField {
    let mut fb = FormBuilder::new(2 * n);
    for i in 0..n {
        fb = fb.wedge_const(i, n + i, 1.0);
        for j in i + 1..n {
            fb = fb.wedge(i, j, g.get(i, j).clone());
            fb = fb.wedge(n + i, n + j, f.get(i, j).clone());
        }
    }
    fb.build()
}

/// `ω_{θ,σ} = ω_θ − π*σ` with `σ = B dq1∧dq2` and `H = p²/2m + V`.
/// `b` and `v` are fields on the 4-dimensional chart `(q1, q2, p1, p2)`.
pub fn make_exotic_plane(theta: f64, m: f64, b: ScalarField, v: ScalarField) -> Result<SouriauModel> {
    check_mass(m)?;
    let g = AntisymBlock::zeros(2).with(0, 1, b.neg());
    let f = AntisymBlock::zeros(2).with(0, 1, ScalarField::constant(-theta));
    let omega = dual_magnetic_form(2, &g, &f);
    Ok(SouriauModel {
        name: "exotic_plane".into(),
        space: PhaseSpace::canonical(2).with_param("m", m).with_param("theta", theta),
        omega,
        hamiltonian: kinetic_plus_potential(2, m, &v),
        kind: ModelKind::ExoticPlane { theta, b },
    })
}

/// The lift `(−q2, q1, −p2, p1)` of plane rotations.
pub fn rotation_lift() -> VectorFieldSpec {
    VectorFieldSpec::from_fn(4, "rotation", |p| Ok(vec![-p[1], p[0], -p[3], p[2]]))
}

/// Rotation generator `q1 p2 − q2 p1 + (θ/2)(p1² + p2²) + (B/2)(q1² + q2²)`
/// for constant `B`.
pub fn exotic_rotation_generator(theta: f64, b: f64) -> ScalarField {
    ScalarField::from_fn("rotation generator", move |x| {
        let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
        q1 * p2 - q2 * p1 + 0.5 * theta * (p1 * p1 + p2 * p2) + 0.5 * b * (q1 * q1 + q2 * q2)
    })
    .with_gradient(move |x, _| {
        let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
        Ok(vec![p2 + b * q1, -p1 + b * q2, -q2 + theta * p1, q1 + theta * p2])
    })
}

/// Planar anyon on `(q1, q2, v1, v2, p1, p2)`: `ω = −pr₁*(κ dv1∧dv2) +
/// pr₂*ω₀`, constraints `λ_i = p_i − m v_i`, energy `p·v − ½ m v²`.
pub fn make_anyon(kappa: f64, m: f64) -> Result<(SouriauModel, ConstraintSet)> {
    check_mass(m)?;
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::Degenerate {
            rank: 4,
            dim: 6,
            point: Vec::new(),
        });
    }
    let omega = FormBuilder::new(6)
        .wedge_const(0, 4, 1.0)
        .wedge_const(1, 5, 1.0)
        .wedge_const(2, 3, -kappa)
        .build();
    let space = PhaseSpace::new(
        ["q1", "q2", "v1", "v2", "p1", "p2"],
        [("m".to_string(), m), ("kappa".to_string(), kappa)].into_iter().collect(),
    )?;
    let h = ScalarField::from_fn("p.v - m v^2/2", move |x| {
        x[4] * x[2] + x[5] * x[3] - 0.5 * m * (x[2] * x[2] + x[3] * x[3])
    })
    .with_gradient(move |x, _| Ok(vec![0.0, 0.0, x[4] - m * x[2], x[5] - m * x[3], x[2], x[3]]));
    let lam = |i: usize| {
        ScalarField::from_fn(&format!("lambda{}", i + 1), move |x| x[4 + i] - m * x[2 + i]).with_gradient(
            move |_, _| {
                let mut g = vec![0.0; 6];
                g[4 + i] = 1.0;
                g[2 + i] = -m;
                Ok(g)
            },
        )
    };
    let constraints = ConstraintSet {
        constraints: vec![("lambda1".into(), lam(0)), ("lambda2".into(), lam(1))],
    };
    let model = SouriauModel {
        name: "anyon".into(),
        space,
        omega,
        hamiltonian: h,
        kind: ModelKind::Anyon { kappa },
    };
    Ok((model, constraints))
}

/// `ω = (1/m) dx_i∧dẋ_i + B1 dx2∧dx3 + B2 dx3∧dx1 + B3 dx1∧dx2 +
/// ½ g_ij dẋ_i∧dẋ_j` and `H = ẋ²/2m + φ(x)` on `(x1, x2, x3, xd1, xd2, xd3)`.
pub fn make_generalized_lorentz(
    m: f64,
    b: [ScalarField; 3],
    g: AntisymBlock,
    phi: ScalarField,
) -> Result<SouriauModel> {
    check_mass(m)?;
    if g.n() != 3 {
        return Err(Error::dimension("g block", 3, g.n()));
    }
    let mut fb = FormBuilder::new(6);
    for i in 0..3 {
        fb = fb.wedge_const(i, 3 + i, 1.0 / m);
        for j in i + 1..3 {
            fb = fb.wedge(3 + i, 3 + j, g.get(i, j).clone());
        }
    }
    let omega = fb
        .wedge(1, 2, b[0].clone())
        .wedge(2, 0, b[1].clone())
        .wedge(0, 1, b[2].clone())
        .build();
    let (phi1, phi2) = (phi.clone(), phi.clone());
    let h = ScalarField::try_from_fn("xd^2/(2m) + phi", move |x| {
        Ok((x[3] * x[3] + x[4] * x[4] + x[5] * x[5]) / (2.0 * m) + phi1.eval(x)?)
    })
    .with_gradient(move |x, cfg| {
        let mut gr = gradient(&phi2, x, cfg)?;
        for i in 0..3 {
            gr[3 + i] += x[3 + i] / m;
        }
        Ok(gr)
    });
    Ok(SouriauModel {
        name: "generalized_lorentz".into(),
        space: PhaseSpace::with_prefixes(3, "x", "xd").with_param("m", m),
        omega,
        hamiltonian: h,
        kind: ModelKind::GeneralizedLorentz { b, g, phi },
    })
}

/// The Hamiltonian vector field `X_H = Λ·dH` of the model.
pub fn derive_dynamics(mdl: &SouriauModel, cfg: DiffConfig) -> VectorFieldSpec {
    hamiltonian_vf(&mdl.poisson(), &mdl.hamiltonian, cfg)
}

/// The residual `m q̈_k − (−∂V/∂q_k + g_ik p_i/m − m d/dt(f_ki ∂V/∂q_i))`
/// along a trajectory of a dual-magnetic model with `H = p²/2m + V`,
/// maximised over components and interior samples. Derivatives in time
/// are three-point differences on the recorded states.
///
/// The relation is exact when `f` or `g` vanishes; with both present the
/// rates pick up cross terms of order `f·g`.
pub fn modified_newton_residual(
    mdl: &SouriauModel,
    m: f64,
    v: &ScalarField,
    traj: &Trajectory,
    cfg: &DiffConfig,
) -> Result<ResidualReport> {
    let (g, f) = mdl
        .dual_blocks()
        .ok_or_else(|| Error::invalid(format!("model `{}` has no dual-magnetic blocks", mdl.name)))?;
    let n = g.n();
    let len = traj.len();
    if len < 3 {
        return Err(Error::invalid(format!(
            "modified Newton residual needs at least 3 samples, trajectory has {len}"
        )));
    }
    // u_k = f_ki ∂V/∂q_i and the force terms at every sample
    let mut u = Vec::with_capacity(len);
    let mut force = Vec::with_capacity(len);
    for s in &traj.states {
        let dv = gradient(v, s, cfg)?;
        let mut uk = vec![0.0; n];
        let mut fk = vec![0.0; n];
        for k in 0..n {
            fk[k] = -dv[k];
            for i in 0..n {
                uk[k] += f.get(k, i).eval(s)? * dv[i];
                fk[k] += g.get(i, k).eval(s)? * s[n + i] / m;
            }
        }
        u.push(uk);
        force.push(fk);
    }
    let mut values = Vec::with_capacity(len - 2);
    for j in 1..len - 1 {
        let h1 = traj.times[j] - traj.times[j - 1];
        let h2 = traj.times[j + 1] - traj.times[j];
        let (a, b, c) = (&traj.states[j - 1], &traj.states[j], &traj.states[j + 1]);
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let qdd = 2.0 * ((c[k] - b[k]) / h2 - (b[k] - a[k]) / h1) / (h1 + h2);
            let du = (u[j + 1][k] - u[j - 1][k]) / (h1 + h2);
            let r = m * qdd - (force[j][k] - m * du);
            worst = worst.max(r.abs());
        }
        values.push((worst, traj.states[j].as_slice()));
    }
    Ok(ResidualReport::from_values("modified newton", values))
}

/// The parts of a degenerate exotic plane (`θB = 1`, constant `B`) that
/// survive reduction to the leaf with Darboux coordinates
/// `ξ1 = q1 + θ p2`, `ξ2 = q2 − θ p1`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub theta: f64,
    pub b: f64,
    /// `∂(q1, q2, p1, p2)/∂(ξ1, ξ2, p1, p2)`.
    pub jacobian: Matrix,
    /// The flat matrix of `ω_{θ,σ}` in the chart `(ξ1, ξ2, p1, p2)`.
    pub pulled_back: Matrix,
}

impl Reduction {
    pub fn to_reduced(&self, x: &[f64]) -> [f64; 2] {
        [x[0] + self.theta * x[3], x[1] - self.theta * x[2]]
    }

    /// Coefficient `c` of the reduced form `c dξ1∧dξ2`; equals `−B`.
    pub fn dxi1_dxi2(&self) -> f64 {
        -self.pulled_back[(0, 1)]
    }

    /// Component matrix `ω_ab` of the reduced form `½ ω_ab dξ_a∧dξ_b`,
    /// i.e. `[[0, −B], [B, 0]]`.
    pub fn coefficient_matrix(&self) -> Matrix {
        let c = self.dxi1_dxi2();
        Matrix::from_rows(&[[0.0, c], [-c, 0.0]])
    }

    /// The reduced form in the flat-map convention used by
    /// [`TwoFormField`].
    pub fn flat_matrix(&self) -> Matrix {
        self.coefficient_matrix().scale(-1.0)
    }

    /// Largest entry of the pulled-back matrix in the `p1`, `p2` rows and
    /// columns; zero when `∂/∂p1`, `∂/∂p2` span the kernel.
    pub fn kernel_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 2..4 {
                worst = worst.max(self.pulled_back[(a, b)].abs()).max(self.pulled_back[(b, a)].abs());
            }
        }
        worst
    }

    /// Kernel fields `X1 = θ∂_q2 + ∂_p1`, `X2 = −θ∂_q1 + ∂_p2` expressed in
    /// the reduced chart.
    pub fn kernel_in_reduced_chart(&self) -> Vec<Vec<f64>> {
        let t = self.theta;
        let x1 = [0.0, t, 1.0, 0.0];
        let x2 = [-t, 0.0, 0.0, 1.0];
        // inverse Jacobian: ξ1 = q1 + θp2, ξ2 = q2 − θp1
        let inv = Matrix::from_rows(&[
            [1.0, 0.0, 0.0, t],
            [0.0, 1.0, -t, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]);
        vec![inv.mul_vec(&x1), inv.mul_vec(&x2)]
    }
}

/// Reduction of the exotic plane on its degenerate locus.
pub fn reduce_degenerate_exotic(theta: f64, b: f64) -> Result<Reduction> {
    if !((theta * b - 1.0).abs() <= 1e-12) {
        return Err(Error::invalid(format!(
            "reduction requires theta*B = 1, got theta*B = {}",
            theta * b
        )));
    }
    let flat = Matrix::from_rows(&[
        [0.0, b, -1.0, 0.0],
        [-b, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, theta],
        [0.0, 1.0, -theta, 0.0],
    ]);
    let jacobian = Matrix::from_rows(&[
        [1.0, 0.0, 0.0, -theta],
        [0.0, 1.0, theta, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);
    let mut pulled_back = jacobian.transpose().mul(&flat).mul(&jacobian);
    // θB = 1 up to 1e-12 leaves rounding-level entries in the p block
    for a in 0..4 {
        for c in 0..4 {
            if pulled_back[(a, c)].abs() <= 1e-11 * (1.0 + b.abs() + theta.abs()) {
                pulled_back[(a, c)] = 0.0;
            }
        }
    }
    Ok(Reduction {
        theta,
        b,
        jacobian,
        pulled_back,
    })
}

/// Metriplectic flow `X_i = g_ij ∂h/∂x_j`; `g` need not be antisymmetric.
pub fn leibniz_flow(g: Vec<Vec<ScalarField>>, h: ScalarField, cfg: DiffConfig) -> Result<VectorFieldSpec> {
    let n = g.len();
    if let Some(bad) = g.iter().find(|r| r.len() != n) {
        return Err(Error::dimension("leibniz g row", n, bad.len()));
    }
    if h.as_constant().is_some() {
        return Ok(VectorFieldSpec::zero(n));
    }
    Ok(VectorFieldSpec::from_fn(n, "leibniz", move |x| {
        let dh = gradient(&h, x, &cfg)?;
        let mut out = vec![0.0; n];
        for (i, row) in g.iter().enumerate() {
            for (j, gij) in row.iter().enumerate() {
                if dh[j] != 0.0 {
                    out[i] += gij.eval(x)? * dh[j];
                }
            }
        }
        Ok(out)
    }))
}

/// The three consistency relations of the generalized Lorentz model with
/// `S_i = ẋ_i`, in the form
///
/// ```text
/// 0 = m g21 (φ_2 − ẋ1 B3 + ẋ2 B1) + m g31 (φ_3 − ẋ2 B1 + ẋ1 B2)
/// 0 = m g12 (φ_1 − ẋ3 B2 + ẋ2 B3) + m g32 (φ_3 − ẋ2 B1 + ẋ1 B2)
/// 0 = m g13 (φ_1 − ẋ3 B2 + ẋ2 B3) + m g23 (φ_2 − ẋ1 B3 + ẋ3 B1)
/// ```
///
/// The first line carries `ẋ2 B1` where eliminating the accelerations
/// gives `ẋ3 B1`; the relations are evaluated as written above.
pub fn lorentz_constraint_residuals<P: AsRef<[f64]>>(
    mdl: &SouriauModel,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<Vec<ResidualReport>> {
    let ModelKind::GeneralizedLorentz { b, g, phi } = &mdl.kind else {
        return Err(Error::invalid(format!("model `{}` is not a generalized Lorentz model", mdl.name)));
    };
    let m = mdl.param("m").expect("lorentz models carry m");
    let eval = |p: &[f64]| -> Result<[f64; 3]> {
        let dphi = gradient(phi, p, cfg)?;
        let bb = [b[0].eval(p)?, b[1].eval(p)?, b[2].eval(p)?];
        let gg = |i: usize, j: usize| g.get(i, j).eval(p);
        let v = [p[3], p[4], p[5]];
        let a1 = dphi[0] - v[2] * bb[1] + v[1] * bb[2];
        let a2 = dphi[1] - v[0] * bb[2] + v[2] * bb[0];
        let a2_printed = dphi[1] - v[0] * bb[2] + v[1] * bb[0];
        let a3 = dphi[2] - v[1] * bb[0] + v[0] * bb[1];
        Ok([
            m * gg(1, 0)? * a2_printed + m * gg(2, 0)? * a3,
            m * gg(0, 1)? * a1 + m * gg(2, 1)? * a3,
            m * gg(0, 2)? * a1 + m * gg(1, 2)? * a2,
        ])
    };
    (0..3)
        .map(|k| ResidualReport::collect(format!("lorentz constraint {}", k + 1), points, |p| Ok(eval(p)?[k].abs())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{invert_form, poisson_bracket};
    use crate::sampling::default_points;

    #[test]
    fn canonical_dual_magnetic() {
        let mdl = make_dual_magnetic(2, AntisymBlock::zeros(2), AntisymBlock::zeros(2), ScalarField::zero()).unwrap();
        let w = mdl.omega.at(&[0.0; 4]).unwrap();
        let want = Matrix::from_rows(&[
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]);
        assert_eq!(w, want);
        assert!(make_dual_magnetic(3, AntisymBlock::zeros(2), AntisymBlock::zeros(3), ScalarField::zero()).is_err());
    }

    #[test]
    fn exotic_matrix_layout() {
        let mdl = make_exotic_plane(0.5, 1.0, ScalarField::constant(0.25), ScalarField::zero()).unwrap();
        let w = mdl.omega.at(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let want = Matrix::from_rows(&[
            [0.0, 0.25, -1.0, 0.0],
            [-0.25, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.5],
            [0.0, 1.0, -0.5, 0.0],
        ]);
        assert_eq!(w, want);
    }

    #[test]
    fn anyon_bracket_and_kappa_zero() {
        let (mdl, cs) = make_anyon(2.0, 3.0).unwrap();
        let lam = mdl.poisson();
        let p = [0.1, -0.3, 0.2, 0.5, -0.7, 0.4];
        let c = cs.bracket_matrix(&lam, &p, &DiffConfig::default()).unwrap();
        assert!((c[(0, 1)] + 9.0 / 2.0).abs() < 1e-12);
        assert!(matches!(make_anyon(0.0, 1.0), Err(Error::Degenerate { .. })));
        let inv = invert_form(&mdl.omega, &p, DEFAULT_PIVOT_TOL).unwrap();
        assert!((inv[(2, 3)] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn anyon_dynamics_is_free_motion_on_the_constraint_surface() {
        let (mdl, _) = make_anyon(1.5, 2.0).unwrap();
        let x = derive_dynamics(&mdl, DiffConfig::default());
        // on λ = 0: q̇ = v, v̇ = 0, ṗ = 0
        let s = [0.3, -0.2, 0.4, 0.1, 0.8, 0.2];
        let r = x.eval(&s).unwrap();
        let want = [0.4, 0.1, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn lorentz_with_zero_g_is_the_printed_force_law() {
        let m = 1.7;
        let s = PhaseSpace::with_prefixes(3, "x", "xd");
        let b = [s.field("0.3 + x2").unwrap(), s.field("-0.5*x1").unwrap(), s.field("0.8").unwrap()];
        let phi = s.field("x1^2 + x2*x3").unwrap();
        let mdl = make_generalized_lorentz(m, b.clone(), AntisymBlock::zeros(3), phi).unwrap();
        let x = derive_dynamics(&mdl, DiffConfig::default());
        let p = [0.2, -0.4, 0.6, 0.9, -0.3, 0.5];
        let r = x.eval(&p).unwrap();
        let (x1, x2, x3) = (p[0], p[1], p[2]);
        let v = [p[3], p[4], p[5]];
        let bb = [0.3 + x2, -0.5 * x1, 0.8];
        let dphi = [2.0 * x1, x3, x2];
        let acc = [
            m * (-dphi[0] + v[2] * bb[1] - v[1] * bb[2]),
            m * (-dphi[1] + v[0] * bb[2] - v[2] * bb[0]),
            m * (-dphi[2] + v[1] * bb[0] - v[0] * bb[1]),
        ];
        for i in 0..3 {
            assert!((r[i] - v[i]).abs() < 1e-9);
            assert!((r[3 + i] - acc[i]).abs() < 1e-7, "{r:?} vs {acc:?}");
        }
        let pts = default_points(6, 0);
        let reps = lorentz_constraint_residuals(&mdl, &pts, &DiffConfig::default()).unwrap();
        assert!(reps.iter().all(|r| r.max == 0.0));
    }

    #[test]
    fn reduction_of_unit_case() {
        let r = reduce_degenerate_exotic(1.0, 1.0).unwrap();
        assert_eq!(r.coefficient_matrix(), Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]));
        assert_eq!(r.kernel_defect(), 0.0);
        for v in r.kernel_in_reduced_chart() {
            assert_eq!(crate::linalg::norm_inf(&r.pulled_back.mul_vec(&v)), 0.0);
        }
        let r = reduce_degenerate_exotic(2.0, 0.5).unwrap();
        assert_eq!(r.coefficient_matrix(), Matrix::from_rows(&[[0.0, -0.5], [0.5, 0.0]]));
        assert_eq!(r.kernel_in_reduced_chart(), vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]);
        assert!(reduce_degenerate_exotic(1.0, 0.9).is_err());
    }

    #[test]
    fn leibniz_examples() {
        let n = 3;
        let id: Vec<Vec<ScalarField>> = (0..n)
            .map(|i| (0..n).map(|j| ScalarField::constant(if i == j { 1.0 } else { 0.0 })).collect())
            .collect();
        let h = ScalarField::from_fn("r2/2", |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>());
        let x = leibniz_flow(id.clone(), h, DiffConfig::default()).unwrap();
        let r = x.eval(&[0.3, -0.1, 0.7]).unwrap();
        for (a, b) in r.iter().zip([0.3, -0.1, 0.7]) {
            assert!((a - b).abs() < 1e-9);
        }
        let z = leibniz_flow(id, ScalarField::constant(2.0), DiffConfig::default()).unwrap();
        assert_eq!(z.eval(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn dual_blocks_of_exotic() {
        let mdl = make_exotic_plane(0.4, 1.0, ScalarField::constant(0.7), ScalarField::zero()).unwrap();
        let (g, f) = mdl.dual_blocks().unwrap();
        let p = [0.0; 4];
        assert_eq!(g.get(0, 1).eval(&p).unwrap(), -0.7);
        assert_eq!(f.get(0, 1).eval(&p).unwrap(), -0.4);
        let lam = mdl.poisson();
        let q1 = ScalarField::coordinate(0);
        let q2 = ScalarField::coordinate(1);
        let k = 1.0 / (1.0 - 0.4 * 0.7);
        let got = poisson_bracket(&lam, &q1, &q2, &p, &DiffConfig::default()).unwrap();
        assert!((got - 0.4 * k).abs() < 1e-12);
    }
}
