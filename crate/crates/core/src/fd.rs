//! Feynman–Dyson consistency checks on the velocity phase space
//! `(x1, x2, x3, xd1, xd2, xd3)`.
//!
//! From `{x_i, x_j} = 0`, `m{x_i, ẋ_j} = δ_ij` and `m ẍ_j = F_j` the
//! bracket `{ẋ_i, ẋ_j}` is `ε_ijk B_k / m²` with
//! `B_k = −½ ε_ijk ∂F_j/∂ẋ_i`, and the electric field is what is left of
//! the force, `E_j = F_j − ε_jkl ẋ_k B_l`.

use crate::error::{Error, Result};
use crate::geom::{gradient, second_partial, DiffConfig, ScalarField};
use crate::report::ResidualReport;

/// Position `x_i` lives on axis `i`, velocity `ẋ_i` on axis `3 + i`.
pub const DIM: usize = 6;

/// The Levi-Civita symbol on `{0, 1, 2}`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `m ẍ_j = F_j(x, ẋ)`.
#[derive(Debug, Clone)]
pub struct ForceLaw {
    pub f: [ScalarField; 3],
    pub m: f64,
}

impl ForceLaw {
    pub fn new(f: [ScalarField; 3], m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::invalid(format!("mass must be positive and finite, got {m}")));
        }
        Ok(ForceLaw { f, m })
    }
}

#[derive(Debug, Clone)]
pub struct EMFields {
    pub b: [ScalarField; 3],
    pub e: [ScalarField; 3],
}

impl EMFields {
    pub fn new(b: [ScalarField; 3], e: [ScalarField; 3]) -> Self {
        EMFields { b, e }
    }

    /// `F_j = E_j + ε_jkl ẋ_k B_l`.
    pub fn force_at(&self, p: &[f64]) -> Result<[f64; 3]> {
        let b = eval3(&self.b, p)?;
        let e = eval3(&self.e, p)?;
        let vxb = cross(&[p[3], p[4], p[5]], &b);
        Ok([e[0] + vxb[0], e[1] + vxb[1], e[2] + vxb[2]])
    }
}

fn eval3(f: &[ScalarField; 3], p: &[f64]) -> Result<[f64; 3]> {
    Ok([f[0].eval(p)?, f[1].eval(p)?, f[2].eval(p)?])
}

fn b_value(f: &[ScalarField; 3], p: &[f64], cfg: &DiffConfig) -> Result<[f64; 3]> {
    let grads = [gradient(&f[0], p, cfg)?, gradient(&f[1], p, cfg)?, gradient(&f[2], p, cfg)?];
    let mut b = [0.0; 3];
    for (k, bk) in b.iter_mut().enumerate() {
        for i in 0..3 {
            for (j, gj) in grads.iter().enumerate() {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    *bk -= 0.5 * e * gj[3 + i];
                }
            }
        }
    }
    Ok(b)
}

/// `∂B_k/∂ξ_a` for all `k, a`, from second derivatives of `F` so that the
/// extracted fields are not differentiated twice by nested differences.
fn b_jacobian(f: &[ScalarField; 3], p: &[f64], cfg: &DiffConfig) -> Result<[[f64; DIM]; 3]> {
    let mut jac = [[0.0; DIM]; 3];
    for (j, fj) in f.iter().enumerate() {
        if fj.as_constant().is_some() {
            continue;
        }
        for i in 0..3 {
            for (k, row) in jac.iter_mut().enumerate() {
                let e = levi_civita(i, j, k);
                if e == 0.0 {
                    continue;
                }
                for (a, slot) in row.iter_mut().enumerate() {
                    *slot -= 0.5 * e * second_partial(fj, p, 3 + i, a, cfg)?;
                }
            }
        }
    }
    Ok(jac)
}

/// Magnetic and electric fields implied by the force law.
pub fn extract_fields(fl: &ForceLaw, cfg: DiffConfig) -> EMFields {
    let b = std::array::from_fn(|k| {
        let (fv, fg) = (fl.f.clone(), fl.f.clone());
        ScalarField::try_from_fn(&format!("B{}", k + 1), move |p| Ok(b_value(&fv, p, &cfg)?[k]))
            .with_gradient(move |p, cfg| Ok(b_jacobian(&fg, p, cfg)?[k].to_vec()))
    });
    let e = std::array::from_fn(|j| {
        let (fv, fg) = (fl.f.clone(), fl.f.clone());
        ScalarField::try_from_fn(&format!("E{}", j + 1), move |p| {
            let b = b_value(&fv, p, &cfg)?;
            let vxb = cross(&[p[3], p[4], p[5]], &b);
            Ok(fv[j].eval(p)? - vxb[j])
        })
        .with_gradient(move |p, dcfg| {
            // ∂_a E_j = ∂_a F_j − ε_jkl (δ_{a,3+k} B_l + ẋ_k ∂_a B_l)
            let mut g = gradient(&fg[j], p, dcfg)?;
            let b = b_value(&fg, p, &cfg)?;
            let jb = b_jacobian(&fg, p, dcfg)?;
            for k in 0..3 {
                for l in 0..3 {
                    let e = levi_civita(j, k, l);
                    if e == 0.0 {
                        continue;
                    }
                    g[3 + k] -= e * b[l];
                    for (a, ga) in g.iter_mut().enumerate() {
                        *ga -= e * p[3 + k] * jb[l][a];
                    }
                }
            }
            Ok(g)
        })
    });
    EMFields { b, e }
}

fn jacobian3(f: &[ScalarField; 3], p: &[f64], cfg: &DiffConfig) -> Result<[Vec<f64>; 3]> {
    Ok([gradient(&f[0], p, cfg)?, gradient(&f[1], p, cfg)?, gradient(&f[2], p, cfg)?])
}

fn check_points<P: AsRef<[f64]>>(points: &[P]) -> Result<()> {
    match points.iter().find(|p| p.as_ref().len() != DIM) {
        Some(p) => Err(Error::dimension("probe point", DIM, p.as_ref().len())),
        None => Ok(()),
    }
}

/// The four classical consequences, as separate reports:
/// `B velocity dependence` = max |∂B_k/∂ẋ_r|, `div B`, `rot E` (autonomous
/// Faraday law) and `E velocity dependence` = max |∂E_j/∂ẋ_i|, which is
/// nonzero exactly when `F` is more than linear in the velocities.
pub fn dyson_consistency<P: AsRef<[f64]>>(
    fields: &EMFields,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<Vec<ResidualReport>> {
    check_points(points)?;
    let bv = ResidualReport::collect("B velocity dependence", points, |p| {
        let jb = jacobian3(&fields.b, p, cfg)?;
        Ok(jb.iter().flat_map(|r| r[3..].iter()).fold(0.0, |m: f64, v| m.max(v.abs())))
    })?;
    let div = ResidualReport::collect("div B", points, |p| {
        let jb = jacobian3(&fields.b, p, cfg)?;
        Ok((jb[0][0] + jb[1][1] + jb[2][2]).abs())
    })?;
    let rot = ResidualReport::collect("rot E", points, |p| {
        let je = jacobian3(&fields.e, p, cfg)?;
        Ok(curl(|i, j| je[j][i]).iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    })?;
    let ev = ResidualReport::collect("E velocity dependence", points, |p| {
        let je = jacobian3(&fields.e, p, cfg)?;
        Ok(je.iter().flat_map(|r| r[3..].iter()).fold(0.0, |m: f64, v| m.max(v.abs())))
    })?;
    Ok(vec![bv, div, rot, ev])
}

/// `(∇×V)_k = ε_kij ∂_i V_j` given `d(i, j) = ∂_i V_j`.
fn curl(d: impl Fn(usize, usize) -> f64) -> [f64; 3] {
    [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
}

/// Residuals of the bracket conditions when `{x_i, x_j} = g_ij(x, ẋ)`:
///
/// - `R1_ijk = −(1/m) ∂g_ij/∂x_k + {ẋ_k, ẋ_l} ∂g_ij/∂ẋ_l`
/// - `R2_ijk = g_il ∂g_jk/∂x_l + g_kl ∂g_ij/∂x_l + g_jl ∂g_ki/∂x_l
///   + (1/m)(∂g_jk/∂ẋ_i + ∂g_ij/∂ẋ_k + ∂g_ki/∂ẋ_j)`
///
/// The two groups of `R2` are also reported on their own: the bracketed
/// velocity derivatives (closedness of `g_ij dẋ_i∧dẋ_j` on each fibre) and
/// the `g ∂g` terms (the jacobiator of `g_ij ∂_xi∧∂_xj`). Both vanishing
/// is sufficient for `R2 = 0`, not necessary.
pub fn nc_consistency<P: AsRef<[f64]>>(
    g: &[[ScalarField; 3]; 3],
    bracket_vv: &[[ScalarField; 3]; 3],
    m: f64,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<Vec<ResidualReport>> {
    check_points(points)?;
    let grads = |p: &[f64]| -> Result<Vec<Vec<Vec<f64>>>> {
        g.iter()
            .map(|row| row.iter().map(|gij| gradient(gij, p, cfg)).collect())
            .collect()
    };
    let values = |p: &[f64]| -> Result<[[f64; 3]; 3]> {
        let mut v = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] = g[i][j].eval(p)?;
            }
        }
        Ok(v)
    };
    let r1 = ResidualReport::collect("nc R1", points, |p| {
        let dg = grads(p)?;
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            let vv: Vec<f64> = (0..3).map(|l| bracket_vv[k][l].eval(p)).collect::<Result<_>>()?;
            for (i, row) in dg.iter().enumerate() {
                for (j, d) in row.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let r = -d[k] / m + (0..3).map(|l| vv[l] * d[3 + l]).sum::<f64>();
                    worst = worst.max(r.abs());
                }
            }
        }
        Ok(worst)
    })?;
    let parts = |p: &[f64]| -> Result<Vec<(f64, f64)>> {
        let dg = grads(p)?;
        let gv = values(p)?;
        let mut out = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut jac = 0.0;
                    for l in 0..3 {
                        jac += gv[i][l] * dg[j][k][l] + gv[k][l] * dg[i][j][l] + gv[j][l] * dg[k][i][l];
                    }
                    let clo = (dg[j][k][3 + i] + dg[i][j][3 + k] + dg[k][i][3 + j]) / m;
                    out.push((jac, clo));
                }
            }
        }
        Ok(out)
    };
    let max_of = |v: Vec<f64>| v.into_iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let r2 = ResidualReport::collect("nc R2", points, |p| Ok(max_of(parts(p)?.into_iter().map(|(a, b)| a + b).collect())))?;
    let r2c = ResidualReport::collect("nc R2 velocity closedness", points, |p| {
        Ok(max_of(parts(p)?.into_iter().map(|(_, b)| b).collect()))
    })?;
    let r2j = ResidualReport::collect("nc R2 jacobiator", points, |p| {
        Ok(max_of(parts(p)?.into_iter().map(|(a, _)| a).collect()))
    })?;
    Ok(vec![r1, r2, r2c, r2j])
}

/// Residuals of the modified Gauss law `Div B + (1/m) B·(∇̇×B) = 0` and of
/// its Faraday counterpart
/// `(rot E)_k + (1/m)((E·∇̇)B_k + B·∂E/∂ẋ_k − (∇̇·E)B_k) = 0`,
/// with `∇̇ = (∂/∂ẋ1, ∂/∂ẋ2, ∂/∂ẋ3)`.
pub fn modified_maxwell_residuals<P: AsRef<[f64]>>(
    fields: &EMFields,
    m: f64,
    points: &[P],
    cfg: &DiffConfig,
) -> Result<Vec<ResidualReport>> {
    check_points(points)?;
    let gauss = ResidualReport::collect("modified gauss", points, |p| {
        let b = eval3(&fields.b, p)?;
        let jb = jacobian3(&fields.b, p, cfg)?;
        let div = jb[0][0] + jb[1][1] + jb[2][2];
        let vcurl = curl(|i, j| jb[j][3 + i]);
        let dot: f64 = (0..3).map(|k| b[k] * vcurl[k]).sum();
        Ok((div + dot / m).abs())
    })?;
    let faraday = ResidualReport::collect("modified faraday", points, |p| {
        let b = eval3(&fields.b, p)?;
        let e = eval3(&fields.e, p)?;
        let jb = jacobian3(&fields.b, p, cfg)?;
        let je = jacobian3(&fields.e, p, cfg)?;
        let rot = curl(|i, j| je[j][i]);
        let vdiv_e = je[0][3] + je[1][4] + je[2][5];
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            let e_grad_b: f64 = (0..3).map(|i| e[i] * jb[k][3 + i]).sum();
            let b_de: f64 = (0..3).map(|i| b[i] * je[i][3 + k]).sum();
            let r = rot[k] + (e_grad_b + b_de - vdiv_e * b[k]) / m;
            worst = worst.max(r.abs());
        }
        Ok(worst)
    })?;
    Ok(vec![gauss, faraday])
}
