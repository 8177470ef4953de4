//! One function per subcommand. Each returns an [`Outcome`]; nothing is
//! written until the command has finished.

use ncphase_core::dynamics::{drift_report, integrate_named, Drift};
use ncphase_core::fd::{dyson_consistency, extract_fields, levi_civita, modified_maxwell_residuals, nc_consistency, ForceLaw};
use ncphase_core::geom::{
    closedness_residual, hamiltonian_vf, invert_form, jacobiator_residual, kernel_membership, rank_at, MatrixField,
};
use ncphase_core::linalg::Matrix;
use ncphase_core::souriau::{derive_dynamics, leibniz_flow, reduce_degenerate_exotic, ModelKind};
use ncphase_core::volflow::{build_volume_flow, verify_volume_preservation};
use ncphase_core::{
    sample_points, BivectorField, DiffConfig, Error, IntegratorConfig, PhaseSpace, ResidualReport, ScalarField,
    VectorFieldSpec, DEFAULT_PIVOT_TOL,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, FdCheck, ModelConfig, Structure};
use crate::{Cli, Command, Failure};

/// The structured report written as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub tol: f64,
    pub probes: usize,
    pub seed: u64,
    pub residuals: Vec<ResidualReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// Extra table lines after the residual rows.
    pub notes: Vec<String>,
    /// `(file name, contents)` written under `--out`.
    pub files: Vec<(String, String)>,
    /// One line per failed check, naming the worst point.
    pub failures: Vec<String>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: ModelConfig,
    dcfg: DiffConfig,
}

pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    if !(cli.flags.tol >= 0.0 && cli.flags.tol.is_finite()) {
        return Err(Failure::Config(format!("--tol must be a non-negative number, got {}", cli.flags.tol)));
    }
    let cfg = config::load(cli.command.config())?;
    let ctx = Ctx {
        cli,
        cfg,
        dcfg: DiffConfig::default(),
    };
    match cli.command {
        Command::Check { .. } => ctx.check(),
        Command::Brackets { .. } => ctx.brackets(),
        Command::Simulate { .. } => ctx.simulate(),
        Command::Kernel { .. } => ctx.kernel(),
        Command::Reduce { .. } => ctx.reduce(),
        Command::FdCheck { .. } => ctx.fd_check(),
        Command::VolumeFlow { .. } => ctx.volume_flow(),
    }
}

/// Errors met while evaluating: degeneracy and evaluation failures are
/// check failures, the rest configuration problems.
fn eval_err(what: &str, e: Error) -> Failure {
    match e {
        Error::Degenerate { .. } | Error::Eval { .. } => Failure::Check(format!("{what}: {e}")),
        Error::Integration { ref state, .. } => Failure::Check(format!("{what}: {e} (state {})", fmt_point(state))),
        _ => Failure::Config(format!("{what}: {e}")),
    }
}

pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn named(mut r: ResidualReport, name: &str) -> ResidualReport {
    r.name = name.to_string();
    r
}

impl Ctx<'_> {
    fn outcome(&self, probes: usize, seed: u64, residuals: Vec<ResidualReport>, details: Option<Value>) -> Outcome {
        let tol = self.cli.flags.tol;
        let failures = residuals
            .iter()
            .filter(|r| !r.passes(tol))
            .map(|r| {
                format!(
                    "{}: max residual {:.6e} exceeds tol {:.1e} at point {}",
                    r.name,
                    r.max,
                    tol,
                    fmt_point(&r.argmax_point)
                )
            })
            .collect();
        Outcome {
            report: Report {
                command: self.cli.command.name().to_string(),
                tol,
                probes,
                seed,
                residuals,
                details,
            },
            notes: Vec::new(),
            files: Vec::new(),
            failures,
        }
    }

    fn points(&self, dim: usize) -> Result<(Vec<Vec<f64>>, usize, u64), Failure> {
        let (bbox, count, seed) = self.cfg.probes(dim, self.cli.flags.probes, self.cli.flags.seed)?;
        Ok((sample_points(&bbox, count, seed), count, seed))
    }

    /// `--point`, else the config's `point`, else the origin.
    fn point(&self, dim: usize) -> Result<Vec<f64>, Failure> {
        let p = match (&self.cli.flags.point, &self.cfg.point) {
            (Some(s), _) => s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Failure::Config(format!("--point: cannot parse {:?} as a number", t.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(p)) => p.clone(),
            (None, None) => vec![0.0; dim],
        };
        if p.len() != dim {
            return Err(Failure::Config(format!("point has {} coordinates, the model has {dim}", p.len())));
        }
        Ok(p)
    }

    fn check(&self) -> Result<Outcome, Failure> {
        let s = self.cfg.structure()?;
        let (pts, count, seed) = self.points(s.space().dim())?;
        let d = &self.dcfg;
        let residuals = match &s {
            Structure::Form(m) => vec![
                m.omega.matrix_field().antisymmetry_defect(&pts).map_err(|e| eval_err("antisymmetry", e))?,
                closedness_residual(&m.omega, &pts, d).map_err(|e| eval_err("closedness", e))?,
                jacobiator_residual(&m.poisson(), &pts, d).map_err(|e| eval_err("jacobiator", e))?,
            ],
            Structure::Bivector { lambda, .. } => vec![
                lambda.matrix_field().antisymmetry_defect(&pts).map_err(|e| eval_err("antisymmetry", e))?,
                jacobiator_residual(lambda, &pts, d).map_err(|e| eval_err("jacobiator", e))?,
            ],
            Structure::Leibniz { g, .. } => {
                let mf = leibniz_matrix(g);
                let sym = mf.clone();
                let anti = BivectorField::from_matrix_field(MatrixField::computed(g.len(), move |p| {
                    Ok(mf.at(p)?.antisymmetrized())
                }));
                let r = jacobiator_residual(&anti, &pts, d).map_err(|e| eval_err("jacobiator", e))?;
                let sym = sym.antisymmetry_defect(&pts).map_err(|e| eval_err("symmetric part", e))?;
                let details = json!({ "symmetric_part_max": sym.max });
                return Ok(self.outcome(count, seed, vec![named(r, "jacobiator (antisymmetric part)")], Some(details)));
            }
        };
        Ok(self.outcome(count, seed, residuals, None))
    }

    fn matrix_at(&self, s: &Structure, p: &[f64]) -> Result<Matrix, Failure> {
        match s {
            Structure::Form(m) => invert_form(&m.omega, p, DEFAULT_PIVOT_TOL).map_err(|e| eval_err("brackets", e)),
            Structure::Bivector { lambda, .. } => lambda.at(p).map_err(|e| eval_err("brackets", e)),
            Structure::Leibniz { g, .. } => leibniz_matrix(g).at(p).map_err(|e| eval_err("brackets", e)),
        }
    }

    fn brackets(&self) -> Result<Outcome, Failure> {
        let s = self.cfg.structure()?;
        let p = self.point(s.space().dim())?;
        let m = self.matrix_at(&s, &p)?;
        let aliases = s.space().aliases().to_vec();
        let details = json!({ "point": p, "aliases": aliases, "matrix": m.to_rows() });
        let mut out = self.outcome(0, 0, Vec::new(), Some(details));
        out.notes = matrix_table(&aliases, &m, &format!("{{a, b}} at {}", fmt_point(&p)));
        Ok(out)
    }

    fn kernel(&self) -> Result<Outcome, Failure> {
        let s = self.cfg.structure()?;
        let dim = s.space().dim();
        let p = self.point(dim)?;
        let mf = match &s {
            Structure::Form(m) => m.omega.matrix_field().clone(),
            Structure::Bivector { lambda, .. } => lambda.matrix_field().clone(),
            Structure::Leibniz { g, .. } => leibniz_matrix(g),
        };
        let rank = rank_at(&mf, &p, DEFAULT_PIVOT_TOL).map_err(|e| eval_err("kernel", e))?;
        let basis = mf
            .at(&p)
            .map_err(|e| eval_err("kernel", e))?
            .null_space(DEFAULT_PIVOT_TOL);
        let details = json!({ "point": p, "dim": dim, "rank": rank, "kernel": basis });
        let mut out = self.outcome(0, 0, Vec::new(), Some(details));
        out.notes.push(format!("rank {rank} of {dim} at {}", fmt_point(&p)));
        for (i, v) in basis.iter().enumerate() {
            out.notes.push(format!("kernel[{i}] = {}", fmt_point(v)));
        }
        Ok(out)
    }

    fn reduce(&self) -> Result<Outcome, Failure> {
        let s = self.cfg.structure()?;
        let Structure::Form(m) = &s else {
            return Err(Failure::Config("reduce needs the exotic_plane preset".into()));
        };
        let ModelKind::ExoticPlane { theta, b } = &m.kind else {
            return Err(Failure::Config("reduce needs the exotic_plane preset".into()));
        };
        let (pts, count, seed) = self.points(4)?;
        let b0 = b.eval(&pts[0]).map_err(|e| eval_err("model.B", e))?;
        for p in &pts {
            let v = b.eval(p).map_err(|e| eval_err("model.B", e))?;
            if (v - b0).abs() > 1e-12 * (1.0 + b0.abs()) {
                return Err(Failure::Config(format!(
                    "reduce needs a constant B; B = {v} at {} but {b0} at {}",
                    fmt_point(p),
                    fmt_point(&pts[0])
                )));
            }
        }
        let red = reduce_degenerate_exotic(*theta, b0).map_err(|e| Failure::Check(format!("reduce: {e}")))?;
        let kernel = [vec![0.0, *theta, 1.0, 0.0], vec![-theta, 0.0, 0.0, 1.0]];
        let membership = ResidualReport::collect("kernel membership", &pts, |p| {
            let a = kernel_membership(&m.omega, p, &kernel[0])?;
            Ok(a.max(kernel_membership(&m.omega, p, &kernel[1])?))
        })
        .map_err(|e| eval_err("kernel membership", e))?;
        let defect = ResidualReport::collect("reduced kernel defect", &pts, |_| Ok(red.kernel_defect()))
            .map_err(|e| eval_err("reduce", e))?;
        let c = red.dxi1_dxi2();
        let details = json!({
            "theta": theta,
            "B": b0,
            "reduced_form": format!("{c} dxi1^dxi2"),
            "dxi1_dxi2": c,
            "coefficient_matrix": red.coefficient_matrix().to_rows(),
            "flat_matrix": red.flat_matrix().to_rows(),
            "jacobian": red.jacobian.to_rows(),
            "kernel": kernel,
            "kernel_in_reduced_chart": red.kernel_in_reduced_chart(),
        });
        let mut out = self.outcome(count, seed, vec![membership, defect], Some(details));
        out.notes.push("xi1 = q1 + theta p2, xi2 = q2 - theta p1".into());
        out.notes.push(format!("reduced form: {c} dxi1^dxi2"));
        Ok(out)
    }

    fn trajectory(
        &self,
        x: &VectorFieldSpec,
        space: &PhaseSpace,
        hamiltonian: Option<&ScalarField>,
    ) -> Result<(Value, Vec<String>, Vec<(String, String)>), Failure> {
        let sec = self
            .cfg
            .integrate
            .as_ref()
            .ok_or_else(|| Failure::Config("missing field `integrate`".into()))?;
        if sec.initial.len() != space.dim() {
            return Err(Failure::Config(format!(
                "integrate.initial has {} coordinates, the model has {}",
                sec.initial.len(),
                space.dim()
            )));
        }
        let mut icfg = IntegratorConfig::new(sec.scheme, sec.dt, sec.t_end)
            .map_err(|e| Failure::Config(format!("integrate: {e}")))?;
        let mut names = Vec::new();
        if let Some(h) = hamiltonian {
            icfg = icfg.observe("H", h.clone());
            names.push("H".to_string());
        }
        for (i, o) in sec.observables.iter().enumerate() {
            if names.contains(&o.name) {
                return Err(Failure::Config(format!("integrate.observables[{i}]: duplicate name `{}`", o.name)));
            }
            let f = config::field(space, &o.expr, &format!("integrate.observables[{i}]"))?;
            icfg = icfg.observe(&o.name, f);
            names.push(o.name.clone());
        }
        let tr = integrate_named(x, &sec.initial, &icfg, space.aliases().to_vec()).map_err(|e| eval_err("integrate", e))?;
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let drift: Vec<Drift> = drift_report(&tr, &refs).map_err(|e| eval_err("drift", e))?;
        let csv = tr.to_csv_string().map_err(|e| Failure::Check(format!("csv export: {e}")))?;
        let js = tr.to_json_string().map_err(|e| Failure::Check(format!("json export: {e}")))?;
        let notes = std::iter::once(format!(
            "{} steps to t = {}, final state {}",
            tr.len() - 1,
            tr.times.last().copied().unwrap_or(0.0),
            fmt_point(tr.final_state())
        ))
        .chain(drift.iter().map(|d| format!("drift {}: {:.6e}", d.name, d.max_drift)))
        .collect();
        let details = json!({
            "scheme": sec.scheme,
            "dt": sec.dt,
            "t_end": sec.t_end,
            "steps": tr.len() - 1,
            "final_state": tr.final_state(),
            "drift": drift,
        });
        Ok((details, notes, vec![("trajectory.csv".into(), csv), ("trajectory.json".into(), js)]))
    }

    fn simulate(&self) -> Result<Outcome, Failure> {
        let s = self.cfg.structure()?;
        let x = match &s {
            Structure::Form(m) => derive_dynamics(m, self.dcfg),
            Structure::Bivector { lambda, hamiltonian, .. } => hamiltonian_vf(lambda, hamiltonian, self.dcfg),
            Structure::Leibniz { g, hamiltonian, .. } => leibniz_flow(g.clone(), hamiltonian.clone(), self.dcfg)
                .map_err(|e| Failure::Config(format!("leibniz: {e}")))?,
        };
        let (details, notes, files) = self.trajectory(&x, s.space(), Some(s.hamiltonian()))?;
        let mut out = self.outcome(0, 0, Vec::new(), Some(details));
        out.notes = notes;
        out.files = files;
        Ok(out)
    }

    fn fd_check(&self) -> Result<Outcome, Failure> {
        let sec = self
            .cfg
            .fd
            .as_ref()
            .ok_or_else(|| Failure::Config("missing field `fd`".into()))?;
        let space = self.cfg.fd_space()?;
        let m = sec
            .m
            .or_else(|| self.cfg.params.get("m").copied())
            .ok_or_else(|| Failure::Config("missing required field `fd.m` (or `params.m`)".into()))?;
        let f = |i: usize| config::field(&space, &sec.force[i], &format!("fd.force[{i}]"));
        let law = ForceLaw::new([f(0)?, f(1)?, f(2)?], m).map_err(|e| Failure::Config(format!("fd: {e}")))?;
        let fields = extract_fields(&law, self.dcfg);
        let checks = sec.checks.clone().unwrap_or_else(|| {
            let mut c = vec![FdCheck::Dyson, FdCheck::ModifiedMaxwell];
            if sec.nc_g.is_some() {
                c.push(FdCheck::Nc);
            }
            c
        });
        let (pts, count, seed) = self.points(6)?;
        let d = &self.dcfg;
        let mut residuals = Vec::new();
        for c in checks {
            match c {
                FdCheck::Dyson => residuals.extend(dyson_consistency(&fields, &pts, d).map_err(|e| eval_err("dyson", e))?),
                FdCheck::ModifiedMaxwell => residuals.extend(
                    modified_maxwell_residuals(&fields, m, &pts, d).map_err(|e| eval_err("modified maxwell", e))?,
                ),
                FdCheck::Nc => {
                    let rows = sec
                        .nc_g
                        .as_ref()
                        .ok_or_else(|| Failure::Config("fd.checks has `nc` but `fd.nc_g` is missing".into()))?;
                    let g = square3(config::matrix(&space, rows, "fd.nc_g")?, "fd.nc_g")?;
                    let vv = match &sec.nc_vv {
                        Some(rows) => square3(config::matrix(&space, rows, "fd.nc_vv")?, "fd.nc_vv")?,
                        None => velocity_brackets(&fields.b, m),
                    };
                    residuals.extend(nc_consistency(&g, &vv, m, &pts, d).map_err(|e| eval_err("nc", e))?);
                }
            }
        }
        Ok(self.outcome(count, seed, residuals, Some(json!({ "m": m }))))
    }

    fn volume_flow(&self) -> Result<Outcome, Failure> {
        let (space, spec) = self.cfg.volume_flow()?;
        let x = build_volume_flow(&spec, self.dcfg).map_err(|e| Failure::Config(format!("volume_flow: {e}")))?;
        let (pts, count, seed) = self.points(space.dim())?;
        let r = verify_volume_preservation(&x, &pts, &self.dcfg).map_err(|e| eval_err("divergence", e))?;
        let mut details = json!({ "n": spec.n, "prefactor": spec.prefactor.value(spec.n) });
        let mut notes = vec![format!("n = {}, prefactor c = {}", spec.n, spec.prefactor.value(spec.n))];
        let mut files = Vec::new();
        if self.cfg.integrate.is_some() {
            let (traj, tn, tf) = self.trajectory(&x, &space, None)?;
            details["integrate"] = traj;
            notes.extend(tn);
            files = tf;
        }
        let mut out = self.outcome(count, seed, vec![r], Some(details));
        out.notes = notes;
        out.files = files;
        Ok(out)
    }
}

fn leibniz_matrix(g: &[Vec<ScalarField>]) -> MatrixField {
    let rows = g.to_vec();
    MatrixField::from_rows(rows).expect("square checked at load")
}

fn square3(rows: Vec<Vec<ScalarField>>, at: &str) -> Result<[[ScalarField; 3]; 3], Failure> {
    if rows.len() != 3 {
        return Err(Failure::Config(format!("{at}: expected a 3x3 block, found {} rows", rows.len())));
    }
    let mut it = rows.into_iter().map(|r| -> [ScalarField; 3] { r.try_into().expect("rows checked square") });
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// `{ẋ_i, ẋ_j} = ε_ijk B_k / m²`.
fn velocity_brackets(b: &[ScalarField; 3], m: f64) -> [[ScalarField; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = ScalarField::zero();
            for (k, bk) in b.iter().enumerate() {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    acc = acc.add(&bk.scaled(e / (m * m)));
                }
            }
            acc
        })
    })
}

fn matrix_table(aliases: &[String], m: &Matrix, title: &str) -> Vec<String> {
    let w = 13;
    let mut lines = vec![title.to_string()];
    let mut head = format!("{:>8}", "");
    for a in aliases {
        head += &format!(" {a:>w$}");
    }
    lines.push(head);
    for (i, a) in aliases.iter().enumerate() {
        let mut row = format!("{a:>8}");
        for j in 0..aliases.len() {
            row += &format!(" {:>w$.6e}", m[(i, j)] + 0.0);
        }
        lines.push(row);
    }
    lines
}
