//! Fixed-step integration of vector fields and conservation monitoring.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ScalarField, VectorFieldSpec};
use crate::linalg::norm_inf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(alias = "rk4-fixed")]
    Rk4,
    Heun,
    Euler,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Rk4 => 4,
            Scheme::Heun => 2,
            Scheme::Euler => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub observables: Vec<(String, ScalarField)>,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end must be positive, got {t_end}")));
        }
        Ok(IntegratorConfig {
            scheme,
            dt,
            t_end,
            observables: Vec::new(),
        })
    }

    pub fn observe(mut self, name: &str, f: ScalarField) -> Self {
        self.observables.push((name.to_string(), f));
        self
    }
}

/// States and recorded observables at increasing times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub aliases: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub observables: Vec<Observable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    pub name: String,
    pub values: Vec<f64>,
}

impl Trajectory {
    fn start(aliases: Vec<String>, names: &[String]) -> Self {
        Trajectory {
            aliases,
            times: Vec::new(),
            states: Vec::new(),
            observables: names
                .iter()
                .map(|n| Observable {
                    name: n.clone(),
                    values: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], |s| s.as_slice())
    }

    pub fn observable(&self, name: &str) -> Result<&[f64]> {
        self.observables
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.values.as_slice())
            .ok_or_else(|| Error::UnknownObservable(name.to_string()))
    }

    /// CSV with header `t, aliases…, observables…`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::invalid(format!("csv output: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.aliases.iter().cloned());
        header.extend(self.observables.iter().map(|o| o.name.clone()));
        w.write_record(&header).map_err(io)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:?}")];
            row.extend(self.states[i].iter().map(|v| format!("{v:?}")));
            row.extend(self.observables.iter().map(|o| format!("{:?}", o.values[i])));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(format!("json output: {e}")))
    }
}

/// One step of `scheme` from `y`.
pub fn step(x: &VectorFieldSpec, scheme: Scheme, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u + s * v).collect() };
    match scheme {
        Scheme::Euler => Ok(axpy(y, h, &x.eval(y)?)),
        Scheme::Heun => {
            let k1 = x.eval(y)?;
            let k2 = x.eval(&axpy(y, h, &k1))?;
            Ok((0..y.len()).map(|i| y[i] + 0.5 * h * (k1[i] + k2[i])).collect())
        }
        Scheme::Rk4 => {
            let k1 = x.eval(y)?;
            let k2 = x.eval(&axpy(y, 0.5 * h, &k1))?;
            let k3 = x.eval(&axpy(y, 0.5 * h, &k2))?;
            let k4 = x.eval(&axpy(y, h, &k3))?;
            Ok((0..y.len())
                .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        }
    }
}

/// Integrates from `xi0` at `t = 0` with times `i·dt`, plus a final
/// shorter step landing on `t_end` when `dt` does not divide it.
pub fn integrate(x: &VectorFieldSpec, xi0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    let aliases = (1..=x.dim()).map(|i| format!("xi{i}")).collect();
    integrate_named(x, xi0, cfg, aliases)
}

/// As [`integrate`], labelling state columns with `aliases`.
pub fn integrate_named(
    x: &VectorFieldSpec,
    xi0: &[f64],
    cfg: &IntegratorConfig,
    aliases: Vec<String>,
) -> Result<Trajectory> {
    if xi0.len() != x.dim() {
        return Err(Error::dimension("initial state", x.dim(), xi0.len()));
    }
    if aliases.len() != x.dim() {
        return Err(Error::dimension("state aliases", x.dim(), aliases.len()));
    }
    let names: Vec<String> = cfg.observables.iter().map(|(n, _)| n.clone()).collect();
    let mut traj = Trajectory::start(aliases, &names);

    let abort = |traj: &Trajectory, t: f64, y: &[f64], e: Error| Error::Integration {
        t,
        state: y.to_vec(),
        partial: Box::new(traj.clone()),
        source: Box::new(e),
    };

    let record = |traj: &mut Trajectory, t: f64, y: Vec<f64>| -> Result<()> {
        let mut vals = Vec::with_capacity(cfg.observables.len());
        for (_, f) in &cfg.observables {
            vals.push(f.eval(&y)?);
        }
        traj.times.push(t);
        traj.states.push(y);
        for (o, v) in traj.observables.iter_mut().zip(vals) {
            o.values.push(v);
        }
        Ok(())
    };

    record(&mut traj, 0.0, xi0.to_vec()).map_err(|e| abort(&traj, 0.0, xi0, e))?;
    let full = (cfg.t_end / cfg.dt * (1.0 + 1e-12)).floor() as u64;
    let mut y = xi0.to_vec();
    let mut t = 0.0;
    let mut i = 0u64;
    loop {
        let (h, t_next) = if i < full {
            (cfg.dt, (i + 1) as f64 * cfg.dt)
        } else {
            let rest = cfg.t_end - t;
            if rest <= 1e-12 * cfg.dt {
                break;
            }
            (rest, cfg.t_end)
        };
        let next = step(x, cfg.scheme, &y, h).map_err(|e| abort(&traj, t, &y, e))?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(abort(&traj, t, &y, Error::invalid("state became non-finite")));
        }
        record(&mut traj, t_next, next.clone()).map_err(|e| abort(&traj, t_next, &next, e))?;
        y = next;
        t = t_next;
        i += 1;
        if i > full {
            break;
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drift {
    pub name: String,
    pub max_drift: f64,
}

/// Largest `|o(t) − o(0)|` for each named observable.
pub fn drift_report(traj: &Trajectory, names: &[&str]) -> Result<Vec<Drift>> {
    names
        .iter()
        .map(|n| {
            let v = traj.observable(n)?;
            let v0 = v.first().copied().unwrap_or(0.0);
            let max_drift = v.iter().fold(0.0_f64, |m, x| m.max((x - v0).abs()));
            Ok(Drift {
                name: n.to_string(),
                max_drift,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Order {
    /// Endpoint differences all sit below round-off.
    Exact,
    Observed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// `‖y(dt_k) − y(dt_{k+1})‖_∞` at `t_end`.
    pub differences: Vec<f64>,
    /// `log2` of successive difference ratios.
    pub orders: Vec<f64>,
    pub order: Order,
}

/// Self-convergence of the endpoint under halving of `base_dt`.
pub fn convergence_study(
    x: &VectorFieldSpec,
    xi0: &[f64],
    scheme: Scheme,
    base_dt: f64,
    t_end: f64,
    levels: usize,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::invalid(format!("convergence study needs at least 3 levels, got {levels}")));
    }
    let mut dts = Vec::with_capacity(levels);
    let mut ends = Vec::with_capacity(levels);
    for k in 0..levels {
        let dt = base_dt / f64::powi(2.0, k as i32);
        let cfg = IntegratorConfig::new(scheme, dt, t_end)?;
        ends.push(integrate(x, xi0, &cfg)?.final_state().to_vec());
        dts.push(dt);
    }
    let differences: Vec<f64> = ends
        .windows(2)
        .map(|w| norm_inf(&w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .collect();
    let scale = 1.0 + norm_inf(&ends[levels - 1]);
    let floor = 1e-13 * scale * (t_end / base_dt).max(1.0);
    let orders: Vec<f64> = differences.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order = if differences.iter().all(|d| *d <= floor) {
        Order::Exact
    } else {
        Order::Observed(*orders.last().expect("levels >= 3"))
    };
    Ok(ConvergenceReport {
        dts,
        differences,
        orders,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> VectorFieldSpec {
        VectorFieldSpec::from_fn(2, "sho", |y| Ok(vec![y[1], -y[0]]))
    }

    #[test]
    fn time_grid_with_partial_step() {
        let cfg = IntegratorConfig::new(Scheme::Euler, 0.3, 1.0).unwrap();
        let tr = integrate(&VectorFieldSpec::zero(2), &[1.0, 2.0], &cfg).unwrap();
        assert_eq!(tr.times.len(), 5);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert!((tr.times[3] - 0.9).abs() < 1e-15);
        assert!(tr.states.iter().all(|s| s == &vec![1.0, 2.0]));
    }

    #[test]
    fn exact_grid() {
        let cfg = IntegratorConfig::new(Scheme::Rk4, 0.1, 1.0).unwrap();
        let tr = integrate(&oscillator(), &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(tr.len(), 11);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn orders_of_schemes() {
        for (scheme, want, tol) in [(Scheme::Rk4, 4.0, 0.3), (Scheme::Heun, 2.0, 0.2), (Scheme::Euler, 1.0, 0.2)] {
            let r = convergence_study(&oscillator(), &[1.0, 0.0], scheme, 0.01, 1.0, 3).unwrap();
            match r.order {
                Order::Observed(o) => assert!((o - want).abs() <= tol, "{scheme:?}: {o}"),
                Order::Exact => panic!("{scheme:?} reported exact"),
            }
        }
    }

    #[test]
    fn linear_motion_is_exact() {
        let x = VectorFieldSpec::from_fn(2, "drift", |_| Ok(vec![1.0, -2.0]));
        let r = convergence_study(&x, &[0.0, 0.0], Scheme::Rk4, 0.1, 1.0, 3).unwrap();
        assert_eq!(r.order, Order::Exact);
        assert!(convergence_study(&x, &[0.0, 0.0], Scheme::Rk4, 0.1, 1.0, 2).is_err());
    }

    #[test]
    fn failure_keeps_partial_trajectory() {
        let x = VectorFieldSpec::from_fn(1, "blowup", |y| {
            if y[0] > 2.0 {
                Err(Error::invalid("outside domain"))
            } else {
                Ok(vec![1.0])
            }
        });
        let cfg = IntegratorConfig::new(Scheme::Euler, 0.5, 10.0).unwrap();
        match integrate(&x, &[0.0], &cfg) {
            Err(Error::Integration { t, partial, .. }) => {
                assert_eq!(t, 2.5);
                assert_eq!(partial.len(), 6);
            }
            other => panic!("{other:?}"),
        }
        let nan = VectorFieldSpec::from_fn(1, "nan", |_| Ok(vec![f64::NAN]));
        assert!(matches!(integrate(&nan, &[0.0], &cfg), Err(Error::Integration { .. })));
    }

    #[test]
    fn drift_and_export() {
        let energy = ScalarField::from_fn("E", |y| 0.5 * (y[0] * y[0] + y[1] * y[1]));
        let cfg = IntegratorConfig::new(Scheme::Rk4, 1e-3, 10.0)
            .unwrap()
            .observe("E", energy)
            .observe("q", ScalarField::coordinate(0));
        let tr = integrate_named(&oscillator(), &[1.0, 0.0], &cfg, vec!["q".into(), "p".into()]).unwrap();
        let d = drift_report(&tr, &["E"]).unwrap();
        assert!(d[0].max_drift <= 1e-8, "{d:?}");
        assert!(matches!(drift_report(&tr, &["nope"]), Err(Error::UnknownObservable(_))));
        let csv = tr.to_csv_string().unwrap();
        assert!(csv.starts_with("t,q,p,E,q\n0.0,1.0,0.0,0.5,1.0\n"));
        assert_eq!(csv.lines().count(), tr.len() + 1);
        let json: serde_json::Value = serde_json::from_str(&tr.to_json_string().unwrap()).unwrap();
        assert_eq!(json["aliases"][1], "p");
    }
}
