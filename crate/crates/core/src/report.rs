use serde::Serialize;

use crate::error::Result;

/// Sampled residual of one verification: the per-point residual's maximum,
/// its mean, and the point where the maximum occurred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    pub argmax_point: Vec<f64>,
    #[serde(skip)]
    pub samples: usize,
}

impl ResidualReport {
    /// Evaluates `residual` at every point. The result does not depend on
    /// the order of `points`: the mean is summed in sorted order and ties
    /// for the maximum go to the lexicographically smallest point.
    pub fn collect<P: AsRef<[f64]>>(
        name: impl Into<String>,
        points: &[P],
        mut residual: impl FnMut(&[f64]) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(points.len());
        for p in points {
            values.push((residual(p.as_ref())?, p.as_ref()));
        }
        Ok(Self::from_values(name, values))
    }

    pub(crate) fn from_values(name: impl Into<String>, values: Vec<(f64, &[f64])>) -> Self {
        let mut best: Option<(f64, &[f64])> = None;
        for &(v, p) in &values {
            best = match best {
                None => Some((v, p)),
                Some((bv, bp)) => {
                    let better = v > bv
                        || (v == bv && p.partial_cmp(bp) == Some(std::cmp::Ordering::Less))
                        || (v.is_nan() && !bv.is_nan());
                    if better {
                        Some((v, p))
                    } else {
                        Some((bv, bp))
                    }
                }
            };
        }
        let mut sorted: Vec<f64> = values.iter().map(|(v, _)| *v).collect();
        sorted.sort_by(f64::total_cmp);
        let mean = if sorted.is_empty() {
            0.0
        } else {
            sorted.iter().sum::<f64>() / sorted.len() as f64
        };
        let (max, argmax_point) = best.map_or((0.0, Vec::new()), |(v, p)| (v, p.to_vec()));
        ResidualReport {
            name: name.into(),
            max,
            mean,
            argmax_point,
            samples: values.len(),
        }
    }

    /// NaN residuals never pass.
    pub fn passes(&self, tol: f64) -> bool {
        self.max <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_independent() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let f = |p: &[f64]| Ok((p[0] - 1.5).abs() * 0.1 + if p[0] == 0.0 { 0.1 } else { 0.0 });
        let a = ResidualReport::collect("r", &pts, f).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        let b = ResidualReport::collect("r", &rev, f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.argmax_point, vec![0.0]);
    }

    #[test]
    fn nan_is_reported_and_fails() {
        let pts = vec![vec![0.0], vec![1.0]];
        let r = ResidualReport::collect("r", &pts, |p| Ok(if p[0] > 0.5 { f64::NAN } else { 1.0 })).unwrap();
        assert!(r.max.is_nan());
        assert!(!r.passes(1e9));
    }
}
