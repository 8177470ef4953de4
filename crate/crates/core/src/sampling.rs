//! Deterministic probe sets: a Halton sequence with a seeded
//! Cranley-Patterson shift, scaled into an axis-aligned box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_PROBES: usize = 64;

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131,
];

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::dimension("sample box upper corner", lo.len(), hi.len()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::invalid("sample box bounds must be finite with lo <= hi"));
        }
        Ok(SampleBox { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        SampleBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    /// `[-1, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self::cube(dim, -1.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `count` low-discrepancy points in `bbox`. The same `(bbox, count, seed)`
/// always yields bit-identical points.
pub fn sample_points(bbox: &SampleBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = bbox.dim();
    assert!(dim <= PRIMES.len(), "at most {} sample dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let u = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
                    bbox.lo[d] + u * (bbox.hi[d] - bbox.lo[d])
                })
                .collect()
        })
        .collect()
}

/// The default probe set: 64 points in `[-1,1]^dim`.
pub fn default_points(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_points(&SampleBox::unit(dim), DEFAULT_PROBES, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_inside_box() {
        let b = SampleBox::new(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 2.0]).unwrap();
        let a = sample_points(&b, 50, 7);
        assert_eq!(a, sample_points(&b, 50, 7));
        assert_ne!(a, sample_points(&b, 50, 8));
        for p in &a {
            for d in 0..3 {
                assert!(p[d] >= b.lo[d] && p[d] <= b.hi[d]);
            }
        }
    }

    #[test]
    fn halton_base_two_prefix() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn rejects_inverted_box() {
        assert!(SampleBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(SampleBox::new(vec![1.0], vec![0.0, 1.0]).is_err());
    }
}
