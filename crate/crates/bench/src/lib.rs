//! Workloads shared by the benchmarks.

use ncphase_core::poly::random_form;
use ncphase_core::souriau::make_exotic_plane;
use ncphase_core::{TwoFormField, PhaseSpace, SouriauModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exotic plane with radial field and harmonic potential.
pub fn exotic_radial() -> SouriauModel {
    let s = PhaseSpace::canonical(2);
    make_exotic_plane(
        0.3,
        1.0,
        s.field("0.5 + 0.2*(q1^2+q2^2)").unwrap(),
        s.field("0.5*(q1^2+q2^2)").unwrap(),
    )
    .unwrap()
}

/// Closed polynomial form on R^dim with a fixed seed.
pub fn closed_form(dim: usize) -> TwoFormField {
    random_form(&mut ChaCha8Rng::seed_from_u64(7), dim, true, 0.1)
}

pub const EXPRESSION: &str = "0.5*(p1^2+p2^2) + sin(q1)*exp(-q2^2/2) - 0.3*q1*q2^3 + sqrt(1 + p1^2)";
