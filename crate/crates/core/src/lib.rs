//! Noncommutative phase spaces from Souriau-modified symplectic forms.
//!
//! The crate inverts 2-forms into Poisson bivectors, checks closedness and
//! the Jacobi identity numerically, derives and integrates the resulting
//! dynamics, analyses the degenerate locus of the exotic plane, runs the
//! Feynman–Dyson consistency checks and builds volume-preserving flows.
//!
//! Matrices follow one convention throughout: a 2-form is stored as the
//! matrix `M` of its flat map, so `i(X)ω = M·X`, and the Poisson matrix is
//! `Λ = M⁻¹` with `{f, g} = Λ_ab ∂_a f ∂_b g`. A term `c dξ_a∧dξ_b` puts
//! `−c` at `(a, b)` and `+c` at `(b, a)`.

pub mod dynamics;
pub mod error;
pub mod expr;
pub mod fd;
pub mod geom;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod sampling;
pub mod souriau;
pub mod volflow;

pub use dynamics::{IntegratorConfig, Scheme, Trajectory};
pub use error::{Error, Result};
pub use expr::{parse, Expr};
pub use geom::{
    AntisymBlock, BivectorField, DiffConfig, FormBuilder, MatrixField, PhaseSpace, ScalarField,
    TwoFormField, VectorFieldSpec, DEFAULT_PIVOT_TOL,
};
pub use linalg::Matrix;
pub use report::ResidualReport;
pub use sampling::{sample_points, SampleBox, DEFAULT_PROBES};
pub use souriau::{ConstraintSet, SouriauModel};
