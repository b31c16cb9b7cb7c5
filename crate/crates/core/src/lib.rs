//! Time-integration toolkit for second-order structural dynamics.
//!
//! The centerpiece is a single-step implicit scheme of selectable order with
//! user-controlled numerical dissipation: the matrix exponential of the
//! state-space operator is replaced by a blend of the diagonal and first
//! sub-diagonal rational expansions, weighted by the spectral radius the
//! scheme should attain in the high-frequency limit. Each time step then
//! reduces to a short sequence of Newmark-sized linear solves, one per
//! denominator root, against factorizations computed once per run.
//!
//! The crate also ships the spectral-analysis machinery (amplification
//! factor, period error, damping ratio, and an HHT-alpha reference), a small
//! dense linear-algebra kernel, and desk-scale benchmark problems with
//! analytical references.

pub mod linalg;
pub mod pade;
pub mod problems;
pub mod spectral;
pub mod stepper;
pub mod system;

pub use pade::{MixedPadeScheme, PadeError, PolyCoeffs};
pub use stepper::{HistoryRecord, StepperConfig, StepperError, StepperPlan};
pub use system::{LoadModel, State, StructuralSystem};
