//! Entanglement and linear-entropy dynamics of two two-level atoms sharing a
//! single resonant cavity mode.
//!
//! The atoms couple to the field through time-windowed strengths, either one
//! after the other (dynamical Jaynes-Cummings, "DJC") or at the same time
//! with a fixed ratio between the two couplings (dynamical Dicke, "DD").
//! Because the rotating-wave Hamiltonian conserves the excitation number,
//! states live in three- or four-dimensional blocks and everything here is
//! small dense linear algebra.
//!
//! Modules:
//!
//!  - [`qstate`]: pure states in the conserved blocks, density matrices.
//!  - [`coupling`]: window functions, pulse shapes, Rabi angles.
//!  - [`dynamics`]: block Hamiltonians, RK4 propagation and the closed-form
//!    evolutions for a single excitation.
//!  - [`correlations`]: partial traces, linear entropies, Wootters
//!    concurrence and the intrinsic entanglement `E = M_A + M_B − M_AB`.
//!  - [`scenarios`]: singlet, W-state and triplet preparation recipes.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod correlations;
pub mod coupling;
pub mod dynamics;
mod numeric;
pub mod qstate;
pub mod scenarios;

pub use correlations::{CorrelationRecord, Subsystem, Subsystems};
pub use coupling::{CouplingSchedule, CouplingWindow, Pulse, PulseShape, ScheduleMode};
pub use dynamics::{DjcPhase, Method, SubspaceHamiltonian};
pub use qstate::{DensityMatrix, ExcitationSubspace, PureState, C64};
pub use scenarios::{Scenario, ScenarioKind};

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("the N = 0 subspace has no dynamics")]
    EmptySubspace,
    #[error("state norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace {trace} deviates from 1")]
    BadTrace { trace: f64 },
    #[error("eigenvalue {value:e} is negative")]
    NegativeEigenvalue { value: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("time {t} precedes the window start {start}")]
    BeforeWindow { t: f64, start: f64 },
    #[error("operation requires {required} mode")]
    WrongMode { required: &'static str },
    #[error("coupling ratio varies in time")]
    VaryingRatio,
    #[error("no closed form is available for {0}")]
    NoClosedForm(ExcitationSubspace),
    #[error("norm drifted by {drift:e} during integration; reduce the step size")]
    StepSize { drift: f64 },
    #[error("sample times must be finite and nondecreasing")]
    UnsortedSamples,
    #[error("subsystem selection must be a nonempty proper subset")]
    BadSubsystems,
    #[error("target angle {target} is unreachable")]
    UnreachableTarget { target: f64 },
    #[error("closed form disagrees with partial-trace value for {quantity} by {deviation:e}")]
    ClosedFormMismatch {
        quantity: &'static str,
        deviation: f64,
    },
    #[error("symmetry check needs a constant-pulse sequential singlet run")]
    SymmetryPrecondition,
}
