//! Harmonic analysis on the local fields ℚ_p and 𝔽_p((t)) at finite digit
//! resolution: test functions, Fourier transforms, rough angular kernels,
//! the truncated singular integral T_k, Calderón–Zygmund and
//! Littlewood–Paley decompositions, and a verification harness.

pub mod decomp;
pub mod error;
pub mod exact;
pub mod field;
pub mod fourier;
pub mod kernels;
pub mod operators;
pub mod oracle;
pub mod testfn;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Ball, BallRelation, CosetGroup, FieldConfig, FieldElement, Mode, Sphere};
pub use fourier::{SpectralCell, SpectralFunction};
pub use kernels::{AngularKernel, Atom, AtomicDecomposition};
pub use operators::{SphereKernelPiece, TruncationSpec};
pub use testfn::{TestFunction, Window};
