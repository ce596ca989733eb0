//! Two-dimensional P1 finite-element Helmholtz solver and a non-overlapping
//! optimized Schwarz domain decomposition engine whose interface exchange is
//! the impedance-orthogonal reflection across the single-trace space.
//!
//! The exchange stays an isometric involution whatever the partition, so the
//! iteration converges geometrically also when three or more subdomains meet
//! at a vertex (cross-points).
//!
//! Module map:
//! - [`mesh`]: triangulations, MSH 2.2 I/O, partitioners, cross-point detection
//! - [`assembly`]: Helmholtz sesquilinear form, local and global systems
//! - [`skeleton`]: skeleton numbering, injections, multi-traces, classical swap
//! - [`impedance`]: the four transmission impedances and the skeleton Gram matrix
//! - [`exchange`]: the exchange operator
//! - [`ddm`]: scattering operator, skeleton system, Richardson and GMRES drivers
//! - [`linsolve`]: sparse/band factorizations, GMRES, dense diagnostics
//! - [`study`]: run configuration and experiment orchestration

pub mod assembly;
pub mod ddm;
pub mod error;
pub mod exchange;
pub mod impedance;
pub mod linsolve;
pub mod mesh;
pub mod skeleton;
pub mod study;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use assembly::{GlobalProblem, LocalProblem, Material};
pub use ddm::{DdmProblem, DdmState, SolverConfig};
pub use impedance::{ImpedanceMatrices, ImpedanceSpec};
pub use mesh::{CrossPointReport, Mesh, Partition, PartitionMethod};
pub use skeleton::{MultiTrace, SkeletonMap};
