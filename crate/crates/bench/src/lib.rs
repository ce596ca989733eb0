//! Shared fixtures for the kernel benchmarks.

use osmx_core::assembly::{Material, Source};
use osmx_core::impedance::{ImpedanceKind, ImpedanceSpec};
use osmx_core::mesh::{generate_disk_mesh, partition_mesh, PartitionMethod};
use osmx_core::{DdmProblem, C64};

/// Unit disk at `n_lambda` points per wavelength, plane-wave data,
/// graph-growing partition.
pub fn disk_problem(kappa: f64, n_lambda: f64, j: usize, kind: ImpedanceKind) -> DdmProblem {
    let h = 2.0 * std::f64::consts::PI / (kappa * n_lambda);
    let mesh = generate_disk_mesh(1.0, h).expect("mesh");
    let part = partition_mesh(&mesh, j, &PartitionMethod::GraphGrowing).expect("partition");
    let k = C64::new(kappa, 0.0);
    let mat = Material::homogeneous(&mesh, 1.0, k).expect("material");
    let src = Source::plane_wave(&mesh, k);
    let spec = ImpedanceSpec::for_wavenumber(kind, kappa).expect("impedance");
    DdmProblem::new(mesh, part, mat, src, &spec).expect("problem")
}
