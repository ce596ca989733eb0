//! The exchange operator `Π(q) = −q + 2 Q T_Σ⁻¹ Σ_j Q_j^* T_j q_j`, the
//! `t_h`-orthogonal reflection across the single-trace space.

use crate::error::{invalid, Result};
use crate::impedance::ImpedanceMatrices;
use crate::skeleton::{MultiTrace, SkeletonMap};
use crate::C64;
use rayon::prelude::*;

fn check_shape(map: &SkeletonMap, q: &MultiTrace) -> Result<()> {
    if q.blocks.len() != map.num_subdomains() || q.blocks.iter().enumerate().any(|(j, b)| b.len() != map.block_size(j)) {
        return Err(invalid("multi-trace shape does not match the skeleton"));
    }
    Ok(())
}

/// `Σ_j Q_j^* w_j`, summed in subdomain order.
pub(crate) fn gather(map: &SkeletonMap, w: &[Vec<C64>]) -> Vec<C64> {
    let mut g = vec![C64::new(0.0, 0.0); map.num_skeleton_dofs()];
    for (j, wj) in w.iter().enumerate() {
        for (&k, &x) in map.skeleton_index(j).iter().zip(wj) {
            g[k] += x;
        }
    }
    g
}

/// Skeleton coefficients `v = T_Σ⁻¹ Σ_j Q_j^* T_j q_j` of the `t_h`-orthogonal
/// projection of `q` on the single-trace space.
pub fn single_trace_coefficients(map: &SkeletonMap, imp: &ImpedanceMatrices, q: &MultiTrace) -> Result<Vec<C64>> {
    check_shape(map, q)?;
    let tq: Vec<Vec<C64>> = q.blocks.par_iter().enumerate().map(|(j, b)| imp.apply_block(j, b)).collect();
    Ok(imp.solve_sigma(&gather(map, &tq)))
}

/// `Π(q)`.
pub fn apply_pi(map: &SkeletonMap, imp: &ImpedanceMatrices, q: &MultiTrace) -> Result<MultiTrace> {
    let v = single_trace_coefficients(map, imp, q)?;
    let blocks = q
        .blocks
        .iter()
        .enumerate()
        .map(|(j, b)| map.skeleton_index(j).iter().zip(b).map(|(&k, &x)| 2.0 * v[k] - x).collect())
        .collect();
    Ok(MultiTrace { blocks })
}

/// `(q + Π(q)) / 2`.
pub fn project_single_trace(map: &SkeletonMap, imp: &ImpedanceMatrices, q: &MultiTrace) -> Result<MultiTrace> {
    let v = single_trace_coefficients(map, imp, q)?;
    map.spread(&v)
}
