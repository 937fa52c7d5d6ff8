use serde::{Deserialize, Serialize};

use super::PairKernel;
use crate::prelude::*;
use crate::sph::{NeighborList, ParticleSet, Vec2};
use crate::Result;

/// `f_i K(0, ΔV_i) + Σ_j f_j K(r_ij, ΔV_j)`.
pub fn quantum_sph_value(kernel: &dyn PairKernel, ps: &ParticleSet, nl: &NeighborList, i: usize) -> Result<f64> {
    let mut acc = ps.values[i] * kernel.value_weight([0.0, 0.0], ps.volumes[i])?;
    for nb in nl.of(i) {
        acc += ps.values[nb.j] * kernel.value_weight(nb.r, ps.volumes[nb.j])?;
    }
    Ok(acc)
}

/// `Σ_{j≠i} G(r_ij, ΔV_j) (f_j − f_i)`.
pub fn quantum_sph_gradient(kernel: &dyn PairKernel, ps: &ParticleSet, nl: &NeighborList, i: usize) -> Result<Vec2> {
    let fi = ps.values[i];
    let mut g = [0.0; 2];
    for nb in nl.of(i) {
        if nb.dist == 0.0 {
            continue;
        }
        let w = kernel.gradient_weight(i, nb.r, ps.volumes[nb.j])?;
        let df = ps.values[nb.j] - fi;
        g[0] += w[0] * df;
        g[1] += w[1] * df;
    }
    Ok(g)
}

/// `Σ_{j≠i} G(r_ij, ΔV_j) ⊙ (v_j − v_i) + f_ext(i)`, where `⊙` pairs
/// weight component `α` with velocity component `α`.
pub fn quantum_momentum_rhs(
    kernel: &dyn PairKernel,
    ps: &ParticleSet,
    nl: &NeighborList,
    velocities: &[Vec2],
    f_ext: &dyn Fn(usize) -> Vec2,
    i: usize,
) -> Result<Vec2> {
    let vi = velocities[i];
    let mut a = f_ext(i);
    for nb in nl.of(i) {
        if nb.dist == 0.0 {
            continue;
        }
        let w = kernel.gradient_weight(i, nb.r, ps.volumes[nb.j])?;
        let vj = velocities[nb.j];
        a[0] += w[0] * (vj[0] - vi[0]);
        a[1] += w[1] * (vj[1] - vi[1]);
    }
    Ok(a)
}

/// One row of a learned-versus-classical kernel table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpaceRow {
    pub r: f64,
    pub learned: f64,
    pub classical: f64,
    pub residual: f64,
}

/// `n` equally spaced distances covering `[0, 2h]`.
pub fn distance_grid(h: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| 2.0 * h * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Value weights of `learned` and `classical` over `grid` at volume `dv`.
pub fn extract_kernel_space(learned: &dyn PairKernel, classical: &dyn PairKernel, grid: &[f64], dv: f64) -> Result<Vec<KernelSpaceRow>> {
    grid.iter()
        .map(|&r| {
            let l = learned.value_weight([r, 0.0], dv)?;
            let c = classical.value_weight([r, 0.0], dv)?;
            Ok(KernelSpaceRow {
                r,
                learned: l,
                classical: c,
                residual: l - c,
            })
        })
        .collect()
}

/// Component `axis` of the gradient weights at `r = d·e_axis` for each `d`
/// in `grid`, evaluated for particle `i`.
pub fn extract_gradient_space(
    learned: &dyn PairKernel,
    classical: &dyn PairKernel,
    grid: &[f64],
    dv: f64,
    axis: usize,
    i: usize,
) -> Result<Vec<KernelSpaceRow>> {
    grid.iter()
        .map(|&d| {
            let mut r = [0.0; 2];
            r[axis] = d;
            let l = learned.gradient_weight(i, r, dv)?[axis];
            let c = classical.gradient_weight(i, r, dv)?[axis];
            Ok(KernelSpaceRow {
                r: d,
                learned: l,
                classical: c,
                residual: l - c,
            })
        })
        .collect()
}
