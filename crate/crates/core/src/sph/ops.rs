use super::{KernelSpec, NeighborList, ParticleSet, Vec2};
use crate::prelude::*;
use crate::{Error, Result};

/// `f_i ω(0) ΔV_i + Σ_j f_j ω_ij ΔV_j`.
pub fn sph_value(ps: &ParticleSet, k: &KernelSpec, nl: &NeighborList, i: usize) -> f64 {
    let own = ps.values[i] * k.w(0.0) * ps.volumes[i];
    nl.of(i)
        .iter()
        .fold(own, |acc, nb| acc + ps.values[nb.j] * k.w_r(nb.dist) * ps.volumes[nb.j])
}

/// `Σ_j (f_j − f_i) ∇ω_ij ΔV_j`.
pub fn sph_gradient(ps: &ParticleSet, k: &KernelSpec, nl: &NeighborList, i: usize) -> Vec2 {
    let fi = ps.values[i];
    let mut g = [0.0; 2];
    for nb in nl.of(i) {
        let Ok(dw) = k.grad(nb.r) else { continue };
        let s = (ps.values[nb.j] - fi) * ps.volumes[nb.j];
        g[0] += s * dw[0];
        g[1] += s * dw[1];
    }
    g
}

/// First-order gradient correction at one particle.
///
/// `l[β][α] = Σ_j ∂_β ω_ij (x_j − x_i)_α ΔV_j`, so that for a linear field
/// `Σ_j (f_j − f_i) ∇ω_ij ΔV_j = L ∇f` and `L⁻¹` recovers `∇f` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionMatrix {
    pub l: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
    /// 2-norm condition number.
    pub cond: f64,
}

impl CorrectionMatrix {
    pub fn from_matrix(l: [[f64; 2]; 2], particle: usize) -> Result<Self> {
        let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
        let scale = l.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if !det.is_finite() || det.abs() < 1e-10 * scale * scale || scale == 0.0 {
            return Err(Error::DegenerateStencil(particle));
        }
        let inv = [[l[1][1] / det, -l[0][1] / det], [-l[1][0] / det, l[0][0] / det]];
        let fro2: f64 = l.iter().flatten().map(|v| v * v).sum();
        // σ_max/σ_min from the Frobenius norm and determinant.
        let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
        let smax = ((fro2 + disc) / 2.0).sqrt();
        let smin = det.abs() / smax;
        Ok(CorrectionMatrix { l, inv, det, cond: smax / smin })
    }

    pub fn apply(&self, g: Vec2) -> Vec2 {
        [
            self.inv[0][0] * g[0] + self.inv[0][1] * g[1],
            self.inv[1][0] * g[0] + self.inv[1][1] * g[1],
        ]
    }
}

pub fn correction_matrix(ps: &ParticleSet, k: &KernelSpec, nl: &NeighborList, i: usize) -> Result<CorrectionMatrix> {
    let mut l = [[0.0; 2]; 2];
    for nb in nl.of(i) {
        let Ok(dw) = k.grad(nb.r) else { continue };
        let v = ps.volumes[nb.j];
        // x_j − x_i = −r_ij
        for (b, row) in l.iter_mut().enumerate() {
            for (a, e) in row.iter_mut().enumerate() {
                *e -= dw[b] * nb.r[a] * v;
            }
        }
    }
    CorrectionMatrix::from_matrix(l, i)
}

/// Correction matrices for interior particles; `None` for ghosts.
pub fn correction_matrices(ps: &ParticleSet, k: &KernelSpec, nl: &NeighborList) -> Result<Vec<Option<CorrectionMatrix>>> {
    crate::par::map_range(ps.len(), |i| {
        if ps.interior[i] {
            correction_matrix(ps, k, nl, i).map(Some)
        } else {
            Ok(None)
        }
    })
    .into_iter()
    .collect()
}

/// `L_i⁻¹ Σ_j (f_j − f_i) ∇ω_ij ΔV_j`.
pub fn corrected_gradient(ps: &ParticleSet, k: &KernelSpec, nl: &NeighborList, corr: &CorrectionMatrix, i: usize) -> Vec2 {
    corr.apply(sph_gradient(ps, k, nl, i))
}
