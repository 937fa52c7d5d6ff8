use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{build_neighbors, KernelSpec, NeighborList, Vec2};
use crate::prelude::*;
use crate::rng;
use crate::{Error, Result};

/// Default `h / Δd`.
pub const DEFAULT_H_RATIO: f64 = 1.2;
/// Default number of ghost layers around the domain.
pub const DEFAULT_GHOST_LAYERS: usize = 3;
/// Default jitter amplitude as a fraction of `Δd`.
pub const DEFAULT_JITTER: f64 = 0.2;

/// Particles with volumes, one scalar value each, and an interior flag
/// (false for ghost layers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    pub positions: Vec<Vec2>,
    pub volumes: Vec<f64>,
    pub values: Vec<f64>,
    pub interior: Vec<bool>,
    pub h: f64,
    pub spacing: f64,
}

impl ParticleSet {
    pub fn new(positions: Vec<Vec2>, volumes: Vec<f64>, values: Vec<f64>, interior: Vec<bool>, h: f64, spacing: f64) -> Result<Self> {
        let ps = ParticleSet {
            positions,
            volumes,
            values,
            interior,
            h,
            spacing,
        };
        ps.validate()?;
        Ok(ps)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        for (what, len) in [("volumes", self.volumes.len()), ("values", self.values.len()), ("interior flags", self.interior.len())] {
            if len != n {
                return Err(Error::Config(format!("{len} {what} for {n} particles")));
            }
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("smoothing length must be positive, got {}", self.h)));
        }
        if self.volumes.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("particle volumes must be positive".into()));
        }
        if self.positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Config("particle positions must be finite".into()));
        }
        Ok(())
    }

    /// `n × n` cell-centred lattice on `[lo, hi]²` padded by `ghost_layers`
    /// rings, `ΔV = Δd²`, `h = h_ratio·Δd`, zero values. Ordered row by row
    /// from the bottom left.
    pub fn lattice(lo: f64, hi: f64, n: usize, ghost_layers: usize, h_ratio: f64) -> Result<Self> {
        if n == 0 || !(hi > lo) {
            return Err(Error::Config("lattice needs n ≥ 1 and hi > lo".into()));
        }
        let dd = (hi - lo) / n as f64;
        let g = ghost_layers as isize;
        let n = n as isize;
        let mut positions = Vec::new();
        let mut interior = Vec::new();
        for iy in -g..n + g {
            for ix in -g..n + g {
                positions.push([lo + (ix as f64 + 0.5) * dd, lo + (iy as f64 + 0.5) * dd]);
                interior.push((0..n).contains(&ix) && (0..n).contains(&iy));
            }
        }
        let count = positions.len();
        Self::new(positions, vec![dd * dd; count], vec![0.0; count], interior, h_ratio * dd, dd)
    }

    /// Unit square with default ghost layers and `h / Δd`.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::lattice(0.0, 1.0, n, DEFAULT_GHOST_LAYERS, DEFAULT_H_RATIO)
    }

    /// Copy with every coordinate shifted uniformly in `±amplitude·Δd`.
    pub fn jittered(&self, amplitude: f64, seed: u64) -> Self {
        let mut r = rng::stream(seed, rng::label::JITTER, 0);
        let a = amplitude * self.spacing;
        let mut out = self.clone();
        if a > 0.0 {
            for p in &mut out.positions {
                p[0] += r.random_range(-a..a);
                p[1] += r.random_range(-a..a);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec { h: self.h, dim: 2 }
    }

    pub fn neighbors(&self) -> NeighborList {
        build_neighbors(&self.positions, 2.0 * self.h)
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.interior[i]).collect()
    }

    /// Largest particle volume.
    pub fn max_volume(&self) -> f64 {
        self.volumes.iter().copied().fold(0.0, f64::max)
    }

    /// Sets every value from `f(x)`.
    pub fn fill(&mut self, f: impl Fn(Vec2) -> f64) {
        for (v, p) in self.values.iter_mut().zip(&self.positions) {
            *v = f(*p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_layout() {
        let ps = ParticleSet::unit_square(4).unwrap();
        assert_eq!(ps.len(), 100);
        assert_eq!(ps.interior_indices().len(), 16);
        assert!((ps.h - 0.3).abs() < 1e-15);
        assert_eq!(ps.positions[0], [-0.625, -0.625]);
        let first = ps.interior_indices()[0];
        assert_eq!(ps.positions[first], [0.125, 0.125]);
    }

    #[test]
    fn jitter_is_bounded_and_seeded() {
        let ps = ParticleSet::unit_square(8).unwrap();
        let j = ps.jittered(0.2, 5);
        assert_eq!(j, ps.jittered(0.2, 5));
        for (a, b) in ps.positions.iter().zip(&j.positions) {
            assert!((a[0] - b[0]).abs() <= 0.2 * ps.spacing && (a[1] - b[1]).abs() <= 0.2 * ps.spacing);
        }
    }

    #[test]
    fn validation() {
        assert!(ParticleSet::new(vec![[0.0, 0.0]], vec![0.0], vec![1.0], vec![true], 0.1, 0.1).is_err());
        assert!(ParticleSet::new(vec![[0.0, 0.0]], vec![1.0], vec![], vec![true], 0.1, 0.1).is_err());
    }
}
