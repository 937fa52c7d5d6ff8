use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::rng;
use crate::sph::{sph_value, ParticleSet, Vec2};
use crate::train::Dataset;
use crate::{Error, Result};

/// One vortex, in tuple order `(c_x, c_y, A, σ, ω, k, m, α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexParams {
    pub cx: f64,
    pub cy: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub omega: f64,
    pub k: f64,
    pub m: i32,
    pub alpha: f64,
    pub beta: f64,
}

impl VortexParams {
    pub const fn from_tuple(t: (f64, f64, f64, f64, f64, f64, i32, f64, f64)) -> Self {
        VortexParams {
            cx: t.0,
            cy: t.1,
            amplitude: t.2,
            sigma: t.3,
            omega: t.4,
            k: t.5,
            m: t.6,
            alpha: t.7,
            beta: t.8,
        }
    }
}

pub const DEFAULT_VORTICES: [VortexParams; 3] = [
    VortexParams::from_tuple((0.4, 0.6, 1.2, 0.25, 1.5, 15.0, 5, 0.3, 2.0)),
    VortexParams::from_tuple((0.6, 0.4, 1.0, 0.20, 2.0, 12.0, 3, 0.4, 2.5)),
    VortexParams::from_tuple((0.5, 0.5, 0.8, 0.35, 0.8, 8.0, 7, 0.2, 1.5)),
];

/// Multi-vortex nebula field with fine structure and background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexFieldSpec {
    pub vortices: Vec<VortexParams>,
    pub fine_amp: f64,
    /// `φ_j`, one per fine mode.
    pub fine_phases: Vec<f64>,
    pub bg_amp: f64,
    pub tanh_gain: f64,
    pub t: f64,
    pub seed: u64,
}

impl Default for VortexFieldSpec {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

impl VortexFieldSpec {
    /// Default parameters with five fine phases drawn from `seed`.
    pub fn with_seed(seed: u64) -> Self {
        let mut r = rng::stream(seed, rng::label::PHASES, 0);
        VortexFieldSpec {
            vortices: DEFAULT_VORTICES.to_vec(),
            fine_amp: 0.1,
            fine_phases: (0..5).map(|_| r.random_range(0.0..2.0 * PI)).collect(),
            bg_amp: 0.15,
            tanh_gain: 1.5,
            t: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vortices.iter().any(|v| !(v.sigma > 0.0)) {
            return Err(Error::Config("vortex sigma must be positive".into()));
        }
        Ok(())
    }

    pub fn at(&self, p: Vec2) -> f64 {
        total_field(self, p[0], p[1], self.t)
    }
}

/// `A e^{−r²/2σ²} sin(ωt + kr + mθ) [1 + α cos βθ] tanh(r/σ)`, with θ the
/// four-quadrant azimuth about the centre (0 at the centre).
pub fn vortex_component(p: &VortexParams, x: f64, y: f64, t: f64) -> f64 {
    let (dx, dy) = (x - p.cx, y - p.cy);
    let r = dx.hypot(dy);
    let theta = if r == 0.0 { 0.0 } else { dy.atan2(dx) };
    p.amplitude
        * (-r * r / (2.0 * p.sigma * p.sigma)).exp()
        * (p.omega * t + p.k * r + p.m as f64 * theta).sin()
        * (1.0 + p.alpha * (p.beta * theta).cos())
        * (r / p.sigma).tanh()
}

pub fn total_field(spec: &VortexFieldSpec, x: f64, y: f64, t: f64) -> f64 {
    let vortex: f64 = spec.vortices.iter().map(|v| vortex_component(v, x, y, t)).sum();
    let fine: f64 = spec
        .fine_phases
        .iter()
        .enumerate()
        .map(|(j, phi)| {
            let j = (j + 1) as f64;
            spec.fine_amp * ((20.0 + 5.0 * j) * x + (15.0 + 3.0 * j) * y + phi + t).sin()
        })
        .sum();
    let bg = spec.bg_amp
        * ((3.0 * PI * x).sin() * (2.0 * PI * y).cos() * (0.3 * t).cos() + (2.0 * PI * (x + y)).sin() * (0.5 * t).cos());
    (spec.tanh_gain * (vortex + fine + bg)).tanh()
}

/// Stencil regression problem over a sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilProblem {
    pub data: Dataset,
    /// Position of each sample's centre particle.
    pub positions: Vec<Vec2>,
}

/// Samples `spec` on an `n × n` lattice (ghost layers included) and pairs
/// each interior particle's own value and neighbour values, in lattice
/// order, with its SPH value estimate.
pub fn fit_field_dataset(spec: &VortexFieldSpec, n: usize) -> Result<StencilProblem> {
    spec.validate()?;
    let mut ps = ParticleSet::unit_square(n)?;
    ps.fill(|p| spec.at(p));
    let (k, nl) = (ps.kernel(), ps.neighbors());
    let interior = ps.interior_indices();
    let width = interior.first().map_or(0, |&i| nl.of(i).len()) + 1;
    let mut inputs = Vec::with_capacity(interior.len());
    let mut targets = Vec::with_capacity(interior.len());
    for &i in &interior {
        let mut x = Vec::with_capacity(width);
        x.push(ps.values[i]);
        x.extend(nl.of(i).iter().map(|nb| ps.values[nb.j]));
        if x.len() != width {
            return Err(Error::shape("stencil width", width, x.len()));
        }
        inputs.push(x);
        targets.push(vec![sph_value(&ps, &k, &nl, i)]);
    }
    Ok(StencilProblem {
        data: Dataset::new(inputs, targets)?,
        positions: interior.iter().map(|&i| ps.positions[i]).collect(),
    })
}
