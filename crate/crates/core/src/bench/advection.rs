use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::metrics::error_metrics;
use crate::par;
use crate::prelude::*;
use crate::qsph::PairKernel;
use crate::sph::{correction_matrices, KernelSpec, NeighborList, ParticleSet, Vec2, DEFAULT_GHOST_LAYERS, DEFAULT_H_RATIO};
use crate::{Error, Result};

pub const SNAPSHOT_TIMES: [f64; 5] = [0.0, 0.15, 0.35, 0.60, 1.0];

/// Explicit time integrator, fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Integrator {
    ForwardEuler,
    /// Three-stage strong-stability-preserving Runge–Kutta.
    #[default]
    SspRk3,
}

impl Integrator {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Integrator::ForwardEuler),
            "rk3" | "ssprk3" => Ok(Integrator::SspRk3),
            _ => Err(Error::Config(format!("unknown integrator `{s}`"))),
        }
    }
}

/// Prescribed-velocity transport of a scalar cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvectionSpec {
    pub period: f64,
    pub dt: f64,
    pub spacing: f64,
    pub scalar_center: Vec2,
    pub velocity_center: Vec2,
    pub ghost_layers: usize,
    pub h_ratio: f64,
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub integrator: Integrator,
}

impl Default for AdvectionSpec {
    fn default() -> Self {
        AdvectionSpec {
            period: 1.0,
            dt: 1e-4,
            spacing: 0.02,
            scalar_center: [0.3, 0.5],
            velocity_center: [0.5, 0.5],
            ghost_layers: DEFAULT_GHOST_LAYERS,
            h_ratio: DEFAULT_H_RATIO,
            snapshot_times: SNAPSHOT_TIMES.to_vec(),
            integrator: Integrator::SspRk3,
        }
    }
}

fn whole(x: f64) -> Option<usize> {
    let n = x.round();
    ((x - n).abs() < 1e-9 * x.abs().max(1.0) && n >= 0.0).then_some(n as usize)
}

impl AdvectionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.period > 0.0 && self.spacing > 0.0 && self.h_ratio > 0.0) {
            return Err(Error::Config("period, dt, spacing and h ratio must be positive".into()));
        }
        if whole(self.period / self.dt).is_none() {
            return Err(Error::Config(format!("period {} is not a whole number of steps of {}", self.period, self.dt)));
        }
        if whole(1.0 / self.spacing).is_none() {
            return Err(Error::Config(format!("spacing {} does not tile the unit square", self.spacing)));
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.period).contains(&t) || whole(t / self.dt).is_none() {
                return Err(Error::Config(format!("snapshot time {t} is not a step of the run")));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        whole(self.period / self.dt).unwrap_or(0)
    }

    pub fn cells(&self) -> usize {
        whole(1.0 / self.spacing).unwrap_or(0)
    }

    pub fn particles(&self) -> Result<ParticleSet> {
        self.validate()?;
        ParticleSet::lattice(0.0, 1.0, self.cells(), self.ghost_layers, self.h_ratio)
    }
}

fn swirl(spec: &AdvectionSpec, x: f64, y: f64) -> (Vec2, f64) {
    let (dx, dy) = (x - spec.velocity_center[0], y - spec.velocity_center[1]);
    let r = dx.hypot(dy);
    if r == 0.0 {
        return ([0.0, 0.0], 0.0);
    }
    let s = (4.0 * r).powi(6);
    let g = (1.0 - s) / (1.0 + s);
    let a = 4.0 * PI * r / spec.period;
    // sin θ = dy/r, cos θ = dx/r
    ([a * dy / r, -a * dx / r], g)
}

fn modulation(spec: &AdvectionSpec, t: f64) -> f64 {
    (2.0 * PI * t / spec.period).cos()
}

/// `u_θ (sin θ, −cos θ)` with `u_θ = (4πr/T)[1 − cos(2πt/T)(1 − (4r)⁶)/(1 + (4r)⁶)]`.
pub fn advection_velocity(spec: &AdvectionSpec, x: f64, y: f64, t: f64) -> Vec2 {
    let (a, g) = swirl(spec, x, y);
    let f = 1.0 - modulation(spec, t) * g;
    [a[0] * f, a[1] * f]
}

/// Raised-cosine cone of radius 0.2.
pub fn initial_scalar(spec: &AdvectionSpec, x: f64, y: f64) -> f64 {
    let rh = 5.0 * (x - spec.scalar_center[0]).hypot(y - spec.scalar_center[1]);
    if rh <= 1.0 {
        0.5 + 0.5 * (PI * rh).cos()
    } else {
        0.0
    }
}

/// Which gradient operator differentiates the fluxes.
#[derive(Clone, Copy)]
pub enum OperatorChoice<'a> {
    /// `L_i⁻¹ Σ_j (F_j − F_i) ∇ω_ij ΔV_j`.
    Classical,
    /// `Σ_j G(r_ij, ΔV_j) (F_j − F_i)`.
    Kernel(&'a dyn PairKernel),
}

/// Per-pair gradient weights of interior particles, built once since the
/// particles do not move.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxOperator {
    pairs: Vec<Vec<(usize, Vec2)>>,
    /// `L_i⁻¹` applied after the sum (classical only).
    post: Vec<Option<[[f64; 2]; 2]>>,
}

impl FluxOperator {
    pub fn new(ps: &ParticleSet, k: &KernelSpec, nl: &NeighborList, op: OperatorChoice<'_>) -> Result<Self> {
        let n = ps.len();
        let post = match op {
            OperatorChoice::Classical => correction_matrices(ps, k, nl)?.into_iter().map(|c| c.map(|c| c.inv)).collect(),
            OperatorChoice::Kernel(_) => vec![None; n],
        };
        let pairs = par::map_range(n, |i| {
            if !ps.interior[i] {
                return Ok(Vec::new());
            }
            let mut out = Vec::with_capacity(nl.of(i).len());
            for nb in nl.of(i) {
                if nb.dist == 0.0 {
                    continue;
                }
                let dv = ps.volumes[nb.j];
                let w = match op {
                    OperatorChoice::Classical => {
                        let g = k.grad(nb.r)?;
                        [g[0] * dv, g[1] * dv]
                    }
                    OperatorChoice::Kernel(kern) => kern.gradient_weight(i, nb.r, dv)?,
                };
                out.push((nb.j, w));
            }
            Ok(out)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(FluxOperator { pairs, post })
    }

    /// `∂F/∂x + ∂G/∂y` at particle `i`.
    pub fn divergence(&self, i: usize, f: &[f64], g: &[f64]) -> f64 {
        let (mut fx, mut gx) = ([0.0; 2], [0.0; 2]);
        for &(j, w) in &self.pairs[i] {
            let (df, dg) = (f[j] - f[i], g[j] - g[i]);
            fx[0] += w[0] * df;
            fx[1] += w[1] * df;
            gx[0] += w[0] * dg;
            gx[1] += w[1] * dg;
        }
        match self.post[i] {
            Some(m) => (m[0][0] * fx[0] + m[0][1] * fx[1]) + (m[1][0] * gx[0] + m[1][1] * gx[1]),
            None => fx[0] + gx[1],
        }
    }
}

/// Particles, operator and precomputed velocity parts for one run.
#[derive(Debug, Clone)]
pub struct Advection {
    pub spec: AdvectionSpec,
    pub particles: ParticleSet,
    pub op: FluxOperator,
    interior: Vec<usize>,
    /// Nearest interior particle of each ghost.
    ghost_source: Vec<(usize, usize)>,
    swirl: Vec<(Vec2, f64)>,
}

impl Advection {
    pub fn new(spec: &AdvectionSpec, op: OperatorChoice<'_>) -> Result<Self> {
        let mut ps = spec.particles()?;
        ps.fill(|p| initial_scalar(spec, p[0], p[1]));
        let (k, nl) = (ps.kernel(), ps.neighbors());
        let flux = FluxOperator::new(&ps, &k, &nl, op)?;
        let interior = ps.interior_indices();
        let ghost_source = (0..ps.len())
            .filter(|&g| !ps.interior[g])
            .map(|g| {
                let p = ps.positions[g];
                let src = interior
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let da = (ps.positions[a][0] - p[0]).hypot(ps.positions[a][1] - p[1]);
                        let db = (ps.positions[b][0] - p[0]).hypot(ps.positions[b][1] - p[1]);
                        da.total_cmp(&db)
                    })
                    .expect("lattice has interior particles");
                (g, src)
            })
            .collect();
        let swirl = ps.positions.iter().map(|p| swirl(spec, p[0], p[1])).collect();
        Ok(Advection {
            spec: spec.clone(),
            particles: ps,
            op: flux,
            interior,
            ghost_source,
            swirl,
        })
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Initial field over all particles.
    pub fn initial(&self) -> Vec<f64> {
        self.particles.values.clone()
    }

    fn velocity(&self, i: usize, c: f64) -> Vec2 {
        let (a, g) = self.swirl[i];
        let f = 1.0 - c * g;
        [a[0] * f, a[1] * f]
    }
}

impl Advection {
    /// `−∂(uψ)/∂x − ∂(vψ)/∂y` at interior particles, in
    /// [`interior`](Self::interior) order. Ghost values of `psi` are first
    /// copied from their nearest interior particle.
    pub fn rate(&self, psi: &mut [f64], t: f64) -> Vec<f64> {
        for &(g, s) in &self.ghost_source {
            psi[g] = psi[s];
        }
        let c = modulation(&self.spec, t);
        let (fu, fv): (Vec<f64>, Vec<f64>) = psi
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let u = self.velocity(i, c);
                (u[0] * p, u[1] * p)
            })
            .unzip();
        par::map_collect(&self.interior, |_, &i| -self.op.divergence(i, &fu, &fv))
    }
}

/// Advances `psi` (all particles) by one step from `t = step·dt`.
pub fn advect_step(adv: &Advection, psi: &mut [f64], step: usize) -> Result<()> {
    let dt = adv.spec.dt;
    let t = step as f64 * dt;
    let idx = &adv.interior;
    match adv.spec.integrator {
        Integrator::ForwardEuler => {
            let k = adv.rate(psi, t);
            for (&i, d) in idx.iter().zip(k) {
                psi[i] += dt * d;
            }
        }
        Integrator::SspRk3 => {
            let u0: Vec<f64> = idx.iter().map(|&i| psi[i]).collect();
            let k = adv.rate(psi, t);
            for ((&i, d), u) in idx.iter().zip(k).zip(&u0) {
                psi[i] = u + dt * d;
            }
            let k = adv.rate(psi, t + dt);
            for ((&i, d), u) in idx.iter().zip(k).zip(&u0) {
                psi[i] = 0.75 * u + 0.25 * (psi[i] + dt * d);
            }
            let k = adv.rate(psi, t + 0.5 * dt);
            for ((&i, d), u) in idx.iter().zip(k).zip(&u0) {
                psi[i] = u / 3.0 + 2.0 / 3.0 * (psi[i] + dt * d);
            }
        }
    }
    if idx.iter().any(|&i| !psi[i].is_finite()) {
        return Err(Error::IntegrationFailure { step });
    }
    for &(g, s) in &adv.ghost_source {
        psi[g] = psi[s];
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub step: usize,
    /// Interior values in [`Advection::interior`] order.
    pub psi: Vec<f64>,
    /// Against the initial field.
    pub l2_rel: f64,
    pub linf_rel: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRun {
    pub snapshots: Vec<Snapshot>,
    pub initial: Vec<f64>,
    pub steps: usize,
    pub max_abs: f64,
    pub clamp_count: u64,
}

impl PeriodRun {
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.time - t).abs() < 1e-12)
    }
}

/// Integrates one period and records the configured snapshots.
/// `kernel` is consulted only for its clamp count.
pub fn run_period(adv: &Advection, kernel: Option<&dyn PairKernel>) -> Result<PeriodRun> {
    let steps = adv.spec.n_steps();
    let mut wanted: Vec<(usize, f64)> = adv
        .spec
        .snapshot_times
        .iter()
        .map(|&t| (whole(t / adv.spec.dt).unwrap_or(0), t))
        .collect();
    wanted.sort_by(|a, b| a.0.cmp(&b.0));
    let initial: Vec<f64> = adv.interior.iter().map(|&i| adv.particles.values[i]).collect();
    let mut psi = adv.initial();
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut max_abs = 0.0f64;
    let mut next = 0;
    for step in 0..=steps {
        let cur: Vec<f64> = adv.interior.iter().map(|&i| psi[i]).collect();
        let m = cur.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        max_abs = max_abs.max(m);
        while next < wanted.len() && wanted[next].0 == step {
            let e = error_metrics(&cur, &initial, None)?;
            snapshots.push(Snapshot {
                time: wanted[next].1,
                step,
                psi: cur.clone(),
                l2_rel: e.l2_rel,
                linf_rel: e.linf_rel,
                max_abs: m,
            });
            next += 1;
        }
        if step < steps {
            advect_step(adv, &mut psi, step)?;
        }
    }
    Ok(PeriodRun {
        snapshots,
        initial,
        steps,
        max_abs,
        clamp_count: kernel.map_or(0, |k| k.clamp_count()),
    })
}

/// `Σ ψ_i ΔV_i` over interior particles.
pub fn total_mass(adv: &Advection, interior_psi: &[f64]) -> f64 {
    adv.interior.iter().zip(interior_psi).map(|(&i, v)| v * adv.particles.volumes[i]).sum()
}
