use std::f64::consts::PI;

use num_complex::Complex64;
use qsph_core::bench::*;
use qsph_core::qsph::ExactKernel;
use qsph_core::sph::correction_matrices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Vortex component through the polar form `(z/|z|)^m = e^{imθ}`.
fn vortex_polar(p: &VortexParams, x: f64, y: f64, t: f64) -> f64 {
    let z = Complex64::new(x - p.cx, y - p.cy);
    let r = z.norm();
    if r == 0.0 {
        return 0.0;
    }
    let u = z / r;
    let wave = (Complex64::new(0.0, p.omega * t + p.k * r).exp() * u.powi(p.m)).im;
    let cos_bt = u.powf(p.beta).re;
    p.amplitude * (-r * r / (2.0 * p.sigma * p.sigma)).exp() * wave * (1.0 + p.alpha * cos_bt) * (r / p.sigma).tanh()
}

#[test]
fn vortex_matches_polar_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in DEFAULT_VORTICES {
        assert_eq!(vortex_component(&p, p.cx, p.cy, 2.0), 0.0);
        for _ in 0..200 {
            let (x, y, t) = (rng.random::<f64>(), rng.random::<f64>(), rng.random_range(0.0..10.0));
            let a = vortex_component(&p, x, y, t);
            assert!((a - vortex_polar(&p, x, y, t)).abs() < 1e-12, "{a}");
        }
    }
    let v1 = DEFAULT_VORTICES[0];
    assert!((vortex_component(&v1, 0.5, 0.6, 0.0) - vortex_polar(&v1, 0.5, 0.6, 0.0)).abs() < 1e-15);
}

#[test]
fn velocity_examples() {
    let s = AdvectionSpec::default();
    assert_eq!(advection_velocity(&s, 0.5, 0.5, 0.3), [0.0, 0.0]);
    let v = advection_velocity(&s, 0.75, 0.5, 0.0);
    assert!(v[0].abs() < 1e-15 && (v[1] + PI).abs() < 1e-12, "{v:?}");
}

#[test]
fn velocity_is_divergence_free() {
    let s = AdvectionSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = 1e-5;
    for _ in 0..100 {
        let (x, y, t) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        let du = advection_velocity(&s, x + d, y, t)[0] - advection_velocity(&s, x - d, y, t)[0];
        let dv = advection_velocity(&s, x, y + d, t)[1] - advection_velocity(&s, x, y - d, t)[1];
        let div = (du + dv) / (2.0 * d);
        assert!(div.abs() < 1e-6, "{div} at ({x}, {y}, {t})");
    }
}

#[test]
fn half_period_modulation() {
    let s = AdvectionSpec::default();
    for (x, y) in [(0.6f64, 0.55f64), (0.2, 0.9), (0.45, 0.1)] {
        let (dx, dy) = (x - 0.5, y - 0.5);
        let r: f64 = (dx * dx + dy * dy).sqrt();
        let g = (1.0 - (4.0 * r).powi(6)) / (1.0 + (4.0 * r).powi(6));
        let ut = 4.0 * PI * r * (1.0 + g);
        let v = advection_velocity(&s, x, y, 0.5);
        assert!((v[0] - ut * dy / r).abs() < 1e-12 && (v[1] + ut * dx / r).abs() < 1e-12);
    }
}

#[test]
fn initial_scalar_examples() {
    let s = AdvectionSpec::default();
    assert_eq!(initial_scalar(&s, 0.3, 0.5), 1.0);
    assert!(initial_scalar(&s, 0.5, 0.5).abs() < 1e-15);
    assert_eq!(initial_scalar(&s, 0.9, 0.9), 0.0);
    // value and radial slope vanish at the support edge
    let e = 1e-6;
    let inside = initial_scalar(&s, 0.5 - e, 0.5);
    assert!(inside < 1e-10 && (inside / e) < 1e-4);
}

/// `Σ` in double-double arithmetic.
fn dd_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for x in xs {
        let s = hi + x;
        let bp = s - hi;
        let err = (hi - (s - bp)) + (x - bp);
        hi = s;
        lo += err;
    }
    hi + lo
}

#[test]
fn metrics_match_compensated_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.random_range(10..2000);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p: Vec<f64> = r.iter().map(|v| v + rng.random_range(-0.1..0.1)).collect();
        let m = error_metrics(&p, &r, None).unwrap();
        let num = dd_sum(p.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)));
        let den = dd_sum(r.iter().map(|b| b * b));
        assert!((m.l2_rel - (num / den).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn zero_field_stays_zero() {
    let spec = AdvectionSpec { spacing: 0.05, ..Default::default() };
    let adv = Advection::new(&spec, OperatorChoice::Classical).unwrap();
    let mut psi = vec![0.0; adv.particles.len()];
    for step in 0..50 {
        advect_step(&adv, &mut psi, step).unwrap();
    }
    assert!(psi.iter().all(|&v| v == 0.0));
}

/// `(ψ¹ − ψ⁰)/dt` against `−∇·(uψ)` by central differences on the exact
/// fields, away from the cone edge.
fn one_step_error(spacing: f64) -> f64 {
    let spec = AdvectionSpec { spacing, integrator: Integrator::ForwardEuler, ..Default::default() };
    let adv = Advection::new(&spec, OperatorChoice::Classical).unwrap();
    let mut psi = adv.initial();
    let old = psi.clone();
    advect_step(&adv, &mut psi, 0).unwrap();
    let flux = |x: f64, y: f64| {
        let u = advection_velocity(&spec, x, y, 0.0);
        let p = initial_scalar(&spec, x, y);
        [u[0] * p, u[1] * p]
    };
    let d = 1e-6;
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for &i in adv.interior() {
        let p = adv.particles.positions[i];
        if 5.0 * (p[0] - 0.3).hypot(p[1] - 0.5) > 0.8 {
            continue;
        }
        let div = (flux(p[0] + d, p[1])[0] - flux(p[0] - d, p[1])[0] + flux(p[0], p[1] + d)[1] - flux(p[0], p[1] - d)[1]) / (2.0 * d);
        err = err.max(((psi[i] - old[i]) / spec.dt + div).abs());
        scale = scale.max(div.abs());
    }
    err / scale
}

#[test]
fn one_step_matches_flux_divergence() {
    let coarse = one_step_error(0.02);
    let fine = one_step_error(0.01);
    assert!(coarse < 0.06, "{coarse}");
    assert!(coarse / fine > 3.0, "{coarse} {fine}");
}

#[test]
fn exact_kernel_advection_matches_classical() {
    let spec = AdvectionSpec { spacing: 0.05, period: 0.2, dt: 1e-3, snapshot_times: vec![0.0, 0.1, 0.2], ..Default::default() };
    let classical = Advection::new(&spec, OperatorChoice::Classical).unwrap();
    let ps = &classical.particles;
    let (k, nl) = (ps.kernel(), ps.neighbors());
    let exact = ExactKernel::corrected(k, correction_matrices(ps, &k, &nl).unwrap());
    let quantum = Advection::new(&spec, OperatorChoice::Kernel(&exact)).unwrap();
    let a = run_period(&classical, None).unwrap();
    let b = run_period(&quantum, Some(&exact)).unwrap();
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        let d = x.psi.iter().zip(&y.psi).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(d < 1e-10, "{d}");
    }
    assert_eq!(b.clamp_count, 0);
}

#[test]
fn classical_period_is_bounded_and_conserves_vortex_mass() {
    let spec = AdvectionSpec::default();
    let adv = Advection::new(&spec, OperatorChoice::Classical).unwrap();
    let run = run_period(&adv, None).unwrap();
    assert_eq!(run.steps, 10_000);
    assert!(run.max_abs <= 1.2, "{}", run.max_abs);
    let first = run.snapshot_at(0.0).unwrap();
    assert_eq!(first.psi, run.initial);
    assert_eq!(first.l2_rel, 0.0);
    let region: Vec<bool> = adv
        .interior()
        .iter()
        .map(|&i| {
            let p = adv.particles.positions[i];
            (p[0] - 0.5).hypot(p[1] - 0.5) < 0.45
        })
        .collect();
    let mass = |psi: &[f64]| -> f64 { psi.iter().zip(&region).filter(|(_, &m)| m).map(|(v, _)| v).sum() };
    let m0 = mass(&run.initial);
    for s in &run.snapshots {
        let drift = (mass(&s.psi) / m0 - 1.0).abs();
        assert!(drift < 0.01, "t = {}: {drift}", s.time);
    }
    let last = run.snapshot_at(1.0).unwrap();
    assert!(last.l2_rel.is_finite());
}

#[test]
fn forward_euler_step_is_one_rate_evaluation() {
    let spec = AdvectionSpec { spacing: 0.05, integrator: Integrator::ForwardEuler, ..Default::default() };
    let adv = Advection::new(&spec, OperatorChoice::Classical).unwrap();
    let mut psi = adv.initial();
    let rate = adv.rate(&mut psi.clone(), 0.0);
    let old = psi.clone();
    advect_step(&adv, &mut psi, 0).unwrap();
    for (&i, r) in adv.interior().iter().zip(rate) {
        assert_eq!(psi[i], old[i] + spec.dt * r);
    }
    assert!(AdvectionSpec { dt: 3e-4, ..Default::default() }.validate().is_err());
    assert!(AdvectionSpec { spacing: 0.03, ..Default::default() }.validate().is_err());
    assert_eq!(Integrator::parse("euler").unwrap(), Integrator::ForwardEuler);
}
