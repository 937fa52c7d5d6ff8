use super::*;
use crate::hybrid::{HybridModel, Level, ModelConfig};
use crate::prelude::*;
use crate::qnn::{Family, HeadKind};
use crate::sph::{correction_matrices, corrected_gradient, sph_gradient, sph_value, NeighborList, ParticleSet};

fn irregular(seed: u64) -> (ParticleSet, NeighborList) {
    let mut ps = ParticleSet::unit_square(10).unwrap().jittered(0.2, seed);
    ps.fill(|p| (3.0 * p[0]).sin() + p[1] * p[1]);
    let nl = ps.neighbors();
    (ps, nl)
}

fn net(n_in: usize, n_out: usize, scale: f64) -> KernelNet {
    let mut cfg = ModelConfig::new(Level::CrossedHybrid, Family::ImprovedQMLP, HeadKind::PauliZ, vec![(0.0, 1.0); n_in], n_out);
    cfg.n_qubits = 2;
    cfg.n_layers = 1;
    let model = HybridModel::build(&cfg).unwrap();
    let params = model.init_params();
    KernelNet { model, params, scale }
}

fn learned(ps: &ParticleSet, pre_map: PreMap, scale: f64) -> QuantumKernelModel {
    QuantumKernelModel::new(
        Some(net(2, 1, scale)),
        Some(net(pre_map.n_inputs(), pre_map.n_outputs(), scale)),
        pre_map,
        ps.h,
        ps.max_volume(),
    )
    .unwrap()
}

#[test]
fn exact_kernel_reproduces_classical_sums() {
    for seed in 0..3 {
        let (ps, nl) = irregular(seed);
        let k = ps.kernel();
        let corr = correction_matrices(&ps, &k, &nl).unwrap();
        let plain = ExactKernel::plain(k);
        let exact = ExactKernel::corrected(k, corr.clone());
        for i in 0..ps.len() {
            let v = quantum_sph_value(&plain, &ps, &nl, i).unwrap();
            assert!((v - sph_value(&ps, &k, &nl, i)).abs() < 1e-12);
            let g = quantum_sph_gradient(&plain, &ps, &nl, i).unwrap();
            let c = sph_gradient(&ps, &k, &nl, i);
            assert!((g[0] - c[0]).abs() < 1e-12 && (g[1] - c[1]).abs() < 1e-12);
            if let Some(m) = &corr[i] {
                let g = quantum_sph_gradient(&exact, &ps, &nl, i).unwrap();
                let c = corrected_gradient(&ps, &k, &nl, m, i);
                assert!((g[0] - c[0]).abs() < 1e-12 && (g[1] - c[1]).abs() < 1e-12, "{g:?} {c:?}");
            }
        }
    }
}

#[test]
fn exact_corrected_kernel_recovers_linear_slopes() {
    let (mut ps, nl) = irregular(7);
    ps.fill(|p| 3.0 * p[0] + 2.0 * p[1]);
    let k = ps.kernel();
    let exact = ExactKernel::corrected(k, correction_matrices(&ps, &k, &nl).unwrap());
    for i in ps.interior_indices() {
        let g = quantum_sph_gradient(&exact, &ps, &nl, i).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-3 && (g[1] - 2.0).abs() < 1e-3, "{g:?}");
    }
}

#[test]
fn constant_field_has_zero_learned_gradient() {
    let (mut ps, nl) = irregular(1);
    ps.fill(|_| 0.75);
    for pm in [PreMap::Identity, PreMap::NormDistance, PreMap::InnerDistance] {
        let m = learned(&ps, pm, 1.0);
        for i in [0, 50, 150] {
            assert_eq!(quantum_sph_gradient(&m, &ps, &nl, i).unwrap(), [0.0, 0.0]);
        }
    }
}

#[test]
fn zero_output_model() {
    let (ps, nl) = irregular(2);
    let m = learned(&ps, PreMap::Identity, 0.0);
    let vel: Vec<_> = ps.positions.iter().map(|p| [p[1], -p[0]]).collect();
    for i in [3, 77] {
        assert_eq!(quantum_sph_value(&m, &ps, &nl, i).unwrap(), 0.0);
        assert_eq!(quantum_sph_gradient(&m, &ps, &nl, i).unwrap(), [0.0, 0.0]);
        assert_eq!(quantum_momentum_rhs(&m, &ps, &nl, &vel, &|_| [0.0, 0.0], i).unwrap(), [0.0, 0.0]);
    }
}

#[test]
fn momentum_rhs() {
    let (ps, nl) = irregular(4);
    let k = ps.kernel();
    let m = learned(&ps, PreMap::NormDistance, 1.0);
    let same = vec![[0.3, -1.2]; ps.len()];
    let f_ext = |i: usize| [i as f64, 1.0];
    for i in [0, 60, 120] {
        assert_eq!(quantum_momentum_rhs(&m, &ps, &nl, &same, &f_ext, i).unwrap(), [i as f64, 1.0]);
    }

    // Exact corrected weights against the classical corrected gradient of
    // each velocity component.
    let corr = correction_matrices(&ps, &k, &nl).unwrap();
    let exact = ExactKernel::corrected(k, corr.clone());
    let vel: Vec<_> = ps.positions.iter().map(|p| [(2.0 * p[1]).sin(), p[0] * p[1]]).collect();
    let mut ux = ps.clone();
    ux.values = vel.iter().map(|v| v[0]).collect();
    let mut uy = ps.clone();
    uy.values = vel.iter().map(|v| v[1]).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for i in ps.interior_indices() {
        let a = quantum_momentum_rhs(&exact, &ps, &nl, &vel, &|_| [0.0, 0.0], i).unwrap();
        let c = corr[i].as_ref().unwrap();
        let cx = corrected_gradient(&ux, &k, &nl, c, i)[0];
        let cy = corrected_gradient(&uy, &k, &nl, c, i)[1];
        num += (a[0] - cx).powi(2) + (a[1] - cy).powi(2);
        den += cx * cx + cy * cy;
    }
    assert!((num / den).sqrt() < 1e-2);
}

#[test]
fn out_of_range_inputs_are_clamped_and_counted() {
    let (ps, nl) = irregular(5);
    let m = learned(&ps, PreMap::Identity, 1.0);
    for i in 0..ps.len() {
        quantum_sph_value(&m, &ps, &nl, i).unwrap();
        quantum_sph_gradient(&m, &ps, &nl, i).unwrap();
    }
    assert_eq!(m.clamp_count(), 0);
    let far = m.value_weight([3.0 * ps.h, 0.0], ps.max_volume()).unwrap();
    assert_eq!(m.clamp_count(), 1);
    assert_eq!(far, m.value_weight([2.0 * ps.h, 0.0], ps.max_volume()).unwrap());
    m.gradient_weight(0, [0.0, -5.0 * ps.h], ps.max_volume()).unwrap();
    assert_eq!(m.clamp_count(), 2);
    m.reset_clamps();
    assert_eq!(m.clamp_count(), 0);
}

#[test]
fn kernel_space_tables() {
    let (ps, _) = irregular(0);
    let k = ps.kernel();
    let dv = ps.max_volume();
    let grid = distance_grid(k.h, 41);
    assert_eq!(grid.len(), 41);
    assert_eq!(*grid.last().unwrap(), 2.0 * k.h);
    let exact = ExactKernel::plain(k);
    let rows = extract_kernel_space(&exact, &exact, &grid, dv).unwrap();
    assert_eq!(rows.len(), grid.len());
    assert!(rows.windows(2).all(|w| w[0].r < w[1].r));
    assert!(rows.iter().all(|r| r.residual == 0.0));
    assert_eq!(rows.last().unwrap().classical, 0.0);
    assert!((rows[0].classical - k.w(0.0) * dv).abs() < 1e-15);
    let m = learned(&ps, PreMap::NormDistance, 1.0);
    for axis in 0..2 {
        let rows = extract_gradient_space(&m, &exact, &grid, dv, axis, 0).unwrap();
        assert_eq!(rows.len(), grid.len());
        assert_eq!(rows.last().unwrap().classical, 0.0);
        assert!(rows.iter().all(|r| r.residual == r.learned - r.classical));
    }
}

#[test]
fn model_validation() {
    let (ps, _) = irregular(0);
    let bad = QuantumKernelModel::new(None, Some(net(3, 2, 1.0)), PreMap::NormDistance, ps.h, 1.0);
    assert!(bad.is_err());
    let none = QuantumKernelModel::new(None, None, PreMap::Identity, ps.h, 1.0).unwrap();
    assert!(none.value_weight([0.0, 0.0], 1.0).is_err());
    let m = learned(&ps, PreMap::InnerDistance, 2.0);
    assert_eq!(m.clone(), m);
}
