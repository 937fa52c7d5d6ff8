use super::{Dataset, LossSpec};
use crate::hybrid::{HybridModel, ParameterLayout};
use crate::par;
use crate::prelude::*;
use crate::qnn::{EncoderKind, QuantumBlock};
use crate::qsim::Angle;
use crate::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Vector-Jacobian product of a quantum block: gradients of `g_head · h`
/// with respect to the trainable angles and, when `want_input` is set, the
/// encoded features.
///
/// Angle gradients use parameter-shift rules (four-term for CRX), summed
/// over every gate occurrence of a shared slot. Angle-encoded features are
/// differentiated the same way through their encoded slots; amplitude
/// encoding uses the adjoint product `2 Re(U† O U φ)` chained through the
/// normalization.
pub fn quantum_vjp(
    block: &QuantumBlock,
    theta: &[f64],
    features: &[f64],
    g_head: &[f64],
    want_input: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    quantum_vjp_inner(block, theta, features, g_head, true, want_input)
}

fn quantum_vjp_inner(
    block: &QuantumBlock,
    theta: &[f64],
    features: &[f64],
    g_head: &[f64],
    want_theta: bool,
    want_input: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let circuit = &block.circuit;
    let nt = circuit.n_trainable;
    let (init, params) = block.prepare(theta, features)?;
    let angle_input = want_input && block.encoder.kind == EncoderKind::Angle;
    let mut gp = vec![0.0; circuit.n_params()];
    if want_theta || angle_input {
        let traj = circuit.trajectory(init.clone(), &params)?;
        for (g, gate) in circuit.gates.iter().enumerate() {
            for (c, a) in gate.params.iter().enumerate() {
                let Angle::Slot(s) = *a else { continue };
                if (s < nt && !want_theta) || (s >= nt && !angle_input) {
                    continue;
                }
                let rule = gate.kind.shift_rule().expect("parameterized gate has a rule");
                let mut acc = 0.0;
                for &(shift, coef) in rule.terms() {
                    let plus = circuit.run_shifted(&traj[g], &params, g, c, shift);
                    let minus = circuit.run_shifted(&traj[g], &params, g, c, -shift);
                    let e_plus = dot(g_head, &block.head.readout(&plus)?);
                    let e_minus = dot(g_head, &block.head.readout(&minus)?);
                    acc += coef * (e_plus - e_minus);
                }
                gp[s] += acc;
            }
        }
    }
    let g_theta = gp[..nt].to_vec();
    if !want_input {
        return Ok((g_theta, None));
    }
    let nf = block.encoder.n_features;
    let g_in = match block.encoder.kind {
        EncoderKind::Angle => {
            let mut g = vec![0.0; nf];
            for (s, v) in gp[nt..].iter().enumerate() {
                let f = s % nf;
                g[f] += v * block.encoder.angle_slope(f);
            }
            g
        }
        EncoderKind::Amplitude => {
            let mut psi = init.clone();
            circuit.apply(&mut psi, &params)?;
            let d = block.head.weighted_diagonal(circuit.n_qubits, g_head);
            psi.scale_diagonal(&d);
            circuit.apply_adjoint(&mut psi, &params);
            let g_hat: Vec<f64> = psi.amplitudes()[..nf].iter().map(|a| 2.0 * a.re).collect();
            let norm = features.iter().map(|x| x * x).sum::<f64>().sqrt();
            let xh: Vec<f64> = features.iter().map(|x| x / norm).collect();
            let proj = dot(&xh, &g_hat);
            g_hat.iter().zip(&xh).map(|(g, x)| (g - x * proj) / norm).collect()
        }
    };
    Ok((g_theta, Some(g_in)))
}

fn backprop_stack(
    stack: &[crate::hybrid::DenseSpec],
    ranges: &[core::ops::Range<usize>],
    acts: &[Vec<f64>],
    params: &[f64],
    mut g: Vec<f64>,
    grad: &mut [f64],
) -> Vec<f64> {
    for (i, (spec, r)) in stack.iter().zip(ranges).enumerate().rev() {
        g = spec.backward(&params[r.clone()], &acts[i], &acts[i + 1], &g, &mut grad[r.clone()]);
    }
    g
}

/// Loss contribution and gradient of one sample in a batch of `n`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sample_grad(
    model: &HybridModel,
    layout: &ParameterLayout,
    params: &[f64],
    x: &[f64],
    t: &[f64],
    head_noise: &[f64],
    loss: &LossSpec<'_>,
    n: usize,
    want_quantum: bool,
) -> Result<(f64, Vec<f64>)> {
    if t.len() != model.n_outputs {
        return Err(Error::shape("target width", model.n_outputs, t.len()));
    }
    let trace = model.forward_traced(x, params, head_noise)?;
    let (l, gy) = loss.sample(x, &trace.output, t, n);
    let mut grad = vec![0.0; layout.total];
    let g_q = match &layout.aggregation {
        Some(r) => {
            let (a1, a2) = (params[r.start], params[r.start + 1]);
            let c = trace.parallel.last().expect("stack keeps its input");
            grad[r.start] = dot(&gy, c);
            grad[r.start + 1] = dot(&gy, &trace.quantum_out);
            let g_c = gy.iter().map(|g| a1 * g).collect();
            backprop_stack(
                &model.parallel_classical,
                &layout.parallel_classical,
                &trace.parallel,
                params,
                g_c,
                &mut grad,
            );
            gy.iter().map(|g| a2 * g).collect()
        }
        None => gy,
    };
    let g_head = if model.back.is_empty() {
        let mut g = vec![0.0; trace.head.len()];
        let slope = model.headless_slope();
        for (gh, gq) in g.iter_mut().zip(&g_q) {
            *gh = slope * gq;
        }
        g
    } else {
        backprop_stack(&model.back, &layout.back, &trace.back, params, g_q, &mut grad)
    };
    let features = trace.front.last().expect("stack keeps its input");
    let want_input = !model.front.is_empty();
    if want_quantum || want_input {
        let (g_theta, g_in) = quantum_vjp_inner(
            &model.quantum,
            &params[layout.quantum.clone()],
            features,
            &g_head,
            want_quantum,
            want_input,
        )?;
        if want_quantum {
            grad[layout.quantum.clone()].copy_from_slice(&g_theta);
        }
        if let Some(g_in) = g_in {
            backprop_stack(&model.front, &layout.front, &trace.front, params, g_in, &mut grad);
        }
    }
    Ok((l, grad))
}

pub(crate) fn batch_grad(
    model: &HybridModel,
    params: &[f64],
    data: &Dataset,
    idx: &[usize],
    noise: &[Vec<f64>],
    loss: &LossSpec<'_>,
    want_quantum: bool,
) -> Result<(f64, Vec<f64>)> {
    if idx.is_empty() {
        return Err(Error::EmptyLoss);
    }
    let layout = model.layout();
    let n = idx.len();
    let parts = par::map_collect(idx, |k, &i| {
        let nz: &[f64] = noise.get(k).map_or(&[], Vec::as_slice);
        sample_grad(model, &layout, params, &data.inputs[i], &data.targets[i], nz, loss, n, want_quantum)
    });
    let mut total = 0.0;
    let mut grad = vec![0.0; layout.total];
    for part in parts {
        let (l, g) = part?;
        total += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    Ok((total, grad))
}

/// Loss over `data` and its gradient with respect to every parameter.
pub fn loss_and_grad(model: &HybridModel, params: &[f64], data: &Dataset, loss: &LossSpec<'_>) -> Result<(f64, Vec<f64>)> {
    let idx: Vec<usize> = (0..data.len()).collect();
    batch_grad(model, params, data, &idx, &[], loss, true)
}

/// `∂MSE/∂θ` for one circuit angle, `slot` indexing the flat parameter
/// vector.
pub fn parameter_shift_grad(model: &HybridModel, params: &[f64], data: &Dataset, slot: usize) -> Result<f64> {
    if !model.layout().quantum.contains(&slot) {
        return Err(Error::NotQuantumSlot(slot));
    }
    Ok(loss_and_grad(model, params, data, &LossSpec::default())?.1[slot])
}

/// Reverse-mode MSE gradient over the dense and aggregation parameters.
/// Circuit angle entries are left at zero.
pub fn classical_grad(model: &HybridModel, params: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..data.len()).collect();
    Ok(batch_grad(model, params, data, &idx, &[], &LossSpec::default(), false)?.1)
}
