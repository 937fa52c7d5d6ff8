use serde::{Deserialize, Serialize};

use super::gate::{gate_matrix, GateKind, GateMatrix};
use super::state::StateVector;
use crate::prelude::*;
use crate::{Error, Result};

/// Source of one gate angle: an index into the concatenated
/// `[trainable…, encoded…]` parameter vector, or a fixed value in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Slot(usize),
    Literal(f64),
}

impl Angle {
    fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Slot(i) => params[i],
            Angle::Literal(v) => v,
        }
    }
}

/// One gate in a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub params: Vec<Angle>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: Vec<usize>, params: Vec<Angle>) -> Result<Self> {
        if targets.len() != kind.n_targets() {
            return Err(Error::Config(format!(
                "{} takes {} target(s), got {}",
                kind.name(),
                kind.n_targets(),
                targets.len()
            )));
        }
        if params.len() != kind.n_angles() {
            return Err(Error::Config(format!(
                "{} takes {} angle(s), got {}",
                kind.name(),
                kind.n_angles(),
                params.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::Config(format!(
                "{} targets must be distinct",
                kind.name()
            )));
        }
        let slots = params.iter().filter(|a| matches!(a, Angle::Slot(_))).count();
        if slots != 0 && slots != params.len() {
            return Err(Error::Config(
                "a gate cannot mix slot and literal angles".into(),
            ));
        }
        Ok(GateOp {
            kind,
            targets,
            params,
        })
    }

    /// Gate with slot-indexed angles.
    pub fn slotted(kind: GateKind, targets: &[usize], slots: &[usize]) -> Result<Self> {
        Self::new(
            kind,
            targets.to_vec(),
            slots.iter().map(|&s| Angle::Slot(s)).collect(),
        )
    }

    /// Gate with fixed angles.
    pub fn fixed(kind: GateKind, targets: &[usize], angles: &[f64]) -> Result<Self> {
        Self::new(
            kind,
            targets.to_vec(),
            angles.iter().map(|&a| Angle::Literal(a)).collect(),
        )
    }

    fn angles(&self, params: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, a) in out.iter_mut().zip(&self.params) {
            *o = a.resolve(params);
        }
        out
    }

    fn matrix(&self, params: &[f64], shift: Option<(usize, f64)>) -> GateMatrix {
        let mut angles = self.angles(params);
        if let Some((component, delta)) = shift {
            angles[component] += delta;
        }
        gate_matrix(self.kind, &angles[..self.kind.n_angles()])
            .expect("arity checked at construction")
    }
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    kind: GateKind,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    slots: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    literals: Vec<f64>,
}

impl TryFrom<GateRepr> for GateOp {
    type Error = Error;

    fn try_from(r: GateRepr) -> Result<Self> {
        if !r.slots.is_empty() && !r.literals.is_empty() {
            return Err(Error::Config(
                "gate has both slots and literals".into(),
            ));
        }
        let params = r
            .slots
            .iter()
            .map(|&s| Angle::Slot(s))
            .chain(r.literals.iter().map(|&v| Angle::Literal(v)))
            .collect();
        GateOp::new(r.kind, r.targets, params)
    }
}

impl From<GateOp> for GateRepr {
    fn from(g: GateOp) -> Self {
        let mut slots = Vec::new();
        let mut literals = Vec::new();
        for a in g.params {
            match a {
                Angle::Slot(s) => slots.push(s),
                Angle::Literal(v) => literals.push(v),
            }
        }
        GateRepr {
            kind: g.kind,
            targets: g.targets,
            slots,
            literals,
        }
    }
}

/// Ordered gate list with trainable and data-encoding parameter slots.
///
/// Slot indices `0..n_trainable` are trainable, `n_trainable..n_trainable +
/// n_encoded` carry encoded data. `active_qubits` lists the qubits a
/// measurement head may read; pooling layers remove qubits from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub gates: Vec<GateOp>,
    pub n_trainable: usize,
    pub n_encoded: usize,
    #[serde(default)]
    pub active_qubits: Vec<usize>,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, n_trainable: usize, n_encoded: usize) -> Self {
        CircuitSpec {
            n_qubits,
            gates: Vec::new(),
            n_trainable,
            n_encoded,
            active_qubits: (0..n_qubits).collect(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_trainable + self.n_encoded
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > super::MAX_QUBITS {
            return Err(Error::Capacity(self.n_qubits));
        }
        for g in &self.gates {
            for &t in &g.targets {
                if t >= self.n_qubits {
                    return Err(Error::QubitIndex {
                        index: t,
                        n_qubits: self.n_qubits,
                    });
                }
            }
            for a in &g.params {
                if let Angle::Slot(s) = *a {
                    if s >= self.n_params() {
                        return Err(Error::Config(format!(
                            "slot {s} out of bounds for {} parameters",
                            self.n_params()
                        )));
                    }
                }
            }
        }
        for &q in &self.active_qubits {
            if q >= self.n_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        Ok(())
    }

    /// Every `(gate index, angle component)` reading `slot`.
    pub fn occurrences(&self, slot: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (g, gate) in self.gates.iter().enumerate() {
            for (c, a) in gate.params.iter().enumerate() {
                if *a == Angle::Slot(slot) {
                    out.push((g, c));
                }
            }
        }
        out
    }

    /// Applies every gate to `state`. `params` is `[trainable…, encoded…]`.
    pub fn apply(&self, state: &mut StateVector, params: &[f64]) -> Result<()> {
        self.check_run(state, params)?;
        self.apply_range(state, params, 0);
        Ok(())
    }

    fn check_run(&self, state: &StateVector, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::shape("circuit parameters", self.n_params(), params.len()));
        }
        if state.n_qubits() != self.n_qubits {
            return Err(Error::shape("circuit register", self.n_qubits, state.n_qubits()));
        }
        self.validate()
    }

    pub(crate) fn apply_range(&self, state: &mut StateVector, params: &[f64], from: usize) {
        for g in &self.gates[from..] {
            state.apply_matrix(&g.matrix(params, None), &g.targets);
        }
    }

    /// States before each gate; entry `g` is the input of gate `g`, the last
    /// entry is the output state.
    pub(crate) fn trajectory(&self, init: StateVector, params: &[f64]) -> Result<Vec<StateVector>> {
        self.check_run(&init, params)?;
        let mut out = Vec::with_capacity(self.gates.len() + 1);
        let mut state = init;
        for g in &self.gates {
            let next = {
                let mut s = state.clone();
                s.apply_matrix(&g.matrix(params, None), &g.targets);
                s
            };
            out.push(state);
            state = next;
        }
        out.push(state);
        Ok(out)
    }

    /// Replays from the input of gate `g` with one angle component shifted.
    pub(crate) fn run_shifted(
        &self,
        before: &StateVector,
        params: &[f64],
        g: usize,
        component: usize,
        delta: f64,
    ) -> StateVector {
        let mut s = before.clone();
        let gate = &self.gates[g];
        s.apply_matrix(&gate.matrix(params, Some((component, delta))), &gate.targets);
        self.apply_range(&mut s, params, g + 1);
        s
    }

    /// Applies the inverse circuit `U†` to `state`.
    pub(crate) fn apply_adjoint(&self, state: &mut StateVector, params: &[f64]) {
        for g in self.gates.iter().rev() {
            let m = match g.matrix(params, None) {
                GateMatrix::One(m) => {
                    let mut d = m;
                    for (i, row) in d.iter_mut().enumerate() {
                        for (j, v) in row.iter_mut().enumerate() {
                            *v = m[j][i].conj();
                        }
                    }
                    GateMatrix::One(d)
                }
                GateMatrix::Two(m) => {
                    let mut d = m;
                    for (i, row) in d.iter_mut().enumerate() {
                        for (j, v) in row.iter_mut().enumerate() {
                            *v = m[j][i].conj();
                        }
                    }
                    GateMatrix::Two(d)
                }
            };
            state.apply_matrix(&m, &g.targets);
        }
    }
}

/// Runs `circuit` from `|0…0⟩`.
pub fn run_circuit(circuit: &CircuitSpec, trainable: &[f64], encoded: &[f64]) -> Result<StateVector> {
    if trainable.len() != circuit.n_trainable {
        return Err(Error::shape("trainable parameters", circuit.n_trainable, trainable.len()));
    }
    if encoded.len() != circuit.n_encoded {
        return Err(Error::shape("encoded parameters", circuit.n_encoded, encoded.len()));
    }
    let params: Vec<f64> = trainable.iter().chain(encoded).copied().collect();
    let mut state = StateVector::zero(circuit.n_qubits)?;
    circuit.apply(&mut state, &params)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{expectation_z, measure_probabilities, C64};
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    use proptest::prelude::*;

    fn basis(n: usize, idx: usize) -> StateVector {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[idx] = C64::new(1.0, 0.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn apply_one(state: &mut StateVector, gate: GateOp) {
        let c = CircuitSpec {
            gates: vec![gate],
            ..CircuitSpec::new(state.n_qubits(), 0, 0)
        };
        c.apply(state, &[]).unwrap();
    }

    #[test]
    fn crx_pi_on_control_set() {
        // |q1 q0⟩ = |10⟩ means qubit 1 (control) set: index 2.
        let mut s = basis(2, 0b10);
        apply_one(&mut s, GateOp::fixed(GateKind::CRX, &[1, 0], &[PI]).unwrap());
        let a = s.amplitudes();
        assert!((a[0b11] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(a[0b10].norm() < 1e-15);
    }

    #[test]
    fn crx_leaves_control_clear_untouched() {
        for beta in [0.3, 1.7, PI, -2.2] {
            let mut s = basis(2, 0b01);
            apply_one(&mut s, GateOp::fixed(GateKind::CRX, &[1, 0], &[beta]).unwrap());
            assert_eq!(s, basis(2, 0b01));
        }
    }

    #[test]
    fn rzz_phase_on_zero_state() {
        let theta = 0.9;
        let mut s = basis(2, 0);
        apply_one(&mut s, GateOp::fixed(GateKind::RZZ, &[0, 1], &[theta]).unwrap());
        let expect = C64::new((theta / 2.0).cos(), -(theta / 2.0).sin());
        assert!((s.amplitudes()[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = CircuitSpec::new(2, 0, 0);
        let s = run_circuit(&c, &[], &[]).unwrap();
        assert_eq!(measure_probabilities(&s), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn u3_half_pi_column() {
        let mut c = CircuitSpec::new(1, 3, 0);
        c.gates.push(GateOp::slotted(GateKind::U3, &[0], &[0, 1, 2]).unwrap());
        let s = run_circuit(&c, &[FRAC_PI_2, 0.0, 0.0], &[]).unwrap();
        let a = s.amplitudes();
        assert!((a[0].re - FRAC_PI_4.cos()).abs() < 1e-15);
        assert!((a[1].re - FRAC_PI_4.sin()).abs() < 1e-15);
    }

    #[test]
    fn slot_out_of_bounds_is_config_error() {
        let mut c = CircuitSpec::new(1, 1, 0);
        c.gates.push(GateOp::slotted(GateKind::RY, &[0], &[3]).unwrap());
        assert!(matches!(run_circuit(&c, &[0.0], &[]), Err(Error::Config(_))));
        assert!(matches!(run_circuit(&c, &[], &[]), Err(Error::Shape { .. })));
    }

    #[test]
    fn gate_validation() {
        assert!(GateOp::fixed(GateKind::CNOT, &[1, 1], &[]).is_err());
        assert!(GateOp::fixed(GateKind::RX, &[0, 1], &[0.1]).is_err());
        assert!(GateOp::new(
            GateKind::U3,
            vec![0],
            vec![Angle::Slot(0), Angle::Literal(0.1), Angle::Slot(1)]
        )
        .is_err());
        let mut c = CircuitSpec::new(2, 0, 0);
        c.gates.push(GateOp::fixed(GateKind::H, &[2], &[]).unwrap());
        assert!(matches!(c.validate(), Err(Error::QubitIndex { index: 2, .. })));
    }

    #[test]
    fn adjoint_undoes_circuit() {
        let mut c = CircuitSpec::new(3, 4, 0);
        c.gates.push(GateOp::slotted(GateKind::U3, &[0], &[0, 1, 2]).unwrap());
        c.gates.push(GateOp::slotted(GateKind::CRX, &[0, 2], &[3]).unwrap());
        c.gates.push(GateOp::fixed(GateKind::H, &[1], &[]).unwrap());
        c.gates.push(GateOp::slotted(GateKind::RZX, &[1, 2], &[3]).unwrap());
        let params = [0.3, -1.2, 2.0, 0.8];
        let mut s = StateVector::zero(3).unwrap();
        c.apply(&mut s, &params).unwrap();
        c.apply_adjoint(&mut s, &params);
        assert!((s.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn z_expectation_matches_marginals(theta in -5.0f64..5.0, phi in -5.0f64..5.0) {
            let mut c = CircuitSpec::new(2, 2, 0);
            c.gates.push(GateOp::slotted(GateKind::RY, &[0], &[0]).unwrap());
            c.gates.push(GateOp::slotted(GateKind::RXX, &[0, 1], &[1]).unwrap());
            let s = run_circuit(&c, &[theta, phi], &[]).unwrap();
            for q in 0..2 {
                let m = s.marginal_probabilities(&[q]).unwrap();
                prop_assert!((expectation_z(&s, q).unwrap() - (m[0] - m[1])).abs() < 1e-12);
            }
            let total: f64 = measure_probabilities(&s).iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}
