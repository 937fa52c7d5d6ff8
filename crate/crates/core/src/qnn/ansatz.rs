use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::qsim::{CircuitSpec, GateKind, GateOp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    GeneralQNN,
    ImprovedQMLP,
    QCNN,
}

/// Ansatz template.
///
/// For `QCNN`, `qcnn_schedule` lists `(qubits entering the conv stage,
/// qubits kept after pooling)`; when absent the register is halved until two
/// qubits remain. `n_layers` counts repetitions of the dense block for
/// `QCNN` and of the whole layer otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: Family,
    pub n_qubits: usize,
    pub n_layers: usize,
    #[serde(default)]
    pub qcnn_schedule: Option<Vec<(usize, usize)>>,
}

impl AnsatzSpec {
    pub fn new(family: Family, n_qubits: usize, n_layers: usize) -> Self {
        AnsatzSpec {
            family,
            n_qubits,
            n_layers,
            qcnn_schedule: None,
        }
    }

    /// Closed-form trainable slot count.
    pub fn n_trainable(&self) -> Result<usize> {
        Ok(match self.family {
            Family::GeneralQNN => 3 * self.n_qubits * self.n_layers,
            Family::ImprovedQMLP => 4 * self.n_qubits * self.n_layers,
            Family::QCNN => 4 * self.schedule()?.len() + 15 * self.n_layers,
        })
    }

    fn schedule(&self) -> Result<Vec<(usize, usize)>> {
        let s = match &self.qcnn_schedule {
            Some(s) => s.clone(),
            None => {
                let mut s = Vec::new();
                let mut m = self.n_qubits;
                while m > 2 {
                    s.push((m, m / 2));
                    m /= 2;
                }
                s
            }
        };
        let mut m = self.n_qubits;
        for &(conv, pool) in &s {
            if conv != m {
                return Err(Error::Config(format!(
                    "qcnn stage expects {m} active qubits, schedule says {conv}"
                )));
            }
            if conv % 2 != 0 {
                return Err(Error::Config(format!(
                    "qcnn pooling needs an even qubit count, got {conv}"
                )));
            }
            if pool != conv / 2 {
                return Err(Error::Config(format!(
                    "qcnn pooling halves {conv} qubits, schedule says {pool}"
                )));
            }
            m = pool;
        }
        if m < 2 {
            return Err(Error::Config("qcnn dense layer needs two active qubits".into()));
        }
        Ok(s)
    }
}

/// Gate kinds of the QCNN dense block, in order.
pub const QCNN_DENSE_SEQUENCE: [GateKind; 15] = [
    GateKind::RZZ,
    GateKind::RXX,
    GateKind::RYY,
    GateKind::RZX,
    GateKind::RZX,
    GateKind::RXX,
    GateKind::RZX,
    GateKind::RZZ,
    GateKind::RYY,
    GateKind::RZZ,
    GateKind::RXX,
    GateKind::RZX,
    GateKind::RZX,
    GateKind::RZZ,
    GateKind::RYY,
];

struct Builder {
    circuit: CircuitSpec,
    next_slot: usize,
}

impl Builder {
    fn new(n_qubits: usize) -> Self {
        Builder {
            circuit: CircuitSpec::new(n_qubits, 0, 0),
            next_slot: 0,
        }
    }

    fn slot(&mut self) -> usize {
        self.next_slot += 1;
        self.next_slot - 1
    }

    fn push(&mut self, kind: GateKind, targets: &[usize], slots: &[usize]) -> Result<()> {
        self.circuit.gates.push(GateOp::slotted(kind, targets, slots)?);
        Ok(())
    }

    fn finish(mut self) -> Result<CircuitSpec> {
        self.circuit.n_trainable = self.next_slot;
        self.circuit.validate()?;
        Ok(self.circuit)
    }
}

/// Builds the ansatz with trainable slots `0..n_trainable` in gate order.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<CircuitSpec> {
    if spec.family == Family::QCNN {
        return build_qcnn(spec);
    }
    let n = spec.n_qubits;
    if n < 2 {
        return Err(Error::Config(format!("ring coupling needs 2 qubits, got {n}")));
    }
    if spec.n_layers == 0 {
        return Err(Error::Config("ansatz needs at least one layer".into()));
    }
    let mut b = Builder::new(n);
    for _ in 0..spec.n_layers {
        for q in 0..n {
            let s = [b.slot(), b.slot(), b.slot()];
            b.push(GateKind::U3, &[q], &s)?;
        }
        for q in 0..n {
            let pair = [q, (q + 1) % n];
            match spec.family {
                Family::GeneralQNN => b.push(GateKind::CNOT, &pair, &[])?,
                _ => {
                    let s = b.slot();
                    b.push(GateKind::CRX, &pair, &[s])?
                }
            }
        }
    }
    b.finish()
}

/// Builds a QCNN: conv/pool stages then `n_layers` dense blocks on the
/// surviving qubits. Pooling is a CRX from each discarded qubit onto its
/// retained neighbour; discarded qubits receive no further gates and are
/// dropped from `active_qubits`.
pub fn build_qcnn(spec: &AnsatzSpec) -> Result<CircuitSpec> {
    if spec.n_qubits < 2 {
        return Err(Error::Config(format!(
            "qcnn needs 2 qubits, got {}",
            spec.n_qubits
        )));
    }
    if spec.n_layers == 0 {
        return Err(Error::Config("ansatz needs at least one layer".into()));
    }
    let schedule = spec.schedule()?;
    let mut b = Builder::new(spec.n_qubits);
    let mut active: Vec<usize> = (0..spec.n_qubits).collect();
    for _ in &schedule {
        let m = active.len();
        let shared = [b.slot(), b.slot(), b.slot()];
        let n_pairs = if m > 2 { m } else { 1 };
        for i in 0..n_pairs {
            let pair = [active[i], active[(i + 1) % m]];
            b.push(GateKind::RXX, &pair, &shared[0..1])?;
            b.push(GateKind::RYY, &pair, &shared[1..2])?;
            b.push(GateKind::RZZ, &pair, &shared[2..3])?;
        }
        let pool = b.slot();
        let mut kept = Vec::with_capacity(m / 2);
        for pair in active.chunks(2) {
            b.push(GateKind::CRX, &[pair[1], pair[0]], &[pool])?;
            kept.push(pair[0]);
        }
        active = kept;
    }
    let m = active.len();
    for _ in 0..spec.n_layers {
        for (i, &kind) in QCNN_DENSE_SEQUENCE.iter().enumerate() {
            let s = b.slot();
            b.push(kind, &[active[i % m], active[(i + 1) % m]], &[s])?;
        }
    }
    b.circuit.active_qubits = active;
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_count_sweep() {
        for family in [Family::GeneralQNN, Family::ImprovedQMLP, Family::QCNN] {
            for n in [2, 4, 8] {
                for l in 1..=3 {
                    let spec = AnsatzSpec::new(family, n, l);
                    let c = build_ansatz(&spec).unwrap();
                    let closed = match family {
                        Family::GeneralQNN => 3 * n * l,
                        Family::ImprovedQMLP => 4 * n * l,
                        Family::QCNN => 4 * (n.trailing_zeros() as usize - 1) + 15 * l,
                    };
                    assert_eq!(c.n_trainable, closed, "{family:?} n={n} l={l}");
                    assert_eq!(spec.n_trainable().unwrap(), closed);
                }
            }
        }
    }

    #[test]
    fn qmlp_layer_structure() {
        let c = build_ansatz(&AnsatzSpec::new(Family::ImprovedQMLP, 4, 1)).unwrap();
        assert_eq!(c.n_trainable, 16);
        let kinds: Vec<GateKind> = c.gates.iter().map(|g| g.kind).collect();
        assert_eq!(&kinds[..4], &[GateKind::U3; 4]);
        assert_eq!(&kinds[4..], &[GateKind::CRX; 4]);
        let ring: Vec<Vec<usize>> = c.gates[4..].iter().map(|g| g.targets.clone()).collect();
        assert_eq!(ring, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]]);
    }

    #[test]
    fn general_qnn_two_layers() {
        let c = build_ansatz(&AnsatzSpec::new(Family::GeneralQNN, 4, 2)).unwrap();
        assert_eq!(c.n_trainable, 24);
        assert_eq!(c.gates.iter().filter(|g| g.kind == GateKind::CNOT).count(), 8);
    }

    #[test]
    fn too_few_qubits() {
        for f in [Family::GeneralQNN, Family::ImprovedQMLP, Family::QCNN] {
            assert!(matches!(
                build_ansatz(&AnsatzSpec::new(f, 1, 1)),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn qcnn_halves_and_freezes() {
        let c = build_qcnn(&AnsatzSpec::new(Family::QCNN, 8, 1)).unwrap();
        assert_eq!(c.active_qubits.len(), 2);
        let dense: Vec<GateKind> = c.gates[c.gates.len() - 15..].iter().map(|g| g.kind).collect();
        assert_eq!(dense, QCNN_DENSE_SEQUENCE.to_vec());
        // After each pool stage no later gate touches a discarded qubit.
        let mut discarded = Vec::new();
        for g in &c.gates {
            for t in &g.targets {
                assert!(!discarded.contains(t), "gate {g:?} touches a pooled qubit");
            }
            if g.kind == GateKind::CRX {
                discarded.push(g.targets[0]);
            }
        }
        for q in &c.active_qubits {
            assert!(!discarded.contains(q));
        }
    }

    #[test]
    fn qcnn_conv_shares_three_angles() {
        let c = build_qcnn(&AnsatzSpec::new(Family::QCNN, 4, 1)).unwrap();
        let conv: Vec<_> = c
            .gates
            .iter()
            .take_while(|g| g.kind != GateKind::CRX)
            .flat_map(|g| g.params.clone())
            .collect();
        assert_eq!(conv.len(), 12);
        let mut distinct = conv.clone();
        distinct.dedup();
        distinct.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        distinct.dedup();
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn qcnn_rejects_odd_pool() {
        let mut spec = AnsatzSpec::new(Family::QCNN, 6, 1);
        assert!(build_qcnn(&spec).is_err());
        spec.qcnn_schedule = Some(vec![(6, 3), (3, 1)]);
        assert!(matches!(build_qcnn(&spec), Err(Error::Config(_))));
        spec.qcnn_schedule = Some(vec![]);
        assert_eq!(build_qcnn(&spec).unwrap().active_qubits.len(), 6);
    }
}
