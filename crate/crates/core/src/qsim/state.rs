use super::gate::{GateMatrix, Mat2, Mat4};
use super::C64;
use crate::prelude::*;
use crate::{Error, Result};

/// Largest supported register (2^20 amplitudes).
pub const MAX_QUBITS: usize = 20;

/// Pure state of an `n_qubits` register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(n_qubits));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the
    /// vector must already be normalized to within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(n_qubits));
        }
        let state = StateVector { n_qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies a gate matrix at `targets` (already validated).
    pub(crate) fn apply_matrix(&mut self, m: &GateMatrix, targets: &[usize]) {
        match m {
            GateMatrix::One(m) => self.apply_one(m, targets[0]),
            GateMatrix::Two(m) => self.apply_two(m, targets[0], targets[1]),
        }
    }

    fn apply_one(&mut self, m: &Mat2, target: usize) {
        let stride = 1usize << target;
        let len = self.amps.len();
        let mut block = 0;
        while block < len {
            for i0 in block..block + stride {
                let i1 = i0 | stride;
                let (a0, a1) = (self.amps[i0], self.amps[i1]);
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            block += stride << 1;
        }
    }

    fn apply_two(&mut self, m: &Mat4, hi: usize, lo: usize) {
        let (bh, bl) = (1usize << hi, 1usize << lo);
        let (p0, p1) = if hi < lo { (hi, lo) } else { (lo, hi) };
        for k in 0..self.amps.len() >> 2 {
            let base = insert_zero_bit(insert_zero_bit(k, p0), p1);
            let idx = [base, base | bl, base | bh, base | bh | bl];
            let a = idx.map(|i| self.amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = m[r][0] * a[0] + m[r][1] * a[1] + m[r][2] * a[2] + m[r][3] * a[3];
            }
        }
    }

    /// Marginal distribution over `qubits`; outcome bit m is `qubits[m]`.
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut outcome = 0;
            for (m, &q) in qubits.iter().enumerate() {
                outcome |= ((i >> q) & 1) << m;
            }
            out[outcome] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Multiplies amplitude `b` by `d[b]`. The result is generally not
    /// normalized; used only for adjoint products.
    pub(crate) fn scale_diagonal(&mut self, d: &[f64]) {
        for (a, &w) in self.amps.iter_mut().zip(d) {
            *a *= w;
        }
    }
}

fn insert_zero_bit(k: usize, pos: usize) -> usize {
    let low = k & ((1 << pos) - 1);
    ((k >> pos) << (pos + 1)) | low
}

/// `⟨Z_qubit⟩`.
pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.check_qubit(qubit)?;
    let mask = 1usize << qubit;
    Ok(state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum())
}

/// `|amp_b|²` for every basis state `b`.
pub fn measure_probabilities(state: &StateVector) -> Vec<f64> {
    state.amps.iter().map(|a| a.norm_sqr()).collect()
}
