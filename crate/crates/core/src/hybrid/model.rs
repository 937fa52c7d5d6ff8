use core::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, DenseSpec};
use crate::prelude::*;
use crate::qnn::{AnsatzSpec, EncoderKind, EncoderSpec, Family, HeadKind, QuantumBlock};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    SingleCircuit,
    ForwardHierarchy,
    CrossedHybrid,
    ParallelHybrid,
}

impl Level {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Level::SingleCircuit),
            "forward" => Ok(Level::ForwardHierarchy),
            "crossed" => Ok(Level::CrossedHybrid),
            "parallel" => Ok(Level::ParallelHybrid),
            _ => Err(Error::Config(format!("unknown model level `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::SingleCircuit => "single",
            Level::ForwardHierarchy => "forward",
            Level::CrossedHybrid => "crossed",
            Level::ParallelHybrid => "parallel",
        }
    }
}

/// Classical front, quantum block and classical back in one of the four
/// topologies. Parameters live in a separate flat vector; see
/// [`parameter_layout`].
///
/// When there is no back stack the quantum block's head is read out
/// directly: output `k` is head entry `k` for `PauliZ` and `2p_k − 1` for
/// `Probability`, so both heads share the `[-1, 1]` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub level: Level,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub front: Vec<DenseSpec>,
    pub quantum: QuantumBlock,
    pub back: Vec<DenseSpec>,
    #[serde(default)]
    pub parallel_classical: Vec<DenseSpec>,
    pub seed: u64,
}

/// Builder inputs for [`HybridModel::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub level: Level,
    pub family: Family,
    pub head: HeadKind,
    pub encoder: EncoderKind,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub front_hidden: Vec<usize>,
    pub back_hidden: Vec<usize>,
    /// Raw input bounds, used when the circuit encodes the input directly.
    pub input_bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(level: Level, family: Family, head: HeadKind, input_bounds: Vec<(f64, f64)>, n_outputs: usize) -> Self {
        ModelConfig {
            level,
            family,
            head,
            encoder: EncoderKind::Angle,
            n_inputs: input_bounds.len(),
            n_outputs,
            n_qubits: 4,
            n_layers: 2,
            front_hidden: vec![16],
            back_hidden: vec![8],
            input_bounds,
            seed: 0,
        }
    }
}

fn stack(input: usize, hidden: &[usize], output: usize, last: Activation) -> Vec<DenseSpec> {
    let mut widths = vec![input];
    widths.extend_from_slice(hidden);
    widths.push(output);
    let n = widths.len() - 1;
    (0..n)
        .map(|i| {
            let act = if i + 1 == n { last } else { Activation::Tanh };
            DenseSpec::new(widths[i], widths[i + 1], act)
        })
        .collect()
}

impl HybridModel {
    pub fn build(cfg: &ModelConfig) -> Result<Self> {
        if cfg.input_bounds.len() != cfg.n_inputs {
            return Err(Error::shape("input bounds", cfg.n_inputs, cfg.input_bounds.len()));
        }
        let ansatz = AnsatzSpec::new(cfg.family, cfg.n_qubits, cfg.n_layers);
        let has_front = matches!(cfg.level, Level::ForwardHierarchy | Level::CrossedHybrid);
        let encoder = match (cfg.encoder, has_front) {
            (EncoderKind::Angle, false) => EncoderSpec::angle(cfg.input_bounds.clone()),
            (EncoderKind::Angle, true) => EncoderSpec::angle(vec![(-1.0, 1.0); cfg.n_qubits]),
            (EncoderKind::Amplitude, false) => EncoderSpec::amplitude(cfg.n_inputs),
            (EncoderKind::Amplitude, true) => EncoderSpec::amplitude(1 << cfg.n_qubits),
        };
        let quantum = QuantumBlock::new(encoder, ansatz, cfg.head)?;
        let front = if has_front {
            stack(cfg.n_inputs, &cfg.front_hidden, quantum.n_features(), Activation::Tanh)
        } else {
            Vec::new()
        };
        let back = if cfg.level == Level::CrossedHybrid {
            stack(quantum.output_width(), &cfg.back_hidden, cfg.n_outputs, Activation::Identity)
        } else {
            Vec::new()
        };
        let parallel_classical = if cfg.level == Level::ParallelHybrid {
            stack(cfg.n_inputs, &cfg.front_hidden, cfg.n_outputs, Activation::Identity)
        } else {
            Vec::new()
        };
        let model = HybridModel {
            level: cfg.level,
            n_inputs: cfg.n_inputs,
            n_outputs: cfg.n_outputs,
            front,
            quantum,
            back,
            parallel_classical,
            seed: cfg.seed,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks the level's structural rules and the dimension chain.
    pub fn validate(&self) -> Result<()> {
        self.quantum.validate()?;
        let (front, back, par) = (!self.front.is_empty(), !self.back.is_empty(), !self.parallel_classical.is_empty());
        let ok = match self.level {
            Level::SingleCircuit => !front && !back && !par,
            Level::ForwardHierarchy => front && !back && !par,
            Level::CrossedHybrid => front && back && !par,
            Level::ParallelHybrid => !front && !back && par,
        };
        if !ok {
            return Err(Error::Config(format!(
                "{} model has the wrong classical stacks",
                self.level.name()
            )));
        }
        chain(&self.front, self.n_inputs, self.quantum.n_features(), "front")?;
        if back {
            chain(&self.back, self.quantum.output_width(), self.n_outputs, "back")?;
        } else if self.n_outputs > self.quantum.output_width() || self.n_outputs == 0 {
            return Err(Error::Config(format!(
                "head gives {} values, model needs {}",
                self.quantum.output_width(),
                self.n_outputs
            )));
        }
        if par {
            chain(&self.parallel_classical, self.n_inputs, self.n_outputs, "parallel")?;
        }
        if !front && self.quantum.n_features() != self.n_inputs {
            return Err(Error::Config(format!(
                "circuit encodes {} features, input has {}",
                self.quantum.n_features(),
                self.n_inputs
            )));
        }
        Ok(())
    }

    pub fn layout(&self) -> ParameterLayout {
        parameter_layout(self)
    }

    pub fn n_params(&self) -> usize {
        self.layout().total
    }

    /// Initial parameters from `self.seed`: dense weights and biases uniform
    /// in `±√(1/fan_in)`, circuit angles uniform in `[0, 2π)`, aggregation
    /// weights `(0.5, 0.5)`.
    pub fn init_params(&self) -> Vec<f64> {
        let layout = self.layout();
        let mut p = vec![0.0; layout.total];
        let mut rng = rng::stream(self.seed, rng::label::INIT, 0);
        let dense = self
            .front
            .iter()
            .zip(&layout.front)
            .chain(self.back.iter().zip(&layout.back))
            .chain(self.parallel_classical.iter().zip(&layout.parallel_classical));
        for (spec, range) in dense {
            let bound = (1.0 / spec.cols as f64).sqrt();
            for v in &mut p[range.clone()] {
                *v = rng.random_range(-bound..bound);
            }
        }
        for v in &mut p[layout.quantum.clone()] {
            *v = rng.random_range(0.0..core::f64::consts::TAU);
        }
        if let Some(r) = &layout.aggregation {
            p[r.clone()].fill(0.5);
        }
        p
    }

    /// Evaluates the model; `head_noise`, when nonempty, is added to the
    /// head values before they are consumed.
    pub(crate) fn forward_traced(&self, x: &[f64], params: &[f64], head_noise: &[f64]) -> Result<Trace> {
        if x.len() != self.n_inputs {
            return Err(Error::shape("model input", self.n_inputs, x.len()));
        }
        let layout = self.layout();
        if params.len() != layout.total {
            return Err(Error::shape("model parameters", layout.total, params.len()));
        }
        let front = run_stack(&self.front, &layout.front, params, x);
        let features = front.last().expect("stack keeps its input");
        let mut head = self.quantum.forward(&params[layout.quantum.clone()], features)?;
        if !head_noise.is_empty() {
            for (h, n) in head.iter_mut().zip(head_noise) {
                *h += n;
            }
        }
        let back = run_stack(&self.back, &layout.back, params, &head);
        let quantum_out = if self.back.is_empty() {
            self.headless(&head)
        } else {
            back.last().expect("stack keeps its input").clone()
        };
        let parallel = run_stack(&self.parallel_classical, &layout.parallel_classical, params, x);
        let output = match &layout.aggregation {
            Some(r) => {
                let (a1, a2) = (params[r.start], params[r.start + 1]);
                let c = parallel.last().expect("stack keeps its input");
                c.iter().zip(&quantum_out).map(|(c, q)| a1 * c + a2 * q).collect()
            }
            None => quantum_out.clone(),
        };
        Ok(Trace {
            front,
            head,
            back,
            quantum_out,
            parallel,
            output,
        })
    }

    fn headless(&self, head: &[f64]) -> Vec<f64> {
        head[..self.n_outputs]
            .iter()
            .map(|&h| match self.quantum.head.kind {
                HeadKind::PauliZ => h,
                HeadKind::Probability => 2.0 * h - 1.0,
            })
            .collect()
    }

    /// `d(headless output)/d(head)` per entry.
    pub(crate) fn headless_slope(&self) -> f64 {
        match self.quantum.head.kind {
            HeadKind::PauliZ => 1.0,
            HeadKind::Probability => 2.0,
        }
    }

    pub fn forward(&self, x: &[f64], params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_traced(x, params, &[])?.output)
    }
}

fn chain(stack: &[DenseSpec], input: usize, output: usize, what: &str) -> Result<()> {
    if stack.is_empty() {
        return Ok(());
    }
    let mut w = input;
    for l in stack {
        if l.cols != w {
            return Err(Error::Config(format!(
                "{what} stack expects width {w}, layer takes {}",
                l.cols
            )));
        }
        w = l.rows;
    }
    if w != output {
        return Err(Error::Config(format!(
            "{what} stack ends at width {w}, expected {output}"
        )));
    }
    Ok(())
}

/// Activations of a dense stack; entry 0 is the input.
fn run_stack(stack: &[DenseSpec], ranges: &[Range<usize>], params: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
    let mut acts = Vec::with_capacity(stack.len() + 1);
    acts.push(x.to_vec());
    for (spec, r) in stack.iter().zip(ranges) {
        let y = spec.forward(&params[r.clone()], acts.last().expect("nonempty"));
        acts.push(y);
    }
    acts
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub front: Vec<Vec<f64>>,
    pub head: Vec<f64>,
    pub back: Vec<Vec<f64>>,
    pub quantum_out: Vec<f64>,
    pub parallel: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

/// Where each parameter block sits in the flat vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterLayout {
    pub front: Vec<Range<usize>>,
    pub quantum: Range<usize>,
    pub back: Vec<Range<usize>>,
    pub parallel_classical: Vec<Range<usize>>,
    pub aggregation: Option<Range<usize>>,
    pub total: usize,
}

/// Flattening order: front layers (weights row-major then biases), circuit
/// angles in gate order, back layers, parallel classical layers, then the
/// two aggregation weights.
pub fn parameter_layout(model: &HybridModel) -> ParameterLayout {
    let mut at = 0;
    let mut take = |n: usize| {
        at += n;
        at - n..at
    };
    let front = model.front.iter().map(|l| take(l.n_params())).collect();
    let quantum = take(model.quantum.n_trainable());
    let back = model.back.iter().map(|l| take(l.n_params())).collect();
    let parallel_classical = model.parallel_classical.iter().map(|l| take(l.n_params())).collect();
    let aggregation = (model.level == Level::ParallelHybrid).then(|| take(2));
    ParameterLayout {
        front,
        quantum,
        back,
        parallel_classical,
        aggregation,
        total: at,
    }
}

/// Evaluates `model` at `x`.
pub fn model_forward(model: &HybridModel, x: &[f64], params: &[f64]) -> Result<Vec<f64>> {
    model.forward(x, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(level: Level) -> ModelConfig {
        ModelConfig::new(level, Family::ImprovedQMLP, HeadKind::PauliZ, vec![(0.0, 1.0); 2], 1)
    }

    #[test]
    fn single_qmlp_slot_count() {
        let mut c = cfg(Level::SingleCircuit);
        c.n_layers = 1;
        c.input_bounds = vec![(0.0, 1.0); 4];
        c.n_inputs = 4;
        let m = HybridModel::build(&c).unwrap();
        assert_eq!(m.n_params(), 16);
    }

    #[test]
    fn crossed_slot_count() {
        let mut m = HybridModel::build(&{
            let mut c = cfg(Level::CrossedHybrid);
            c.n_layers = 1;
            c
        })
        .unwrap();
        m.front = vec![DenseSpec::new(2, 8, Activation::Identity), DenseSpec::new(8, 4, Activation::Tanh)];
        m.back = vec![DenseSpec::new(4, 1, Activation::Identity)];
        m.validate().unwrap();
        let l = m.layout();
        assert_eq!(l.front, vec![0..24, 24..60]);
        // Single front layer form: 2→8 is 16+8, quantum 16, back 4→1 is 4+1.
        m.front = vec![DenseSpec::new(2, 8, Activation::Identity)];
        m.quantum.encoder = EncoderSpec::angle(vec![(-1.0, 1.0); 8]);
        m.quantum = QuantumBlock::new(m.quantum.encoder.clone(), m.quantum.ansatz.clone(), HeadKind::PauliZ).unwrap();
        m.validate().unwrap();
        assert_eq!(m.n_params(), 16 + 8 + 16 + 4 + 1);
    }

    #[test]
    fn zero_params_read_all_ones() {
        let mut c = cfg(Level::SingleCircuit);
        c.n_outputs = 4;
        let m = HybridModel::build(&c).unwrap();
        let y = m.forward(&[0.0, 0.0], &vec![0.0; m.n_params()]).unwrap();
        assert_eq!(y, vec![1.0; 4]);
    }

    #[test]
    fn level_rules() {
        let mut m = HybridModel::build(&cfg(Level::CrossedHybrid)).unwrap();
        m.back.clear();
        assert!(matches!(m.validate(), Err(Error::Config(_))));
        m.level = Level::ForwardHierarchy;
        m.validate().unwrap();
        m.front.clear();
        assert!(m.validate().is_err());
    }

    #[test]
    fn init_is_seeded() {
        let m = HybridModel::build(&cfg(Level::ParallelHybrid)).unwrap();
        let a = m.init_params();
        assert_eq!(a, m.init_params());
        let agg = m.layout().aggregation.unwrap();
        assert_eq!(&a[agg], &[0.5, 0.5]);
        let q = &a[m.layout().quantum];
        assert!(q.iter().all(|v| (0.0..core::f64::consts::TAU).contains(v)));
    }
}
