use crate::prelude::*;
use crate::{Error, Result};

/// Residual of a governing equation at one sample.
pub trait PhysicsResidual: Sync {
    /// Returns `r(x, y)` and `∂r/∂y`.
    fn residual(&self, x: &[f64], y: &[f64]) -> (f64, Vec<f64>);
}

/// `data_weight·MSE + physics_weight·mean(r²)`.
#[derive(Clone, Copy)]
pub struct LossSpec<'a> {
    pub data_weight: f64,
    pub physics_weight: f64,
    pub physics: Option<&'a dyn PhysicsResidual>,
}

impl Default for LossSpec<'_> {
    fn default() -> Self {
        LossSpec {
            data_weight: 1.0,
            physics_weight: 0.0,
            physics: None,
        }
    }
}

impl core::fmt::Debug for LossSpec<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LossSpec")
            .field("data_weight", &self.data_weight)
            .field("physics_weight", &self.physics_weight)
            .field("physics", &self.physics.is_some())
            .finish()
    }
}

impl LossSpec<'_> {
    fn physics(&self) -> Option<&dyn PhysicsResidual> {
        if self.physics_weight == 0.0 {
            None
        } else {
            self.physics
        }
    }

    /// Contribution of one sample to the batch loss and `∂L/∂y`, for a batch
    /// of `n` samples.
    pub(crate) fn sample(&self, x: &[f64], y: &[f64], t: &[f64], n: usize) -> (f64, Vec<f64>) {
        let scale = 1.0 / (n * y.len()) as f64;
        let mut loss = 0.0;
        let mut gy = vec![0.0; y.len()];
        for ((g, yi), ti) in gy.iter_mut().zip(y).zip(t) {
            let d = yi - ti;
            loss += self.data_weight * d * d * scale;
            *g = 2.0 * self.data_weight * d * scale;
        }
        if let Some(p) = self.physics() {
            let (r, dr) = p.residual(x, y);
            loss += self.physics_weight * r * r / n as f64;
            for (g, d) in gy.iter_mut().zip(dr) {
                *g += 2.0 * self.physics_weight * r * d / n as f64;
            }
        }
        (loss, gy)
    }
}

/// Mean over samples and components of the squared difference.
pub fn mse_loss(pred: &[Vec<f64>], target: &[Vec<f64>]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::EmptyLoss);
    }
    if pred.len() != target.len() {
        return Err(Error::shape("loss targets", pred.len(), target.len()));
    }
    let mut sum = 0.0;
    let mut count = 0;
    for (p, t) in pred.iter().zip(target) {
        if p.len() != t.len() {
            return Err(Error::shape("loss target width", p.len(), t.len()));
        }
        sum += p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        count += p.len();
    }
    if count == 0 {
        return Err(Error::EmptyLoss);
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[vec![0.5]], &[vec![0.5]]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[vec![1.0]], &[vec![0.0]]).unwrap(), 1.0);
        assert_eq!(mse_loss(&[vec![1.0, 1.0]], &[vec![0.0, 2.0]]).unwrap(), 1.0);
        assert_eq!(mse_loss(&[], &[]), Err(Error::EmptyLoss));
    }

    struct Sum;
    impl PhysicsResidual for Sum {
        fn residual(&self, _x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
            (y.iter().sum::<f64>() - 1.0, vec![1.0; y.len()])
        }
    }

    #[test]
    fn sample_loss_adds_physics() {
        let spec = LossSpec {
            data_weight: 1.0,
            physics_weight: 0.5,
            physics: Some(&Sum),
        };
        let (l, g) = spec.sample(&[], &[1.0, 2.0], &[0.0, 0.0], 2);
        // data: (1+4)/4, physics: 0.5·4/2
        assert!((l - (1.25 + 1.0)).abs() < 1e-15);
        assert!((g[0] - (0.5 + 1.0)).abs() < 1e-15);
        let zero = LossSpec { physics_weight: 0.0, ..spec };
        assert_eq!(zero.sample(&[], &[1.0, 2.0], &[0.0, 0.0], 2).0, 1.25);
    }
}
