//! Feature maps `Φ_θ : ℝ^S → ℝ^F` feeding the output heads.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Identity on a one-hot state encoding; no parameters.
    Tabular,
    /// One tanh hidden layer.
    Perceptron,
}

/// Gradients of the perceptron parameters (empty for tabular features).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureExtractor {
    Tabular {
        dim: usize,
    },
    Perceptron {
        input_dim: usize,
        width: usize,
        /// Row-major `width × input_dim`.
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
}

impl FeatureExtractor {
    pub fn tabular(dim: usize) -> Self {
        Self::Tabular { dim }
    }

    /// Perceptron with weights uniform in `±1/sqrt(input_dim)` and zero bias.
    pub fn perceptron<R: Rng + ?Sized>(input_dim: usize, width: usize, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || width == 0 {
            return Err(invalid("perceptron sizes must be positive"));
        }
        let bound = 1.0 / (input_dim as f64).sqrt();
        Ok(Self::Perceptron {
            input_dim,
            width,
            weights: (0..width * input_dim)
                .map(|_| rng.random_range(-bound..bound))
                .collect(),
            bias: vec![0.0; width],
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Tabular { dim } => *dim,
            Self::Perceptron { input_dim, .. } => *input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Self::Tabular { dim } => *dim,
            Self::Perceptron { width, .. } => *width,
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(invalid(format!(
                "state of length {} for a feature map expecting {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(match self {
            Self::Tabular { .. } => x.to_vec(),
            Self::Perceptron {
                input_dim,
                weights,
                bias,
                ..
            } => bias
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let row = &weights[j * input_dim..(j + 1) * input_dim];
                    (b + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()).tanh()
                })
                .collect(),
        })
    }

    /// Parameter gradients given `d_phi = ∂L/∂Φ(x)` and the forward output `phi`.
    pub fn backward(&self, x: &[f64], phi: &[f64], d_phi: &[f64]) -> FeatureGrads {
        match self {
            Self::Tabular { .. } => FeatureGrads {
                weights: Vec::new(),
                bias: Vec::new(),
            },
            Self::Perceptron { input_dim, width, .. } => {
                let mut weights = vec![0.0; width * input_dim];
                let mut bias = vec![0.0; *width];
                for j in 0..*width {
                    let d_pre = d_phi[j] * (1.0 - phi[j] * phi[j]);
                    bias[j] = d_pre;
                    if d_pre == 0.0 {
                        continue;
                    }
                    for (i, &xi) in x.iter().enumerate() {
                        weights[j * input_dim + i] = d_pre * xi;
                    }
                }
                FeatureGrads { weights, bias }
            }
        }
    }

    pub fn zero_grads(&self) -> FeatureGrads {
        match self {
            Self::Tabular { .. } => FeatureGrads {
                weights: Vec::new(),
                bias: Vec::new(),
            },
            Self::Perceptron { input_dim, width, .. } => FeatureGrads {
                weights: vec![0.0; width * input_dim],
                bias: vec![0.0; *width],
            },
        }
    }

    pub fn apply_gradients(&mut self, grads: &FeatureGrads, learning_rate: f64) {
        if let Self::Perceptron { weights, bias, .. } = self {
            for (w, g) in weights.iter_mut().zip(&grads.weights) {
                *w -= learning_rate * g;
            }
            for (b, g) in bias.iter_mut().zip(&grads.bias) {
                *b -= learning_rate * g;
            }
        }
    }
}

impl FeatureGrads {
    pub fn add_assign(&mut self, other: &FeatureGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += b;
        }
    }
}
