//! Online/target value network: a feature map followed by an output head.

use serde::{Deserialize, Serialize};

use super::features::{FeatureExtractor, FeatureGrads};
use crate::error::{invalid, Error, Result};
use crate::ring_rnn::{HiddenState, RingRnnLayer, RnnGrads};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Head {
    /// `Q(s, a) = Φ(s)ᵀ w_a`; `weights` is row-major `A × F`.
    Linear { n_actions: usize, dim: usize, weights: Vec<f64> },
    /// Circular-connectivity recurrent layer, one unit per action.
    Rnn(RingRnnLayer),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    pub features: FeatureExtractor,
    pub head: Head,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeadGrads {
    Linear(Vec<f64>),
    Rnn(RnnGrads),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrads {
    pub features: FeatureGrads,
    pub head: HeadGrads,
}

/// Everything a forward pass produced for one state.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub phi: Vec<f64>,
    pub q: Vec<f64>,
    pub hidden: Option<HiddenState>,
}

impl QNetwork {
    pub fn linear(features: FeatureExtractor, n_actions: usize) -> Self {
        let dim = features.output_dim();
        Self {
            features,
            head: Head::Linear {
                n_actions,
                dim,
                weights: vec![0.0; n_actions * dim],
            },
        }
    }

    pub fn rnn(features: FeatureExtractor, layer: RingRnnLayer) -> Result<Self> {
        if layer.m_in() != features.output_dim() {
            return Err(invalid("recurrent layer input does not match the feature width"));
        }
        Ok(Self {
            features,
            head: Head::Rnn(layer),
        })
    }

    pub fn n_actions(&self) -> usize {
        match &self.head {
            Head::Linear { n_actions, .. } => *n_actions,
            Head::Rnn(layer) => layer.n_hidden(),
        }
    }

    pub fn is_recurrent(&self) -> bool {
        matches!(self.head, Head::Rnn(_))
    }

    /// Weights of action `a` in a linear head.
    pub fn linear_weights(&self, a: usize) -> Option<&[f64]> {
        match &self.head {
            Head::Linear { dim, weights, .. } => Some(&weights[a * dim..(a + 1) * dim]),
            Head::Rnn(_) => None,
        }
    }

    fn zero_hidden(&self) -> Option<HiddenState> {
        match &self.head {
            Head::Linear { .. } => None,
            Head::Rnn(layer) => Some(HiddenState::zeros(layer.n_hidden())),
        }
    }

    /// Evaluate a state; recurrent heads start from `hidden` (zero if absent).
    pub fn evaluate(&self, x: &[f64], hidden: Option<&HiddenState>) -> Result<Evaluation> {
        let phi = self.features.forward(x)?;
        match &self.head {
            Head::Linear { n_actions, dim, weights } => {
                let q = (0..*n_actions)
                    .map(|a| {
                        weights[a * dim..(a + 1) * dim]
                            .iter()
                            .zip(&phi)
                            .map(|(w, p)| w * p)
                            .sum()
                    })
                    .collect();
                Ok(Evaluation { phi, q, hidden: None })
            }
            Head::Rnn(layer) => {
                let zero;
                let h_prev = match hidden {
                    Some(h) => h,
                    None => {
                        zero = HiddenState::zeros(layer.n_hidden());
                        &zero
                    }
                };
                let (q, h) = layer.forward(&phi, h_prev)?;
                Ok(Evaluation { phi, q, hidden: Some(h) })
            }
        }
    }

    pub fn rnn_layer(&self) -> Option<&RingRnnLayer> {
        match &self.head {
            Head::Rnn(layer) => Some(layer),
            Head::Linear { .. } => None,
        }
    }

    pub fn zero_grads(&self) -> NetworkGrads {
        NetworkGrads {
            features: self.features.zero_grads(),
            head: match &self.head {
                Head::Linear { weights, .. } => HeadGrads::Linear(vec![0.0; weights.len()]),
                Head::Rnn(layer) => HeadGrads::Rnn(RnnGrads::zeros(layer.m_in(), layer.n_hidden())),
            },
        }
    }

    /// Accumulate `scale · ∂Q(x, a)/∂θ` into `grads` and return `Q(x, a)`.
    pub fn accumulate_action_grad(
        &self,
        x: &[f64],
        hidden: Option<&HiddenState>,
        action: usize,
        scale_of: impl FnOnce(f64) -> f64,
        grads: &mut NetworkGrads,
    ) -> Result<f64> {
        if action >= self.n_actions() {
            return Err(invalid(format!("action {action} out of range")));
        }
        let phi = self.features.forward(x)?;
        let (q, scale, d_phi) = match (&self.head, &mut grads.head) {
            (Head::Linear { dim, weights, .. }, HeadGrads::Linear(gw)) => {
                let w = &weights[action * dim..(action + 1) * dim];
                let q: f64 = w.iter().zip(&phi).map(|(w, p)| w * p).sum();
                let scale = scale_of(q);
                for (g, p) in gw[action * dim..(action + 1) * dim].iter_mut().zip(&phi) {
                    *g += scale * p;
                }
                (q, scale, w.iter().map(|w| scale * w).collect::<Vec<_>>())
            }
            (Head::Rnn(layer), HeadGrads::Rnn(gr)) => {
                let zero = self.zero_hidden().expect("recurrent head");
                let h_prev = hidden.unwrap_or(&zero);
                let cache = layer.forward_cached(&phi, h_prev)?;
                let q = cache.q[action];
                let scale = scale_of(q);
                let mut upstream = vec![0.0; layer.n_hidden()];
                upstream[action] = scale;
                let g = layer.backward(&phi, h_prev, &cache, &upstream)?;
                gr.add_scaled(&g, 1.0);
                (q, scale, g.phi)
            }
            _ => return Err(Error::State("gradient buffer does not match the head".into())),
        };
        if scale != 0.0 {
            let fg = self.features.backward(x, &phi, &d_phi);
            grads.features.add_assign(&fg);
        }
        Ok(q)
    }

    pub fn apply_gradients(&mut self, grads: &NetworkGrads, learning_rate: f64) {
        self.features.apply_gradients(&grads.features, learning_rate);
        match (&mut self.head, &grads.head) {
            (Head::Linear { weights, .. }, HeadGrads::Linear(g)) => {
                for (w, g) in weights.iter_mut().zip(g) {
                    *w -= learning_rate * g;
                }
            }
            (Head::Rnn(layer), HeadGrads::Rnn(g)) => layer.apply_gradients(g, learning_rate),
            _ => {}
        }
    }
}
