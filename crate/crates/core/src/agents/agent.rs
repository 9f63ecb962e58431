use log::warn;
use nalgebra::DVector;
use rand::Rng;

use super::features::{FeatureExtractor, FeatureKind};
use super::network::{Evaluation, QNetwork};
use super::replay::ReplayBuffer;
use super::{argmax, td_target, AgentConfig, Transition, Variant};
use crate::envs::ActionMapping;
use crate::error::{Error, Result};
use crate::ring::{RingAttractor, RingConfig, CONSTANT_ACTION_SIGMA};
use crate::ring_rnn::{HiddenState, RingRnnLayer, RnnConfig};
use crate::uq::{action_stats, blr_update, BlrPosterior, BlrPrior};

/// A value-based learner with one of the [`Variant`] behaviour policies.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    online: QNetwork,
    target: QNetwork,
    ring: Option<RingAttractor>,
    mapping: ActionMapping,
    posterior: Option<BlrPosterior>,
    replay: ReplayBuffer,
    steps: usize,
    hidden: Option<HiddenState>,
    pending_h_prev: Option<HiddenState>,
    fallbacks: usize,
}

impl Agent {
    /// Build an agent for observations of length `obs_len` and `n_actions`
    /// actions. `rng` seeds the weights and, for the random-placement
    /// ablation, the action permutation (fixed for the agent's lifetime).
    pub fn new<R: Rng + ?Sized>(
        config: AgentConfig,
        ring_config: &RingConfig,
        rnn_config: &RnnConfig,
        obs_len: usize,
        n_actions: usize,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let features = match config.features {
            FeatureKind::Tabular => FeatureExtractor::tabular(obs_len),
            FeatureKind::Perceptron => {
                FeatureExtractor::perceptron(obs_len, config.hidden_width, rng)?
            }
        };
        let variant = config.variant;
        let online = if variant.is_recurrent() {
            let layer = RingRnnLayer::from_config(
                features.output_dim(),
                n_actions,
                variant == Variant::RnnRing,
                rnn_config,
                rng,
            )?;
            QNetwork::rnn(features, layer)?
        } else {
            QNetwork::linear(features, n_actions)
        };
        let ring = if variant.uses_ring_attractor() {
            if n_actions > ring_config.n_excitatory {
                return Err(Error::Config(format!(
                    "{n_actions} actions do not fit on a ring of {} neurons",
                    ring_config.n_excitatory
                )));
            }
            Some(RingAttractor::new(ring_config.clone())?)
        } else {
            None
        };
        let mut mapping = ActionMapping::uniform(n_actions);
        if variant == Variant::RingRandomMap {
            mapping = mapping.permute(rng);
        }
        let posterior = if variant == Variant::RingUA {
            Some(BlrPosterior::from_prior(self_prior(&config, &online), n_actions)?)
        } else {
            None
        };
        let hidden = online.is_recurrent().then(|| HiddenState::zeros(n_actions));
        Ok(Self {
            replay: ReplayBuffer::new(config.replay_capacity),
            target: online.clone(),
            online,
            ring,
            mapping,
            posterior,
            config,
            steps: 0,
            hidden,
            pending_h_prev: None,
            fallbacks: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub fn mapping(&self) -> &ActionMapping {
        &self.mapping
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn online_mut(&mut self) -> &mut QNetwork {
        &mut self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    /// The attractor used for action selection, if this variant has one.
    pub fn ring(&self) -> Option<&RingAttractor> {
        self.ring.as_ref()
    }

    pub fn posterior(&self) -> Option<&BlrPosterior> {
        self.posterior.as_ref()
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// How often ring decoding found no winner and fell back to argmax.
    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    pub fn hidden(&self) -> Option<&HiddenState> {
        self.hidden.as_ref()
    }

    /// Clear the recurrent state at an episode boundary.
    pub fn begin_episode(&mut self) {
        if let Some(h) = self.hidden.as_mut() {
            h.h.fill(0.0);
        }
        self.pending_h_prev = None;
    }

    /// Online action values of a state under the current recurrent state.
    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        Ok(self.online.evaluate(state, self.hidden.as_ref())?.q)
    }

    fn ring_choice(&mut self, values: &[f64], sigmas: &[f64]) -> Result<usize> {
        let ring = self.ring.as_ref().expect("ring variant has a ring");
        match ring.select(values, sigmas, &self.mapping) {
            Ok(decision) => Ok(decision.action),
            Err(Error::NoWinner) => {
                self.fallbacks += 1;
                warn!("ring produced no winner; falling back to argmax");
                Ok(argmax(values))
            }
            Err(e) => Err(e),
        }
    }

    /// Pick an action for `state`, advancing the recurrent state if any.
    pub fn select_action<R: Rng + ?Sized>(&mut self, state: &[f64], rng: &mut R) -> Result<usize> {
        let n_actions = self.online.n_actions();
        match self.config.variant {
            Variant::Baseline => {
                let eps = self.config.epsilon(self.steps);
                if rng.random::<f64>() < eps {
                    Ok(rng.random_range(0..n_actions))
                } else {
                    Ok(argmax(&self.online.evaluate(state, None)?.q))
                }
            }
            Variant::Ring | Variant::RingRandomMap => {
                let q = self.online.evaluate(state, None)?.q;
                self.ring_choice(&q, &vec![CONSTANT_ACTION_SIGMA; n_actions])
            }
            Variant::RingUA => {
                let Evaluation { phi, .. } = self.online.evaluate(state, None)?;
                let means = (0..n_actions)
                    .map(|a| {
                        DVector::from_column_slice(
                            self.online.linear_weights(a).expect("linear head"),
                        )
                    })
                    .collect();
                let posterior = self.posterior.as_mut().expect("posterior present");
                posterior.set_means(means)?;
                let stats = action_stats(posterior, &phi, self.config.thompson_i, rng)?;
                self.ring_choice(&stats.mu, &stats.sigma)
            }
            Variant::RnnRing | Variant::RnnNoKernel => {
                let eval = self.online.evaluate(state, self.hidden.as_ref())?;
                self.pending_h_prev = self.hidden.replace(eval.hidden.expect("recurrent head"));
                if self.config.recurrent_epsilon && rng.random::<f64>() < self.config.epsilon(self.steps) {
                    Ok(rng.random_range(0..n_actions))
                } else {
                    Ok(argmax(&eval.q))
                }
            }
        }
    }

    /// Record the outcome of the last selected action.
    pub fn observe(&mut self, s: Vec<f64>, a: usize, r: f64, s_next: Vec<f64>, done: bool) {
        let h_prev = self.pending_h_prev.take();
        self.replay.push(Transition {
            s,
            a,
            r,
            s_next,
            done,
            h_prev,
        });
        self.steps += 1;
    }

    /// Regression target of a transition under the target network.
    pub fn target_value(&self, t: &Transition) -> Result<f64> {
        if t.done {
            return Ok(t.r);
        }
        let next_q = if self.target.is_recurrent() {
            let h = self.target.evaluate(&t.s, t.h_prev.as_ref())?.hidden;
            self.target.evaluate(&t.s_next, h.as_ref())?.q
        } else {
            self.target.evaluate(&t.s_next, None)?.q
        };
        Ok(td_target(t.r, t.done, &next_q, self.config.gamma))
    }

    /// One SGD step on the mean squared TD error of `batch`.
    ///
    /// A non-finite loss leaves every parameter untouched.
    pub fn train_step(&mut self, batch: &[Transition]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty training batch".into()));
        }
        let scale = 2.0 / batch.len() as f64;
        let mut grads = self.online.zero_grads();
        let mut loss = 0.0;
        for t in batch {
            let y = self.target_value(t)?;
            let q = self.online.accumulate_action_grad(
                &t.s,
                t.h_prev.as_ref(),
                t.a,
                |q| scale * (q - y),
                &mut grads,
            )?;
            loss += (q - y) * (q - y);
        }
        loss /= batch.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("training loss is {loss}")));
        }
        self.online
            .apply_gradients(&grads, self.config.effective_learning_rate());
        Ok(loss)
    }

    /// Copy online parameters into the target network.
    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    /// Recompute the posterior over output weights from the whole replay buffer.
    pub fn refresh_posterior(&mut self) -> Result<()> {
        if self.posterior.is_none() {
            return Ok(());
        }
        let mut rows = Vec::with_capacity(self.replay.len());
        let mut targets = Vec::with_capacity(self.replay.len());
        for t in self.replay.iter() {
            rows.push((t.a, self.online.features.forward(&t.s)?));
            targets.push(self.target_value(t)?);
        }
        let prior = self_prior(&self.config, &self.online);
        self.posterior = Some(blr_update(prior, self.online.n_actions(), &rows, &targets)?);
        Ok(())
    }

    /// Post-step bookkeeping: train on a replay batch once enough data is
    /// stored, then sync the target and refresh the posterior on schedule.
    pub fn learn<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<f64>> {
        let mut loss = None;
        if self.replay.len() >= self.config.batch_size {
            let batch = self.replay.sample(self.config.batch_size, rng);
            loss = Some(self.train_step(&batch)?);
        }
        if self.steps % self.config.target_sync_interval == 0 {
            self.sync_target();
        }
        if self.posterior.is_some() && self.steps % self.config.blr_update_interval == 0 {
            self.refresh_posterior()?;
        }
        Ok(loss)
    }
}

fn self_prior(config: &AgentConfig, network: &QNetwork) -> BlrPrior {
    BlrPrior {
        weight_dim: network.features.output_dim(),
        prior_variance: config.prior_variance,
        noise_variance: config.noise_variance,
    }
}
