use serde::{Deserialize, Serialize};

use super::{RingConfig, RingKernels, NEGLIGIBLE};
use crate::error::{ensure_finite, invalid, Error, Result};

/// Excitatory activations `v` and the inhibitory activation `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingState {
    pub v: Vec<f64>,
    pub u: f64,
}

impl RingState {
    pub fn zeros(n: usize) -> Self {
        Self {
            v: vec![0.0; n],
            u: 0.0,
        }
    }
}

/// Result of iterating the dynamics towards a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct Settled {
    pub state: RingState,
    pub steps: usize,
    pub converged: bool,
}

#[inline]
fn activation(x: f64, h: f64) -> f64 {
    (x + h).max(0.0)
}

fn check_dims(state: &RingState, input: &[f64], kernels: &RingKernels, config: &RingConfig) -> Result<()> {
    let n = config.n_excitatory;
    if state.v.len() != n || input.len() != n || kernels.n != n {
        return Err(invalid(format!(
            "dimension mismatch: state {}, input {}, kernels {}, ring {n}",
            state.v.len(),
            input.len(),
            kernels.n
        )));
    }
    Ok(())
}

/// Synchronous Euler step written into `next`; returns `max |Δv|`.
///
/// The recurrent sum skips neurons with exactly zero activity and weights
/// beyond the kernel's reach. Adding `w · 0` never changes a floating-point
/// sum, so the result is bit-identical to the dense product. Activities that
/// fall below [`NEGLIGIBLE`] are stored as zero.
fn step_into(
    state: &RingState,
    input: &[f64],
    kernels: &RingKernels,
    config: &RingConfig,
    recurrent: &mut [f64],
    next: &mut RingState,
) -> f64 {
    let rate = config.dt_ratio;
    let h = config.threshold_h;
    let size = state.v.len();
    let span = 2 * kernels.reach + 1;
    recurrent.fill(0.0);
    let mut to_inhibitory = 0.0;
    for (m, &vm) in state.v.iter().enumerate() {
        to_inhibitory += kernels.w_ei[m] * vm;
        if vm == 0.0 {
            continue;
        }
        let row = kernels.ee_row(m);
        if span >= size {
            axpy(recurrent, row, vm);
        } else {
            let start = (m + size - kernels.reach) % size;
            let end = (start + span).min(size);
            axpy(&mut recurrent[start..end], &row[start..end], vm);
            let wrapped = span - (end - start);
            axpy(&mut recurrent[..wrapped], &row[..wrapped], vm);
        }
    }
    let mut max_delta: f64 = 0.0;
    let mut finite = true;
    for n in 0..size {
        let drive = recurrent[n] + input[n] + kernels.w_ie[n] * state.u;
        let v = flush(state.v[n] + rate * (activation(drive, h) - state.v[n]));
        finite &= v.is_finite();
        max_delta = max_delta.max((v - state.v[n]).abs());
        next.v[n] = v;
    }
    let inhibitory_drive = kernels.w_ii * state.u + to_inhibitory;
    next.u = flush(state.u + rate * (activation(inhibitory_drive, h) - state.u));
    if finite && next.u.is_finite() {
        max_delta
    } else {
        f64::NAN
    }
}

#[inline]
fn axpy(acc: &mut [f64], w: &[f64], scale: f64) {
    for (a, &w) in acc.iter_mut().zip(w) {
        *a += w * scale;
    }
}

#[inline]
fn flush(x: f64) -> f64 {
    if x.abs() < NEGLIGIBLE {
        0.0
    } else {
        x
    }
}

fn ensure_state_finite(state: &RingState, step: usize) -> Result<()> {
    if !state.u.is_finite() {
        return Err(Error::Numerical(format!(
            "inhibitory activation diverged to {} at step {step}",
            state.u
        )));
    }
    ensure_finite(&state.v, &format!("v (step {step})"))
}

/// One explicit Euler step of the excitatory and inhibitory dynamics.
pub fn step_dynamics(
    state: &RingState,
    input: &[f64],
    kernels: &RingKernels,
    config: &RingConfig,
) -> Result<RingState> {
    check_dims(state, input, kernels, config)?;
    ensure_finite(input, "input")?;
    ensure_state_finite(state, 0)?;
    let mut next = state.clone();
    let mut recurrent = vec![0.0; config.n_excitatory];
    step_into(state, input, kernels, config, &mut recurrent, &mut next);
    ensure_state_finite(&next, 1)?;
    Ok(next)
}

/// Step until `max |Δv|` drops below the tolerance or the step budget runs out.
pub fn settle(
    state: &RingState,
    input: &[f64],
    kernels: &RingKernels,
    config: &RingConfig,
) -> Result<Settled> {
    check_dims(state, input, kernels, config)?;
    ensure_finite(input, "input")?;
    ensure_state_finite(state, 0)?;
    let mut current = state.clone();
    let mut next = state.clone();
    let mut recurrent = vec![0.0; config.n_excitatory];
    for step in 1..=config.settle_max_steps {
        let delta = step_into(&current, input, kernels, config, &mut recurrent, &mut next);
        std::mem::swap(&mut current, &mut next);
        if delta.is_nan() {
            ensure_state_finite(&current, step)?;
        }
        if delta < config.settle_tolerance {
            return Ok(Settled {
                state: current,
                steps: step,
                converged: true,
            });
        }
    }
    ensure_state_finite(&current, config.settle_max_steps)?;
    Ok(Settled {
        state: current,
        steps: config.settle_max_steps,
        converged: false,
    })
}

/// Map the most active neuron to the nearest action slot, wrapping past the
/// last slot back to slot 0. Ties go to the lowest neuron index.
pub fn decode_action(state: &RingState, n_actions: usize) -> Result<usize> {
    let n = state.v.len();
    if n_actions == 0 || n_actions > n {
        return Err(invalid(format!(
            "cannot decode {n_actions} actions from {n} neurons"
        )));
    }
    let mut best = 0;
    for (i, &v) in state.v.iter().enumerate() {
        if v > state.v[best] {
            best = i;
        }
    }
    if !(state.v[best] > 0.0) {
        return Err(Error::NoWinner);
    }
    // round(best · A / N) with halves rounded up, in exact integer arithmetic
    let slot = (2 * best * n_actions + n) / (2 * n);
    Ok(slot % n_actions)
}
