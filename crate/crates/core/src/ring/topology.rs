//! Ring geometry: circular index distance and wrapped angular differences.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Result};

/// Shortest index distance between neurons `m` and `n` on a ring of `ring_size` units.
pub fn circular_distance(m: usize, n: usize, ring_size: usize) -> Result<usize> {
    if m >= ring_size || n >= ring_size {
        return Err(invalid(format!(
            "neuron index out of range: ({m}, {n}) on a ring of {ring_size}"
        )));
    }
    Ok(circular_distance_unchecked(m, n, ring_size))
}

#[inline]
pub(crate) fn circular_distance_unchecked(m: usize, n: usize, ring_size: usize) -> usize {
    let d = m.abs_diff(n);
    d.min(ring_size - d)
}

/// Signed shortest angular difference `a - b`, wrapped into `[-π, π)`.
pub fn angular_difference(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(TAU) - PI
}

/// Preferred orientation of neuron `n` on a ring of `ring_size` neurons.
#[inline]
pub fn preferred_angle(n: usize, ring_size: usize) -> f64 {
    TAU * n as f64 / ring_size as f64
}

/// Rotate a ring vector forward by `shift` positions: `out[(n + shift) % N] = v[n]`.
pub fn rotate<T: Copy>(values: &[T], shift: usize) -> Vec<T> {
    let len = values.len();
    if len == 0 {
        return Vec::new();
    }
    let mut out = values.to_vec();
    out.rotate_right(shift % len);
    out
}
