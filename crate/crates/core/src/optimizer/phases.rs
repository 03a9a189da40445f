use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::CVector;

/// Phases aligning every cascaded path with the direct path after
/// combining: `theta_n = arg(w^H h_EN) - arg((w^H G)_n h_{H,n})`, in
/// `[0, 2 pi)`.
///
/// A zero direct term or a zero cascaded term contributes phase 0.
pub fn optimal_phases(w: &CVector, cs: &ChannelSet) -> Vec<f64> {
    let reference = phase(w.dotc(&cs.h_en));
    (0..cs.n())
        .map(|n| wrap(reference - phase(w.dotc(&cs.g.column(n)) * cs.h_r[n])))
        .collect()
}

fn phase(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg()
    }
}

pub(crate) fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}
