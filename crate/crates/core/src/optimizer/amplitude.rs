//! Per-element amplitude update for a surface with preset active elements.
//!
//! With phases aligned, the SINR as a function of one active amplitude
//! `x = |alpha_n|` is, up to the constant `P / sigma^2`,
//!
//! ```text
//!     f(x) = (a x^2 + b x + c) / (u x^2 + v)
//! ```
//!
//! and the amplifier budget caps `x` at `sqrt(residual / xi)`.

use crate::channel::ChannelSet;
use crate::rates::{amplifier_cost, HrrisState};
use crate::CVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub u: f64,
    pub v: f64,
    /// `|h_{H,n}|^2 v - c`; may be negative.
    pub d: f64,
    /// Amplifier cost per unit squared amplitude, watts.
    pub xi: f64,
    /// Budget left after the other active elements, watts.
    pub residual_budget: f64,
}

impl SubproblemCoefficients {
    /// Coefficients for element `n` of `hs`, which must hold aligned phases.
    pub fn compute(
        n: usize,
        w: &CVector,
        hs: &HrrisState,
        cs: &ChannelSet,
        p_user: f64,
        sigma2: f64,
        pa_max: f64,
    ) -> Self {
        let gain2 = cs.h_r[n].norm_sqr();
        let proj: Vec<f64> = (0..cs.n()).map(|i| w.dotc(&cs.g.column(i)).norm()).collect();

        let others: f64 = (0..cs.n())
            .filter(|&i| i != n)
            .map(|i| hs.alpha[i].norm() * cs.h_r[i].norm() * proj[i])
            .sum();
        let c = (w.dotc(&cs.h_en).norm() + others).powi(2);
        let u = proj[n] * proj[n];
        let a = gain2 * u;
        let b = 2.0 * cs.h_r[n].norm() * proj[n] * c.sqrt();

        let mut v = w.norm_squared();
        let mut spent = 0.0;
        for &i in hs.active_set.iter().filter(|&&i| i != n) {
            let amp2 = hs.alpha[i].norm_sqr();
            v += amp2 * proj[i] * proj[i];
            spent += amp2 * amplifier_cost(cs, i, p_user, sigma2);
        }

        SubproblemCoefficients {
            a,
            b,
            c,
            u,
            v,
            d: gain2 * v - c,
            xi: amplifier_cost(cs, n, p_user, sigma2),
            residual_budget: (pa_max - spent).max(0.0),
        }
    }

    pub fn objective(&self, x: f64) -> f64 {
        (self.a * x * x + self.b * x + self.c) / (self.u * x * x + self.v)
    }

    /// Largest amplitude the remaining budget allows.
    pub fn cap(&self) -> f64 {
        (self.residual_budget / self.xi).sqrt()
    }

    /// Unconstrained maximizer `d/b + sqrt(d^2/b^2 + v/u)`, evaluated without
    /// cancellation when `d < 0`. Requires `b > 0` and `u > 0`.
    fn stationary_point(&self) -> f64 {
        let r = self.d / self.b;
        let root = (r * r + self.v / self.u).sqrt();
        if r >= 0.0 {
            r + root
        } else {
            (self.v / self.u) / (root - r)
        }
    }
}

/// Best amplitude in `[0, cap]` for one active element.
pub fn fixed_amplitude_update(coeff: &SubproblemCoefficients) -> f64 {
    let cap = coeff.cap();
    if coeff.u <= 0.0 {
        return cap;
    }
    if coeff.b <= 0.0 {
        // f is monotone on [0, cap]; compare the ends.
        return if coeff.objective(cap) >= coeff.objective(0.0) {
            cap
        } else {
            0.0
        };
    }
    coeff.stationary_point().min(cap)
}
