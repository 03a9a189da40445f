//! Link quantities for a given surface configuration and combiner:
//! effective channel, amplifier power, SINR, rates and offloading latency.

use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelSet;
use crate::scenario::ComputeParams;
use crate::{CMatrix, CVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("combiner is the zero vector")]
    ZeroCombiner,
    #[error("offload volume {ell} outside 0..={total}")]
    OffloadOutOfRange { ell: u64, total: u64 },
}

/// Surface coefficients `alpha_n = |alpha_n| e^{j theta_n}` and the set of
/// elements allowed to amplify. Elements outside the set have unit
/// amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct HrrisState {
    pub alpha: CVector,
    /// Zero-based, strictly increasing.
    pub active_set: Vec<usize>,
}

impl HrrisState {
    /// Unit-amplitude surface with the given phases.
    pub fn passive(phases: &[f64]) -> Self {
        HrrisState {
            alpha: DVector::from_iterator(
                phases.len(),
                phases.iter().map(|&t| Complex64::from_polar(1.0, t)),
            ),
            active_set: Vec::new(),
        }
    }

    pub fn from_parts(amplitudes: &[f64], phases: &[f64], active_set: Vec<usize>) -> Self {
        assert_eq!(amplitudes.len(), phases.len());
        HrrisState {
            alpha: DVector::from_iterator(
                phases.len(),
                amplitudes
                    .iter()
                    .zip(phases)
                    .map(|(&r, &t)| Complex64::from_polar(r, t)),
            ),
            active_set,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_active(&self, n: usize) -> bool {
        self.active_set.binary_search(&n).is_ok()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.norm()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.arg()).collect()
    }

    pub fn set_amplitude(&mut self, n: usize, amplitude: f64) {
        let theta = self.alpha[n].arg();
        self.alpha[n] = Complex64::from_polar(amplitude, theta);
    }

    /// Keep amplitudes, replace phases.
    pub fn set_phases(&mut self, phases: &[f64]) {
        for (a, &t) in self.alpha.iter_mut().zip(phases) {
            *a = Complex64::from_polar(a.norm(), t);
        }
    }

    /// Diagonal of the passive part (zero on active elements).
    pub fn passive_part(&self) -> CVector {
        DVector::from_fn(self.len(), |n, _| {
            if self.is_active(n) {
                Complex64::new(0.0, 0.0)
            } else {
                self.alpha[n]
            }
        })
    }

    /// Diagonal of the active part (zero on passive elements).
    pub fn active_part(&self) -> CVector {
        DVector::from_fn(self.len(), |n, _| {
            if self.is_active(n) {
                self.alpha[n]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Checks the unit-amplitude rule for passive elements and the size of
    /// the active set.
    pub fn check(&self, max_active: usize) -> Result<(), String> {
        if self.active_set.len() > max_active {
            return Err(format!(
                "{} active elements, budget {max_active}",
                self.active_set.len()
            ));
        }
        if self.active_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err("active set not strictly increasing".into());
        }
        if let Some(&n) = self.active_set.iter().find(|&&n| n >= self.len()) {
            return Err(format!("active index {n} out of range"));
        }
        for (n, a) in self.alpha.iter().enumerate() {
            if !self.is_active(n) && (a.norm() - 1.0).abs() > 1e-9 {
                return Err(format!("passive element {n} has amplitude {}", a.norm()));
            }
        }
        Ok(())
    }
}

/// Result of solving one trial in one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub combiner: CVector,
    pub surface: HrrisState,
    pub offload_bits: u64,
    pub sinr: f64,
    pub rate_en: f64,
    pub leakage_bound: f64,
    pub secrecy_rate: f64,
    pub latency_local: f64,
    pub latency_edge: f64,
    pub latency: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Amplifier power of the returned surface, watts.
    pub active_power: f64,
    /// Set when `active_power` exceeds the amplifier budget.
    pub budget_exceeded: bool,
    /// `R_EN` after each outer iteration.
    pub rate_history: Vec<f64>,
}

impl Solution {
    /// Reference point where nothing is offloaded.
    pub fn local_only(cp: &ComputeParams) -> Self {
        let d = cp.local_only_latency();
        Solution {
            combiner: DVector::zeros(0),
            surface: HrrisState::passive(&[]),
            offload_bits: 0,
            sinr: 0.0,
            rate_en: 0.0,
            leakage_bound: 0.0,
            secrecy_rate: 0.0,
            latency_local: d,
            latency_edge: 0.0,
            latency: d,
            iterations: 0,
            converged: true,
            active_power: 0.0,
            budget_exceeded: false,
            rate_history: Vec::new(),
        }
    }
}

fn check_dims(cs: &ChannelSet, hs: &HrrisState) -> Result<(), RateError> {
    if cs.g.nrows() != cs.h_en.len() || cs.g.ncols() != cs.h_r.len() || hs.len() != cs.h_r.len() {
        return Err(RateError::Dimension(format!(
            "h_en {}, G {}x{}, h_r {}, alpha {}",
            cs.h_en.len(),
            cs.g.nrows(),
            cs.g.ncols(),
            cs.h_r.len(),
            hs.len()
        )));
    }
    Ok(())
}

/// `h_EN + G diag(alpha) h_R`.
pub fn effective_channel(cs: &ChannelSet, hs: &HrrisState) -> Result<CVector, RateError> {
    check_dims(cs, hs)?;
    Ok(&cs.h_en + &cs.g * hs.alpha.component_mul(&cs.h_r))
}

/// Per-element amplifier cost `xi_n = sigma^2 + P |h_{H,n}|^2`.
pub fn amplifier_cost(cs: &ChannelSet, n: usize, p_user: f64, sigma2: f64) -> f64 {
    sigma2 + p_user * cs.h_r[n].norm_sqr()
}

/// Total power radiated by the active elements.
pub fn active_power(hs: &HrrisState, cs: &ChannelSet, p_user: f64, sigma2: f64) -> f64 {
    hs.active_set
        .iter()
        .map(|&n| hs.alpha[n].norm_sqr() * amplifier_cost(cs, n, p_user, sigma2))
        .sum()
}

/// Noise covariance `Q = I + G Psi Psi^H G^H`, in units of `sigma^2`.
pub fn noise_covariance(hs: &HrrisState, cs: &ChannelSet) -> CMatrix {
    let m = cs.m();
    let mut q = CMatrix::identity(m, m);
    for &n in &hs.active_set {
        let col = cs.g.column(n) * Complex64::from(hs.alpha[n].norm());
        q += &col * col.adjoint();
    }
    q
}

/// `w^H Q w` without forming Q.
pub fn noise_quadratic(w: &CVector, hs: &HrrisState, cs: &ChannelSet) -> f64 {
    let extra: f64 = hs
        .active_set
        .iter()
        .map(|&n| hs.alpha[n].norm_sqr() * w.dotc(&cs.g.column(n)).norm_sqr())
        .sum();
    w.norm_squared() + extra
}

pub fn sinr(
    w: &CVector,
    hs: &HrrisState,
    cs: &ChannelSet,
    p_user: f64,
    sigma2: f64,
) -> Result<f64, RateError> {
    if w.len() != cs.m() {
        return Err(RateError::Dimension(format!(
            "combiner {} vs {} antennas",
            w.len(),
            cs.m()
        )));
    }
    if w.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(RateError::ZeroCombiner);
    }
    let h = effective_channel(cs, hs)?;
    let signal = w.dotc(&h).norm_sqr();
    Ok(p_user * signal / (sigma2 * noise_quadratic(w, hs, cs)))
}

/// `W log2(1 + gamma)`, bits/s.
pub fn achievable_rate(gamma: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * gamma.ln_1p() / std::f64::consts::LN_2
}

/// Worst-case eavesdropper rate over the CSI uncertainty ball, bits/s.
pub fn leakage_bound(
    h_e_est: &CVector,
    eps: f64,
    p_user: f64,
    sigma2_eve: f64,
    bandwidth_hz: f64,
) -> f64 {
    let snr = p_user * (1.0 + eps).powi(2) * h_e_est.norm_squared() / sigma2_eve;
    achievable_rate(snr, bandwidth_hz)
}

pub fn secrecy_rate(rate_en: f64, leakage: f64) -> f64 {
    (rate_en - leakage).max(0.0)
}

/// Local, edge and overall latency in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBreakdown {
    pub local: f64,
    pub edge: f64,
    /// `max(local, edge)`; `f64::INFINITY` when bits are sent at zero rate.
    pub total: f64,
}

pub fn latency(ell: u64, secrecy_rate: f64, cp: &ComputeParams) -> Result<LatencyBreakdown, RateError> {
    if ell > cp.total_bits {
        return Err(RateError::OffloadOutOfRange {
            ell,
            total: cp.total_bits,
        });
    }
    let nu = cp.cycles_per_bit as f64;
    let local = (cp.total_bits - ell) as f64 * nu / cp.local_rate;
    let edge = if ell == 0 {
        0.0
    } else if secrecy_rate <= 0.0 {
        f64::INFINITY
    } else {
        ell as f64 / secrecy_rate + ell as f64 * nu / cp.edge_rate
    };
    Ok(LatencyBreakdown {
        local,
        edge,
        total: local.max(edge),
    })
}
