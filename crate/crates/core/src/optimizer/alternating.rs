use std::f64::consts::TAU;

use rand::seq::index::sample;
use rand::Rng;

use super::{
    dynamic_select_and_allocate, fixed_amplitude_update, optimal_combiner, optimal_offload,
    optimal_phases, SubproblemCoefficients,
};
use crate::channel::ChannelSet;
use crate::rates::{
    achievable_rate, active_power, amplifier_cost, latency, leakage_bound, secrecy_rate, sinr,
    HrrisState, Solution,
};
use crate::scenario::{Mode, Scenario};
use crate::CVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternatingConfig {
    /// Stop when the relative change of `R_EN` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for AlternatingConfig {
    fn default() -> Self {
        AlternatingConfig {
            tolerance: 1e-5,
            max_iterations: 50,
        }
    }
}

/// Random feasible start: uniform phases, and for hybrid modes a common
/// active amplitude scaled to spend exactly the amplifier budget.
fn initial_state<R: Rng + ?Sized>(s: &Scenario, cs: &ChannelSet, rng: &mut R) -> HrrisState {
    let n = cs.n();
    let phases: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
    let active: Vec<usize> = match s.mode {
        Mode::HrrisFixed => s.fixed_active_set.clone(),
        Mode::HrrisDynamic => {
            let mut v = sample(rng, n, s.a_active.min(n)).into_vec();
            v.sort_unstable();
            v
        }
        Mode::RisRandom | Mode::RisOptimized => Vec::new(),
    };
    let mut amps = vec![1.0; n];
    if !active.is_empty() {
        let (p, sigma2) = (s.user_power_w(), s.noise_power_w());
        let spent: f64 = active
            .iter()
            .map(|&i| amplifier_cost(cs, i, p, sigma2))
            .sum();
        let scale = (s.active_power_max_w() / spent).sqrt();
        for &i in &active {
            amps[i] *= scale;
        }
    }
    HrrisState::from_parts(&amps, &phases, active)
}

pub fn run_alternating<R: Rng + ?Sized>(s: &Scenario, cs: &ChannelSet, rng: &mut R) -> Solution {
    run_alternating_with(s, cs, rng, AlternatingConfig::default())
}

/// Solve one realization in `s.mode`.
///
/// Each outer iteration updates the combiner, then (except for the random
/// RIS baseline) the phases, then the amplitudes of the active elements.
/// The iterate with the highest SINR is kept, its combiner refreshed, and
/// the offload volume chosen for the resulting secrecy rate.
pub fn run_alternating_with<R: Rng + ?Sized>(
    s: &Scenario,
    cs: &ChannelSet,
    rng: &mut R,
    cfg: AlternatingConfig,
) -> Solution {
    let p = s.user_power_w();
    let sigma2 = s.noise_power_w();
    let pa_max = s.active_power_max_w();
    let bandwidth = s.bandwidth_hz;
    let gamma_of = |w: &CVector, hs: &HrrisState| sinr(w, hs, cs, p, sigma2).unwrap_or(0.0);

    let mut state = initial_state(s, cs, rng);
    let mut history = Vec::with_capacity(cfg.max_iterations);
    let mut best: Option<(f64, HrrisState)> = None;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let w = optimal_combiner(&state, cs, p, sigma2);

        if s.mode != Mode::RisRandom {
            state.set_phases(&optimal_phases(&w, cs));
        }
        match s.mode {
            Mode::HrrisFixed => {
                for n in state.active_set.clone() {
                    let k = SubproblemCoefficients::compute(n, &w, &state, cs, p, sigma2, pa_max);
                    state.set_amplitude(n, fixed_amplitude_update(&k));
                }
            }
            Mode::HrrisDynamic => {
                let upd = dynamic_select_and_allocate(&w, cs, p, sigma2, s.a_active, pa_max);
                state = HrrisState::from_parts(
                    &upd.amplitudes,
                    &state.phases(),
                    upd.allocation.selected,
                );
            }
            Mode::RisRandom | Mode::RisOptimized => {}
        }

        let gamma = gamma_of(&w, &state);
        let rate = achievable_rate(gamma, bandwidth);
        if best.as_ref().is_none_or(|(g, _)| gamma > *g) {
            best = Some((gamma, state.clone()));
        }
        let prev = history.last().copied();
        history.push(rate);
        if let Some(prev) = prev {
            if (rate - prev).abs() <= cfg.tolerance * prev.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    }

    let surface = best.map(|(_, hs)| hs).unwrap_or(state);
    let combiner = optimal_combiner(&surface, cs, p, sigma2);
    let gamma = gamma_of(&combiner, &surface);
    let rate_en = achievable_rate(gamma, bandwidth);
    let leak = leakage_bound(
        &cs.h_e_est,
        s.csi_error_bound,
        p,
        s.eve_noise_power_w(),
        bandwidth,
    );
    let r_s = secrecy_rate(rate_en, leak);
    let ell = optimal_offload(r_s, &s.compute);
    let d = latency(ell, r_s, &s.compute).expect("offload within range");
    let spent = active_power(&surface, cs, p, sigma2);

    Solution {
        combiner,
        offload_bits: ell,
        sinr: gamma,
        rate_en,
        leakage_bound: leak,
        secrecy_rate: r_s,
        latency_local: d.local,
        latency_edge: d.edge,
        latency: d.total,
        iterations,
        converged,
        active_power: spent,
        budget_exceeded: spent > pa_max * (1.0 + 1e-9),
        rate_history: history,
        surface,
    }
}
