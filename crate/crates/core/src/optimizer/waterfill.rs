//! Active-element selection and power allocation for a surface whose
//! active positions are chosen per realization.
//!
//! The selected elements maximize `sum log(1 + g_n p_n)` subject to
//! `sum p_n <= P_a^max`, with `g_n = P a_n / (sigma^2 ||w||^2 xi_n)` and
//! `a_n = |h_{H,n}|^2 |w^H g_n|^2`. The `sigma^2 ||w||^2` factor is the
//! denominator of the interference-free SINR bound the log terms come
//! from; it makes `g_n p_n` a pure ratio and the allocation independent of
//! the combiner's scale. The optimum is the water-filling allocation
//! `p_n = (level - 1/g_n)^+`.

use crate::channel::ChannelSet;
use crate::rates::amplifier_cost;
use crate::CVector;

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillAllocation {
    /// Zero-based, ascending.
    pub selected: Vec<usize>,
    /// Power per entry of `selected`, watts.
    pub powers: Vec<f64>,
    /// `1 / mu`; zero when no selected element has positive gain.
    pub water_level: f64,
}

/// Amplitudes for every element plus the allocation that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicUpdate {
    pub amplitudes: Vec<f64>,
    pub allocation: WaterfillAllocation,
}

/// Water-filling over strictly positive `gains`. Returns the powers and the
/// water level.
///
/// The level is bracketed by bisection on the monotone budget residual;
/// once the support is known the level is recomputed in closed form on
/// that support so the budget is met to rounding.
pub fn waterfill(gains: &[f64], budget: f64) -> (Vec<f64>, f64) {
    debug_assert!(gains.iter().all(|&g| g > 0.0));
    if gains.is_empty() {
        return (Vec::new(), 0.0);
    }
    let floors: Vec<f64> = gains.iter().map(|g| 1.0 / g).collect();
    let min_floor = floors.iter().cloned().fold(f64::INFINITY, f64::min);
    if budget <= 0.0 {
        return (vec![0.0; gains.len()], min_floor);
    }
    let used = |level: f64| floors.iter().map(|f| (level - f).max(0.0)).sum::<f64>();

    let (mut lo, mut hi) = (min_floor, min_floor + budget);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if used(mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.abs() {
            break;
        }
    }
    let mut level = 0.5 * (lo + hi);

    let support: Vec<f64> = floors.iter().cloned().filter(|&f| f < level).collect();
    if !support.is_empty() {
        let exact = (budget + support.iter().sum::<f64>()) / support.len() as f64;
        let top = support.iter().cloned().fold(f64::MIN, f64::max);
        let next = floors
            .iter()
            .cloned()
            .filter(|&f| f >= level)
            .fold(f64::INFINITY, f64::min);
        if exact > top && exact <= next {
            level = exact;
        }
    }
    let powers = floors.iter().map(|f| (level - f).max(0.0)).collect();
    (powers, level)
}

/// Indices of the `count` largest values; ties go to the lower index.
pub fn top_indices(values: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order.truncate(count);
    order.sort_unstable();
    order
}

/// Select the `a_budget` elements with the largest `P a_n / xi_n` for the
/// current combiner (ties to the lower index), water-fill the amplifier
/// budget over them and convert powers to amplitudes
/// `max(sqrt(p_n / xi_n), 1)`.
pub fn dynamic_select_and_allocate(
    w: &CVector,
    cs: &ChannelSet,
    p_user: f64,
    sigma2: f64,
    a_budget: usize,
    pa_max: f64,
) -> DynamicUpdate {
    let n = cs.n();
    let xi: Vec<f64> = (0..n).map(|i| amplifier_cost(cs, i, p_user, sigma2)).collect();
    let noise = sigma2 * w.norm_squared();
    let ratio: Vec<f64> = (0..n)
        .map(|i| {
            let a = cs.h_r[i].norm_sqr() * w.dotc(&cs.g.column(i)).norm_sqr();
            p_user * a / xi[i]
        })
        .collect();
    let selected = top_indices(&ratio, a_budget.min(n));

    let live: Vec<usize> = (0..selected.len())
        .filter(|&k| ratio[selected[k]] > 0.0)
        .collect();
    let gains: Vec<f64> = live.iter().map(|&k| ratio[selected[k]] / noise).collect();
    let (live_powers, level) = waterfill(&gains, pa_max);
    let mut powers = vec![0.0; selected.len()];
    for (&k, p) in live.iter().zip(live_powers) {
        powers[k] = p;
    }
    let level = if live.is_empty() { 0.0 } else { level };

    let mut amplitudes = vec![1.0; n];
    for (k, &i) in selected.iter().enumerate() {
        amplitudes[i] = (powers[k] / xi[i]).sqrt().max(1.0);
    }
    DynamicUpdate {
        amplitudes,
        allocation: WaterfillAllocation {
            selected,
            powers,
            water_level: level,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::synthesize_channels;
    use crate::scenario::Scenario;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;

    #[test]
    fn single_element_takes_everything() {
        let (p, level) = waterfill(&[2.0], 0.3);
        assert!((p[0] - 0.3).abs() < 1e-15);
        assert!((level - 0.8).abs() < 1e-15);
    }

    #[test]
    fn symmetric_elements_split_evenly() {
        let (p, _) = waterfill(&[4.0, 4.0], 1.0);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weak_element_gets_nothing() {
        let (p, level) = waterfill(&[10.0, 0.1], 1.0);
        assert_eq!(p[1], 0.0);
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!(level < 10.0);
    }

    #[test]
    fn zero_budget() {
        let (p, _) = waterfill(&[1.0, 2.0], 0.0);
        assert_eq!(p, vec![0.0, 0.0]);
    }

    #[test]
    fn top_indices_ties_prefer_low_index() {
        assert_eq!(top_indices(&[1.0, 3.0, 3.0, 2.0], 2), vec![1, 2]);
        assert_eq!(top_indices(&[5.0, 5.0, 5.0], 2), vec![0, 1]);
        assert_eq!(top_indices(&[0.5, 2.0, 1.0], 1), vec![1]);
    }

    #[test]
    fn single_active_element_amplitude() {
        let s = Scenario::default();
        let cs = synthesize_channels(&s, 41);
        let w = DVector::from_element(5, Complex64::new(1e5, 0.0));
        let (p, s2, pmax) = (0.999, 1e-11, 1e-3);
        let upd = dynamic_select_and_allocate(&w, &cs, p, s2, 1, pmax);
        assert_eq!(upd.allocation.selected.len(), 1);
        let n = upd.allocation.selected[0];
        assert!((upd.allocation.powers[0] - pmax).abs() < 1e-15);
        let xi = amplifier_cost(&cs, n, p, s2);
        assert!((upd.amplitudes[n].powi(2) - (pmax / xi).max(1.0)).abs() < 1e-9);
        assert_eq!(upd.amplitudes.iter().filter(|&&a| a != 1.0).count(), 1);
    }

    #[test]
    fn all_zero_gains_stay_passive() {
        let cs = ChannelSet {
            h_en: DVector::from_element(2, Complex64::new(1.0, 0.0)),
            h_r: DVector::from_element(3, Complex64::new(1.0, 0.0)),
            h_e_true: DVector::from_element(1, Complex64::new(1.0, 0.0)),
            h_e_est: DVector::from_element(1, Complex64::new(1.0, 0.0)),
            g: DMatrix::zeros(2, 3),
        };
        let w = DVector::from_element(2, Complex64::new(1.0, 0.0));
        let upd = dynamic_select_and_allocate(&w, &cs, 1.0, 1.0, 2, 1.0);
        assert_eq!(upd.allocation.selected, vec![0, 1]);
        assert_eq!(upd.amplitudes, vec![1.0; 3]);
        assert_eq!(upd.allocation.powers, vec![0.0, 0.0]);
    }
}
