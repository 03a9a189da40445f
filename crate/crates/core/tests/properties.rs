use num_complex::Complex64;
use proptest::prelude::*;
use proptest::sample::subsequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hrris_mec::channel::{complex_normal, draw_rician, steering_ula, steering_upa};
use hrris_mec::optimizer::{optimal_combiner, optimal_phases, run_alternating};
use hrris_mec::rates::{active_power, latency, noise_quadratic, sinr};
use hrris_mec::rng::{substream, Substream};
use hrris_mec::scenario::{
    db_to_ratio, dbm_to_watts, distance, ratio_to_db, squarest_shape, watts_to_dbm,
};
use hrris_mec::{
    synthesize_channels, CMatrix, CVector, ChannelSet, ComputeParams, HrrisState, Mode, Scenario,
    ScenarioError,
};

fn random_state<R: Rng>(rng: &mut R, n: usize, max_active: usize) -> HrrisState {
    let count = rng.random_range(0..=max_active.min(n));
    let mut set = rand::seq::index::sample(rng, n, count).into_vec();
    set.sort_unstable();
    let amps: Vec<f64> = (0..n)
        .map(|i| if set.contains(&i) { rng.random_range(0.0..20.0) } else { 1.0 })
        .collect();
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    HrrisState::from_parts(&amps, &phases, set)
}

fn random_vector<R: Rng>(rng: &mut R, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| complex_normal(rng))
}

fn small_channels(seed: u64) -> (Scenario, ChannelSet) {
    let mut s = Scenario::default();
    s.n_elements = 12;
    s.upa_shape = squarest_shape(12);
    s.a_active = 3;
    s.fixed_active_set = vec![0, 1, 2];
    (s.clone(), synthesize_channels(&s, seed))
}

proptest! {
    #[test]
    fn decibel_conversions_invert(a in -200.0f64..200.0, b in -200.0f64..200.0) {
        for (fwd, inv) in [
            (dbm_to_watts as fn(f64) -> f64, watts_to_dbm as fn(f64) -> f64),
            (db_to_ratio, ratio_to_db),
        ] {
            let back = inv(fwd(a));
            prop_assert!((back - a).abs() <= 1e-12 * a.abs().max(1.0));
            if a < b {
                prop_assert!(fwd(a) < fwd(b));
            }
        }
    }

    #[test]
    fn distances_are_a_metric(
        x_h in 1.0f64..100.0,
        user in (-100.0f64..100.0, -100.0f64..100.0),
        eve in (-100.0f64..100.0, -100.0f64..100.0),
    ) {
        let nodes = [(0.0, 0.0), (x_h, 0.0), user, eve];
        for &a in &nodes {
            for &b in &nodes {
                prop_assert_eq!(distance(a, b), distance(b, a));
                for &c in &nodes {
                    prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_field_corruption_is_rejected(which in 0usize..16, junk in 1.0f64..1e3) {
        let mut s = Scenario::default().with_mode(Mode::HrrisFixed);
        let expected = match which {
            0 => { s.m_antennas = 0; "m_antennas" }
            1 => { s.e_antennas = 0; "e_antennas" }
            2 => { s.a_active = s.n_elements + 1 + junk as usize; "a_active" }
            3 => { s.fixed_active_set = vec![s.n_elements + junk as usize]; "fixed_active_set" }
            4 => { s.p_active_max_dbm = s.p_total_dbm + junk; "p_active_max_dbm" }
            5 => { s.bandwidth_hz = -junk; "bandwidth_hz" }
            6 => { s.csi_error_bound = -junk; "csi_error_bound" }
            7 => { s.pathloss_exponents.user_eve = -junk; "pathloss_exponents" }
            8 => { s.rician_factors.hrris_en = -junk; "rician_factors" }
            9 => { s.upa_shape.1 += 1 + junk as usize; "upa_shape" }
            10 => { s.compute.total_bits = 0; "total_bits" }
            11 => { s.compute.local_rate = -junk; "local_rate" }
            12 => { s.compute.edge_rate = 0.0; "edge_rate" }
            13 => { s.geometry.x_u = s.geometry.x_h; s.geometry.y_u = 0.0; "geometry" }
            14 => { s.noise_power_dbm = f64::NAN; "noise_power_dbm" }
            _ => { s.geometry.y_eve = f64::INFINITY; "y_eve_m" }
        };
        match s.validate() {
            Err(ScenarioError::Validation { field, .. }) => prop_assert_eq!(field, expected),
            other => prop_assert!(false, "expected {} rejection, got {:?}", expected, other),
        }
    }

    #[test]
    fn config_text_round_trips(
        m in 1usize..8,
        e in 1usize..4,
        n in 1usize..64,
        a_frac in 0.0f64..1.0,
        mode in prop::sample::select(Mode::ALL.to_vec()),
        powers in (-20.0f64..10.0, 10.0f64..40.0, -120.0f64..-40.0, -120.0f64..-40.0),
        bandwidth in 1e3f64..1e8,
        eps in 0.0f64..0.5,
        geo in (1.0f64..100.0, 0.5f64..100.0, 0.5f64..20.0, 0.0f64..100.0, 0.5f64..20.0),
        exps in prop::array::uniform4(0.0f64..5.0),
        kappas in prop::array::uniform4(0.0f64..200.0),
        compute in (1u64..1_000_000, 1u64..5000, 1e6f64..1e10, 1e8f64..1e11),
        picks in subsequence((0usize..64).collect::<Vec<_>>(), 0..8),
    ) {
        let mut s = Scenario::default();
        s.m_antennas = m;
        s.e_antennas = e;
        s.n_elements = n;
        s.upa_shape = squarest_shape(n);
        s.mode = mode;
        let fixed: Vec<usize> = picks.into_iter().filter(|&i| i < n).collect();
        s.a_active = if mode == Mode::HrrisFixed {
            fixed.len()
        } else {
            fixed.len() + ((n - fixed.len()) as f64 * a_frac) as usize
        };
        s.fixed_active_set = fixed;
        (s.p_active_max_dbm, s.p_total_dbm, s.noise_power_dbm, s.eve_noise_power_dbm) = powers;
        s.bandwidth_hz = bandwidth;
        s.csi_error_bound = eps;
        (s.geometry.x_h, s.geometry.x_u, s.geometry.y_u, s.geometry.x_eve, s.geometry.y_eve) = geo;
        (s.pathloss_exponents.user_en, s.pathloss_exponents.user_hrris,
         s.pathloss_exponents.user_eve, s.pathloss_exponents.hrris_en) = exps.into();
        (s.rician_factors.user_en, s.rician_factors.user_hrris,
         s.rician_factors.user_eve, s.rician_factors.hrris_en) = kappas.into();
        (s.compute.total_bits, s.compute.cycles_per_bit, s.compute.local_rate, s.compute.edge_rate) = compute;
        prop_assume!(s.validate().is_ok());
        let back = Scenario::parse(&s.to_config_string()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn latency_terms_monotone_in_offload(
        total in 2u64..2000,
        nu in 1u64..1000,
        fl in 1e3f64..1e9,
        fe in 1e3f64..1e11,
        r_s in 1e-3f64..1e9,
    ) {
        let cp = ComputeParams { total_bits: total, cycles_per_bit: nu, local_rate: fl, edge_rate: fe };
        let mut prev = latency(0, r_s, &cp).unwrap();
        prop_assert_eq!(prev.total, cp.local_only_latency());
        for ell in 1..=total {
            let d = latency(ell, r_s, &cp).unwrap();
            prop_assert!(d.local < prev.local);
            prop_assert!(d.edge > prev.edge);
            prev = d;
        }
    }

    #[test]
    fn zero_rate_offload_is_infinite(total in 1u64..1000, ell_frac in 0.0f64..1.0) {
        let cp = ComputeParams { total_bits: total, ..ComputeParams::default() };
        let ell = 1 + ((total - 1) as f64 * ell_frac) as u64;
        let d = latency(ell, 0.0, &cp).unwrap();
        prop_assert!(d.total.is_infinite() && d.total > 0.0);
        prop_assert!(latency(total + 1, 1.0, &cp).is_err());
    }
}

#[test]
fn active_power_matches_trace_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (p, sigma2) = (0.999, 1e-11);
    for trial in 0..1000 {
        let cs = synthesize_channels(&Scenario::default(), trial);
        let n = cs.n();
        let hs = random_state(&mut rng, n, 8);
        let mut psi = CMatrix::zeros(n, n);
        for &i in &hs.active_set {
            psi[(i, i)] = hs.alpha[i];
        }
        let cov = &cs.h_r * cs.h_r.adjoint() * Complex64::from(p)
            + CMatrix::identity(n, n) * Complex64::from(sigma2);
        let trace = (&psi * cov * psi.adjoint()).trace().re;
        let sum = active_power(&hs, &cs, p, sigma2);
        assert!((sum - trace).abs() <= 1e-10 * trace.abs().max(f64::MIN_POSITIVE), "{sum} vs {trace}");
    }
}

#[test]
fn sinr_ignores_combiner_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let cs = synthesize_channels(&Scenario::default(), 4);
    let hs = random_state(&mut rng, cs.n(), 4);
    let w = random_vector(&mut rng, cs.m());
    let base = sinr(&w, &hs, &cs, 0.999, 1e-11).unwrap();
    for _ in 0..1000 {
        let mag = 10f64.powf(rng.random_range(-6.0..6.0));
        let c = Complex64::from_polar(mag, rng.random_range(0.0..std::f64::consts::TAU));
        let scaled = sinr(&(&w * c), &hs, &cs, 0.999, 1e-11).unwrap();
        assert!((scaled - base).abs() <= 1e-10 * base);
    }
}

#[test]
fn phases_leave_noise_and_power_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..200 {
        let cs = synthesize_channels(&Scenario::default(), trial);
        let mut hs = random_state(&mut rng, cs.n(), 6);
        let w = random_vector(&mut rng, cs.m());
        let (q, pw) = (noise_quadratic(&w, &hs, &cs), active_power(&hs, &cs, 0.999, 1e-11));
        let phases: Vec<f64> = (0..cs.n()).map(|_| rng.random_range(-10.0..10.0)).collect();
        hs.set_phases(&phases);
        assert!((noise_quadratic(&w, &hs, &cs) - q).abs() <= 1e-12 * q);
        assert!((active_power(&hs, &cs, 0.999, 1e-11) - pw).abs() <= 1e-12 * pw.max(f64::MIN_POSITIVE));
    }
}

#[test]
fn combiner_step_never_loses() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let (p, sigma2) = (0.999, 1e-11);
    for trial in 0..300 {
        let cs = synthesize_channels(&Scenario::default(), trial);
        let hs = random_state(&mut rng, cs.n(), 6);
        let old = random_vector(&mut rng, cs.m());
        let g_old = sinr(&old, &hs, &cs, p, sigma2).unwrap();
        let g_new = sinr(&optimal_combiner(&hs, &cs, p, sigma2), &hs, &cs, p, sigma2).unwrap();
        assert!(g_new >= g_old * (1.0 - 1e-12), "{g_new} < {g_old}");
    }
}

#[test]
fn phase_step_never_loses() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let (p, sigma2) = (0.999, 1e-11);
    for trial in 0..300 {
        let cs = synthesize_channels(&Scenario::default(), trial);
        let mut hs = random_state(&mut rng, cs.n(), 6);
        let w = random_vector(&mut rng, cs.m());
        let before = sinr(&w, &hs, &cs, p, sigma2).unwrap();
        hs.set_phases(&optimal_phases(&w, &cs));
        let after = sinr(&w, &hs, &cs, p, sigma2).unwrap();
        assert!(after >= before * (1.0 - 1e-12));
    }
}

#[test]
fn fixed_mode_is_locally_optimal() {
    let (p, sigma2) = (0.999, 1e-11);
    for seed in 0..30 {
        let (s, cs) = small_channels(seed);
        let s = s.with_mode(Mode::HrrisFixed);
        let sol = run_alternating(&s, &cs, &mut substream(seed, Substream::PhaseInit));
        let gamma = sol.sinr;
        let pa_max = s.active_power_max_w();
        for &n in &sol.surface.active_set {
            for factor in [0.99, 1.01] {
                let mut hs = sol.surface.clone();
                hs.set_amplitude(n, hs.alpha[n].norm() * factor);
                if active_power(&hs, &cs, p, sigma2) > pa_max * (1.0 + 1e-12) {
                    continue;
                }
                let w = optimal_combiner(&hs, &cs, p, sigma2);
                let g = sinr(&w, &hs, &cs, p, sigma2).unwrap();
                assert!(g <= gamma * (1.0 + 1e-6), "seed {seed} element {n}: {g} vs {gamma}");
            }
        }
    }
}

#[test]
fn fixed_surface_nests_optimized_passive_surface() {
    let mut s = Scenario::default();
    s.a_active = 1;
    s.fixed_active_set = vec![0];
    let (mut audited, mut skipped) = (0, 0);
    for seed in 0..200 {
        let cs = synthesize_channels(&s, seed);
        let solve = |mode| {
            run_alternating(&s.with_mode(mode), &cs, &mut substream(seed, Substream::PhaseInit))
        };
        let fixed = solve(Mode::HrrisFixed);
        if fixed.surface.alpha[0].norm() < 1.0 {
            skipped += 1;
            continue;
        }
        let passive = solve(Mode::RisOptimized);
        assert!(fixed.sinr >= passive.sinr, "seed {seed}: {} < {}", fixed.sinr, passive.sinr);
        audited += 1;
    }
    assert!(audited > skipped, "{audited} audited, {skipped} skipped");
}

#[test]
fn fading_has_unit_power_per_entry() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let los: CMatrix = steering_ula(4, 0.3) * steering_upa(3, 3, 0.2, 0.0).transpose();
    for kappa in [0.0, 0.5, 3.0, 100.0] {
        let draws = 20_000;
        let mean = (0..draws)
            .map(|_| draw_rician(&los, kappa, &mut rng).norm_squared())
            .sum::<f64>()
            / draws as f64;
        assert!((mean / los.len() as f64 - 1.0).abs() < 0.02, "kappa {kappa}: {mean}");
    }
}

#[test]
fn strong_line_of_sight_dominates() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let los: CMatrix = steering_ula(5, -0.4) * steering_upa(5, 10, 0.9, 0.0).transpose();
    for _ in 0..200 {
        let g = draw_rician(&los, 100.0, &mut rng);
        let corr = g.dotc(&los).norm() / (g.norm() * los.norm());
        assert!(corr >= 0.99, "{corr}");
    }
}

#[test]
fn reference_gain_scales_every_channel() {
    let base = Scenario::default();
    let mut louder = base.clone();
    louder.pathloss_ref_db += 7.0;
    let c = db_to_ratio(7.0);
    for seed in 0..50 {
        let (a, b) = (synthesize_channels(&base, seed), synthesize_channels(&louder, seed));
        let pairs: [(f64, f64); 5] = [
            (a.h_en.norm_squared(), b.h_en.norm_squared()),
            (a.h_r.norm_squared(), b.h_r.norm_squared()),
            (a.h_e_est.norm_squared(), b.h_e_est.norm_squared()),
            (a.h_e_true.norm_squared(), b.h_e_true.norm_squared()),
            (a.g.norm_squared(), b.g.norm_squared()),
        ];
        for (x, y) in pairs {
            assert!((y / x - c).abs() <= 1e-12 * c);
        }
    }
}
