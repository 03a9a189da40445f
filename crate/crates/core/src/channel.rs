//! Channel synthesis: path loss, Rician fading around geometric
//! line-of-sight responses, and the eavesdropper-channel estimate.
//!
//! Array conventions (2-D layout, half-wavelength spacing):
//! - ULAs (edge node, eavesdropper) lie along x with boresight +y, so the
//!   angle to a node at offset `(dx, dy)` has `sin = dx / d`.
//! - The surface UPA faces the edge node (boresight -x) with zero
//!   elevation, so azimuth to a node at offset `(dx, dy)` has `sin = dy / d`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{substream, Substream};
use crate::scenario::{db_to_ratio, Scenario, MIN_LINK_DISTANCE_M};
use crate::{CMatrix, CVector};

/// One quasi-static realization of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// User to edge node, length M.
    pub h_en: CVector,
    /// User to surface, length N.
    pub h_r: CVector,
    /// User to eavesdropper, length E. Never seen by the optimizer.
    pub h_e_true: CVector,
    /// Edge node's estimate of `h_e_true`.
    pub h_e_est: CVector,
    /// Surface to edge node, M x N.
    pub g: CMatrix,
}

impl ChannelSet {
    pub fn m(&self) -> usize {
        self.h_en.len()
    }

    pub fn n(&self) -> usize {
        self.h_r.len()
    }

    /// `||h_e_true - h_e_est|| / ||h_e_est||`.
    pub fn csi_relative_error(&self) -> f64 {
        (&self.h_e_true - &self.h_e_est).norm() / self.h_e_est.norm()
    }
}

/// Large-scale gain `beta0 * d^-eta` with `d` in meters.
pub fn path_loss(d: f64, beta0_db: f64, eta: f64) -> f64 {
    db_to_ratio(beta0_db) * d.max(MIN_LINK_DISTANCE_M).powf(-eta)
}

pub fn steering_ula(count: usize, angle: f64) -> CVector {
    let s = angle.sin();
    DVector::from_fn(count, |m, _| Complex64::from_polar(1.0, PI * m as f64 * s))
}

/// Planar response, element `r * cols + c`.
pub fn steering_upa(rows: usize, cols: usize, azimuth: f64, elevation: f64) -> CVector {
    let row_phase = PI * elevation.sin();
    let col_phase = PI * azimuth.sin() * elevation.cos();
    DVector::from_fn(rows * cols, |i, _| {
        let (r, c) = (i / cols, i % cols);
        Complex64::from_polar(1.0, row_phase * r as f64 + col_phase * c as f64)
    })
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `sqrt(k/(1+k)) * los + sqrt(1/(1+k)) * nlos`, NLoS entries drawn in
/// column-major order.
pub fn draw_rician<R: Rng + ?Sized>(los: &CMatrix, kappa: f64, rng: &mut R) -> CMatrix {
    let los_w = (kappa / (1.0 + kappa)).sqrt();
    let nlos_w = (1.0 / (1.0 + kappa)).sqrt();
    let mut out = los * Complex64::from(los_w);
    for v in out.iter_mut() {
        *v += complex_normal(rng) * nlos_w;
    }
    out
}

fn draw_rician_vec<R: Rng + ?Sized>(los: CVector, kappa: f64, rng: &mut R) -> CVector {
    let n = los.len();
    let m = draw_rician(&DMatrix::from_column_slice(n, 1, los.as_slice()), kappa, rng);
    DVector::from_column_slice(m.as_slice())
}

fn ula_angle(at: (f64, f64), toward: (f64, f64)) -> f64 {
    (toward.0 - at.0).atan2(toward.1 - at.1)
}

fn upa_azimuth(at: (f64, f64), toward: (f64, f64)) -> f64 {
    (toward.1 - at.1).atan2(-(toward.0 - at.0))
}

/// Draw every link of `s` from the trial seeded by `seed`.
///
/// Each link has its own stream, drawn column-major, so for a fixed seed
/// the channels of one link do not depend on the dimensions of another.
pub fn synthesize_channels(s: &Scenario, seed: u64) -> ChannelSet {
    let geo = &s.geometry;
    let d = s.link_distances().clamped();
    let eta = &s.pathloss_exponents;
    let kappa = &s.rician_factors;
    let (rows, cols) = s.upa_shape;
    let scale = |d: f64, eta: f64| Complex64::from(path_loss(d, s.pathloss_ref_db, eta).sqrt());

    let los_en = steering_ula(s.m_antennas, ula_angle(geo.en(), geo.user()));
    let mut rng = substream(seed, Substream::FadingUserEn);
    let h_en = draw_rician_vec(los_en, kappa.user_en, &mut rng) * scale(d.user_en, eta.user_en);

    let los_r = steering_upa(rows, cols, upa_azimuth(geo.hrris(), geo.user()), 0.0);
    let mut rng = substream(seed, Substream::FadingUserHrris);
    let h_r =
        draw_rician_vec(los_r, kappa.user_hrris, &mut rng) * scale(d.user_hrris, eta.user_hrris);

    let los_e = steering_ula(s.e_antennas, ula_angle(geo.eve(), geo.user()));
    let mut rng = substream(seed, Substream::FadingUserEve);
    let h_e_est = draw_rician_vec(los_e, kappa.user_eve, &mut rng) * scale(d.user_eve, eta.user_eve);

    let arrive = steering_ula(s.m_antennas, ula_angle(geo.en(), geo.hrris()));
    let depart = steering_upa(rows, cols, upa_azimuth(geo.hrris(), geo.en()), 0.0);
    let los_g = &arrive * depart.transpose();
    let mut rng = substream(seed, Substream::FadingHrrisEn);
    let g = draw_rician(&los_g, kappa.hrris_en, &mut rng) * scale(d.hrris_en, eta.hrris_en);

    let mut rng = substream(seed, Substream::CsiError);
    let h_e_true = perturb_within(&h_e_est, s.csi_error_bound, &mut rng);

    ChannelSet {
        h_en,
        h_r,
        h_e_true,
        h_e_est,
        g,
    }
}

/// `est + e` with `e` in a uniformly random direction and
/// `||e|| = rho * eps * ||est||`, `rho ~ U[0, 1]`.
pub fn perturb_within<R: Rng + ?Sized>(est: &CVector, eps: f64, rng: &mut R) -> CVector {
    let dir = DVector::from_fn(est.len(), |_, _| complex_normal(rng));
    let rho: f64 = rng.random();
    let norm = dir.norm();
    if norm == 0.0 || eps == 0.0 {
        return est.clone();
    }
    // Shrink by a few ulps so rounding in the sum cannot breach the bound.
    let magnitude = rho * eps * est.norm() * (1.0 - 4.0 * f64::EPSILON);
    est + dir * Complex64::from(magnitude / norm)
}
