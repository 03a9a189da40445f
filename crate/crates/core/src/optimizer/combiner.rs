use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::rates::{effective_channel, noise_covariance, HrrisState};
use crate::CVector;

/// Receive combiner maximizing the SINR for a fixed surface:
/// `sqrt(P / sigma^2) * Q^{-1} h`.
///
/// Q is the identity plus a Gram matrix, so it is always positive definite.
pub fn optimal_combiner(hs: &HrrisState, cs: &ChannelSet, p_user: f64, sigma2: f64) -> CVector {
    let h = effective_channel(cs, hs).expect("surface state does not match channels");
    let q = noise_covariance(hs, cs);
    let chol = q
        .cholesky()
        .expect("identity plus a Gram matrix is positive definite");
    chol.solve(&h) * Complex64::from((p_user / sigma2).sqrt())
}
