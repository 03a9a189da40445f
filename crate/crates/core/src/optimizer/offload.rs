use crate::rates::latency;
use crate::scenario::ComputeParams;

/// Offload volume balancing local and edge latency, rounded to whichever
/// neighbouring integer gives the smaller overall latency. Zero secrecy
/// rate means nothing is offloaded.
pub fn optimal_offload(secrecy_rate: f64, cp: &ComputeParams) -> u64 {
    if secrecy_rate.is_nan() || secrecy_rate <= 0.0 {
        return 0;
    }
    let total = cp.total_bits as f64;
    let nu = cp.cycles_per_bit as f64;
    let (fl, fe) = (cp.local_rate, cp.edge_rate);
    let balance = total * nu * secrecy_rate * fe / (fe * fl + nu * secrecy_rate * (fe + fl));
    let balance = balance.clamp(0.0, total);

    let lo = balance.floor() as u64;
    let hi = (balance.ceil() as u64).min(cp.total_bits);
    let cost = |ell: u64| {
        latency(ell, secrecy_rate, cp)
            .expect("candidate within range")
            .total
    };
    if cost(hi) < cost(lo) {
        hi
    } else {
        lo
    }
}

/// Real-valued balance point where local and edge latency coincide.
pub fn balance_point(secrecy_rate: f64, cp: &ComputeParams) -> f64 {
    let nu = cp.cycles_per_bit as f64;
    let (fl, fe) = (cp.local_rate, cp.edge_rate);
    cp.total_bits as f64 * nu * secrecy_rate * fe / (fe * fl + nu * secrecy_rate * (fe + fl))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_stays_local() {
        assert_eq!(optimal_offload(0.0, &ComputeParams::default()), 0);
    }

    #[test]
    fn reference_constants_two_megabit() {
        let cp = ComputeParams::default();
        // 3e5 * 750 * 2e6 * 2e10 / (2e10 * 5e8 + 750 * 2e6 * 2.05e10)
        let expected = 9e24 / 4.075e19;
        let b = balance_point(2e6, &cp);
        assert!((b - expected).abs() < 1e-6, "{b}");
        let ell = optimal_offload(2e6, &cp);
        assert!(ell == 220_858 || ell == 220_859, "{ell}");
        let d = latency(ell, 2e6, &cp).unwrap();
        let quantum = 750.0 / 5e8 + 1.0 / 2e6 + 750.0 / 2e10;
        assert!((d.local - d.edge).abs() <= quantum);
        for other in [ell - 1, ell + 1] {
            assert!(latency(other, 2e6, &cp).unwrap().total >= d.total);
        }
    }

    #[test]
    fn infinite_edge_speed_limit() {
        let cp = ComputeParams {
            edge_rate: 1e150,
            ..ComputeParams::default()
        };
        let r = 2e6;
        let limit = 3e5 * 750.0 * r / (5e8 + 750.0 * r);
        assert!((balance_point(r, &cp) - limit).abs() / limit < 1e-12);
        assert!(limit < 3e5);
    }
}
