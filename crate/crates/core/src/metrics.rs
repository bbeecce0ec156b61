//! Link-level figures of merit: SINR with interference treated as noise,
//! spectral efficiency, and normalized signal and interference gains.

use num_complex::Complex64;

use crate::channel::ChannelVector;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    /// Linear SINR.
    pub sinr: f64,
    /// `log2(1 + sinr)`, bit/s/Hz.
    pub se: f64,
    /// `|v^H h_k|² / ‖v‖²`.
    pub signal_gain: f64,
    /// `Σ_{i≠k} |v^H h_i|² / ‖v‖²` (unweighted by power).
    pub interference_gain: f64,
}

fn combiner_norm_sqr(v: &[Complex64]) -> Result<f64> {
    let n = linalg::norm_sqr(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector("combiner"));
    }
    Ok(n)
}

/// SINR of UE `k` when its signal is combined with `v`:
/// `p_k|v^H h_k|² / (Σ_{i≠k} p_i|v^H h_i|² + σ²‖v‖²)`.
pub fn sinr(
    v: &[Complex64],
    channels: &[ChannelVector],
    powers: &[f64],
    noise_power: f64,
    k: usize,
) -> Result<f64> {
    Ok(link_metrics(v, channels, powers, noise_power, k)?.sinr)
}

/// All link metrics of UE `k` for combiner `v`.
pub fn link_metrics(
    v: &[Complex64],
    channels: &[ChannelVector],
    powers: &[f64],
    noise_power: f64,
    k: usize,
) -> Result<LinkMetrics> {
    if k >= channels.len() {
        return Err(Error::InvalidArgument(format!(
            "target UE {k} out of range for {} channels",
            channels.len()
        )));
    }
    if powers.len() != channels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} powers for {} channels",
            powers.len(),
            channels.len()
        )));
    }
    if let Some(h) = channels.iter().find(|h| h.len() != v.len()) {
        return Err(Error::DimensionMismatch(format!(
            "combiner has length {}, channel has length {}",
            v.len(),
            h.len()
        )));
    }
    let v_norm = combiner_norm_sqr(v)?;

    let mut signal = 0.0;
    let mut interference = 0.0;
    let mut interference_gain = 0.0;
    for (i, (h, &p)) in channels.iter().zip(powers).enumerate() {
        let g = linalg::dot(v, h.coefficients()).norm_sqr();
        if i == k {
            signal = g;
        } else {
            interference += p * g;
            interference_gain += g;
        }
    }
    let sinr = powers[k] * signal / (interference + noise_power * v_norm);
    Ok(LinkMetrics {
        sinr,
        se: se(sinr),
        signal_gain: signal / v_norm,
        interference_gain: interference_gain / v_norm,
    })
}

/// Normalized gain `|v^H h|² / ‖v‖²`.
pub fn normalized_gain(v: &[Complex64], h: &ChannelVector) -> Result<f64> {
    if v.len() != h.len() {
        return Err(Error::DimensionMismatch(format!(
            "combiner has length {}, channel has length {}",
            v.len(),
            h.len()
        )));
    }
    let v_norm = combiner_norm_sqr(v)?;
    Ok(linalg::dot(v, h.coefficients()).norm_sqr() / v_norm)
}

/// Spectral efficiency `log2(1 + sinr)` in bit/s/Hz.
pub fn se(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelModel;
    use crate::combining::{mmse_combiner, mr_combiner};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn channels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<ChannelVector> {
        (0..k)
            .map(|_| ChannelVector::new(random_vec(rng, n), ChannelModel::Exact, 0.01))
            .collect()
    }

    #[test]
    fn se_values() {
        assert_eq!(se(0.0), 0.0);
        assert!((se(1.0) - 1.0).abs() < 1e-15);
        assert!((se(3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_user_mr_sinr_is_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hs = channels(&mut rng, 12, 1);
        let v = mr_combiner(&hs).unwrap();
        let g = sinr(v.vector(0), &hs, &[0.1], 1e-3, 0).unwrap();
        let expected = 0.1 * hs[0].norm_sqr() / 1e-3;
        assert!((g / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_interferers_do_not_count() {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let hs = vec![
            ChannelVector::new(vec![o, o, z], ChannelModel::Exact, 0.01),
            ChannelVector::new(vec![z, z, o], ChannelModel::Exact, 0.01),
        ];
        let v = [Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0), z];
        let m = link_metrics(&v, &hs, &[0.3, 5.0], 0.01, 0).unwrap();
        let expected = 0.3 * 2.5f64.powi(2) / (0.01 * 4.25);
        assert!((m.sinr / expected - 1.0).abs() < 1e-14);
        assert_eq!(m.interference_gain, 0.0);
    }

    #[test]
    fn matches_term_by_term_evaluation() {
        // K=3, N=6: expand every inner product by hand.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hs = channels(&mut rng, 6, 3);
        let v = random_vec(&mut rng, 6);
        let powers = [0.2, 0.7, 1.3];
        let noise = 0.05;
        for k in 0..3 {
            let mut terms = [0.0; 3];
            for (i, h) in hs.iter().enumerate() {
                let mut re = 0.0;
                let mut im = 0.0;
                for n in 0..6 {
                    let (a, b) = (v[n], h.coefficients()[n]);
                    // conj(a) * b
                    re += a.re * b.re + a.im * b.im;
                    im += a.re * b.im - a.im * b.re;
                }
                terms[i] = re * re + im * im;
            }
            let v_norm: f64 = v.iter().map(|c| c.re * c.re + c.im * c.im).sum();
            let interf: f64 = (0..3)
                .filter(|&i| i != k)
                .map(|i| powers[i] * terms[i])
                .sum();
            let expected = powers[k] * terms[k] / (interf + noise * v_norm);
            let got = sinr(&v, &hs, &powers, noise, k).unwrap();
            assert!((got / expected - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_combiner_rejected() {
        let hs = vec![ChannelVector::new(
            vec![Complex64::new(1.0, 0.0)],
            ChannelModel::Exact,
            0.01,
        )];
        let z = [Complex64::new(0.0, 0.0)];
        assert!(matches!(
            sinr(&z, &hs, &[1.0], 1.0, 0),
            Err(Error::ZeroVector(_))
        ));
        assert!(normalized_gain(&z, &hs[0]).is_err());
        assert!(sinr(&[Complex64::new(1.0, 0.0)], &hs, &[1.0], 1.0, 3).is_err());
    }

    #[test]
    fn normalized_gain_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = channels(&mut rng, 9, 1).remove(0);
        let v = mr_combiner(std::slice::from_ref(&h)).unwrap();
        assert!((normalized_gain(v.vector(0), &h).unwrap() / h.norm_sqr() - 1.0).abs() < 1e-12);
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let h2 = ChannelVector::new(vec![o, z], ChannelModel::Exact, 0.01);
        assert_eq!(normalized_gain(&[z, o], &h2).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn normalized_gain_obeys_cauchy_schwarz(seed in any::<u64>(), n in 1usize..24) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = ChannelVector::new(random_vec(&mut rng, n), ChannelModel::Exact, 0.01);
            let v = random_vec(&mut rng, n);
            let g = normalized_gain(&v, &h).unwrap();
            prop_assert!(g <= h.norm_sqr() * (1.0 + 1e-12));
            // Equality for v ∝ h.
            let c = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(0.1..2.0));
            let aligned: Vec<_> = h.coefficients().iter().map(|x| x * c).collect();
            let g = normalized_gain(&aligned, &h).unwrap();
            prop_assert!((g / h.norm_sqr() - 1.0).abs() < 1e-12);
            // Strict inequality for a vector with a component orthogonal to h.
            if n >= 2 {
                let mut off = aligned.clone();
                off[0] += Complex64::new(0.5, 0.0) * h.coefficients()[1].conj().norm().max(0.1);
                let proj = linalg::dot(h.coefficients(), &off) / h.norm_sqr();
                let ortho: f64 = off.iter().zip(h.coefficients()).map(|(a, b)| (a - proj * b).norm_sqr()).sum();
                if ortho > 1e-10 * linalg::norm_sqr(&off) {
                    prop_assert!(normalized_gain(&off, &h).unwrap() < h.norm_sqr());
                }
            }
        }

        #[test]
        fn sinr_is_scale_invariant(seed in any::<u64>(), re in -1e3f64..1e3, im in -1e3f64..1e3) {
            prop_assume!(re.hypot(im) > 1e-6);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hs = channels(&mut rng, 8, 3);
            let v = random_vec(&mut rng, 8);
            let c = Complex64::new(re, im);
            let scaled: Vec<_> = v.iter().map(|x| x * c).collect();
            let powers = [0.1, 0.2, 0.3];
            for k in 0..3 {
                let a = sinr(&v, &hs, &powers, 0.01, k).unwrap();
                let b = sinr(&scaled, &hs, &powers, 0.01, k).unwrap();
                prop_assert!((a / b - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn mmse_sinr_drops_when_an_interferer_gets_louder(seed in any::<u64>(), boost in 1.0f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hs = channels(&mut rng, 6, 4);
            let noise = 0.05;
            let base = [0.1, 0.2, 0.3, 0.4];
            let mut louder = base;
            louder[2] *= boost;
            let a = mmse_combiner(&hs, &base, noise).unwrap();
            let b = mmse_combiner(&hs, &louder, noise).unwrap();
            let s_a = sinr(a.vector(0), &hs, &base, noise, 0).unwrap();
            let s_b = sinr(b.vector(0), &hs, &louder, noise, 0).unwrap();
            prop_assert!(s_b <= s_a * (1.0 + 1e-10));
        }
    }
}
