//! Large-surface gain factors of coherent group coupling.
//!
//! For i.i.d. unit-variance complex Gaussian `m_g`-vectors, `E‖h_R‖·E‖h_T‖`
//! equals `κ(m_g) = [Γ(m_g+½)/Γ(m_g)]²`, with `κ(1) = π/4`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::channel::complex_gaussian;
use crate::error::invalid;
use crate::Result;

pub fn kappa(m_g: usize) -> Result<f64> {
    if m_g < 1 {
        return Err(invalid!("group size must be at least 1"));
    }
    let x = m_g as f64;
    let log_ratio = libm::lgamma(x + 0.5) - libm::lgamma(x);
    Ok(libm::exp(2.0 * log_ratio))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEntry {
    pub m_g: usize,
    pub kappa: f64,
}

pub fn kappa_table(group_sizes: &[usize]) -> Result<Vec<KappaEntry>> {
    group_sizes
        .iter()
        .map(|&m_g| {
            Ok(KappaEntry {
                m_g,
                kappa: kappa(m_g)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdGain {
    /// `10·log10(κ²/(π²/16))`: coherent group gain against one diagonal element.
    pub raw_db: f64,
    /// `10·log10(κ/m_g · 16/π²)`: the same per element; tends to
    /// `10·log10(16/π²) ≈ 2.10` dB.
    pub normalized_db: f64,
}

pub fn bd_gain_db(m_g: usize) -> Result<BdGain> {
    let k = kappa(m_g)?;
    Ok(BdGain {
        raw_db: 10.0 * libm::log10(k * k / (PI * PI / 16.0)),
        normalized_db: 10.0 * libm::log10(k / m_g as f64 * 16.0 / (PI * PI)),
    })
}

/// Per-element gain limit `10·log10(16/π²)`.
pub fn bd_gain_limit_db() -> f64 {
    10.0 * libm::log10(16.0 / (PI * PI))
}

/// Monte-Carlo mean of `‖h_R‖·‖h_T‖` for independent unit-variance complex
/// Gaussian `m_g`-vectors.
pub fn empirical_per_group_gain<R: Rng + ?Sized>(
    m_g: usize,
    runs: usize,
    rng: &mut R,
) -> Result<f64> {
    if m_g < 1 || runs < 1 {
        return Err(invalid!("need m_g ≥ 1 and runs ≥ 1"));
    }
    let mut total = 0.0;
    for _ in 0..runs {
        let mut nr = 0.0;
        let mut nt = 0.0;
        for _ in 0..m_g {
            nr += complex_gaussian(rng).norm_sqr();
            nt += complex_gaussian(rng).norm_sqr();
        }
        total += libm::sqrt(nr * nt);
    }
    Ok(total / runs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::run_rng;

    #[test]
    fn closed_values() {
        assert_eq!(kappa(1).unwrap(), PI / 4.0);
        assert!((kappa(2).unwrap() - 9.0 * PI / 16.0).abs() < 1e-13);
        assert!((kappa(4).unwrap() - 3.75831).abs() < 1e-4);
        let g = 6.5625 * libm::sqrt(PI) / 6.0;
        assert!((kappa(4).unwrap() - g * g).abs() < 1e-12);
        assert!(kappa(0).is_err());
    }

    #[test]
    fn gamma_ratio_bounds() {
        let mut prev = 0.0;
        for m in 1..=1024 {
            let k = kappa(m).unwrap();
            assert!(k > prev);
            let gap = m as f64 - k;
            assert!(gap > 0.0 && gap <= 0.25 + 1e-12, "m={m} gap={gap}");
            prev = k;
        }
    }

    #[test]
    fn gain_values() {
        assert!(bd_gain_db(1).unwrap().raw_db.abs() < 1e-12);
        assert!(
            (bd_gain_db(1).unwrap().normalized_db - 10.0 * libm::log10(4.0 / PI)).abs() < 1e-12
        );
        assert!((bd_gain_db(4).unwrap().normalized_db - 1.83).abs() < 0.005);
        assert!((bd_gain_db(64).unwrap().normalized_db - 2.10).abs() < 0.05);
        assert!((bd_gain_limit_db() - 2.0982).abs() < 1e-4);
    }

    #[test]
    fn monte_carlo_matches_kappa() {
        for m in [1, 4] {
            let est = empirical_per_group_gain(m, 20_000, &mut run_rng(3, m as u64)).unwrap();
            assert!((est / kappa(m).unwrap() - 1.0).abs() < 0.02, "m={m}: {est}");
        }
    }

    #[test]
    fn table_lists_requested_sizes() {
        let t = kappa_table(&[1, 2, 8]).unwrap();
        assert_eq!(t.iter().map(|e| e.m_g).collect::<Vec<_>>(), [1, 2, 8]);
        assert!(kappa_table(&[0]).is_err());
    }
}
