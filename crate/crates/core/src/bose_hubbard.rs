//! Two-site Bose-Hubbard model in the tunneling regime, mapped onto a pair of
//! coupled oscillators.

use serde::{Deserialize, Serialize};

use crate::chain::{Boundary, ChainSpec, Phase};
use crate::error::{Error, Result};

/// Oscillator parameters of a two-site Bose-Hubbard Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub omega: f64,
    pub k: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

/// `omega = omega_bh - J`, `k = 2 omega_bh J`, `omega_minus = omega_bh + J`.
///
/// Before the quench `omega_bh > J` is required so that a ground state exists;
/// afterwards `omega_bh = J` (a free symmetric mode) is allowed.
pub fn to_oscillator(omega_bh: f64, hopping: f64, phase: Phase) -> Result<OscillatorParams> {
    if !(omega_bh.is_finite() && hopping.is_finite()) || hopping < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "need finite omega_bh and J >= 0, got omega_bh={omega_bh}, J={hopping}"
        )));
    }
    let ok = match phase {
        Phase::Pre => omega_bh > hopping,
        Phase::Post => omega_bh >= hopping,
    };
    if !ok {
        return Err(Error::InvalidSpec(format!(
            "omega_bh={omega_bh} must exceed J={hopping}"
        )));
    }
    let omega = omega_bh - hopping;
    Ok(OscillatorParams {
        omega,
        k: 2.0 * omega_bh * hopping,
        omega_plus: omega,
        omega_minus: omega_bh + hopping,
    })
}

/// Inverse map: `(omega_bh, J)` from `(omega, k)`.
pub fn from_oscillator(omega: f64, k: f64) -> (f64, f64) {
    let w_minus = (omega * omega + 2.0 * k).sqrt();
    (0.5 * (omega + w_minus), 0.5 * (w_minus - omega))
}

/// Quench of the on-site frequency at fixed hopping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoseHubbardSpec {
    pub omega_bh_i: f64,
    pub omega_bh_f: f64,
    pub hopping: f64,
}

impl BoseHubbardSpec {
    pub fn to_chain_spec(&self) -> Result<ChainSpec> {
        let pre = to_oscillator(self.omega_bh_i, self.hopping, Phase::Pre)?;
        let post = to_oscillator(self.omega_bh_f, self.hopping, Phase::Post)?;
        ChainSpec::new(2, (pre.omega, pre.k), (post.omega, post.k), Boundary::Open)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let p = to_oscillator(3.0, 2.0, Phase::Pre).unwrap();
        assert_eq!((p.omega, p.k, p.omega_minus), (1.0, 12.0, 5.0));
        assert_eq!(p.omega_minus.powi(2), p.omega.powi(2) + 2.0 * p.k);
        let f = to_oscillator(2.15, 2.0, Phase::Post).unwrap();
        assert!((f.omega_plus - 0.15).abs() < 1e-15);
        assert!((f.omega_minus - 4.15).abs() < 1e-15);
        let free = to_oscillator(1.5, 0.0, Phase::Pre).unwrap();
        assert_eq!((free.omega, free.k), (1.5, 0.0));
    }

    #[test]
    fn inverse() {
        assert_eq!(from_oscillator(1.0, 12.0), (3.0, 2.0));
        assert_eq!(from_oscillator(0.7, 0.0), (0.7, 0.0));
    }

    #[test]
    fn ground_state_condition() {
        assert!(to_oscillator(2.0, 2.0, Phase::Pre).is_err());
        assert!(to_oscillator(2.0, 2.0, Phase::Post).is_ok());
        assert!(to_oscillator(1.0, 2.0, Phase::Post).is_err());
        assert!(to_oscillator(1.0, -0.1, Phase::Pre).is_err());
    }

    #[test]
    fn chain_spec() {
        let s = BoseHubbardSpec {
            omega_bh_i: 3.0,
            omega_bh_f: 2.15,
            hopping: 2.0,
        }
        .to_chain_spec()
        .unwrap();
        assert_eq!((s.n, s.boundary), (2, Boundary::Open));
        assert_eq!((s.omega_i, s.k_i), (1.0, 12.0));
        assert!((s.omega_f - 0.15).abs() < 1e-15 && (s.k_f - 8.6).abs() < 1e-14);
    }
}
