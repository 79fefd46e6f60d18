//! Time-dependent Gaussian state of the whole chain.
//!
//! The wavefunction is `psi(x) ~ exp(-x^T (Omega - 2i Btilde) x / 2)` with
//! `Omega = U^T diag(sqrt(lambda_j(0)) / b_j^2) U` and
//! `Btilde = U^T diag(b_j' / (2 b_j)) U`.

use nalgebra::{DMatrix, DVector};

use crate::chain::NormalModes;
use crate::ermakov::{compute_tau, ModeSolution};
use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, symmetrize, symplectic_eigenvalues};

/// Per-mode phase data: zero-point energy `E_j = sqrt(lambda_j(0)) / 2` and
/// scaled time `tau_j`. Never used by entropies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePhase {
    pub energy: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub omega: DMatrix<f64>,
    pub btilde: DMatrix<f64>,
    pub phases: Option<Vec<ModePhase>>,
    pub t: f64,
}

impl GaussianState {
    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }
}

pub fn assemble_state(
    modes: &NormalModes,
    solutions: &[ModeSolution],
    t: f64,
) -> Result<GaussianState> {
    if solutions.len() != modes.len() {
        return Err(Error::ModeCountMismatch {
            expected: modes.len(),
            found: solutions.len(),
        });
    }
    let mut width = DVector::zeros(modes.len());
    let mut chirp = DVector::zeros(modes.len());
    for (j, sol) in solutions.iter().enumerate() {
        let (b, bdot) = sol.eval(t);
        width[j] = modes.lambda()[j].sqrt() / (b * b);
        chirp[j] = bdot / (2.0 * b);
    }
    let u = modes.u();
    let rotate = |d: &DVector<f64>| symmetrize(&(u.transpose() * DMatrix::from_diagonal(d) * u));
    Ok(GaussianState {
        omega: rotate(&width),
        btilde: rotate(&chirp),
        phases: None,
        t,
    })
}

/// [`assemble_state`] plus the phase bookkeeping `(E_j, tau_j)`.
pub fn assemble_state_with_phases(
    modes: &NormalModes,
    solutions: &[ModeSolution],
    t: f64,
) -> Result<GaussianState> {
    let mut state = assemble_state(modes, solutions, t)?;
    state.phases = Some(
        solutions
            .iter()
            .zip(modes.lambda())
            .map(|(sol, &l)| ModePhase {
                energy: 0.5 * l.sqrt(),
                tau: compute_tau(sol, t),
            })
            .collect(),
    );
    Ok(state)
}

/// Symmetrized second moments, ordered `(x_1..x_N, p_1..p_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub sigma: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn modes(&self) -> usize {
        self.sigma.nrows() / 2
    }

    /// Covariance of the listed sites, in `(x_B, p_B)` order.
    pub fn restrict(&self, sites: &[usize]) -> CovarianceMatrix {
        let n = self.modes();
        let idx: Vec<usize> = sites
            .iter()
            .copied()
            .chain(sites.iter().map(|s| s + n))
            .collect();
        CovarianceMatrix {
            sigma: DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.sigma[(idx[i], idx[j])]),
        }
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.sigma, "covariance matrix")
    }
}

pub fn to_covariance(state: &GaussianState) -> Result<CovarianceMatrix> {
    let n = state.dim();
    let inv = spd_inverse(&state.omega, "Omega")?;
    let b = &state.btilde;
    let xx = &inv * 0.5;
    let xp = &inv * b;
    let pp = symmetrize(&(&state.omega * 0.5 + b * &inv * b * 2.0));
    let mut sigma = DMatrix::zeros(2 * n, 2 * n);
    sigma.view_mut((0, 0), (n, n)).copy_from(&xx);
    sigma.view_mut((0, n), (n, n)).copy_from(&xp);
    sigma.view_mut((n, 0), (n, n)).copy_from(&xp.transpose());
    sigma.view_mut((n, n), (n, n)).copy_from(&pp);
    Ok(CovarianceMatrix {
        sigma: symmetrize(&sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{quench_modes, Boundary, ChainSpec};
    use crate::ermakov::solve_sudden;

    fn pair_modes(l1: f64, l2: f64) -> NormalModes {
        let r = 1.0 / 2f64.sqrt();
        let u = DMatrix::from_row_slice(2, 2, &[r, r, r, -r]);
        NormalModes::from_parts(u, vec![l1, l2]).unwrap()
    }

    #[test]
    fn static_pair_width_matrix() {
        let modes = pair_modes(1.0, 5.0);
        let sols = vec![
            solve_sudden(1.0, 1.0).unwrap(),
            solve_sudden(5.0, 5.0).unwrap(),
        ];
        let s = assemble_state(&modes, &sols, 0.0).unwrap();
        let (a, d) = ((1.0 + 5f64.sqrt()) / 2.0, (1.0 - 5f64.sqrt()) / 2.0);
        assert!((s.omega[(0, 0)] - a).abs() < 1e-12);
        assert!((s.omega[(0, 1)] - d).abs() < 1e-12);
        assert!((s.omega[(0, 0)] - 1.618_034).abs() < 1e-6);
        assert_eq!(s.btilde.amax(), 0.0);
    }

    #[test]
    fn pair_chirp_offdiagonal() {
        let modes = pair_modes(1.0, 17.2);
        let sols = vec![
            solve_sudden(1.0, 0.0225).unwrap(),
            solve_sudden(17.0, 17.2225).unwrap(),
        ];
        let t = 1.3;
        let s = assemble_state(&modes, &sols, t).unwrap();
        let (b1, d1) = sols[0].eval(t);
        let (b2, d2) = sols[1].eval(t);
        let a2 = d1 / (4.0 * b1) - d2 / (4.0 * b2);
        assert!((s.btilde[(0, 1)] - a2).abs() < 1e-12);
    }

    #[test]
    fn mode_count_checked() {
        let modes = pair_modes(1.0, 2.0);
        let sols = vec![solve_sudden(1.0, 1.0).unwrap()];
        assert_eq!(
            assemble_state(&modes, &sols, 0.0),
            Err(Error::ModeCountMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn determinant_normalization() {
        let spec = ChainSpec::new(5, (3.0, 2.0), (0.3, 2.5), Boundary::Periodic).unwrap();
        let qm = quench_modes(&spec).unwrap();
        let sols: Vec<_> = qm
            .pre
            .lambda()
            .iter()
            .zip(&qm.post)
            .map(|(&a, &b)| solve_sudden(a, b).unwrap())
            .collect();
        let t = 4.2;
        let s = assemble_state(&qm.pre, &sols, t).unwrap();
        let expect: f64 = sols
            .iter()
            .zip(qm.pre.lambda())
            .map(|(m, &l)| l.sqrt() / m.eval(t).0.powi(2))
            .product();
        assert!((s.omega.determinant() / expect - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_state_is_pure() {
        let spec = ChainSpec::new(6, (3.0, 2.0), (0.1, 2.5), Boundary::Periodic).unwrap();
        let qm = quench_modes(&spec).unwrap();
        let sols: Vec<_> = qm
            .pre
            .lambda()
            .iter()
            .zip(&qm.post)
            .map(|(&a, &b)| solve_sudden(a, b).unwrap())
            .collect();
        for t in [0.0, 3.3, 47.0] {
            let cov = to_covariance(&assemble_state(&qm.pre, &sols, t).unwrap()).unwrap();
            for nu in cov.symplectic_eigenvalues().unwrap() {
                assert!((nu - 0.5).abs() < 1e-9, "t={t} nu={nu}");
            }
        }
    }

    #[test]
    fn phases_on_request() {
        let modes = pair_modes(1.0, 5.0);
        let sols = vec![
            solve_sudden(1.0, 1.0).unwrap(),
            solve_sudden(5.0, 5.0).unwrap(),
        ];
        assert!(assemble_state(&modes, &sols, 2.0).unwrap().phases.is_none());
        let s = assemble_state_with_phases(&modes, &sols, 2.0).unwrap();
        let ph = s.phases.unwrap();
        assert!((ph[1].energy - 0.5 * 5f64.sqrt()).abs() < 1e-15);
        assert!((ph[0].tau - 2.0).abs() < 1e-12);
    }
}
