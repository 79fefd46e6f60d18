//! Independent reference computations.
//!
//! The covariance oracle propagates second moments of the site coordinates
//! with the exact Heisenberg-picture solution of the post-quench Hamiltonian
//! and never touches a scale factor `b_j(t)`. The kernel oracle discretizes
//! the single-site reduced density matrix of a two-oscillator state on a
//! spatial grid and diagonalizes it directly.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::chain::{build_coupling_matrix, eigendecompose, laplacian, ChainSpec, Phase};
use crate::entanglement::{renyi_single, ParameterSchedule, Partition};
use crate::ermakov::Schedule;
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::grid::TimeGrid;
use crate::linalg::{max_abs, sym_apply, symmetrize, symplectic_form};

/// Exact phase-space propagator `S(t)` of `H = (p.p + x^T K x)/2`.
#[derive(Debug, Clone)]
pub struct SymplecticPropagator {
    /// Columns are the post-quench eigenvectors.
    v: DMatrix<f64>,
    freq: Vec<f64>,
}

impl SymplecticPropagator {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        spec.validate()?;
        let modes = eigendecompose(&build_coupling_matrix(spec, Phase::Post))?;
        Ok(Self {
            v: modes.u().transpose(),
            freq: modes.lambda().iter().map(|&l| l.max(0.0).sqrt()).collect(),
        })
    }

    fn rotate(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.v.clone();
        for (j, &w) in self.freq.iter().enumerate() {
            scaled.column_mut(j).scale_mut(f(w));
        }
        symmetrize(&(scaled * self.v.transpose()))
    }

    /// `S(t)` acting on `(x, p)`.
    pub fn matrix(&self, t: f64) -> DMatrix<f64> {
        let n = self.v.nrows();
        let c = self.rotate(|w| (w * t).cos());
        let s_over_w = self.rotate(|w| if w * t == 0.0 { t } else { (w * t).sin() / w });
        let w_s = self.rotate(|w| w * (w * t).sin());
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&c);
        s.view_mut((0, n), (n, n)).copy_from(&s_over_w);
        s.view_mut((n, 0), (n, n)).copy_from(&(-w_s));
        s.view_mut((n, n), (n, n)).copy_from(&c);
        s
    }

    /// `max |S J S^T - J|`.
    pub fn symplectic_defect(&self, t: f64) -> f64 {
        let s = self.matrix(t);
        let j = symplectic_form(self.v.nrows());
        max_abs(&(&s * &j * s.transpose() - j))
    }
}

/// Ground-state covariance of `K`: `diag(K^{-1/2}/2, K^{1/2}/2)`.
pub fn ground_covariance(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = k.nrows();
    let check = |l: f64| if l > 0.0 { l } else { f64::NAN };
    let xx = sym_apply(k, "pre-quench coupling", |l| 0.5 / check(l).sqrt())?;
    let pp = sym_apply(k, "pre-quench coupling", |l| 0.5 * check(l).sqrt())?;
    if xx.iter().any(|x| x.is_nan()) {
        return Err(Error::NotPositiveDefinite("pre-quench coupling"));
    }
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&xx);
    s.view_mut((n, n), (n, n)).copy_from(&pp);
    Ok(s)
}

/// Sudden-quench covariance oracle, prepared once per chain.
#[derive(Debug, Clone)]
pub struct CovarianceOracle {
    sigma0: DMatrix<f64>,
    propagator: SymplecticPropagator,
}

impl CovarianceOracle {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        let sigma0 = ground_covariance(build_coupling_matrix(spec, Phase::Pre).as_matrix())?;
        Ok(Self {
            sigma0,
            propagator: SymplecticPropagator::new(spec)?,
        })
    }

    pub fn propagator(&self) -> &SymplecticPropagator {
        &self.propagator
    }

    pub fn covariance(&self, t: f64) -> CovarianceMatrix {
        let s = self.propagator.matrix(t);
        CovarianceMatrix {
            sigma: symmetrize(&(&s * &self.sigma0 * s.transpose())),
        }
    }

    /// Entropies of the kept subsystem, in the order of `alphas`.
    pub fn entropies(&self, partition: &Partition, t: f64, alphas: &[u32]) -> Result<Vec<f64>> {
        let nu = reduced_symplectic(&self.covariance(t), partition)?;
        alphas
            .iter()
            .map(|&a| entropy_from_symplectic(&nu, a))
            .collect()
    }

    /// `xi_j = (2 nu_j - 1)/(2 nu_j + 1)`, ascending.
    pub fn xi(&self, partition: &Partition, t: f64) -> Result<Vec<f64>> {
        let nu = reduced_symplectic(&self.covariance(t), partition)?;
        Ok(nu.iter().map(|&v| xi_from_nu(v)).collect())
    }
}

pub fn covariance_entropy(
    spec: &ChainSpec,
    partition: &Partition,
    t: f64,
    alphas: &[u32],
) -> Result<Vec<f64>> {
    CovarianceOracle::new(spec)?.entropies(partition, t, alphas)
}

/// Symplectic eigenvalues of the kept-site block, ascending, checked against
/// the uncertainty bound and clamped to `1/2`.
pub fn reduced_symplectic(cov: &CovarianceMatrix, partition: &Partition) -> Result<Vec<f64>> {
    let nu = cov.restrict(partition.kept()).symplectic_eigenvalues()?;
    nu.into_iter()
        .map(|v| {
            if v < 0.5 - 1e-8 || v.is_nan() {
                Err(Error::Unphysical(v))
            } else {
                Ok(v.max(0.5))
            }
        })
        .collect()
}

pub fn xi_from_nu(nu: f64) -> f64 {
    (2.0 * nu - 1.0) / (2.0 * nu + 1.0)
}

pub fn entropy_from_symplectic(nu: &[f64], alpha: u32) -> Result<f64> {
    match alpha {
        0 => Err(Error::InvalidOrder(0)),
        1 => Ok(nu
            .iter()
            .map(|&v| {
                let (up, down) = (v + 0.5, v - 0.5);
                let tail = if down > 0.0 { down * down.ln() } else { 0.0 };
                up * up.ln() - tail
            })
            .sum()),
        a => nu.iter().map(|&v| renyi_single(xi_from_nu(v), a)).sum(),
    }
}

/// Covariance matrices on `grid` for a tabulated protocol, from
/// `d sigma/dt = A sigma + sigma A^T`, `A = [[0, I], [-K(t), 0]]`.
///
/// RK4 with the step count doubled until two successive resolutions agree
/// within `tolerance` on every grid sample.
pub fn schedule_covariances(
    spec: &ChainSpec,
    schedule: &ParameterSchedule,
    grid: &TimeGrid,
) -> Result<Vec<CovarianceMatrix>> {
    let n = spec.n;
    let laplacian = laplacian(spec);
    let w2: Vec<f64> = schedule.omega.iter().map(|w| w * w).collect();
    let omega_sched = Schedule::new(schedule.times.clone(), w2, schedule.interpolation)?;
    let k_sched = Schedule::new(
        schedule.times.clone(),
        schedule.k.clone(),
        schedule.interpolation,
    )?;
    let sigma0 = ground_covariance(build_coupling_matrix(spec, Phase::Pre).as_matrix())?;
    let max_k = schedule.k.iter().cloned().fold(0.0, f64::max);
    let max_w = schedule.omega.iter().cloned().fold(spec.omega_i, f64::max);
    let stiffness = (max_w * max_w + 4.0 * max_k.max(spec.k_i)).sqrt();
    let mut substeps = ((grid.dt() * stiffness / 0.1).ceil() as usize).max(1);

    let run = |substeps: usize| -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(grid.len());
        let mut sigma = sigma0.clone();
        out.push(sigma.clone());
        for step in 0..grid.len() - 1 {
            let (t0, t1) = (grid.time(step), grid.time(step + 1));
            let mut edges = vec![t0];
            edges.extend(schedule.times.iter().copied().filter(|&s| s > t0 && s < t1));
            edges.push(t1);
            for e in edges.windows(2) {
                let seg = omega_sched.segment(0.5 * (e[0] + e[1]));
                let k_at = |t: f64| {
                    DMatrix::identity(n, n) * omega_sched.value_in(seg, t)
                        + &laplacian * k_sched.value_in(seg, t)
                };
                let rhs = |t: f64, s: &DMatrix<f64>| -> DMatrix<f64> {
                    let k = k_at(t);
                    let mut a = DMatrix::zeros(2 * n, 2 * n);
                    a.view_mut((0, n), (n, n)).fill_with_identity();
                    a.view_mut((n, 0), (n, n)).copy_from(&(-k));
                    let as_ = &a * s;
                    &as_ + as_.transpose()
                };
                let count = ((e[1] - e[0]) / (grid.dt() / substeps as f64))
                    .ceil()
                    .max(1.0) as usize;
                let h = (e[1] - e[0]) / count as f64;
                for i in 0..count {
                    let t = e[0] + i as f64 * h;
                    let k1 = rhs(t, &sigma);
                    let k2 = rhs(t + 0.5 * h, &(&sigma + &k1 * (0.5 * h)));
                    let k3 = rhs(t + 0.5 * h, &(&sigma + &k2 * (0.5 * h)));
                    let k4 = rhs(t + h, &(&sigma + &k3 * h));
                    sigma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                }
            }
            out.push(symmetrize(&sigma));
        }
        out
    };

    let mut coarse = run(substeps);
    for _ in 0..20 {
        substeps *= 2;
        let fine = run(substeps);
        let worst = coarse
            .iter()
            .zip(&fine)
            .enumerate()
            .map(|(k, (a, b))| (k, max_abs(&(a - b))))
            .find(|(_, d)| !(*d <= schedule.tolerance));
        match worst {
            None => {
                return Ok(fine
                    .into_iter()
                    .map(|sigma| CovarianceMatrix { sigma })
                    .collect())
            }
            Some(_) => coarse = fine,
        }
    }
    Err(Error::StepUnderflow { time: grid.t_max() })
}

/// Uniform spatial grid `x_a = -L + a h`, `h = 2L/(M-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGrid {
    pub half_width: f64,
    pub points: usize,
}

impl KernelGrid {
    /// `L = 8/sqrt(gamma - beta)`, `M = 801`.
    pub fn default_for(gamma: f64, beta: f64) -> Result<Self> {
        if !(gamma > beta) {
            return Err(Error::NotPositiveDefinite("gamma - beta"));
        }
        Ok(Self {
            half_width: 8.0 / (gamma - beta).sqrt(),
            points: 801,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
}

/// Leading `count` eigenvalues (descending) of the discretized kernel
/// `rho(x, x') = sqrt((gamma - beta)/pi)
///   exp[i (x^2 - x'^2) z - gamma (x^2 + x'^2)/2 + beta x x']`.
///
/// `include_phase = false` drops the `z` factor.
pub fn kernel_spectrum(
    gamma: f64,
    beta: f64,
    z: f64,
    grid: &KernelGrid,
    count: usize,
    include_phase: bool,
) -> Result<Vec<f64>> {
    if !(gamma > beta) {
        return Err(Error::NotPositiveDefinite("gamma - beta"));
    }
    let m = grid.points;
    let h = grid.spacing();
    let x: Vec<f64> = (0..m).map(|a| -grid.half_width + a as f64 * h).collect();
    let norm = ((gamma - beta) / std::f64::consts::PI).sqrt() * h;
    let z = if include_phase { z } else { 0.0 };
    let kernel = DMatrix::from_fn(m, m, |a, b| {
        let (xa, xb) = (x[a], x[b]);
        let amp = norm * (-0.5 * gamma * (xa * xa + xb * xb) + beta * xa * xb).exp();
        Complex::from_polar(amp, (xa * xa - xb * xb) * z)
    });
    let trace: f64 = (0..m).map(|a| kernel[(a, a)].re).sum();
    if (trace - 1.0).abs() > 1e-4 {
        return Err(Error::GridInadequate { trace });
    }
    let hermitian = (&kernel + kernel.adjoint()) * Complex::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(hermitian, f64::EPSILON, 100 * m)
        .ok_or(Error::EigenSolver("density kernel"))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals.truncate(count);
    Ok(vals)
}

/// Largest absolute pointwise difference of two equally long series.
pub fn max_deviation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InconsistentSeries(format!(
            "lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Boundary;

    #[test]
    fn propagator_is_symplectic() {
        let spec = ChainSpec::new(6, (3.0, 2.0), (0.0, 2.5), Boundary::Periodic).unwrap();
        let p = SymplecticPropagator::new(&spec).unwrap();
        for t in [0.0, 0.7, 13.0, 99.9] {
            assert!(p.symplectic_defect(t) < 1e-10, "t={t}");
        }
    }

    #[test]
    fn single_site_ground_state() {
        let s = ground_covariance(&DMatrix::from_element(1, 1, 4.0)).unwrap();
        assert_eq!(s[(0, 0)], 0.25);
        assert_eq!(s[(1, 1)], 1.0);
    }

    #[test]
    fn static_pair_xi() {
        let spec = ChainSpec::new(2, (1.0, 12.0), (1.0, 12.0), Boundary::Open).unwrap();
        let o = CovarianceOracle::new(&spec).unwrap();
        let p = Partition::second_half(2).unwrap();
        let xi = o.xi(&p, 0.0).unwrap();
        assert!((xi[0] - 0.145_898_033_75).abs() < 1e-9);
        let s = o.entropies(&p, 0.0, &[1]).unwrap();
        assert!((s[0] - 0.486_507_9).abs() < 1e-6);
    }

    #[test]
    fn pure_kernel() {
        let g = KernelGrid::default_for(2.0, 0.0).unwrap();
        let v = kernel_spectrum(2.0, 0.0, 0.3, &g, 3, true).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-6 && v[1].abs() < 1e-6);
    }

    #[test]
    fn coarse_kernel_grid_rejected() {
        let g = KernelGrid {
            half_width: 0.3,
            points: 801,
        };
        assert!(matches!(
            kernel_spectrum(7.0 / 3.0, 2.0 / 3.0, 0.0, &g, 3, true),
            Err(Error::GridInadequate { .. })
        ));
    }

    #[test]
    fn deviation_length_checked() {
        assert!(max_deviation(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(max_deviation(&[1.0, 2.0], &[1.5, 2.0]).unwrap(), 0.5);
    }
}
