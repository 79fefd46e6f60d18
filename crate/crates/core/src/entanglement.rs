//! Partial traces of the chain state, xi-spectra and Renyi/von Neumann
//! entropies.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::chain::{quench_modes, ChainSpec, QuenchModes};
use crate::ermakov::{
    integrate_general, solve_sudden, Interpolation, ModeSolution, QuenchProtocol, Schedule,
};
use crate::error::{Error, Result};
use crate::gaussian::{assemble_state, GaussianState};
use crate::grid::TimeGrid;
use crate::linalg::{
    antisymmetrize, max_abs, spd_inverse, submatrix, sym_apply, sym_eigen, symmetrize,
    symplectic_eigenvalues,
};

/// Split of the sites into a traced subsystem A and a kept subsystem B.
/// Site indices are 0-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    traced: Vec<usize>,
    kept: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, traced: &[usize]) -> Result<Self> {
        let mut t = traced.to_vec();
        t.sort_unstable();
        t.dedup();
        if t.len() != traced.len() {
            return Err(Error::InvalidPartition("duplicate traced site".into()));
        }
        if let Some(&s) = t.iter().find(|&&s| s >= n) {
            return Err(Error::InvalidPartition(format!(
                "site {s} out of range for {n} sites"
            )));
        }
        if t.is_empty() || t.len() == n {
            return Err(Error::InvalidPartition(
                "both subsystems must be non-empty".into(),
            ));
        }
        let kept = (0..n).filter(|s| t.binary_search(s).is_err()).collect();
        Ok(Self { n, traced: t, kept })
    }

    /// Builds a partition from 1-based site labels.
    pub fn from_one_based(n: usize, traced: &[usize]) -> Result<Self> {
        if let Some(&s) = traced.iter().find(|&&s| s == 0 || s > n) {
            return Err(Error::InvalidPartition(format!(
                "site label {s} outside 1..={n}"
            )));
        }
        let zero: Vec<usize> = traced.iter().map(|s| s - 1).collect();
        Self::new(n, &zero)
    }

    /// Traces out sites `n/2 .. n` (0-based), keeping the first half.
    pub fn second_half(n: usize) -> Result<Self> {
        let traced: Vec<usize> = (n / 2..n).collect();
        Self::new(n, &traced)
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            traced: self.kept.clone(),
            kept: self.traced.clone(),
        }
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn traced(&self) -> &[usize] {
        &self.traced
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }
}

/// Kernel of the reduced density matrix on the kept sites:
///
/// `rho(x, x') ~ exp[i(x^T Z x - x'^T Z x') - (x^T gamma x + x'^T gamma x')/2
///   + x^T (beta + i twist) x']`.
///
/// `twist` is antisymmetric and vanishes whenever the traced/kept coupling
/// blocks of `Omega` and `Btilde` are aligned (always for a single kept site).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub gamma: DMatrix<f64>,
    pub beta: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub twist: DMatrix<f64>,
    pub t: f64,
}

pub fn reduce(state: &GaussianState, partition: &Partition) -> Result<ReducedState> {
    if state.dim() != partition.sites() {
        return Err(Error::InvalidPartition(format!(
            "partition is for {} sites, state has {}",
            partition.sites(),
            state.dim()
        )));
    }
    let (a, b) = (partition.traced(), partition.kept());
    let w = spd_inverse(&submatrix(&state.omega, a, a), "traced block of Omega")?;
    let p = submatrix(&state.omega, a, b);
    let q = submatrix(&state.btilde, a, b);
    let pwp = p.transpose() * &w * &p;
    let qwq = q.transpose() * &w * &q;
    let qwp = q.transpose() * &w * &p;
    let gamma = symmetrize(&(submatrix(&state.omega, b, b) - &pwp * 0.5 + &qwq * 2.0));
    let beta = symmetrize(&(&pwp * 0.5 + &qwq * 2.0));
    let z = symmetrize(&(submatrix(&state.btilde, b, b) - &qwp));
    // p^T w q - q^T w p
    let twist = antisymmetrize(&(qwp.transpose() * 2.0));
    Ok(ReducedState {
        gamma,
        beta,
        z,
        twist,
        t: state.t,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiSpectrum {
    /// Ascending.
    pub xi: Vec<f64>,
    /// Normalized coupling eigenvalues `beta_tilde_j`, ascending.
    pub beta_tilde: Vec<f64>,
}

impl XiSpectrum {
    pub fn from_beta_tilde(beta_tilde: Vec<f64>) -> Result<Self> {
        let mut bt = Vec::with_capacity(beta_tilde.len());
        for b in beta_tilde {
            if b <= -1e-8 || b >= 1.0 || b.is_nan() {
                return Err(Error::BetaTildeOutOfRange(b));
            }
            bt.push(b.max(0.0));
        }
        bt.sort_by(f64::total_cmp);
        let xi = bt
            .iter()
            .map(|&b| b / (1.0 + (1.0 - b * b).sqrt()))
            .collect();
        Ok(Self { xi, beta_tilde: bt })
    }

    /// Spectrum with the given `xi` values, e.g. from symplectic eigenvalues.
    pub fn from_xi(xi: Vec<f64>) -> Result<Self> {
        for &x in &xi {
            check_xi(x)?;
        }
        let mut xi = xi;
        xi.sort_by(f64::total_cmp);
        let beta_tilde = xi.iter().map(|&x| 2.0 * x / (1.0 + x * x)).collect();
        Ok(Self { xi, beta_tilde })
    }
}

const TWIST_NEGLIGIBLE: f64 = 1e-12;

/// Normal-form parameters of the reduced kernel.
///
/// With `T = gamma^{-1/2}` the kernel's cross term becomes `T(beta + i twist)T`.
/// For vanishing twist the eigenvalues of `T beta T` are the `beta_tilde_j`
/// directly. Otherwise the twist is absorbed by a symplectic change of
/// variables and the effective `beta_tilde_j` follow from the symplectic
/// eigenvalues `mu_j` of
///
/// `G = [[I - B + C (I+B)^-1 C^T, -C (I+B)^-1], [-(I+B)^-1 C^T, (I+B)^-1]]`,
/// `B = T beta T`, `C = -T twist T`, via `beta_tilde = (1 - mu^2)/(1 + mu^2)`.
pub fn xi_spectrum(rs: &ReducedState) -> Result<XiSpectrum> {
    let m = rs.gamma.nrows();
    let t = sym_apply(&rs.gamma, "gamma", |g| {
        if g > 0.0 {
            1.0 / g.sqrt()
        } else {
            f64::NAN
        }
    })?;
    if t.iter().any(|x| x.is_nan()) {
        return Err(Error::NotPositiveDefinite("gamma"));
    }
    let b = symmetrize(&(&t * &rs.beta * &t));
    let c = -(&t * &rs.twist * &t);
    if max_abs(&c) <= TWIST_NEGLIGIBLE {
        let (vals, _, _) = sym_eigen(&b, "normalized beta")?;
        return XiSpectrum::from_beta_tilde(vals.iter().copied().collect());
    }
    let id = DMatrix::<f64>::identity(m, m);
    let inv = spd_inverse(&(&id + &b), "I + beta_tilde")?;
    let c_inv = &c * &inv;
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    g.view_mut((0, 0), (m, m))
        .copy_from(&(&id - &b + &c_inv * c.transpose()));
    g.view_mut((0, m), (m, m)).copy_from(&(-&c_inv));
    g.view_mut((m, 0), (m, m)).copy_from(&(-c_inv.transpose()));
    g.view_mut((m, m), (m, m)).copy_from(&inv);
    let mu = symplectic_eigenvalues(&symmetrize(&g), "twisted kernel form")?;
    XiSpectrum::from_beta_tilde(mu.iter().map(|u| (1.0 - u * u) / (1.0 + u * u)).collect())
}

fn check_xi(xi: f64) -> Result<()> {
    if (-1e-10..1.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::XiOutOfRange(xi))
    }
}

/// Renyi entropy of one mode, `alpha >= 2`.
pub fn renyi_single(xi: f64, alpha: u32) -> Result<f64> {
    if alpha < 2 {
        return Err(Error::InvalidOrder(alpha));
    }
    check_xi(xi)?;
    let xi = xi.max(0.0);
    let a = alpha as f64;
    Ok(((-xi).ln_1p() * a - (-xi.powi(alpha as i32)).ln_1p()) / (1.0 - a))
}

/// Von Neumann entropy of one mode.
pub fn von_neumann_single(xi: f64) -> Result<f64> {
    check_xi(xi)?;
    if xi <= 0.0 {
        return Ok(0.0);
    }
    Ok(-(-xi).ln_1p() - xi / (1.0 - xi) * xi.ln())
}

pub fn renyi_entropy(xi: &XiSpectrum, alpha: u32) -> Result<f64> {
    xi.xi.iter().map(|&x| renyi_single(x, alpha)).sum()
}

pub fn von_neumann_entropy(xi: &XiSpectrum) -> Result<f64> {
    xi.xi.iter().map(|&x| von_neumann_single(x)).sum()
}

/// `alpha = 1` is von Neumann, `alpha >= 2` Renyi.
pub fn entropy(xi: &XiSpectrum, alpha: u32) -> Result<f64> {
    match alpha {
        0 => Err(Error::InvalidOrder(0)),
        1 => von_neumann_entropy(xi),
        a => renyi_entropy(xi, a),
    }
}

/// Truncated eigenvalue ladders `p_n = (1 - xi) xi^n`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSpectrum {
    pub modes: Vec<Vec<f64>>,
    pub partial_sums: Vec<f64>,
}

pub fn reduced_spectrum(xi: &XiSpectrum, n_max: usize) -> ReducedSpectrum {
    let modes: Vec<Vec<f64>> = xi
        .xi
        .iter()
        .map(|&x| {
            let x = x.max(0.0);
            (0..=n_max).map(|n| (1.0 - x) * x.powi(n as i32)).collect()
        })
        .collect();
    let partial_sums = modes.iter().map(|p| p.iter().sum()).collect();
    ReducedSpectrum {
        modes,
        partial_sums,
    }
}

impl ReducedSpectrum {
    /// Largest `count` eigenvalues of the tensor-product spectrum, descending.
    pub fn product_levels(&self, count: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Node(f64, Vec<usize>);
        impl Eq for Node {}
        impl PartialOrd for Node {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Node {
            fn cmp(&self, o: &Self) -> Ordering {
                self.0.total_cmp(&o.0).then_with(|| o.1.cmp(&self.1))
            }
        }
        let value =
            |idx: &[usize]| -> f64 { idx.iter().zip(&self.modes).map(|(&i, p)| p[i]).product() };
        let mut heap = BinaryHeap::new();
        let start = vec![0; self.modes.len()];
        heap.push(Node(value(&start), start));
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(count);
        while let Some(Node(v, idx)) = heap.pop() {
            if !seen.insert(idx.clone()) {
                continue;
            }
            out.push(v);
            if out.len() == count {
                break;
            }
            for j in 0..idx.len() {
                if idx[j] + 1 < self.modes[j].len() {
                    let mut next = idx.clone();
                    next[j] += 1;
                    if !seen.contains(&next) {
                        heap.push(Node(value(&next), next));
                    }
                }
            }
        }
        out
    }
}

/// Closed-form single-site reduction of a two-oscillator state.
///
/// `w_plus`, `w_minus` are the pre-quench normal frequencies (square roots of
/// the mode eigenvalues) and `(b, b')` the scale factors of the symmetric and
/// antisymmetric modes. Returns `(gamma, beta, z)`.
pub fn two_site_reduced(
    w_plus: f64,
    w_minus: f64,
    (b1, db1): (f64, f64),
    (b2, db2): (f64, f64),
) -> (f64, f64, f64) {
    let (p, m) = (w_plus / (b1 * b1), w_minus / (b2 * b2));
    let (s, d) = (p + m, p - m);
    let chirp = db1 / b1 - db2 / b2;
    let gamma = s / 2.0 - (d * d - chirp * chirp) / (4.0 * s);
    let beta = (d * d + chirp * chirp) / (4.0 * s);
    let z = (db1 / (4.0 * b1) + db2 / (4.0 * b2)) - d / s * (db1 / (4.0 * b1) - db2 / (4.0 * b2));
    (gamma, beta, z)
}

/// Post-quench evolution of the chain parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainProtocol {
    /// Jump to `(omega_f, k_f)` of the [`ChainSpec`] at `t = 0`.
    Sudden,
    Schedule(ParameterSchedule),
}

/// Tabulated `(omega(t), k(t))` for `t >= 0`. Each mode's `lambda_j(t)` is
/// interpolated between the tabulated `omega^2 + k mu_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSchedule {
    pub times: Vec<f64>,
    pub omega: Vec<f64>,
    pub k: Vec<f64>,
    pub interpolation: Interpolation,
    pub tolerance: f64,
}

/// Scale factors of every mode for the given protocol.
pub fn mode_solutions(
    modes: &QuenchModes,
    protocol: &ChainProtocol,
    grid: &TimeGrid,
) -> Result<Vec<ModeSolution>> {
    let pre = modes.pre.lambda();
    match protocol {
        ChainProtocol::Sudden => pre
            .iter()
            .zip(&modes.post)
            .map(|(&a, &b)| solve_sudden(a, b))
            .collect(),
        ChainProtocol::Schedule(ps) => {
            if ps.omega.len() != ps.times.len() || ps.k.len() != ps.times.len() {
                return Err(Error::InvalidProtocol(
                    "schedule columns must have equal length".into(),
                ));
            }
            if ps.k.iter().any(|&k| k < 0.0) {
                return Err(Error::InvalidProtocol(
                    "coupling must be non-negative".into(),
                ));
            }
            pre.par_iter()
                .zip(modes.laplacian.par_iter())
                .map(|(&initial, &mu)| {
                    let values = ps
                        .omega
                        .iter()
                        .zip(&ps.k)
                        .map(|(w, k)| w * w + k * mu)
                        .collect();
                    let schedule = Schedule::new(ps.times.clone(), values, ps.interpolation)?;
                    integrate_general(
                        &QuenchProtocol::General { initial, schedule },
                        grid,
                        ps.tolerance,
                    )
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub times: Vec<f64>,
    pub spectra: Vec<XiSpectrum>,
    /// Keyed by order; `1` is von Neumann.
    pub entropies: BTreeMap<u32, Vec<f64>>,
}

impl EntropySeries {
    pub fn get(&self, alpha: u32) -> Option<&[f64]> {
        self.entropies.get(&alpha).map(Vec::as_slice)
    }

    /// Von Neumann series.
    pub fn s1(&self) -> Option<&[f64]> {
        self.get(1)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Entropy pipeline on every grid point: modes, scale factors, state,
/// reduction, xi-spectrum, entropies.
pub fn entropy_series(
    spec: &ChainSpec,
    protocol: &ChainProtocol,
    partition: &Partition,
    grid: &TimeGrid,
    alphas: &[u32],
) -> Result<EntropySeries> {
    if partition.sites() != spec.n {
        return Err(Error::InvalidPartition(format!(
            "partition is for {} sites, chain has {}",
            partition.sites(),
            spec.n
        )));
    }
    if let Some(&a) = alphas.iter().find(|&&a| a == 0) {
        return Err(Error::InvalidOrder(a));
    }
    let modes = quench_modes(spec)?;
    let solutions = mode_solutions(&modes, protocol, grid)?;
    let spectra: Vec<XiSpectrum> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let state = assemble_state(&modes.pre, &solutions, grid.time(k))?;
            xi_spectrum(&reduce(&state, partition)?)
        })
        .collect::<Result<_>>()?;
    let mut entropies = BTreeMap::new();
    for &a in alphas {
        let values = spectra
            .iter()
            .map(|s| entropy(s, a))
            .collect::<Result<Vec<_>>>()?;
        entropies.insert(a, values);
    }
    Ok(EntropySeries {
        times: grid.times(),
        spectra,
        entropies,
    })
}
