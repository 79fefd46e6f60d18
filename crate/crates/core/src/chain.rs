//! Harmonic chain model: coupling matrices and their normal modes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Which side of the quench a set of parameters belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pre,
    Post,
}

/// A chain of `n` unit-mass oscillators with on-site frequency `omega` and
/// nearest-neighbour coupling `k`, quenched from `(omega_i, k_i)` to
/// `(omega_f, k_f)` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub omega_i: f64,
    pub omega_f: f64,
    pub k_i: f64,
    pub k_f: f64,
    pub boundary: Boundary,
}

impl ChainSpec {
    pub fn new(
        n: usize,
        (omega_i, k_i): (f64, f64),
        (omega_f, k_f): (f64, f64),
        boundary: Boundary,
    ) -> Result<Self> {
        let spec = Self {
            n,
            omega_i,
            omega_f,
            k_i,
            k_f,
            boundary,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 sites, got {}",
                self.n
            )));
        }
        let finite = [self.omega_i, self.omega_f, self.k_i, self.k_f]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("parameters must be finite".into()));
        }
        if self.omega_i <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "omega_i must be positive, got {}",
                self.omega_i
            )));
        }
        if self.omega_f < 0.0 || self.k_i < 0.0 || self.k_f < 0.0 {
            return Err(Error::InvalidSpec(
                "omega_f, k_i and k_f must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self, phase: Phase) -> (f64, f64) {
        match phase {
            Phase::Pre => (self.omega_i, self.k_i),
            Phase::Post => (self.omega_f, self.k_f),
        }
    }

    /// Nearest-neighbour bonds `(a, b)`; the periodic chain adds `(n-1, 0)`,
    /// which for `n = 2` doubles the single bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<_> = (0..self.n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((self.n - 1, 0));
        }
        bonds
    }

    /// Same chain, no quench: post-quench parameters replaced by the
    /// pre-quench ones.
    pub fn without_quench(&self) -> Self {
        Self {
            omega_f: self.omega_i,
            k_f: self.k_i,
            ..*self
        }
    }
}

/// Potential-energy matrix `K` with `H = (p.p + x^T K x) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix(DMatrix<f64>);

impl CouplingMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

pub fn build_coupling_matrix(spec: &ChainSpec, phase: Phase) -> CouplingMatrix {
    let (omega, k) = spec.params(phase);
    CouplingMatrix(assemble(spec, omega * omega, k))
}

/// Bond Laplacian `L`, so that `K = omega^2 I + k L`.
pub fn laplacian(spec: &ChainSpec) -> DMatrix<f64> {
    assemble(spec, 0.0, 1.0)
}

fn assemble(spec: &ChainSpec, onsite: f64, k: f64) -> DMatrix<f64> {
    let mut m = DMatrix::from_diagonal_element(spec.n, spec.n, onsite);
    for (a, b) in spec.bonds() {
        m[(a, a)] += k;
        m[(b, b)] += k;
        m[(a, b)] -= k;
        m[(b, a)] -= k;
    }
    m
}

/// Orthogonal `U` (rows are modes, `Y = U X`) with `U K U^T = diag(lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    u: DMatrix<f64>,
    lambda: Vec<f64>,
    permutation: Vec<usize>,
}

impl NormalModes {
    /// Builds modes from an explicit basis; rows of `u` must be orthonormal.
    pub fn from_parts(u: DMatrix<f64>, lambda: Vec<f64>) -> Result<Self> {
        let n = lambda.len();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::InvalidSpec(format!(
                "mode matrix is {}x{}, expected {n}x{n}",
                u.nrows(),
                u.ncols()
            )));
        }
        let defect = (&u * u.transpose() - DMatrix::identity(n, n)).amax();
        if defect > 1e-10 {
            return Err(Error::InvalidSpec(format!(
                "mode matrix not orthogonal (defect {defect:e})"
            )));
        }
        Ok(Self {
            u,
            lambda,
            permutation: (0..n).collect(),
        })
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Solver column index of each sorted mode.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Groups of mode indices whose eigenvalues agree within a relative gap
    /// of `1e-9`.
    pub fn degenerate_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (j, &l) in self.lambda.iter().enumerate() {
            match blocks.last_mut() {
                Some(block) => {
                    let prev = self.lambda[*block.last().unwrap()];
                    let scale = prev.abs().max(l.abs()).max(f64::MIN_POSITIVE);
                    if (l - prev).abs() <= DEGENERACY_GAP * scale {
                        block.push(j);
                    } else {
                        blocks.push(vec![j]);
                    }
                }
                None => blocks.push(vec![j]),
            }
        }
        blocks
    }
}

pub const DEGENERACY_GAP: f64 = 1e-9;

pub fn eigendecompose(k: &CouplingMatrix) -> Result<NormalModes> {
    let (values, vectors, order) = sym_eigen(k.as_matrix(), "coupling matrix")?;
    Ok(NormalModes {
        u: vectors.transpose(),
        lambda: values.iter().copied().collect(),
        permutation: order,
    })
}

/// `lambda_j = omega^2 + 2k (1 - cos(2 pi j / N))` for `j = 1..=N`.
pub fn periodic_eigenvalues(spec: &ChainSpec, phase: Phase) -> Result<Vec<f64>> {
    if spec.boundary != Boundary::Periodic {
        return Err(Error::NotPeriodic);
    }
    let (omega, k) = spec.params(phase);
    let n = spec.n as f64;
    Ok((1..=spec.n)
        .map(|j| omega * omega + 2.0 * k * (1.0 - (2.0 * PI * j as f64 / n).cos()))
        .collect())
}

/// Mode data shared by both sides of a quench.
///
/// `K = omega^2 I + k L` with `L` the bond Laplacian, so the eigenbasis of `L`
/// diagonalizes the coupling matrix of every phase simultaneously, including
/// the fully degenerate `k = 0` case.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchModes {
    /// Basis with pre-quench eigenvalues `lambda_j(i)`.
    pub pre: NormalModes,
    /// Post-quench eigenvalues `lambda_j(f)` in the same basis.
    pub post: Vec<f64>,
    /// Laplacian eigenvalues `mu_j`, so `lambda_j = omega^2 + k mu_j`.
    pub laplacian: Vec<f64>,
}

pub fn quench_modes(spec: &ChainSpec) -> Result<QuenchModes> {
    spec.validate()?;
    let laplacian = CouplingMatrix(laplacian(spec));
    let mut modes = eigendecompose(&laplacian)?;
    let top = modes.lambda.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mu: Vec<f64> = modes
        .lambda
        .iter()
        .map(|&m| if m.abs() <= 1e-12 * top { 0.0 } else { m })
        .collect();
    let lam = |(omega, k): (f64, f64)| -> Vec<f64> {
        mu.iter().map(|&m| omega * omega + k * m).collect()
    };
    modes.lambda = lam(spec.params(Phase::Pre));
    if let Some(&bad) = modes.lambda.iter().find(|&&l| l <= 0.0) {
        return Err(Error::NoInitialGroundState(bad));
    }
    Ok(QuenchModes {
        pre: modes,
        post: lam(spec.params(Phase::Post)),
        laplacian: mu,
    })
}
