//! Brute-force verifiers that do not go through the SDP solver.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::{Ensemble, STATE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, HermitianOperator};
use crate::random;

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_STEPS: usize = 200;
/// Largest off-diagonal entry tolerated after simultaneous diagonalization.
pub const DIAGONALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Standard,
    Pmi,
}

fn check_density(rho: &HermitianOperator, x: usize) -> Result<()> {
    let reason = if (rho.trace() - 1.0).abs() > STATE_TOL {
        Some(format!("trace {}", rho.trace()))
    } else if !rho.is_psd(STATE_TOL)? {
        Some("not positive semidefinite".to_string())
    } else {
        None
    };
    match reason {
        Some(reason) => Err(Error::InvalidState { x, b: 0, reason }),
        None => Ok(()),
    }
}

/// `½(1 + ‖p ρ0 − (1−p) ρ1‖₁)`.
pub fn helstrom_two_state(rho0: &HermitianOperator, rho1: &HermitianOperator, p: f64) -> Result<f64> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            found: rho1.dim(),
        });
    }
    check_density(rho0, 0)?;
    check_density(rho1, 1)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("prior {p} outside [0, 1]")));
    }
    let diff = &rho0.scale(p) - &rho1.scale(1.0 - p);
    let trace_norm: f64 = diff.eig()?.values.iter().map(|l| l.abs()).sum();
    Ok(0.5 * (1.0 + trace_norm))
}

/// Diagonals of every `ρ_xb` in a shared eigenbasis, indexed `[x][b][k]`.
fn common_diagonals(e: &Ensemble, seed: u64) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut rng = random::rng(seed);
    let d = e.dim();
    let mut combo = CMatrix::zeros(d, d);
    for x in 0..e.strings() {
        for b in 0..e.encodings() {
            let w: f64 = rng.sample(StandardNormal);
            combo += e.state(x, b).matrix() * c(w, 0.0);
        }
    }
    let u = HermitianOperator::symmetrized(&combo).eig()?.vectors;
    let mut out = Vec::with_capacity(e.strings());
    for x in 0..e.strings() {
        let mut row = Vec::with_capacity(e.encodings());
        for b in 0..e.encodings() {
            let rotated = u.adjoint() * e.state(x, b).matrix() * &u;
            for i in 0..d {
                for j in 0..d {
                    if i != j && rotated[(i, j)].norm() > DIAGONALIZATION_TOL {
                        return Err(Error::ConvergenceFailure);
                    }
                }
            }
            row.push((0..d).map(|k| rotated[(k, k)].re).collect());
        }
        out.push(row);
    }
    Ok(out)
}

/// Maximum-likelihood decoding in the common eigenbasis of a commuting
/// ensemble. Standard mode: `Σ_k max_x Σ_b p_xb ρ_xb[k]`; PMI mode:
/// `Σ_k Σ_b max_x p_xb ρ_xb[k]`.
pub fn classical_ml_decode(e: &Ensemble, mode: Mode, seed: u64) -> Result<f64> {
    if !e.is_classical() {
        return Err(Error::NotClassical);
    }
    let diag = common_diagonals(e, seed)?;
    let (n, l) = (e.strings(), e.encodings());
    let mut total = 0.0;
    #[allow(clippy::needless_range_loop)]
    for k in 0..e.dim() {
        total += match mode {
            Mode::Standard => (0..n)
                .map(|x| (0..l).map(|b| e.prob(x, b) * diag[x][b][k]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
            Mode::Pmi => (0..l)
                .map(|b| {
                    (0..n)
                        .map(|x| e.prob(x, b) * diag[x][b][k])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .sum(),
        };
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeasurement {
    /// Bloch vector of the `+` projector `(I + axis·σ)/2`.
    pub axis: [f64; 3],
    pub value: f64,
}

fn bloch_vector(rho: &HermitianOperator) -> [f64; 3] {
    let m = rho.matrix();
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

/// Best two-outcome projective qubit measurement over the axes
/// `θ = πi/steps` (`i = 0..=steps`), `φ = 2πj/steps` (`j < steps`). Grids
/// for `steps` and `2·steps` are nested.
pub fn qubit_grid_search(e: &Ensemble, steps: usize, mode: Mode) -> Result<GridMeasurement> {
    if e.dim() != 2 {
        return Err(Error::WrongDimension(e.dim()));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let (n, l) = (e.strings(), e.encodings());
    let weighted: Vec<Vec<(f64, [f64; 3])>> = (0..n)
        .map(|x| (0..l).map(|b| (e.prob(x, b), bloch_vector(e.state(x, b)))).collect())
        .collect();
    // Success of outcome with Bloch direction `s·axis`.
    let outcome = |axis: &[f64; 3], s: f64| -> f64 {
        let p = |x: usize, b: usize| {
            let (w, r) = &weighted[x][b];
            w * 0.5 * (1.0 + s * (axis[0] * r[0] + axis[1] * r[1] + axis[2] * r[2]))
        };
        match mode {
            Mode::Standard => (0..n)
                .map(|x| (0..l).map(|b| p(x, b)).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
            Mode::Pmi => (0..l)
                .map(|b| (0..n).map(|x| p(x, b)).fold(f64::NEG_INFINITY, f64::max))
                .sum(),
        }
    };
    let mut best = GridMeasurement {
        axis: [0.0, 0.0, 1.0],
        value: f64::NEG_INFINITY,
    };
    for i in 0..=steps {
        let theta = std::f64::consts::PI * i as f64 / steps as f64;
        for j in 0..steps {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / steps as f64;
            let axis = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let value = outcome(&axis, 1.0) + outcome(&axis, -1.0);
            if value > best.value {
                best = GridMeasurement { axis, value };
            }
        }
    }
    Ok(best)
}
