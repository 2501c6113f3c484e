//! Partitions of the answer vectors and the analytic lower and upper bounds
//! on the success probability with post-measurement information.
//!
//! Both bounds assume the string is uniform and independent of the encoding.

use serde::{Deserialize, Serialize};

use crate::ensemble::{check_cap, AnswerVector, Ensemble};
use crate::error::{Error, Result};
use crate::linalg::{EigenDecomposition, HermitianOperator, EIGEN_TOL};
use crate::sdp::{solve_standard, SolverOptions};

pub const DEFAULT_ALPHAS: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// The `N` answer vectors `(y_1 + j, …, y_{L-1} + j, j) mod N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub label: Vec<usize>,
    pub members: Vec<AnswerVector>,
}

impl Partition {
    pub fn new(n: usize, label: Vec<usize>) -> Self {
        let members = (0..n)
            .map(|j| {
                let mut v: Vec<usize> = label.iter().map(|&y| (y + j) % n).collect();
                v.push(j);
                AnswerVector(v)
            })
            .collect();
        Partition { label, members }
    }
}

/// All `N^{L-1}` partitions, labels in lexicographic order.
pub fn enumerate_partitions(n: usize, l: usize, cap: usize) -> Result<Vec<Partition>> {
    if n == 0 || l == 0 {
        return Err(Error::InvalidArgument(format!("need N, L ≥ 1, got N={n}, L={l}")));
    }
    check_cap(n, l, cap)?;
    Ok(AnswerVector::enumerate(n, l - 1)
        .map(|y| Partition::new(n, y.0))
        .collect())
}

fn require_product_uniform(e: &Ensemble) -> Result<()> {
    if e.structure().is_product_uniform() {
        Ok(())
    } else {
        Err(Error::NotProductUniform)
    }
}

/// Standard discrimination of `{ρ_x⃗ : x⃗ ∈ T}` with uniform prior.
pub fn partition_value(e: &Ensemble, t: &Partition, opts: &SolverOptions) -> Result<f64> {
    let states = t
        .members
        .iter()
        .map(|v| e.rho_avg(v))
        .collect::<Result<Vec<_>>>()?;
    let sub = Ensemble::uniform_standard(states)?;
    Ok(solve_standard(&sub, opts)?.primal_value)
}

/// Largest partition value and the first partition attaining it.
pub fn lower_bound(e: &Ensemble, opts: &SolverOptions) -> Result<(f64, Partition)> {
    require_product_uniform(e)?;
    let mut best: Option<(f64, Partition)> = None;
    for t in enumerate_partitions(e.strings(), e.encodings(), opts.max_vectors)? {
        let value = partition_value(e, &t, opts)?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, t));
        }
    }
    Ok(best.expect("at least one partition"))
}

/// Eigendecompositions of every `ρ_x⃗`, in lexicographic order.
fn averaged_spectra(e: &Ensemble, cap: usize) -> Result<Vec<EigenDecomposition>> {
    require_product_uniform(e)?;
    check_cap(e.strings(), e.encodings(), cap)?;
    e.answer_vectors().map(|v| e.rho_avg(&v)?.eig()).collect()
}

fn power_sum_bound(spectra: &[EigenDecomposition], n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let d = spectra[0].vectors.nrows();
    let mut acc = HermitianOperator::zeros(d);
    for s in spectra {
        acc = &acc + &s.map_values(|x| x.max(0.0).powf(alpha));
    }
    Ok(acc.frac_power(1.0 / alpha, EIGEN_TOL)?.trace() / n as f64)
}

/// `(1/N) tr[(Σ_x⃗ ρ_x⃗^α)^{1/α}]`.
pub fn upper_bound(e: &Ensemble, alpha: f64, cap: usize) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    power_sum_bound(&averaged_spectra(e, cap)?, e.strings(), alpha)
}

/// Smallest upper bound over `alphas` and the first `α` attaining it.
pub fn best_upper_bound(e: &Ensemble, alphas: &[f64], cap: usize) -> Result<(f64, f64)> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("empty α grid".into()));
    }
    if let Some(&bad) = alphas.iter().find(|a| !(**a > 1.0) || !a.is_finite()) {
        return Err(Error::AlphaOutOfRange(bad));
    }
    let spectra = averaged_spectra(e, cap)?;
    let mut best = (f64::INFINITY, alphas[0]);
    for &alpha in alphas {
        let value = power_sum_bound(&spectra, e.strings(), alpha)?;
        if value < best.0 {
            best = (value, alpha);
        }
    }
    Ok(best)
}
