//! The discrimination problem: states `ρ_xb` indexed by a string `x` and an
//! encoding `b`, together with their joint distribution `p_xb`.
//!
//! Strings are labelled `0..N`, encodings `0..L`. An [`AnswerVector`] lists one
//! guess per encoding and indexes the outcomes of a measurement that is
//! allowed to wait for the encoding label.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, MatrixRepr};

/// Trace and positivity tolerance for states.
pub const STATE_TOL: f64 = 1e-9;
/// Tolerance on probability normalization and on the product-uniform test.
pub const PROB_TOL: f64 = 1e-12;
/// Frobenius tolerance on commutators when testing classicality.
pub const COMMUTATOR_TOL: f64 = 1e-9;
/// Default limit on `N^L`.
pub const DEFAULT_MAX_VECTORS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerVector(pub Vec<usize>);

impl AnswerVector {
    pub fn zeros(l: usize) -> Self {
        Self(vec![0; l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Bitwise complement; only meaningful for binary strings.
    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|&x| 1 - x.min(1)).collect())
    }

    /// All of `{0..n}^l` in lexicographic order (first entry most significant).
    pub fn enumerate(n: usize, l: usize) -> impl Iterator<Item = AnswerVector> {
        let total = n.checked_pow(l as u32).unwrap_or(usize::MAX);
        (0..total).map(move |mut idx| {
            let mut v = vec![0; l];
            for slot in v.iter_mut().rev() {
                *slot = idx % n;
                idx /= n;
            }
            AnswerVector(v)
        })
    }

    /// Position of this vector in [`AnswerVector::enumerate`].
    pub fn rank(&self, n: usize) -> usize {
        self.0.iter().fold(0, |acc, &x| acc * n + x)
    }

    pub fn check(&self, n: usize, l: usize) -> Result<()> {
        if self.len() != l || self.0.iter().any(|&x| x >= n) {
            return Err(Error::InvalidArgument(format!(
                "answer vector {self} is not in {{0..{n}}}^{l}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for AnswerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Number of answer vectors `N^L`, saturating.
pub fn answer_vector_count(n: usize, l: usize) -> u128 {
    (n as u128).checked_pow(l as u32).unwrap_or(u128::MAX)
}

pub fn check_cap(n: usize, l: usize, cap: usize) -> Result<()> {
    let count = answer_vector_count(n, l);
    if count > cap as u128 {
        return Err(Error::TooManyAnswerVectors { count, cap });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    General,
    ProductUniformX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStructure {
    pub kind: DistributionKind,
    /// `p_b`, present exactly when `kind` is `ProductUniformX`.
    pub marginal_b: Option<Vec<f64>>,
}

impl DistributionStructure {
    pub fn is_product_uniform(&self) -> bool {
        self.kind == DistributionKind::ProductUniformX
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    strings: usize,
    encodings: usize,
    // row-major in (x, b)
    states: Vec<HermitianOperator>,
    probs: Vec<f64>,
}

impl Ensemble {
    /// Builds and validates an ensemble from `(x, b, p_xb, ρ_xb)` items.
    pub fn new(
        dim: usize,
        strings: usize,
        encodings: usize,
        items: impl IntoIterator<Item = (usize, usize, f64, HermitianOperator)>,
    ) -> Result<Self> {
        if dim == 0 || strings == 0 || encodings == 0 {
            return Err(Error::InvalidArgument(
                "dimension, strings and encodings must be positive".into(),
            ));
        }
        let slots = strings * encodings;
        let mut states: Vec<Option<HermitianOperator>> = vec![None; slots];
        let mut probs = vec![0.0; slots];
        for (x, b, p, rho) in items {
            if x >= strings || b >= encodings {
                return Err(Error::InvalidArgument(format!(
                    "pair (x={x}, b={b}) outside {strings}x{encodings}"
                )));
            }
            let slot = &mut states[x * encodings + b];
            if slot.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate pair (x={x}, b={b})"
                )));
            }
            if rho.dim() != dim {
                return Err(Error::InvalidState {
                    x,
                    b,
                    reason: format!("dimension {} instead of {dim}", rho.dim()),
                });
            }
            *slot = Some(rho);
            probs[x * encodings + b] = p;
        }
        let mut filled = Vec::with_capacity(slots);
        for (i, s) in states.into_iter().enumerate() {
            match s {
                Some(rho) => filled.push(rho),
                None => {
                    return Err(Error::MissingPair {
                        x: i / encodings,
                        b: i % encodings,
                    })
                }
            }
        }
        let e = Self {
            dim,
            strings,
            encodings,
            states: filled,
            probs,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N = |X|`.
    pub fn strings(&self) -> usize {
        self.strings
    }

    /// `L = |B|`.
    pub fn encodings(&self) -> usize {
        self.encodings
    }

    pub fn state(&self, x: usize, b: usize) -> &HermitianOperator {
        &self.states[x * self.encodings + b]
    }

    pub fn prob(&self, x: usize, b: usize) -> f64 {
        self.probs[x * self.encodings + b]
    }

    pub fn vector_count(&self) -> u128 {
        answer_vector_count(self.strings, self.encodings)
    }

    pub fn answer_vectors(&self) -> impl Iterator<Item = AnswerVector> {
        AnswerVector::enumerate(self.strings, self.encodings)
    }

    /// Re-checks every invariant and classifies the distribution.
    pub fn validate(&self) -> Result<DistributionStructure> {
        for x in 0..self.strings {
            for b in 0..self.encodings {
                let rho = self.state(x, b);
                let tr = rho.trace();
                if (tr - 1.0).abs() > STATE_TOL {
                    return Err(Error::InvalidState {
                        x,
                        b,
                        reason: format!("trace {tr} differs from 1"),
                    });
                }
                let min = rho.lambda_min()?;
                if min < -STATE_TOL {
                    return Err(Error::InvalidState {
                        x,
                        b,
                        reason: format!("minimum eigenvalue {min:.3e} is negative"),
                    });
                }
                let p = self.prob(x, b);
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidDistribution(format!(
                        "p_({x},{b}) = {p} is not a nonnegative number"
                    )));
                }
            }
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(self.classify())
    }

    fn classify(&self) -> DistributionStructure {
        let n = self.strings as f64;
        let marginal: Vec<f64> = (0..self.encodings)
            .map(|b| (0..self.strings).map(|x| self.prob(x, b)).sum())
            .collect();
        let uniform = (0..self.strings).all(|x| {
            (0..self.encodings).all(|b| (self.prob(x, b) - marginal[b] / n).abs() <= PROB_TOL)
        });
        if uniform {
            DistributionStructure {
                kind: DistributionKind::ProductUniformX,
                marginal_b: Some(marginal),
            }
        } else {
            DistributionStructure {
                kind: DistributionKind::General,
                marginal_b: None,
            }
        }
    }

    pub fn structure(&self) -> DistributionStructure {
        self.classify()
    }

    /// `p_b` when the distribution is product-uniform.
    pub fn encoding_marginal(&self) -> Result<Vec<f64>> {
        self.classify().marginal_b.ok_or(Error::NotProductUniform)
    }

    /// `τ_x⃗ = Σ_b p_{x^(b) b} ρ_{x^(b) b}`.
    pub fn tau(&self, v: &AnswerVector) -> Result<HermitianOperator> {
        v.check(self.strings, self.encodings)?;
        Ok(self.weighted_sum(v, |x, b| self.prob(x, b)))
    }

    /// `ρ_x⃗ = Σ_b p_b ρ_{x^(b) b}`; requires a product-uniform distribution.
    pub fn rho_avg(&self, v: &AnswerVector) -> Result<HermitianOperator> {
        v.check(self.strings, self.encodings)?;
        let pb = self.encoding_marginal()?;
        Ok(self.weighted_sum(v, |_, b| pb[b]))
    }

    fn weighted_sum(
        &self,
        v: &AnswerVector,
        weight: impl Fn(usize, usize) -> f64,
    ) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(self.dim);
        for (b, &x) in v.entries().iter().enumerate() {
            acc = &acc + &self.state(x, b).scale(weight(x, b));
        }
        acc
    }

    /// True iff all states pairwise commute.
    pub fn is_classical(&self) -> bool {
        let n = self.states.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| self.states[i].commutator_norm(&self.states[j]) <= COMMUTATOR_TOL)
        })
    }

    /// Per-encoding relabeling of binary strings: `ρ^new_{0b} = ρ_{x^(b) b}`,
    /// `ρ^new_{1b} = ρ_{(1-x^(b)) b}`, probabilities follow their states.
    pub fn relabel(&self, v: &AnswerVector) -> Result<Ensemble> {
        if self.strings != 2 {
            return Err(Error::NotBinary(self.strings));
        }
        v.check(2, self.encodings)?;
        let perms: Vec<Vec<usize>> = v
            .entries()
            .iter()
            .map(|&x| if x == 0 { vec![0, 1] } else { vec![1, 0] })
            .collect();
        self.permute_strings(&perms)
    }

    /// General relabeling: `ρ^new_{x b} = ρ_{π_b(x) b}` for one permutation
    /// `π_b` of `0..N` per encoding.
    pub fn permute_strings(&self, perms: &[Vec<usize>]) -> Result<Ensemble> {
        if perms.len() != self.encodings {
            return Err(Error::InvalidArgument(format!(
                "expected {} permutations, got {}",
                self.encodings,
                perms.len()
            )));
        }
        for p in perms {
            let mut seen = vec![false; self.strings];
            if p.len() != self.strings || p.iter().any(|&x| x >= self.strings || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::InvalidArgument(format!(
                    "{p:?} is not a permutation of 0..{}",
                    self.strings
                )));
            }
        }
        let mut states = Vec::with_capacity(self.states.len());
        let mut probs = Vec::with_capacity(self.probs.len());
        for x in 0..self.strings {
            for (b, perm) in perms.iter().enumerate() {
                states.push(self.state(perm[x], b).clone());
                probs.push(self.prob(perm[x], b));
            }
        }
        Ok(Ensemble {
            dim: self.dim,
            strings: self.strings,
            encodings: self.encodings,
            states,
            probs,
        })
    }

    /// The problem without post-measurement information as a single-encoding
    /// ensemble: `ρ_x = Σ_b p_{b|x} ρ_xb` with weight `p_x`.
    pub fn without_encoding_info(&self) -> Ensemble {
        let mut states = Vec::with_capacity(self.strings);
        let mut probs = Vec::with_capacity(self.strings);
        for x in 0..self.strings {
            let px: f64 = (0..self.encodings).map(|b| self.prob(x, b)).sum();
            let mut acc = HermitianOperator::zeros(self.dim);
            for b in 0..self.encodings {
                let w = if px > 0.0 {
                    self.prob(x, b) / px
                } else {
                    1.0 / self.encodings as f64
                };
                acc = &acc + &self.state(x, b).scale(w);
            }
            states.push(acc);
            probs.push(px);
        }
        Ensemble {
            dim: self.dim,
            strings: self.strings,
            encodings: 1,
            states,
            probs,
        }
    }

    /// Uniform-prior standard discrimination problem over the given states.
    pub fn uniform_standard(states: Vec<HermitianOperator>) -> Result<Ensemble> {
        let n = states.len();
        let dim = states
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidArgument("no states".into()))?;
        let p = 1.0 / n as f64;
        Ensemble::new(
            dim,
            n,
            1,
            states.into_iter().enumerate().map(|(x, rho)| (x, 0, p, rho)),
        )
    }

    pub fn to_file(&self) -> EnsembleFile {
        let mut items = Vec::with_capacity(self.states.len());
        for x in 0..self.strings {
            for b in 0..self.encodings {
                items.push(EnsembleItem {
                    x,
                    b,
                    prob: self.prob(x, b),
                    matrix: MatrixRepr::from(self.state(x, b)),
                });
            }
        }
        EnsembleFile {
            dimension: self.dim,
            strings: self.strings,
            encodings: self.encodings,
            items,
        }
    }

    pub fn from_json(text: &str) -> Result<Ensemble> {
        let file: EnsembleFile = serde_json::from_str(text)?;
        file.into_ensemble()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("ensemble serializes")
    }
}

/// On-disk ensemble schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub dimension: usize,
    pub strings: usize,
    pub encodings: usize,
    pub items: Vec<EnsembleItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleItem {
    pub x: usize,
    pub b: usize,
    pub prob: f64,
    pub matrix: MatrixRepr,
}

impl EnsembleFile {
    pub fn into_ensemble(self) -> Result<Ensemble> {
        let mut items = Vec::with_capacity(self.items.len());
        for it in self.items {
            let rho = it.matrix.to_hermitian().map_err(|e| Error::InvalidState {
                x: it.x,
                b: it.b,
                reason: e.to_string(),
            })?;
            items.push((it.x, it.b, it.prob, rho));
        }
        Ensemble::new(self.dimension, self.strings, self.encodings, items)
    }
}

/// Ready-made ensembles used throughout the tests and fixtures.
pub mod library {
    use super::*;
    use crate::linalg::paulis::bloch_state;

    /// Bit `x` in the computational (`b = 0`) or Hadamard (`b = 1`) basis,
    /// everything uniform.
    pub fn bb84() -> Ensemble {
        let states = [
            (0, 0, bloch_state([0.0, 0.0, 1.0])),
            (1, 0, bloch_state([0.0, 0.0, -1.0])),
            (0, 1, bloch_state([1.0, 0.0, 0.0])),
            (1, 1, bloch_state([-1.0, 0.0, 0.0])),
        ];
        Ensemble::new(2, 2, 2, states.into_iter().map(|(x, b, r)| (x, b, 0.25, r))).unwrap()
    }

    /// Bob receives the classical bit `x ⊕ b`.
    pub fn xor_classical() -> Ensemble {
        let items = (0..2).flat_map(|x| {
            (0..2).map(move |b| {
                let mut diag = [0.0; 2];
                diag[x ^ b] = 1.0;
                (x, b, 0.25, HermitianOperator::from_real_diagonal(&diag))
            })
        });
        Ensemble::new(2, 2, 2, items).unwrap()
    }

    /// Two-bit classical register; encoding 0 stores `x` in the first bit,
    /// encoding 1 stores it in the parity. Both partition problems succeed
    /// with probability 3/4, while knowing `b` decodes perfectly.
    pub fn classical_three_quarters() -> Ensemble {
        let items = (0..2).flat_map(|x| {
            (0..2).map(move |b| {
                let diag: Vec<f64> = (0..4usize)
                    .map(|k| {
                        let (hi, lo) = (k >> 1, k & 1);
                        let bit = if b == 0 { hi } else { hi ^ lo };
                        if bit == x {
                            0.5
                        } else {
                            0.0
                        }
                    })
                    .collect();
                (x, b, 0.25, HermitianOperator::from_real_diagonal(&diag))
            })
        });
        Ensemble::new(4, 2, 2, items).unwrap()
    }
}
