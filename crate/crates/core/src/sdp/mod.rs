//! Optimal discrimination with and without post-measurement information.
//!
//! The success probability with post-measurement information is the value of
//!
//! ```text
//! maximize Σ_x⃗ tr(M_x⃗ τ_x⃗)   s.t.  M_x⃗ ⪰ 0,  Σ_x⃗ M_x⃗ = I
//! minimize tr(Q)               s.t.  Q ⪰ τ_x⃗ for all x⃗
//! ```
//!
//! Standard discrimination is the single-encoding special case. Both are
//! solved through the dual with [`barrier::solve`]; the optimality of any
//! measurement can be checked independently with [`certify`].

pub mod barrier;

use serde::{Deserialize, Serialize};

use crate::ensemble::{check_cap, AnswerVector, Ensemble, DEFAULT_MAX_VECTORS};
use crate::error::{Error, Result};
use crate::linalg::{antihermitian_residual, CMatrix, HermitianOperator, MatrixRepr};

pub use barrier::BarrierIterate;

/// Completeness tolerance `‖Σ M − I‖_F` for measurements.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Default duality-gap tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Frobenius distance below which two weight operators are merged.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PovmKey {
    Vector(AnswerVector),
    String(usize),
}

/// A complete set of positive operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    outcomes: Vec<(PovmKey, HermitianOperator)>,
}

impl Povm {
    pub fn new(outcomes: Vec<(PovmKey, HermitianOperator)>) -> Result<Self> {
        let d = outcomes
            .first()
            .map(|(_, m)| m.dim())
            .ok_or_else(|| Error::InvalidPovm("no outcomes".into()))?;
        let mut total = HermitianOperator::zeros(d);
        for (key, m) in &outcomes {
            if m.dim() != d {
                return Err(Error::InvalidPovm(format!("outcome {key:?} has dimension {}", m.dim())));
            }
            let min = m.lambda_min()?;
            if min < -COMPLETENESS_TOL {
                return Err(Error::InvalidPovm(format!(
                    "outcome {key:?} has eigenvalue {min:.3e}"
                )));
            }
            total = &total + m;
        }
        let defect = total.distance(&HermitianOperator::identity(d));
        if defect > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "operators sum to identity only within {defect:.3e}"
            )));
        }
        let mut keys: Vec<&PovmKey> = outcomes.iter().map(|(k, _)| k).collect();
        keys.sort();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPovm("duplicate outcome key".into()));
        }
        Ok(Self { outcomes })
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].1.dim()
    }

    pub fn outcomes(&self) -> &[(PovmKey, HermitianOperator)] {
        &self.outcomes
    }

    pub fn get(&self, key: &PovmKey) -> Option<&HermitianOperator> {
        self.outcomes.iter().find(|(k, _)| k == key).map(|(_, m)| m)
    }

    pub fn into_outcomes(self) -> Vec<(PovmKey, HermitianOperator)> {
        self.outcomes
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal_value: f64,
    pub dual_value: f64,
    pub measurement: Povm,
    pub dual_certificate: HermitianOperator,
    pub gap: f64,
    pub iterations: usize,
    /// One entry per barrier parameter value.
    pub history: Vec<BarrierIterate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub hermitian_residual: f64,
    pub hermitian_ok: bool,
    /// `min_x⃗ λ_min(Q − τ_x⃗)` with `Q` replaced by its Hermitian part.
    pub worst_dominance: f64,
    pub dominance_ok: bool,
    pub verdict: bool,
    /// `tr(Q)`, equal to the objective of the measurement.
    pub value: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_vectors: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_vectors: DEFAULT_MAX_VECTORS,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Solves a family of weighted states `τ_k` and fans the measurement back out
/// over duplicates.
fn solve_weights(
    keys: Vec<PovmKey>,
    taus: Vec<HermitianOperator>,
    tol: f64,
) -> Result<SdpSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut unique: Vec<HermitianOperator> = Vec::new();
    let mut group_of = Vec::with_capacity(taus.len());
    for tau in &taus {
        match unique.iter().position(|u| u.distance(tau) < DEDUP_TOL) {
            Some(g) => group_of.push(g),
            None => {
                group_of.push(unique.len());
                unique.push(tau.clone());
            }
        }
    }
    let mut multiplicity = vec![0usize; unique.len()];
    for &g in &group_of {
        multiplicity[g] += 1;
    }

    let out = barrier::solve(&unique, tol)?;
    let outcomes = keys
        .into_iter()
        .zip(&group_of)
        .map(|(key, &g)| (key, out.measurement[g].scale(1.0 / multiplicity[g] as f64)))
        .collect();
    let measurement = Povm::new(outcomes)?;
    Ok(SdpSolution {
        primal_value: out.primal,
        dual_value: out.dual,
        gap: out.dual - out.primal,
        measurement,
        dual_certificate: out.q,
        iterations: out.iterations,
        history: out.history,
    })
}

/// Optimal success probability with post-measurement information.
pub fn solve_pmi(e: &Ensemble, opts: &SolverOptions) -> Result<SdpSolution> {
    check_cap(e.strings(), e.encodings(), opts.max_vectors)?;
    let mut keys = Vec::new();
    let mut taus = Vec::new();
    for v in e.answer_vectors() {
        taus.push(e.tau(&v)?);
        keys.push(PovmKey::Vector(v));
    }
    solve_weights(keys, taus, opts.tol)
}

/// Optimal success probability without post-measurement information: the
/// encodings are averaged out and the measurement is indexed by strings.
pub fn solve_standard(e: &Ensemble, opts: &SolverOptions) -> Result<SdpSolution> {
    let s = e.without_encoding_info();
    check_cap(s.strings(), 1, opts.max_vectors)?;
    let mut keys = Vec::new();
    let mut taus = Vec::new();
    for x in 0..s.strings() {
        taus.push(s.state(x, 0).scale(s.prob(x, 0)));
        keys.push(PovmKey::String(x));
    }
    solve_weights(keys, taus, opts.tol)
}

/// Checks the two optimality conditions for a measurement: `Q = Σ τ_x⃗ M_x⃗`
/// is Hermitian and dominates every `τ_x⃗`. Outcomes missing from the POVM
/// count as zero operators.
///
/// String-keyed measurements are checked against the problem without
/// post-measurement information.
pub fn certify(e: &Ensemble, m: &Povm, tol: f64) -> Result<OptimalityReport> {
    if m.dim() != e.dim() {
        return Err(Error::IncompatiblePovm(format!(
            "measurement dimension {} but ensemble dimension {}",
            m.dim(),
            e.dim()
        )));
    }
    let string_keyed = m.outcomes().iter().all(|(k, _)| matches!(k, PovmKey::String(_)));
    let vector_keyed = m.outcomes().iter().all(|(k, _)| matches!(k, PovmKey::Vector(_)));
    let problem = if string_keyed {
        e.without_encoding_info()
    } else if vector_keyed {
        e.clone()
    } else {
        return Err(Error::IncompatiblePovm("mixed outcome keys".into()));
    };
    let weight = |key: &PovmKey| -> Result<HermitianOperator> {
        match key {
            PovmKey::String(x) if *x < problem.strings() => {
                Ok(problem.state(*x, 0).scale(problem.prob(*x, 0)))
            }
            PovmKey::Vector(v) if v.check(problem.strings(), problem.encodings()).is_ok() => {
                problem.tau(v)
            }
            _ => Err(Error::IncompatiblePovm(format!("unknown outcome {key:?}"))),
        }
    };

    let d = e.dim();
    let mut q = CMatrix::zeros(d, d);
    for (key, op) in m.outcomes() {
        q += weight(key)?.matrix() * op.matrix();
    }
    let hermitian_residual = antihermitian_residual(&q);
    let q_h = HermitianOperator::symmetrized(&q);

    let mut worst = f64::INFINITY;
    for v in problem.answer_vectors() {
        let tau = problem.tau(&v)?;
        worst = worst.min((&q_h - &tau).lambda_min()?);
    }
    let hermitian_ok = hermitian_residual <= tol;
    let dominance_ok = worst >= -tol;
    Ok(OptimalityReport {
        hermitian_residual,
        hermitian_ok,
        worst_dominance: worst,
        dominance_ok,
        verdict: hermitian_ok && dominance_ok,
        value: q_h.trace(),
    })
}

/// Value of post-measurement information, `p^PI − p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub value: f64,
    /// Sum of the two duality gaps; the true difference lies in
    /// `value ± uncertainty`.
    pub uncertainty: f64,
    pub with_info: f64,
    pub without_info: f64,
}

pub fn delta(e: &Ensemble, opts: &SolverOptions) -> Result<Delta> {
    let pmi = solve_pmi(e, opts)?;
    let std = solve_standard(e, opts)?;
    Ok(Delta {
        value: pmi.primal_value - std.primal_value,
        uncertainty: pmi.gap.max(0.0) + std.gap.max(0.0),
        with_info: pmi.primal_value,
        without_info: std.primal_value,
    })
}

/// Serialized form of an [`SdpSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct SolutionFile {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub iterations: usize,
    #[serde(rename = "Q")]
    pub q: MatrixRepr,
    pub measurement: Vec<MeasurementItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementItem {
    pub key: PovmKey,
    pub matrix: MatrixRepr,
}

impl SdpSolution {
    pub fn to_file(&self) -> SolutionFile {
        SolutionFile {
            primal: self.primal_value,
            dual: self.dual_value,
            gap: self.gap,
            iterations: self.iterations,
            q: MatrixRepr::from(&self.dual_certificate),
            measurement: self
                .measurement
                .outcomes()
                .iter()
                .map(|(k, m)| MeasurementItem {
                    key: k.clone(),
                    matrix: MatrixRepr::from(m),
                })
                .collect(),
        }
    }
}

impl SolutionFile {
    pub fn povm(&self) -> Result<Povm> {
        let outcomes = self
            .measurement
            .iter()
            .map(|it| Ok((it.key.clone(), it.matrix.to_hermitian()?)))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(outcomes)
    }
}
