//! Two-player non-local games, the CHSH strategy built from two partition
//! discrimination problems, and the relabeling check for classical
//! ensembles.

use serde::{Deserialize, Serialize};

use crate::ensemble::{AnswerVector, Ensemble, PROB_TOL, STATE_TOL};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, HermitianOperator, EIGEN_TOL};
use crate::sdp::{delta, solve_pmi, solve_standard, Povm, PovmKey, SolverOptions};

/// Largest number of elementary evaluations `classical_value` performs.
pub const CLASSICAL_BUDGET: u128 = 10_000_000;
/// Δ at or below this counts as "post-measurement information is useless".
pub const USELESS_DELTA: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalGame {
    pub questions_a: usize,
    pub questions_b: usize,
    pub answers_a: usize,
    pub answers_b: usize,
    /// `π(s, t)`, row-major.
    pub pi: Vec<f64>,
    /// `win(s, t, a, b)`, row-major in that order.
    pub table: Vec<bool>,
}

impl NonlocalGame {
    pub fn new(
        (s, t, a, b): (usize, usize, usize, usize),
        pi: Vec<f64>,
        win: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        if s == 0 || t == 0 || a == 0 || b == 0 {
            return Err(Error::InvalidArgument("empty question or answer set".into()));
        }
        if pi.len() != s * t
            || pi.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (pi.iter().sum::<f64>() - 1.0).abs() > PROB_TOL
        {
            return Err(Error::InvalidDistribution(format!(
                "question distribution {pi:?} is not a distribution on {s}×{t}"
            )));
        }
        let mut table = Vec::with_capacity(s * t * a * b);
        for si in 0..s {
            for ti in 0..t {
                for ai in 0..a {
                    for bi in 0..b {
                        table.push(win(si, ti, ai, bi));
                    }
                }
            }
        }
        Ok(NonlocalGame {
            questions_a: s,
            questions_b: t,
            answers_a: a,
            answers_b: b,
            pi,
            table,
        })
    }

    pub fn win(&self, s: usize, t: usize, a: usize, b: usize) -> bool {
        self.table[((s * self.questions_b + t) * self.answers_a + a) * self.answers_b + b]
    }

    pub fn pi(&self, s: usize, t: usize) -> f64 {
        self.pi[s * self.questions_b + t]
    }
}

/// Uniform questions, win iff `a ⊕ b = s·t`.
pub fn chsh_game() -> NonlocalGame {
    NonlocalGame::new((2, 2, 2, 2), vec![0.25; 4], |s, t, a, b| (a ^ b) == (s & t)).unwrap()
}

/// Best deterministic strategy. Alice's strategies are enumerated and Bob
/// best-responds question by question; shared randomness cannot do better.
pub fn classical_value(g: &NonlocalGame) -> Result<f64> {
    let strategies = (g.answers_a as u128)
        .checked_pow(g.questions_a as u32)
        .unwrap_or(u128::MAX);
    let per_strategy = (g.questions_a * g.questions_b * g.answers_b) as u128;
    let cost = strategies.saturating_mul(per_strategy);
    if cost > CLASSICAL_BUDGET {
        return Err(Error::BudgetExceeded(cost));
    }
    let mut best = 0.0f64;
    for alice in AnswerVector::enumerate(g.answers_a, g.questions_a) {
        let f = alice.entries();
        let mut total = 0.0;
        for t in 0..g.questions_b {
            let mut reply = 0.0f64;
            for b in 0..g.answers_b {
                let value: f64 = (0..g.questions_a)
                    .filter(|&s| g.win(s, t, f[s], b))
                    .map(|s| g.pi(s, t))
                    .sum();
                reply = reply.max(value);
            }
            total += reply;
        }
        best = best.max(total);
    }
    Ok(best)
}

/// Shared state and local POVMs; outcome `a` is keyed `PovmKey::String(a)`.
#[derive(Debug, Clone)]
pub struct QuantumStrategy {
    pub dim_a: usize,
    pub dim_b: usize,
    pub shared_state: HermitianOperator,
    pub alice: Vec<Povm>,
    pub bob: Vec<Povm>,
}

impl QuantumStrategy {
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        shared_state: HermitianOperator,
        alice: Vec<Povm>,
        bob: Vec<Povm>,
    ) -> Result<Self> {
        if shared_state.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: shared_state.dim(),
            });
        }
        if !shared_state.is_psd(STATE_TOL)? || (shared_state.trace() - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument("shared state is not a density matrix".into()));
        }
        for (povms, d) in [(&alice, dim_a), (&bob, dim_b)] {
            if let Some(p) = povms.iter().find(|p| p.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
        }
        Ok(QuantumStrategy {
            dim_a,
            dim_b,
            shared_state,
            alice,
            bob,
        })
    }
}

/// `Σ_{s,t} π(s,t) Σ_{win} tr((A_a^s ⊗ B_b^t) ψ)`.
pub fn quantum_value_of(strategy: &QuantumStrategy, g: &NonlocalGame) -> Result<f64> {
    if strategy.alice.len() != g.questions_a || strategy.bob.len() != g.questions_b {
        return Err(Error::DimensionMismatch {
            expected: g.questions_a,
            found: strategy.alice.len(),
        });
    }
    let rho = strategy.shared_state.matrix();
    let mut value = 0.0;
    for s in 0..g.questions_a {
        for t in 0..g.questions_b {
            for a in 0..g.answers_a {
                let Some(ea) = strategy.alice[s].get(&PovmKey::String(a)) else { continue };
                for b in 0..g.answers_b {
                    if !g.win(s, t, a, b) {
                        continue;
                    }
                    let Some(eb) = strategy.bob[t].get(&PovmKey::String(b)) else { continue };
                    let joint = ea.matrix().kronecker(eb.matrix());
                    value += g.pi(s, t) * (joint * rho).trace().re;
                }
            }
        }
    }
    Ok(value)
}

fn two_outcome(p0: HermitianOperator, p1: HermitianOperator) -> Result<Povm> {
    Povm::new(vec![(PovmKey::String(0), p0), (PovmKey::String(1), p1)])
}

fn projectors(axis: [f64; 3]) -> Result<Povm> {
    use crate::linalg::paulis::bloch_state;
    two_outcome(bloch_state(axis), bloch_state([-axis[0], -axis[1], -axis[2]]))
}

/// `|Φ+⟩`, Alice measures Z or X, Bob measures `(Z ± X)/√2`.
pub fn optimal_chsh_strategy() -> QuantumStrategy {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
    let state = HermitianOperator::projector_onto(&phi);
    let alice = vec![
        projectors([0.0, 0.0, 1.0]).unwrap(),
        projectors([1.0, 0.0, 0.0]).unwrap(),
    ];
    let bob = vec![
        projectors([h, 0.0, h]).unwrap(),
        projectors([-h, 0.0, h]).unwrap(),
    ];
    QuantumStrategy::new(2, 2, state, alice, bob).unwrap()
}

/// Strategy built from the two partition problems, with the values of
/// those problems.
#[derive(Debug, Clone)]
pub struct DiscriminationStrategy {
    pub strategy: QuantumStrategy,
    /// Success of `ρ_(0,0)` vs `ρ_(1,1)`.
    pub p1: f64,
    /// Success of `ρ_(0,1)` vs `ρ_(1,0)`.
    pub p2: f64,
    /// CHSH value of the strategy.
    pub value: f64,
}

fn check_shape(e: &Ensemble) -> Result<()> {
    if e.strings() != 2 || e.encodings() != 2 {
        return Err(Error::WrongShape(format!(
            "need 2 strings and 2 encodings, got {} and {}",
            e.strings(),
            e.encodings()
        )));
    }
    for x in 0..2 {
        for b in 0..2 {
            if (e.prob(x, b) - 0.25).abs() > PROB_TOL {
                return Err(Error::WrongShape(format!(
                    "p({x},{b}) = {} but a uniform distribution is required",
                    e.prob(x, b)
                )));
            }
        }
    }
    Ok(())
}

/// Optimal measurement for two equiprobable states, keyed 0 and 1.
fn binary_measurement(
    rho0: HermitianOperator,
    rho1: HermitianOperator,
    opts: &SolverOptions,
) -> Result<(Povm, f64)> {
    let sol = solve_standard(&Ensemble::uniform_standard(vec![rho0, rho1])?, opts)?;
    Ok((sol.measurement, sol.primal_value))
}

/// CHSH strategy winning with probability `(p1 + p2)/2`.
///
/// The shared state is `(I ⊗ √σ) Σ_i |ii⟩` with `σ = (ρ_0s + ρ_1s)/2`, which
/// must not depend on `s`. On question `s` Alice measures
/// `(σ^{-1/2} ρ_as σ^{-1/2} / 2)^T`, steering Bob to `ρ_as`. Bob answers the
/// guess of the first partition problem on `t = 0` and the first entry of
/// the guessed answer vector of the second on `t = 1`.
pub fn strategy_from_discrimination(e: &Ensemble, opts: &SolverOptions) -> Result<DiscriminationStrategy> {
    check_shape(e)?;
    let d = e.dim();
    let sigma = (e.state(0, 0) + e.state(1, 0)).scale(0.5);
    let sigma1 = (e.state(0, 1) + e.state(1, 1)).scale(0.5);
    if sigma.distance(&sigma1) > STATE_TOL {
        return Err(Error::WrongShape(
            "the two encodings have different average states".into(),
        ));
    }

    let eig = sigma.eig()?;
    let cutoff = EIGEN_TOL * eig.max().max(1.0);
    let inv_sqrt = eig.map_values(|x| if x > cutoff { x.powf(-0.5) } else { 0.0 });
    let sqrt = eig.map_values(|x| x.max(0.0).sqrt());
    let kernel = eig.spectral_projector(|x| x <= cutoff);

    let mut alice = Vec::with_capacity(2);
    for s in 0..2 {
        let mut ops = Vec::with_capacity(2);
        for a in 0..2 {
            let mut op = inv_sqrt.sandwich(&e.state(a, s).scale(0.5));
            if a == 0 {
                op = &op + &kernel;
            }
            ops.push(op.conjugate());
        }
        let a1 = ops.pop().unwrap();
        let a0 = ops.pop().unwrap();
        alice.push(two_outcome(a0, a1)?);
    }

    let mut psi = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            psi[i * d + j] = sqrt.matrix()[(j, i)];
        }
    }
    let psi_m = CMatrix::from_column_slice(d * d, 1, &psi);
    let state = HermitianOperator::symmetrized(&(&psi_m * psi_m.adjoint()));

    let avg = |v: [usize; 2]| e.rho_avg(&AnswerVector(v.to_vec()));
    let (bob0, p1) = binary_measurement(avg([0, 0])?, avg([1, 1])?, opts)?;
    let (bob1, p2) = binary_measurement(avg([0, 1])?, avg([1, 0])?, opts)?;

    let strategy = QuantumStrategy::new(d, d, state, alice, vec![bob0, bob1])?;
    let value = quantum_value_of(&strategy, &chsh_game())?;
    Ok(DiscriminationStrategy {
        strategy,
        p1,
        p2,
        value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelabelingCheck {
    pub relabeling: AnswerVector,
    pub delta: f64,
    pub useless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoRelabelingReport {
    pub p1: f64,
    pub p2: f64,
    /// `(p1 + p2)/2`.
    pub game_value: f64,
    pub classical_bound: f64,
    pub within_classical_bound: bool,
    /// Whether `p1 > 1/2`, the hypothesis under which no relabeling can make
    /// the information useless.
    pub hypothesis: bool,
    /// `3/2 − p1`.
    pub p2_bound: f64,
    pub p_pmi: f64,
    /// Only the two relabelings that exchange the partitions are checked.
    pub relabelings: Vec<RelabelingCheck>,
    pub relabeling_useless_possible: bool,
}

/// Partition values of a classical binary two-encoding ensemble against the
/// CHSH classical value, and Δ after each partition-exchanging relabeling.
pub fn no_relabeling_check(e: &Ensemble, opts: &SolverOptions) -> Result<NoRelabelingReport> {
    check_shape(e)?;
    if !e.is_classical() {
        return Err(Error::NotClassical);
    }
    let avg = |v: [usize; 2]| e.rho_avg(&AnswerVector(v.to_vec()));
    let (_, p1) = binary_measurement(avg([0, 0])?, avg([1, 1])?, opts)?;
    let (_, p2) = binary_measurement(avg([0, 1])?, avg([1, 0])?, opts)?;
    let classical_bound = classical_value(&chsh_game())?;
    let game_value = (p1 + p2) / 2.0;

    let mut relabelings = Vec::with_capacity(2);
    for v in [[0, 1], [1, 0]] {
        let v = AnswerVector(v.to_vec());
        let d = delta(&e.relabel(&v)?, opts)?;
        relabelings.push(RelabelingCheck {
            relabeling: v,
            delta: d.value,
            useless: d.value <= USELESS_DELTA,
        });
    }
    Ok(NoRelabelingReport {
        p1,
        p2,
        game_value,
        classical_bound,
        within_classical_bound: game_value <= classical_bound + opts.tol,
        hypothesis: p1 > 0.5 + opts.tol,
        p2_bound: 1.5 - p1,
        p_pmi: solve_pmi(e, opts)?.primal_value,
        relabeling_useless_possible: relabelings.iter().any(|r| r.useless),
        relabelings,
    })
}
