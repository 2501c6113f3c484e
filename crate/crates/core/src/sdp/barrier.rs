//! Log-barrier interior-point method for
//!
//! ```text
//! minimize tr(Q)  subject to  Q ⪰ τ_k  for every k
//! ```
//!
//! over Hermitian `Q`. The barrier objective
//! `tr(Q) − μ Σ_k log det(Q − τ_k)` is minimized with damped Newton steps in
//! a real orthonormal basis of the Hermitian matrices, then `μ` is shrunk.
//! At a central point `M_k = μ (Q − τ_k)^{-1}` sums to the identity and is a
//! primal feasible measurement with duality gap `K·d·μ`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, HermitianOperator};

const MU_SHRINK: f64 = 0.2;
const MAX_OUTER: usize = 80;
const MAX_NEWTON: usize = 100;
const ARMIJO: f64 = 0.25;
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierIterate {
    pub mu: f64,
    /// Objective of the recovered (feasible) measurement.
    pub primal: f64,
    /// `tr(Q)` of the current strictly feasible dual point.
    pub dual: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct BarrierOutcome {
    pub q: HermitianOperator,
    /// One operator per constraint, summing to the identity.
    pub measurement: Vec<HermitianOperator>,
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
    pub history: Vec<BarrierIterate>,
}

/// Real orthonormal basis of the d×d Hermitian matrices. Each element has at
/// most two nonzero entries.
#[derive(Debug, Clone, Copy)]
enum BasisElement {
    Diag(usize),
    Sym(usize, usize),
    Asym(usize, usize),
}

fn hermitian_basis(d: usize) -> Vec<BasisElement> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        basis.push(BasisElement::Diag(i));
    }
    for i in 0..d {
        for j in i + 1..d {
            basis.push(BasisElement::Sym(i, j));
            basis.push(BasisElement::Asym(i, j));
        }
    }
    basis
}

impl BasisElement {
    /// Nonzero entries `(row, col, value)`.
    fn entries(self) -> Vec<(usize, usize, f64, f64)> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BasisElement::Diag(i) => vec![(i, i, 1.0, 0.0)],
            BasisElement::Sym(i, j) => vec![(i, j, s, 0.0), (j, i, s, 0.0)],
            BasisElement::Asym(i, j) => vec![(i, j, 0.0, s), (j, i, 0.0, -s)],
        }
    }

    /// `tr(E X)` for Hermitian `X` (real part).
    fn pair(self, x: &CMatrix) -> f64 {
        let r2 = std::f64::consts::SQRT_2;
        match self {
            BasisElement::Diag(i) => x[(i, i)].re,
            BasisElement::Sym(i, j) => r2 * x[(i, j)].re,
            BasisElement::Asym(i, j) => r2 * x[(i, j)].im,
        }
    }
}

fn from_coordinates(basis: &[BasisElement], coords: &DVector<f64>, d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for (e, &w) in basis.iter().zip(coords.iter()) {
        for (i, j, re, im) in e.entries() {
            m[(i, j)] += c(re * w, im * w);
        }
    }
    m
}

struct Slacks {
    inverses: Vec<CMatrix>,
    log_det_sum: f64,
}

/// Cholesky of every `Q − τ_k`; `None` if any is not positive definite.
fn slacks(q: &CMatrix, taus: &[HermitianOperator], need_inverse: bool) -> Option<Slacks> {
    let mut inverses = Vec::with_capacity(if need_inverse { taus.len() } else { 0 });
    let mut log_det_sum = 0.0;
    for tau in taus {
        let s = q - tau.matrix();
        let chol = Cholesky::new(s)?;
        let l = chol.l_dirty();
        let mut ld = 0.0;
        // complex Cholesky takes the square root of any pivot, so a negative
        // pivot with a roundoff imaginary part shows up as a mostly imaginary
        // diagonal entry rather than as a failure
        for i in 0..l.nrows() {
            let pivot = l[(i, i)];
            if !(pivot.re > 0.0) || !pivot.re.is_finite() || pivot.im.abs() > 1e-8 * pivot.re {
                return None;
            }
            ld += pivot.re.ln();
        }
        log_det_sum += 2.0 * ld;
        if need_inverse {
            inverses.push(chol.inverse());
        }
    }
    Some(Slacks {
        inverses,
        log_det_sum,
    })
}

fn objective(q: &CMatrix, mu: f64, log_det_sum: f64) -> f64 {
    q.diagonal().iter().map(|z| z.re).sum::<f64>() - mu * log_det_sum
}

/// Central-path measurement `μ W_k`, renormalized so the operators sum to
/// the identity, together with its objective value. `None` when roundoff has
/// destroyed positivity or finiteness.
fn recover_measurement(
    inverses: &[CMatrix],
    mu: f64,
    taus: &[HermitianOperator],
) -> Option<(Vec<HermitianOperator>, f64)> {
    let d = taus[0].dim();
    let raw: Vec<HermitianOperator> = inverses
        .iter()
        .map(|w| HermitianOperator::symmetrized(&(w * c(mu, 0.0))))
        .collect();
    let mut total = HermitianOperator::zeros(d);
    for m in &raw {
        total = &total + m;
    }
    let e = total.eig().ok()?;
    if !(e.min() > 0.0) || !e.max().is_finite() {
        return None;
    }
    let fix = e.map_values(|l| l.powf(-0.5));
    let measurement: Vec<HermitianOperator> = raw.iter().map(|m| fix.sandwich(m)).collect();
    let mut primal = 0.0;
    for (m, tau) in measurement.iter().zip(taus) {
        primal += m.hs_inner(tau).ok()?;
    }
    primal.is_finite().then_some((measurement, primal))
}

/// Runs the barrier method to a measured duality gap of at most `tol`.
///
/// `taus` must be pairwise distinct (the caller deduplicates).
pub fn solve(taus: &[HermitianOperator], tol: f64) -> Result<BarrierOutcome> {
    let k = taus.len();
    let d = taus[0].dim();
    let basis = hermitian_basis(d);
    let p = basis.len();

    let mut lambda_top = f64::NEG_INFINITY;
    for tau in taus {
        lambda_top = lambda_top.max(tau.lambda_max()?);
    }
    let mut q = CMatrix::identity(d, d) * c(lambda_top + 1.0, 0.0);
    let mut mu = 1.0 / k as f64;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut best: Option<BarrierOutcome> = None;

    for _ in 0..MAX_OUTER {
        let mut newton_steps = 0;
        let mut current = slacks(&q, taus, true).ok_or(Error::SolverStalled {
            last_dual_bound: trace(&q),
        })?;

        for _ in 0..MAX_NEWTON {
            // gradient G = I − μ Σ W_k, Hessian via F = Σ_k W_k ⊗ W_k
            let mut grad = CMatrix::identity(d, d);
            let mut f = CMatrix::zeros(d * d, d * d);
            for w in &current.inverses {
                grad -= w * c(mu, 0.0);
                for i in 0..d {
                    for j in 0..d {
                        let row = i * d + j;
                        for kk in 0..d {
                            let wik = w[(i, kk)];
                            for l in 0..d {
                                f[(row, kk * d + l)] += wik * w[(l, j)];
                            }
                        }
                    }
                }
            }
            let g = DVector::from_iterator(p, basis.iter().map(|e| e.pair(&grad)));
            let mut h = DMatrix::<f64>::zeros(p, p);
            for (b, eb) in basis.iter().enumerate() {
                let mut x = CMatrix::zeros(d, d);
                for (kk, l, re, im) in eb.entries() {
                    let coeff = c(re, im);
                    for i in 0..d {
                        for j in 0..d {
                            x[(i, j)] += f[(i * d + j, kk * d + l)] * coeff;
                        }
                    }
                }
                for (a, ea) in basis.iter().enumerate() {
                    h[(a, b)] = mu * ea.pair(&x);
                }
            }
            let h = (&h + h.transpose()) * 0.5;
            let Some(step) = newton_step(&h, &g) else { break };
            let decrement = -g.dot(&step);
            if !decrement.is_finite() || decrement <= 0.0 {
                break;
            }
            if decrement / mu <= 1e-18 {
                break;
            }

            let direction = from_coordinates(&basis, &step, d);
            let f0 = objective(&q, mu, current.log_det_sum);
            let mut t = 1.0;
            let accepted = loop {
                let candidate = &q + &direction * c(t, 0.0);
                if let Some(s) = slacks(&candidate, taus, false) {
                    let f1 = objective(&candidate, mu, s.log_det_sum);
                    if f1.is_finite() && f1 <= f0 - ARMIJO * t * decrement {
                        break Some(candidate);
                    }
                }
                t *= 0.5;
                if t < MIN_STEP {
                    break None;
                }
            };
            let Some(next) = accepted else { break };
            q = next;
            newton_steps += 1;
            current = slacks(&q, taus, true).ok_or(Error::SolverStalled {
                last_dual_bound: trace(&q),
            })?;
            if decrement / mu <= 1e-14 {
                break;
            }
        }
        iterations += newton_steps;

        let dual = trace(&q);
        let Some((measurement, primal)) = recover_measurement(&current.inverses, mu, taus) else {
            break;
        };
        history.push(BarrierIterate {
            mu,
            primal,
            dual,
            newton_steps,
        });
        let gap = dual - primal;
        if best.as_ref().is_none_or(|b| gap < b.dual - b.primal) {
            best = Some(BarrierOutcome {
                q: HermitianOperator::symmetrized(&q),
                measurement,
                primal,
                dual,
                iterations,
                history: Vec::new(),
            });
        }
        if gap <= tol && (k * d) as f64 * mu <= tol {
            break;
        }
        // roundoff now dominates: further shrinking only degrades the iterate
        if history.len() >= 3 && gap > 10.0 * (k * d) as f64 * mu && gap > 1e-3 * tol {
            let stalled = history[history.len() - 3..]
                .windows(2)
                .all(|w| w[1].dual - w[1].primal >= 0.5 * (w[0].dual - w[0].primal));
            if stalled {
                break;
            }
        }
        mu *= MU_SHRINK;
    }
    match best {
        Some(mut b) if b.dual - b.primal <= tol => {
            b.history = history;
            Ok(b)
        }
        Some(b) => Err(Error::SolverStalled {
            last_dual_bound: b.dual,
        }),
        None => Err(Error::SolverStalled {
            last_dual_bound: trace(&q),
        }),
    }
}

/// Solves `H δ = −g` with symmetric diagonal scaling and one round of
/// iterative refinement.
fn newton_step(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let p = g.len();
    let scale = DVector::from_iterator(p, (0..p).map(|a| {
        let diag = h[(a, a)];
        if diag > 0.0 && diag.is_finite() {
            diag.sqrt().recip()
        } else {
            1.0
        }
    }));
    let scaled = DMatrix::from_fn(p, p, |a, b| h[(a, b)] * scale[a] * scale[b]);
    let solve = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
        let r = rhs.component_mul(&scale);
        let y = match Cholesky::new(scaled.clone()) {
            Some(ch) => ch.solve(&r),
            None => scaled.clone().lu().solve(&r)?,
        };
        Some(y.component_mul(&scale))
    };
    let rhs = -g;
    let mut step = solve(&rhs)?;
    let residual = &rhs - h * &step;
    if let Some(correction) = solve(&residual) {
        step += correction;
    }
    step.iter().all(|v| v.is_finite()).then_some(step)
}

fn trace(q: &CMatrix) -> f64 {
    q.diagonal().iter().map(|z| z.re).sum()
}
