//! Clifford encodings of one bit: `ρ_xb = (I + Σ_j γ_xb^(j) Γ_j)/d` with
//! anti-commuting generators from the Jordan–Wigner construction.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{AnswerVector, Ensemble};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, HermitianOperator};
use crate::random;
use crate::sdp::{Povm, PovmKey};

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 6;
/// Largest supported number of encodings.
pub const MAX_ENCODINGS: usize = 12;
/// Tolerance on `γ_0b = −γ_1b`, `‖γ‖ ≤ 1` and `Σ p_b = 1`.
pub const ENCODING_TOL: f64 = 1e-9;
/// Partition values closer than this count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Complex matrix with integer entries.
pub type IntMatrix = DMatrix<Complex<i64>>;

fn int_matrix(rows: &[[(i64, i64); 2]; 2]) -> IntMatrix {
    IntMatrix::from_fn(2, 2, |i, j| Complex::new(rows[i][j].0, rows[i][j].1))
}

fn pauli_x() -> IntMatrix {
    int_matrix(&[[(0, 0), (1, 0)], [(1, 0), (0, 0)]])
}

fn pauli_y() -> IntMatrix {
    int_matrix(&[[(0, 0), (0, -1)], [(0, 1), (0, 0)]])
}

fn pauli_z() -> IntMatrix {
    int_matrix(&[[(1, 0), (0, 0)], [(0, 0), (-1, 0)]])
}

fn kron_all(factors: &[IntMatrix]) -> IntMatrix {
    factors
        .iter()
        .fold(IntMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

fn to_float(m: &IntMatrix) -> CMatrix {
    m.map(|z| c(z.re as f64, z.im as f64))
}

/// The `2n+1` generators on `n` qubits.
#[derive(Debug, Clone)]
pub struct CliffordBasis {
    n: usize,
    exact: Vec<IntMatrix>,
    generators: Vec<HermitianOperator>,
}

/// `Γ_{2j-1} = Y^{⊗(j-1)} ⊗ Z ⊗ I^{⊗(n-j)}`, `Γ_{2j} = Y^{⊗(j-1)} ⊗ X ⊗ I^{⊗(n-j)}`.
///
/// The last generator is `i Γ_1⋯Γ_2n` for odd `n`. For even `n` that
/// product is anti-Hermitian, so `Γ_1⋯Γ_2n` itself is used.
pub fn jordan_wigner(n: usize) -> Result<CliffordBasis> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::DimensionCap(n));
    }
    let id = IntMatrix::identity(2, 2);
    let mut exact = Vec::with_capacity(2 * n + 1);
    for j in 1..=n {
        for mid in [pauli_z(), pauli_x()] {
            let mut f = vec![pauli_y(); j - 1];
            f.push(mid);
            f.extend(std::iter::repeat_n(id.clone(), n - j));
            exact.push(kron_all(&f));
        }
    }
    let product = exact
        .iter()
        .fold(IntMatrix::identity(1 << n, 1 << n), |acc, g| acc * g);
    let last = if n % 2 == 1 {
        product * Complex::new(0, 1)
    } else {
        product
    };
    exact.push(last);
    let generators = exact
        .iter()
        .map(|g| HermitianOperator::new(to_float(g)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CliffordBasis { n, exact, generators })
}

/// Outcome of the exact algebraic checks on a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relations {
    pub anticommute: bool,
    pub square_to_identity: bool,
    pub trace_orthogonal: bool,
    pub hermitian: bool,
    /// `Γ_{2n+1} = i Γ_1⋯Γ_2n` entrywise.
    pub top_is_i_product: bool,
}

impl Relations {
    pub fn all(&self) -> bool {
        self.anticommute
            && self.square_to_identity
            && self.trace_orthogonal
            && self.hermitian
            && self.top_is_i_product
    }
}

impl CliffordBasis {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    pub fn exact(&self) -> &[IntMatrix] {
        &self.exact
    }

    /// Checks the algebra in integer arithmetic.
    pub fn relations(&self) -> Relations {
        let d = self.dim();
        let id = IntMatrix::identity(d, d);
        let zero = IntMatrix::zeros(d, d);
        let g = &self.exact;
        let mut r = Relations {
            anticommute: true,
            square_to_identity: true,
            trace_orthogonal: true,
            hermitian: g.iter().all(|m| m.transpose().map(|z| z.conj()) == *m),
            top_is_i_product: false,
        };
        for j in 0..g.len() {
            if &g[j] * &g[j] != id {
                r.square_to_identity = false;
            }
            for k in j + 1..g.len() {
                let jk = &g[j] * &g[k];
                let kj = &g[k] * &g[j];
                if &jk + &kj != zero {
                    r.anticommute = false;
                }
                if jk.trace() != Complex::new(0, 0) {
                    r.trace_orthogonal = false;
                }
            }
        }
        let last = g.len() - 1;
        let product = g[..last].iter().fold(id, |acc, m| acc * m);
        r.top_is_i_product = product * Complex::new(0, 1) == g[last];
        r
    }

    /// `(I + Σ_j γ_j Γ_j)/d`.
    pub fn state(&self, gamma: &[f64]) -> Result<HermitianOperator> {
        self.expand(1.0, gamma, 1.0 / self.dim() as f64)
    }

    /// `s·(a I + Σ_j γ_j Γ_j)`.
    fn expand(&self, a: f64, gamma: &[f64], s: f64) -> Result<HermitianOperator> {
        if gamma.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: gamma.len(),
            });
        }
        let d = self.dim();
        let mut m = CMatrix::identity(d, d) * c(a, 0.0);
        for (g, &w) in self.generators.iter().zip(gamma) {
            m += g.matrix() * c(w, 0.0);
        }
        Ok(HermitianOperator::symmetrized(&(m * c(s, 0.0))))
    }
}

/// A bit encoded into Clifford states under `L` encodings.
#[derive(Debug, Clone)]
pub struct CliffordEncoding {
    basis: CliffordBasis,
    enc_probs: Vec<f64>,
    /// `γ_0b` per encoding; `γ_1b = −γ_0b`.
    gammas: Vec<Vec<f64>>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl CliffordEncoding {
    /// Builds an encoding from `γ_0b` for each `b`.
    pub fn new(n: usize, enc_probs: Vec<f64>, gammas: Vec<Vec<f64>>) -> Result<Self> {
        let basis = jordan_wigner(n)?;
        let l = enc_probs.len();
        if l == 0 || l > MAX_ENCODINGS {
            return Err(Error::InvalidEncoding(format!(
                "number of encodings must be in 1..={MAX_ENCODINGS}, got {l}"
            )));
        }
        if gammas.len() != l {
            return Err(Error::InvalidEncoding(format!(
                "{} probabilities but {} coefficient vectors",
                l,
                gammas.len()
            )));
        }
        if enc_probs.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (enc_probs.iter().sum::<f64>() - 1.0).abs() > ENCODING_TOL
        {
            return Err(Error::InvalidEncoding(format!(
                "encoding probabilities {enc_probs:?} are not a distribution"
            )));
        }
        for (b, g) in gammas.iter().enumerate() {
            if g.len() != basis.len() {
                return Err(Error::InvalidEncoding(format!(
                    "vector for encoding {b} has {} entries, expected {}",
                    g.len(),
                    basis.len()
                )));
            }
            if g.iter().any(|x| !x.is_finite()) || norm(g) > 1.0 + ENCODING_TOL {
                return Err(Error::InvalidEncoding(format!(
                    "vector for encoding {b} has norm {} > 1",
                    norm(g)
                )));
            }
        }
        Ok(CliffordEncoding {
            basis,
            enc_probs,
            gammas,
        })
    }

    /// Two pure qubit states, `(I+Z)/2` and one at Bloch angle `θ` from it in
    /// the Z–X plane, each with probability 1/2.
    pub fn qubit_angle(theta: f64) -> Self {
        let g1 = vec![theta.cos(), theta.sin(), 0.0];
        CliffordEncoding::new(1, vec![0.5, 0.5], vec![vec![1.0, 0.0, 0.0], g1]).unwrap()
    }

    /// BB84 written as a Clifford encoding.
    pub fn bb84() -> Self {
        let gammas = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        CliffordEncoding::new(1, vec![0.5, 0.5], gammas).unwrap()
    }

    /// Random unit coefficient vectors and random encoding probabilities.
    pub fn random<R: Rng>(n: usize, l: usize, rng: &mut R) -> Result<Self> {
        let k = 2 * n + 1;
        let gammas = (0..l).map(|_| random::unit_vector(k, rng)).collect();
        CliffordEncoding::new(n, random::simplex(l, rng), gammas)
    }

    pub fn basis(&self) -> &CliffordBasis {
        &self.basis
    }

    pub fn qubits(&self) -> usize {
        self.basis.qubits()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn encodings(&self) -> usize {
        self.enc_probs.len()
    }

    pub fn enc_probs(&self) -> &[f64] {
        &self.enc_probs
    }

    /// `γ_xb`.
    pub fn gamma(&self, x: usize, b: usize) -> Vec<f64> {
        let g = &self.gammas[b];
        if x == 0 {
            g.clone()
        } else {
            g.iter().map(|v| -v).collect()
        }
    }

    pub fn build_state(&self, x: usize, b: usize) -> Result<HermitianOperator> {
        if x > 1 || b >= self.encodings() {
            return Err(Error::MissingPair { x, b });
        }
        self.basis.state(&self.gamma(x, b))
    }

    /// The ensemble with `p_xb = p_b / 2`.
    pub fn to_ensemble(&self) -> Result<Ensemble> {
        let mut items = Vec::with_capacity(2 * self.encodings());
        for x in 0..2 {
            for b in 0..self.encodings() {
                items.push((x, b, self.enc_probs[b] / 2.0, self.build_state(x, b)?));
            }
        }
        Ensemble::new(self.dim(), 2, self.encodings(), items)
    }

    /// `v_x⃗ = Σ_b p_b γ_{x^(b) b}`.
    pub fn v_vector(&self, v: &AnswerVector) -> Result<Vec<f64>> {
        v.check(2, self.encodings())?;
        let mut acc = vec![0.0; self.basis.len()];
        for (b, &x) in v.entries().iter().enumerate() {
            let sign = if x == 0 { 1.0 } else { -1.0 };
            for (a, g) in acc.iter_mut().zip(&self.gammas[b]) {
                *a += sign * self.enc_probs[b] * g;
            }
        }
        Ok(acc)
    }

    /// `M_x⃗ = (I + a·Γ)/2` and its complement with `a = v_x⃗/‖v_x⃗‖`. When
    /// `v_x⃗ = 0` every measurement is optimal and `{I/2, I/2}` is returned
    /// with the degeneracy flag set.
    pub fn closed_form_measurement(&self, v: &AnswerVector) -> Result<ClosedFormMeasurement> {
        let vv = self.v_vector(v)?;
        let nv = norm(&vv);
        let (plus, minus, degenerate) = if nv == 0.0 {
            let half = HermitianOperator::identity(self.dim()).scale(0.5);
            (half.clone(), half, true)
        } else {
            let a: Vec<f64> = vv.iter().map(|x| x / nv).collect();
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            (
                self.basis.expand(1.0, &a, 0.5)?,
                self.basis.expand(1.0, &neg, 0.5)?,
                false,
            )
        };
        let povm = Povm::new(vec![
            (PovmKey::Vector(v.clone()), plus),
            (PovmKey::Vector(v.complement()), minus),
        ])?;
        Ok(ClosedFormMeasurement { povm, degenerate })
    }

    /// `Q = (1 + ‖v_x⃗‖)/(2d) · I`.
    pub fn q_certificate(&self, v: &AnswerVector) -> Result<HermitianOperator> {
        let nv = norm(&self.v_vector(v)?);
        let d = self.dim() as f64;
        Ok(HermitianOperator::identity(self.dim()).scale((1.0 + nv) / (2.0 * d)))
    }

    /// `λ_max(ρ_x⃗) = (1 + ‖v_x⃗‖)/d`.
    pub fn lambda_max_avg(&self, v: &AnswerVector) -> Result<f64> {
        let nv = norm(&self.v_vector(v)?);
        Ok((1.0 + nv) / self.dim() as f64)
    }

    /// Values `(1 + ‖v_x⃗‖)/2` of every partition `{x⃗, x̲⃗}`, keyed by the
    /// member whose last entry is 0.
    pub fn analyze(&self) -> Result<CliffordAnalysis> {
        let l = self.encodings();
        let mut per_partition = Vec::with_capacity(1 << (l - 1));
        let mut best = 0;
        for head in AnswerVector::enumerate(2, l - 1) {
            let mut rep = head.0;
            rep.push(0);
            let rep = AnswerVector(rep);
            let v = self.v_vector(&rep)?;
            let value = (1.0 + norm(&v)) / 2.0;
            per_partition.push(PartitionValue {
                representative: rep,
                v,
                value,
            });
            if value > per_partition[best].value + TIE_TOL {
                best = per_partition.len() - 1;
            }
        }
        let p_pmi = per_partition[best].value;
        let useless = per_partition[0].value >= p_pmi - TIE_TOL;
        let best = if useless { 0 } else { best };
        Ok(CliffordAnalysis {
            best: per_partition[best].representative.clone(),
            per_partition,
            p_pmi,
            useless,
        })
    }

    /// The optimal PMI measurement: the closed form at the best partition,
    /// every other outcome zero.
    pub fn optimal_measurement(&self) -> Result<ClosedFormMeasurement> {
        self.closed_form_measurement(&self.analyze()?.best)
    }

    /// Relabels by the best partition so that post-measurement information
    /// becomes useless. Returns the new encoding and the relabeling vector.
    pub fn make_useless(&self) -> Result<(CliffordEncoding, AnswerVector)> {
        let best = self.analyze()?.best;
        let gammas = self
            .gammas
            .iter()
            .zip(best.entries())
            .map(|(g, &x)| if x == 0 { g.clone() } else { g.iter().map(|v| -v).collect() })
            .collect();
        let relabeled = CliffordEncoding {
            basis: self.basis.clone(),
            enc_probs: self.enc_probs.clone(),
            gammas,
        };
        Ok((relabeled, best))
    }

    pub fn to_file(&self) -> CliffordFile {
        let mut gammas = Vec::with_capacity(2 * self.encodings());
        for x in 0..2 {
            for b in 0..self.encodings() {
                gammas.push(GammaItem {
                    x,
                    b,
                    vector: self.gamma(x, b),
                });
            }
        }
        CliffordFile {
            n: self.qubits(),
            l: self.encodings(),
            enc_probs: self.enc_probs.clone(),
            gammas,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CliffordFile = serde_json::from_str(text)?;
        file.into_encoding()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("encoding serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        CliffordEncoding::from_json(&text)
    }
}

#[derive(Debug, Clone)]
pub struct ClosedFormMeasurement {
    pub povm: Povm,
    /// Set when `v_x⃗ = 0`, in which case the POVM is `{I/2, I/2}`.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub representative: AnswerVector,
    pub v: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordAnalysis {
    pub per_partition: Vec<PartitionValue>,
    pub best: AnswerVector,
    pub p_pmi: f64,
    pub useless: bool,
}

/// `‖v0 + v1‖ ≥ ‖v0 − v1‖`, i.e. the Bloch angle is at most π/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlochCriterion {
    pub useless: bool,
    /// Whether both vectors have unit length, as the pure-state statement
    /// requires.
    pub unit_vectors: bool,
}

pub fn bloch_criterion(v0: &[f64], v1: &[f64]) -> Result<BlochCriterion> {
    if v0.len() != v1.len() {
        return Err(Error::DimensionMismatch {
            expected: v0.len(),
            found: v1.len(),
        });
    }
    let sum: Vec<f64> = v0.iter().zip(v1).map(|(a, b)| a + b).collect();
    let diff: Vec<f64> = v0.iter().zip(v1).map(|(a, b)| a - b).collect();
    let unit = |v: &[f64]| (norm(v) - 1.0).abs() <= ENCODING_TOL;
    Ok(BlochCriterion {
        useless: norm(&sum) >= norm(&diff) - TIE_TOL,
        unit_vectors: unit(v0) && unit(v1),
    })
}

/// On-disk encoding schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordFile {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub enc_probs: Vec<f64>,
    pub gammas: Vec<GammaItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaItem {
    pub x: usize,
    pub b: usize,
    pub vector: Vec<f64>,
}

impl CliffordFile {
    pub fn into_encoding(self) -> Result<CliffordEncoding> {
        if self.enc_probs.len() != self.l {
            return Err(Error::InvalidEncoding(format!(
                "L = {} but {} encoding probabilities",
                self.l,
                self.enc_probs.len()
            )));
        }
        let mut slots: Vec<[Option<Vec<f64>>; 2]> = vec![[None, None]; self.l];
        for item in self.gammas {
            if item.x > 1 || item.b >= self.l {
                return Err(Error::InvalidEncoding(format!(
                    "entry (x={}, b={}) out of range",
                    item.x, item.b
                )));
            }
            if slots[item.b][item.x].replace(item.vector).is_some() {
                return Err(Error::InvalidEncoding(format!(
                    "duplicate entry (x={}, b={})",
                    item.x, item.b
                )));
            }
        }
        let mut gammas = Vec::with_capacity(self.l);
        for (b, [g0, g1]) in slots.into_iter().enumerate() {
            let g0 = g0.ok_or(Error::MissingPair { x: 0, b })?;
            let g1 = g1.ok_or(Error::MissingPair { x: 1, b })?;
            if g0.len() != g1.len()
                || g0.iter().zip(&g1).any(|(a, b)| (a + b).abs() > ENCODING_TOL)
            {
                return Err(Error::InvalidEncoding(format!(
                    "vectors for encoding {b} are not opposite"
                )));
            }
            gammas.push(g0);
        }
        CliffordEncoding::new(self.n, self.enc_probs, gammas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::paulis;
    use crate::sdp::{certify, delta, solve_pmi, SolverOptions};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn av(v: &[usize]) -> AnswerVector {
        AnswerVector(v.to_vec())
    }

    #[test]
    fn single_qubit_generators_are_paulis() {
        let b = jordan_wigner(1).unwrap();
        let g = b.generators();
        assert_eq!(g[0], paulis::z());
        assert_eq!(g[1], paulis::x());
        // i·Z·X = −Y
        assert_eq!(g[2], paulis::y().scale(-1.0));
    }

    #[test]
    fn two_qubit_generators() {
        let b = jordan_wigner(2).unwrap();
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        let id = IntMatrix::identity(2, 2);
        let e = b.exact();
        assert_eq!(e[0], z.kronecker(&id));
        assert_eq!(e[1], x.kronecker(&id));
        assert_eq!(e[2], y.kronecker(&z));
        assert_eq!(e[3], y.kronecker(&x));
        assert_eq!(e[4], &e[0] * &e[1] * &e[2] * &e[3]);
    }

    #[test]
    fn algebra_holds_exactly() {
        for n in 1..=MAX_QUBITS {
            let r = jordan_wigner(n).unwrap().relations();
            assert!(r.anticommute && r.square_to_identity && r.trace_orthogonal && r.hermitian);
            assert_eq!(r.top_is_i_product, n % 2 == 1, "n = {n}");
        }
    }

    #[test]
    fn qubit_count_is_capped() {
        assert!(matches!(jordan_wigner(0), Err(Error::DimensionCap(0))));
        assert!(matches!(jordan_wigner(7), Err(Error::DimensionCap(7))));
    }

    #[test]
    fn states() {
        let zero = CliffordEncoding::new(2, vec![1.0], vec![vec![0.0; 5]]).unwrap();
        assert_eq!(zero.build_state(0, 0).unwrap(), HermitianOperator::identity(4).scale(0.25));
        let e = CliffordEncoding::bb84();
        assert!(e.build_state(0, 0).unwrap().distance(&paulis::bloch_state([0.0, 0.0, 1.0])) < 1e-15);
        let plus = e.build_state(0, 1).unwrap();
        assert!(plus.distance(&paulis::bloch_state([1.0, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn bb84_vectors() {
        let e = CliffordEncoding::bb84();
        let v = e.v_vector(&av(&[0, 0])).unwrap();
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(norm(&v), FRAC_1_SQRT_2, epsilon = 1e-15);
        let w = e.v_vector(&av(&[0, 1])).unwrap();
        assert_abs_diff_eq!(w[1], -0.5, epsilon = 1e-15);
        let u = e.v_vector(&av(&[1, 1])).unwrap();
        assert!(u.iter().zip(&v).all(|(a, b)| a == &-b));
    }

    #[test]
    fn bb84_measurement_is_the_diagonal_axis() {
        let e = CliffordEncoding::bb84();
        let m = e.closed_form_measurement(&av(&[0, 0])).unwrap();
        assert!(!m.degenerate);
        let s = FRAC_1_SQRT_2;
        let expected = paulis::bloch_state([s, 0.0, s]);
        let plus = m.povm.get(&PovmKey::Vector(av(&[0, 0]))).unwrap();
        let minus = m.povm.get(&PovmKey::Vector(av(&[1, 1]))).unwrap();
        assert!(plus.distance(&expected) < 1e-12);
        assert!((plus.matrix() * minus.matrix()).norm() < 1e-12);
    }

    #[test]
    fn aligned_measurement() {
        let e = CliffordEncoding::new(1, vec![1.0], vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let m = e.closed_form_measurement(&av(&[0])).unwrap();
        let p0 = m.povm.get(&PovmKey::Vector(av(&[0]))).unwrap();
        assert!(p0.distance(&HermitianOperator::from_real_diagonal(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn zero_vector_is_flagged() {
        let e = CliffordEncoding::new(1, vec![0.5, 0.5], vec![vec![1.0, 0.0, 0.0]; 2]).unwrap();
        let m = e.closed_form_measurement(&av(&[0, 1])).unwrap();
        assert!(m.degenerate);
        assert_eq!(
            m.povm.get(&PovmKey::Vector(av(&[0, 1]))).unwrap(),
            &HermitianOperator::identity(2).scale(0.5)
        );
    }

    #[test]
    fn q_certificate_matches_products() {
        let e = CliffordEncoding::bb84();
        let q = e.q_certificate(&av(&[0, 0])).unwrap();
        assert_abs_diff_eq!(q.matrix()[(0, 0)].re, 0.25 * (1.0 + FRAC_1_SQRT_2), epsilon = 1e-15);
        let mut rng = random::rng(3);
        for n in 1..=2 {
            let e = CliffordEncoding::random(n, 3, &mut rng).unwrap();
            let ens = e.to_ensemble().unwrap();
            for v in ens.answer_vectors() {
                let m = e.closed_form_measurement(&v).unwrap();
                let a = ens.rho_avg(&v).unwrap();
                let b = ens.rho_avg(&v.complement()).unwrap();
                let mp = m.povm.get(&PovmKey::Vector(v.clone())).unwrap();
                let mm = m.povm.get(&PovmKey::Vector(v.complement())).unwrap();
                let direct = (a.matrix() * mp.matrix() + b.matrix() * mm.matrix()) * c(0.5, 0.0);
                assert!((direct - e.q_certificate(&v).unwrap().matrix()).norm() < 1e-12);
            }
        }
        let zero = CliffordEncoding::new(1, vec![1.0], vec![vec![0.0; 3]]).unwrap();
        assert_eq!(zero.q_certificate(&av(&[0])).unwrap(), HermitianOperator::identity(2).scale(0.25));
    }

    #[test]
    fn lambda_max_matches_eig() {
        let e = CliffordEncoding::bb84();
        assert_abs_diff_eq!(e.lambda_max_avg(&av(&[0, 0])).unwrap(), 0.5 + 0.5 * FRAC_1_SQRT_2, epsilon = 1e-15);
        let mut rng = random::rng(5);
        let e = CliffordEncoding::random(2, 3, &mut rng).unwrap();
        let ens = e.to_ensemble().unwrap();
        for v in ens.answer_vectors() {
            let num = ens.rho_avg(&v).unwrap().lambda_max().unwrap();
            assert_abs_diff_eq!(e.lambda_max_avg(&v).unwrap(), num, epsilon = 1e-9);
            assert_abs_diff_eq!(e.lambda_max_avg(&v.complement()).unwrap(), num, epsilon = 1e-9);
        }
    }

    #[test]
    fn bb84_analysis() {
        let a = CliffordEncoding::bb84().analyze().unwrap();
        assert_abs_diff_eq!(a.p_pmi, 0.5 + 0.5 * FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(a.useless);
        assert!(a.best.is_zero());
        assert_eq!(a.per_partition.len(), 2);
    }

    #[test]
    fn single_encoding_is_useless() {
        let e = CliffordEncoding::new(1, vec![1.0], vec![vec![0.6, 0.0, 0.8]]).unwrap();
        let a = e.analyze().unwrap();
        assert!(a.useless);
        assert_eq!(a.per_partition.len(), 1);
    }

    #[test]
    fn angle_decides_usefulness() {
        for theta in [0.3, 1.2, FRAC_PI_2 - 1e-3] {
            assert!(CliffordEncoding::qubit_angle(theta).analyze().unwrap().useless);
        }
        for theta in [FRAC_PI_2 + 1e-3, 2.0, 3.0] {
            assert!(!CliffordEncoding::qubit_angle(theta).analyze().unwrap().useless);
        }
    }

    #[test]
    fn make_useless_preserves_value() {
        let e = CliffordEncoding::qubit_angle(3.0 * PI / 4.0);
        let before = e.analyze().unwrap();
        let (r, v) = e.make_useless().unwrap();
        assert_eq!(v, av(&[1, 0]));
        let after = r.analyze().unwrap();
        assert!(after.useless);
        assert_abs_diff_eq!(after.p_pmi, before.p_pmi, epsilon = 1e-15);
        let (g0, g1) = (r.gamma(0, 0), r.gamma(0, 1));
        let cos = g0.iter().zip(&g1).map(|(a, b)| a * b).sum::<f64>();
        assert_abs_diff_eq!(cos.acos(), PI / 4.0, epsilon = 1e-12);
        let d = delta(&r.to_ensemble().unwrap(), &SolverOptions::default()).unwrap();
        assert!(d.value.abs() <= 2e-7);
        let (same, id) = CliffordEncoding::bb84().make_useless().unwrap();
        assert!(id.is_zero());
        assert_eq!(same.gamma(1, 1), CliffordEncoding::bb84().gamma(1, 1));
    }

    #[test]
    fn closed_form_is_certified_optimal() {
        let mut rng = random::rng(11);
        let opts = SolverOptions::default();
        for (n, l) in [(1, 2), (2, 2), (2, 3)] {
            let e = CliffordEncoding::random(n, l, &mut rng).unwrap();
            let ens = e.to_ensemble().unwrap();
            let a = e.analyze().unwrap();
            let m = e.optimal_measurement().unwrap();
            let report = certify(&ens, &m.povm, 1e-9).unwrap();
            assert!(report.verdict, "{report:?}");
            assert_abs_diff_eq!(report.value, a.p_pmi, epsilon = 1e-12);
            let p = solve_pmi(&ens, &opts).unwrap().primal_value;
            assert_abs_diff_eq!(p, a.p_pmi, epsilon = 2e-7);
        }
    }

    #[test]
    fn bloch_criterion_cases() {
        let z = [0.0, 0.0, 1.0];
        assert!(bloch_criterion(&z, &[1.0, 0.0, 0.0]).unwrap().useless);
        let t: f64 = 2.0 * PI / 3.0;
        let r = bloch_criterion(&z, &[t.sin(), 0.0, t.cos()]).unwrap();
        assert!(!r.useless && r.unit_vectors);
        assert!(bloch_criterion(&z, &z).unwrap().useless);
        assert!(!bloch_criterion(&z, &[0.5, 0.0, 0.0]).unwrap().unit_vectors);
    }

    #[test]
    fn json_round_trip() {
        let e = CliffordEncoding::qubit_angle(1.0);
        let back = CliffordEncoding::from_json(&e.to_json()).unwrap();
        assert_eq!(back.to_file(), e.to_file());
        let text = r#"{"n":1,"L":1,"enc_probs":[1.0],"gammas":[{"x":0,"b":0,"vector":[1,0,0]},{"x":1,"b":0,"vector":[1,0,0]}]}"#;
        assert!(matches!(CliffordEncoding::from_json(text), Err(Error::InvalidEncoding(_))));
        let missing = r#"{"n":1,"L":1,"enc_probs":[1.0],"gammas":[{"x":0,"b":0,"vector":[1,0,0]}]}"#;
        assert!(matches!(CliffordEncoding::from_json(missing), Err(Error::MissingPair { x: 1, b: 0 })));
    }

    #[test]
    fn invalid_encodings() {
        assert!(CliffordEncoding::new(1, vec![0.5, 0.6], vec![vec![0.0; 3]; 2]).is_err());
        assert!(CliffordEncoding::new(1, vec![1.0], vec![vec![1.0, 1.0, 0.0]]).is_err());
        assert!(CliffordEncoding::new(1, vec![1.0], vec![vec![1.0, 0.0]]).is_err());
    }
}
