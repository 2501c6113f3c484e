//! Seeded random problem instances for tests, benchmarks and the acceptance
//! suite.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensemble::Ensemble;
use crate::linalg::{c, CMatrix, HermitianOperator};

pub use rand_chacha::ChaCha8Rng as Rng64;
pub use rand::SeedableRng;

pub fn rng(seed: u64) -> Rng64 {
    Rng64::seed_from_u64(seed)
}

fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Hermitian matrix with Gaussian entries (GUE-like).
pub fn hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::symmetrized(&ginibre(d, d, rng))
}

/// Hermitian matrix with unit Frobenius norm.
pub fn unit_hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianOperator {
    let h = hermitian(d, rng);
    let n = h.frobenius_norm();
    h.scale(1.0 / n)
}

/// Density matrix `G G† / tr(G G†)` with `G` a d×rank Ginibre matrix.
pub fn density<R: Rng>(d: usize, rank: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(d, rank.max(1), rng);
    let rho = HermitianOperator::symmetrized(&(&g * g.adjoint()));
    let t = rho.trace();
    rho.scale(1.0 / t)
}

/// Random unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    ginibre(d, d, rng).qr().q()
}

/// Random distribution on `n` outcomes, bounded away from zero.
pub fn simplex<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random mixed-state ensemble. With `product_uniform` the distribution is
/// `p_b / N` for a random `p_b`; otherwise `p_xb` is an arbitrary random
/// distribution.
pub fn ensemble<R: Rng>(d: usize, n: usize, l: usize, product_uniform: bool, rng: &mut R) -> Ensemble {
    let probs: Vec<f64> = if product_uniform {
        let pb = simplex(l, rng);
        (0..n * l).map(|i| pb[i % l] / n as f64).collect()
    } else {
        simplex(n * l, rng)
    };
    let items: Vec<_> = (0..n * l)
        .map(|i| {
            let rank = rng.gen_range(1..=d);
            (i / l, i % l, probs[i], density(d, rank, rng))
        })
        .collect();
    Ensemble::new(d, n, l, items).expect("random ensemble is valid")
}

/// Binary, two-encoding, uniformly distributed classical ensemble in
/// dimension `d` (even): each `ρ_xb` is a rank-`d/2` projector over `d/2`,
/// complementary for fixed `b`, all diagonal in one random basis.
pub fn classical_equal_rank<R: Rng>(d: usize, rotate: bool, rng: &mut R) -> Ensemble {
    assert!(d.is_multiple_of(2));
    let u = if rotate { unitary(d, rng) } else { CMatrix::identity(d, d) };
    let r = d / 2;
    let mut items = Vec::new();
    for b in 0..2 {
        let mut idx: Vec<usize> = (0..d).collect();
        idx.shuffle(rng);
        for x in 0..2 {
            let diag: Vec<f64> = (0..d)
                .map(|k| {
                    let pos = idx.iter().position(|&i| i == k).unwrap();
                    if (pos < r) == (x == 0) {
                        1.0 / r as f64
                    } else {
                        0.0
                    }
                })
                .collect();
            let rho = HermitianOperator::from_real_diagonal(&diag);
            let rotated = HermitianOperator::symmetrized(&(&u * rho.matrix() * u.adjoint()));
            items.push((x, b, 0.25, rotated));
        }
    }
    Ensemble::new(d, 2, 2, items).expect("classical ensemble is valid")
}

/// Random ensemble whose states all commute: diagonal mixed states in a
/// shared random basis.
pub fn commuting<R: Rng>(d: usize, n: usize, l: usize, rng: &mut R) -> Ensemble {
    let u = unitary(d, rng);
    let probs = simplex(n * l, rng);
    let items: Vec<_> = (0..n * l)
        .map(|i| {
            let diag = simplex(d, rng);
            let rho = HermitianOperator::from_real_diagonal(&diag);
            let rotated = HermitianOperator::symmetrized(&(&u * rho.matrix() * u.adjoint()));
            (i / l, i % l, probs[i], rotated)
        })
        .collect();
    Ensemble::new(d, n, l, items).expect("commuting ensemble is valid")
}

/// Uniformly random unit vector in `R^k`.
pub fn unit_vector<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
