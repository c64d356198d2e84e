//! Seeded random draws of states, unitaries and bases.
//!
//! All generators take an explicit RNG so callers control seeding; use
//! [`rng_from_seed`] for reproducible streams.

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::matrix::{ComplexMatrix, C64};
use crate::state::{DensityMatrix, Projector, ProjectorFamily};

pub type SimRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// GUE-distributed Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        m[(i, i)] = C64::new(d, 0.0);
        for j in (i + 1)..dim {
            let z = complex_normal(rng) * core::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        // twice is enough for orthogonality at double precision
        for _ in 0..2 {
            for c in &cols {
                let overlap: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= overlap * y;
                }
            }
        }
        let norm = Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm < 1e-8 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        cols.push(v);
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
    let norm = Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

/// Haar-uniform single-qubit state `(α, β)`: `|α|²` uniform on `[0, 1]`,
/// relative phase uniform on `[0, 2π)`.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    let u: f64 = rng.random();
    let phi: f64 = rng.random::<f64>() * core::f64::consts::TAU;
    let alpha = C64::new(Float::sqrt(u), 0.0);
    let beta = C64::from_polar(Float::sqrt(1.0 - u), phi);
    (alpha, beta)
}

/// Full-rank mixed state `G G† / Tr[G G†]` from a Ginibre matrix `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| complex_normal(rng));
    let m = g.matmul(&g.adjoint()).expect("square");
    let tr = m.trace().re;
    hermitize(&m.scale_real(1.0 / tr))
}

pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    DensityMatrix::new(random_density_matrix(rng, dim)).expect("Ginibre state is a valid density matrix")
}

/// Unit-trace Hermitian matrix with smallest eigenvalue exactly `-epsilon`
/// in a Haar-random eigenbasis.
pub fn random_quasi_positive_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize, epsilon: f64) -> ComplexMatrix {
    assert!(dim >= 2, "quasi-positive state needs dim >= 2");
    let mut weights: Vec<f64> = (1..dim).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w *= (1.0 + epsilon) / total;
    }
    let mut spectrum = Vec::with_capacity(dim);
    spectrum.push(-epsilon);
    spectrum.extend(weights);
    let u = random_unitary(rng, dim);
    hermitize(
        &ComplexMatrix::real_diagonal(&spectrum)
            .conjugate_by(&u)
            .expect("square"),
    )
}

/// Rank-1 complete family built from the columns of a Haar unitary.
pub fn random_rank_one_family<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ProjectorFamily {
    let u = random_unitary(rng, dim);
    ProjectorFamily::from_unitary_columns(&u).expect("Haar unitary columns form a basis")
}

/// Complete family of projectors obtained by grouping the columns of a Haar
/// unitary into consecutive blocks of the given sizes.
pub fn random_block_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, block_sizes: &[usize]) -> ProjectorFamily {
    assert_eq!(block_sizes.iter().sum::<usize>(), dim, "blocks must cover the space");
    let u = random_unitary(rng, dim);
    let mut members = Vec::with_capacity(block_sizes.len());
    let mut col = 0;
    for &size in block_sizes {
        let mut m = ComplexMatrix::zeros(dim);
        for k in col..col + size {
            m = &m + &ComplexMatrix::projector_onto(&u.column(k));
        }
        col += size;
        members.push(Projector::new(m).expect("sum of orthonormal rank-1 projectors"));
    }
    ProjectorFamily::new(members).expect("blocks of a unitary form a complete family")
}

/// `(M + M†) / 2`, clearing rounding asymmetry.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.dim(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}
