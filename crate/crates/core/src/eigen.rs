//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! propagator `exp(-iHt)` built on top of it.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::STRUCTURAL_TOL;

/// Sweep cap for the Jacobi iteration. Well-conditioned inputs of the sizes
/// used here converge in under 15 sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Components with modulus below this are skipped when fixing eigenvector phase.
const PHASE_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the normalised eigenvector for `eigenvalues[k]`; its first
    /// non-negligible component is real and positive.
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let weights: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * weights[k] * v[(j, k)].conj()).sum()
        })
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Diagonalises a Hermitian matrix.
///
/// Eigenvalues come back ascending. Eigenvectors are phase-normalised so that
/// their first non-negligible component is real positive, and vectors within
/// an exactly degenerate cluster are ordered lexicographically by their
/// entries, which makes the output reproducible.
pub fn hermitian_eigensystem(h: &ComplexMatrix) -> Result<EigenSystem> {
    let defect = h.hermiticity_defect();
    if defect > STRUCTURAL_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = h.dim();
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) <= 1e-15 * scale {
        converged = true;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut col = v.column(k);
            normalize_phase(&mut col);
            (a[(k, k)].re, col)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Order vectors inside degenerate clusters.
    let tie = 1e-12 * (1.0 + pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[end - 1].0 <= tie {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|x, y| lexicographic(&x.1, &y.1));
        }
        start = end;
    }

    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| pairs[k].1[i]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(-iHt)` for Hermitian `H` (ħ = 1).
pub fn unitary_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let es = hermitian_eigensystem(h)?;
    Ok(es.map_spectrum(|l| {
        let phase = -l * t;
        C64::from_polar(1.0, phase)
    }))
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    Float::sqrt(acc)
}

// One Jacobi step zeroing a[p][q].
//
// With a_pq = r e^{iφ}, the 2x2 block is D S D† where D = diag(1, e^{-iφ}) and
// S is real symmetric; the real rotation R diagonalising S gives J = D R.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let e = apq / r;
    let ebar = e.conj();
    let (alpha, beta) = (a[(p, p)].re, a[(q, q)].re);

    let theta = (beta - alpha) / (2.0 * r);
    let t = if theta.is_infinite() {
        1.0 / (2.0 * theta)
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + Float::sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / Float::sqrt(t * t + 1.0);
    let s = t * c;

    // J_pp = c, J_pq = s, J_qp = -s ē, J_qq = c ē
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = ebar * (-s);
    let jqq = ebar * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;

        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

fn normalize_phase(v: &mut [C64]) {
    if let Some(pivot) = v.iter().find(|z| z.norm() > PHASE_PIVOT_TOL).copied() {
        let rot = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

fn lexicographic(x: &[C64], y: &[C64]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        let ord = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}
