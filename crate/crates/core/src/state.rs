//! States, projectors and observables.
//!
//! A [`DensityMatrix`] here is only required to be Hermitian with unit trace.
//! Its lowest eigenvalue is cached and used to classify it as positive,
//! quasi-positive (small negative eigenvalues) or indefinite. States produced
//! by the anticommutator reduction are generally not positive, so construction
//! never rejects on positivity.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use crate::eigen::{hermitian_eigensystem, EigenSystem};
use crate::error::{Error, Result};
use crate::matrix::{pauli_x, pauli_y, pauli_z, ComplexMatrix, C64};
use crate::{DEFAULT_QUASI_THRESHOLD, DEGENERACY_TOL, IMAG_RESIDUE_TOL, POSITIVITY_FLOOR, STRUCTURAL_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Positivity {
    Positive,
    /// Smallest eigenvalue is `-epsilon`, within the quasi-positivity threshold.
    QuasiPositive {
        epsilon: f64,
    },
    Indefinite,
}

impl Positivity {
    pub fn classify(min_eigenvalue: f64, quasi_threshold: f64) -> Self {
        if min_eigenvalue >= -POSITIVITY_FLOOR {
            Positivity::Positive
        } else if min_eigenvalue >= -quasi_threshold {
            Positivity::QuasiPositive {
                epsilon: -min_eigenvalue,
            }
        } else {
            Positivity::Indefinite
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Positivity::Positive => "positive",
            Positivity::QuasiPositive { .. } => "quasi-positive",
            Positivity::Indefinite => "indefinite",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectrum: Vec<f64>,
    quasi_threshold: f64,
    positivity: Positivity,
}

impl DensityMatrix {
    /// Validates with the default quasi-positivity threshold.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        make_density(matrix, DEFAULT_QUASI_THRESHOLD)
    }

    /// `|ψ⟩⟨ψ|` for a normalised vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(ComplexMatrix::projector_onto(psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64)).expect("I/d is a state")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Ascending eigenvalues.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn positivity(&self) -> Positivity {
        self.positivity
    }

    pub fn quasi_threshold(&self) -> f64 {
        self.quasi_threshold
    }

    /// Re-validates `matrix` carrying over this state's quasi-positivity threshold.
    pub fn with_same_threshold(&self, matrix: ComplexMatrix) -> Result<Self> {
        make_density(matrix, self.quasi_threshold)
    }
}

/// Validates Hermiticity and unit trace, then classifies positivity.
pub fn make_density(matrix: ComplexMatrix, quasi_threshold: f64) -> Result<DensityMatrix> {
    let defect = matrix.hermiticity_defect();
    if defect > STRUCTURAL_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let tr = matrix.trace();
    if (tr.re - 1.0).abs() > STRUCTURAL_TOL || tr.im.abs() > STRUCTURAL_TOL {
        return Err(Error::InvalidTrace(tr.re));
    }
    let spectrum = hermitian_eigensystem(&matrix)?.eigenvalues;
    let positivity = Positivity::classify(spectrum[0], quasi_threshold);
    Ok(DensityMatrix {
        matrix,
        spectrum,
        quasi_threshold,
        positivity,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    /// Checks `P = P†` and `P² = P` within the structural tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_defect();
        let idem = (&matrix * &matrix).max_abs_diff(&matrix)?;
        let worst = herm.max(idem);
        if worst > STRUCTURAL_TOL {
            return Err(Error::NotProjector(worst));
        }
        let rank = Float::round(matrix.trace().re).max(0.0) as usize;
        Ok(Self { matrix, rank })
    }

    /// Rank-1 projector onto `v`, normalising it first.
    pub fn onto(v: &[C64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        let unit: Vec<C64> = v.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::projector_onto(&unit))
    }

    /// Computational basis state `|index⟩⟨index|`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self { matrix: m, rank: 1 }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    /// Qubit projector `½(I + n·σ)` onto spin up along the unit vector `n`.
    pub fn qubit_along(n: [f64; 3]) -> Result<Self> {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (len - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::NotNormalized(len * len));
        }
        Self::new(from_bloch(n))
    }

    /// Sum of mutually orthogonal projectors.
    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a Projector>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidPartition("empty projector sum".into()))?;
        let mut acc = first.matrix.clone();
        for p in iter {
            acc = acc.checked_add(&p.matrix)?;
        }
        Self::new(acc)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Unit vector spanning the range of a rank-1 projector; its first
    /// non-negligible component is real positive.
    pub fn range_vector(&self) -> Option<Vec<C64>> {
        if self.rank != 1 {
            return None;
        }
        let n = self.dim();
        let best = (0..n).max_by(|&a, &b| self.matrix[(a, a)].re.total_cmp(&self.matrix[(b, b)].re))?;
        let mut v = self.matrix.column(best);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let pivot = v.iter().find(|z| z.norm() > 1e-12).copied()?;
        let rot = pivot.conj() / (pivot.norm() * norm);
        for z in v.iter_mut() {
            *z *= rot;
        }
        Some(v)
    }

    /// `U P U†` as a projector. The caller guarantees `U` is unitary.
    pub(crate) fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = self.matrix.conjugate_by(u)?;
        Ok(Self {
            matrix: m,
            rank: self.rank,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    members: Vec<Projector>,
}

impl ProjectorFamily {
    /// Checks pairwise orthogonality and completeness.
    pub fn new(members: Vec<Projector>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidPartition("empty projector family".into()))?;
        let dim = first.dim();
        for p in &members {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let prod = &members[i].matrix * &members[j].matrix;
                let worst = prod.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
                if worst > STRUCTURAL_TOL {
                    return Err(Error::NotOrthogonal(i, j));
                }
            }
        }
        let mut total = ComplexMatrix::zeros(dim);
        for p in &members {
            total = &total + &p.matrix;
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim))?;
        if defect > STRUCTURAL_TOL {
            return Err(Error::Incomplete(defect));
        }
        Ok(Self { members })
    }

    /// `{|0⟩⟨0|, …, |d-1⟩⟨d-1|}`.
    pub fn computational(dim: usize) -> Self {
        Self {
            members: (0..dim).map(|i| Projector::basis(dim, i)).collect(),
        }
    }

    /// One rank-1 projector per column of a unitary.
    pub fn from_unitary_columns(u: &ComplexMatrix) -> Result<Self> {
        let members = (0..u.dim())
            .map(|k| Projector::onto(&u.column(k)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[Projector] {
        &self.members
    }

    pub fn member(&self, index: usize) -> Result<&Projector> {
        self.members.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.members.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn is_rank_one(&self) -> bool {
        self.members.iter().all(|p| p.rank == 1)
    }

    /// Orthonormal basis vectors of a rank-1 family, in member order.
    pub fn basis_vectors(&self) -> Result<Vec<Vec<C64>>> {
        self.members
            .iter()
            .enumerate()
            .map(|(index, p)| p.range_vector().ok_or(Error::NotRankOne { index, rank: p.rank }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
    eigen: EigenSystem,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let eigen = hermitian_eigensystem(&matrix)?;
        Ok(Self { matrix, eigen })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    /// Index sets of numerically degenerate eigenvalues, ascending.
    pub fn degenerate_clusters(&self) -> Vec<Vec<usize>> {
        let vals = &self.eigen.eigenvalues;
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            match clusters.last_mut() {
                Some(last) if v - vals[*last.last().unwrap()] <= DEGENERACY_TOL => last.push(i),
                _ => clusters.push(alloc::vec![i]),
            }
        }
        clusters
    }
}

/// Projectors `Σ_{i ∈ S} v_i v_i†` for each index set `S` of the partition.
///
/// Indices refer to the ascending eigenvalue order of the observable. The
/// partition must cover every index exactly once and may not split a
/// degenerate cluster.
pub fn spectral_projectors(obs: &Observable, partition: &[Vec<usize>]) -> Result<ProjectorFamily> {
    let n = obs.eigen.dim();
    let mut owner = alloc::vec![usize::MAX; n];
    for (set_idx, set) in partition.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::InvalidPartition(format!("set {set_idx} is empty")));
        }
        for &i in set {
            if i >= n {
                return Err(Error::InvalidPartition(format!(
                    "eigenvalue index {i} out of range for dimension {n}"
                )));
            }
            if owner[i] != usize::MAX {
                return Err(Error::InvalidPartition(format!("eigenvalue index {i} appears twice")));
            }
            owner[i] = set_idx;
        }
    }
    if let Some(missing) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::InvalidPartition(format!(
            "eigenvalue index {missing} not covered"
        )));
    }
    for cluster in obs.degenerate_clusters() {
        let set = owner[cluster[0]];
        if cluster.iter().any(|&i| owner[i] != set) {
            return Err(Error::InvalidPartition(format!(
                "degenerate eigenvalue cluster {cluster:?} split across sets"
            )));
        }
    }

    let members = partition
        .iter()
        .map(|set| {
            let mut m = ComplexMatrix::zeros(n);
            for &i in set {
                m = &m + &ComplexMatrix::projector_onto(&obs.eigen.eigenvector(i));
            }
            Projector::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    ProjectorFamily::new(members)
}

/// `U ρ U†`. The spectrum, and with it the positivity class, is unchanged.
pub fn evolve(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    rho.matrix.check_same_dim(u)?;
    let defect = u.unitarity_defect();
    if defect > STRUCTURAL_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let m = rho.matrix.conjugate_by(u)?;
    rho.with_same_threshold(crate::sampling::hermitize(&m))
}

/// Reduced matrix on factor `keep` of a tensor product with factor dimensions `dims`.
///
/// Factor 0 is the most significant digit of the joint index.
pub fn partial_trace_matrix(joint: &ComplexMatrix, dims: &[usize], keep: usize) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != joint.dim() {
        return Err(Error::DimensionMismatch {
            expected: joint.dim(),
            found: total,
        });
    }
    if keep >= dims.len() {
        return Err(Error::IndexOutOfRange {
            index: keep,
            len: dims.len(),
        });
    }
    let dk = dims[keep];
    let left: usize = dims[..keep].iter().product();
    let right: usize = dims[keep + 1..].iter().product();
    Ok(ComplexMatrix::from_fn(dk, |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..left {
            for r in 0..right {
                acc += joint[((l * dk + a) * right + r, (l * dk + b) * right + r)];
            }
        }
        acc
    }))
}

pub fn partial_trace(joint: &DensityMatrix, dims: &[usize], keep: usize) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(&joint.matrix, dims, keep)?;
    joint.with_same_threshold(reduced)
}

/// `Tr[ρP]`. Values outside `[0, 1]` are returned unchanged; they occur for
/// non-positive states and are what the event condition looks for.
pub fn event_probability(rho: &DensityMatrix, p: &Projector) -> Result<f64> {
    real_trace(rho.matrix.trace_product(&p.matrix)?)
}

pub(crate) fn real_trace(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// `(Tr[ρσx], Tr[ρσy], Tr[ρσz])`. Length above 1 marks a non-positive state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = &rho.matrix;
    Ok([
        m.trace_product(&pauli_x())?.re,
        m.trace_product(&pauli_y())?.re,
        m.trace_product(&pauli_z())?.re,
    ])
}

/// `½(I + r·σ)`.
pub fn from_bloch(r: [f64; 3]) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        [C64::new(0.5 * (1.0 + r[2]), 0.0), C64::new(0.5 * r[0], -0.5 * r[1])],
        [C64::new(0.5 * r[0], 0.5 * r[1]), C64::new(0.5 * (1.0 - r[2]), 0.0)],
    ])
    .expect("2x2")
}
