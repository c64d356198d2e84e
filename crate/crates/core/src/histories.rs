//! Probabilities of histories from nested anticommutators.
//!
//! For events `P₁(t₁), …, Pₙ(tₙ)` (Heisenberg picture, `P(t) = U†(t) P U(t)`)
//! the probability is
//!
//! ```text
//! p = Tr[ Pₙ · ½{Pₙ₋₁, … ½{P₁, ρ} …} ]
//! ```
//!
//! with a factor ½ per anticommutator, so a single event gives `Tr[ρP₁]`. The
//! last anticommutator is replaced by a plain product, which has the same
//! trace. The functional is linear in every slot, so additivity under merging
//! projectors holds automatically; consistency of a family is therefore a
//! positivity question, checked over every coarse-graining.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{hermitian_eigensystem, unitary_exp};
use crate::error::{Error, Result};
use crate::matrix::{anticommutator, ComplexMatrix, C64};
use crate::state::{real_trace, DensityMatrix, Projector, ProjectorFamily};
use crate::STRUCTURAL_TOL;

/// Default tolerance of [`check_consistency`].
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-9;

/// Upper bound on `Πᵢ 2^mᵢ` for exhaustive coarse-graining enumeration.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// `U†(t) P U(t)` with `U(t) = exp(-iHt)`.
pub fn heisenberg_projector(p: &Projector, h: &ComplexMatrix, t: f64) -> Result<Projector> {
    let u = unitary_exp(h, t)?;
    p.conjugated(&u.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEvent {
    pub time: f64,
    pub projector_index: usize,
}

#[derive(Debug, Clone)]
pub struct HistoryFamily {
    initial_state: DensityMatrix,
    hamiltonian: ComplexMatrix,
    times: Vec<f64>,
    slots: Vec<ProjectorFamily>,
    heisenberg: Vec<Vec<Projector>>,
}

impl HistoryFamily {
    pub fn new(
        initial_state: DensityMatrix,
        hamiltonian: ComplexMatrix,
        times: Vec<f64>,
        slots: Vec<ProjectorFamily>,
    ) -> Result<Self> {
        let dim = initial_state.dim();
        if hamiltonian.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.dim(),
            });
        }
        if slots.is_empty() {
            return Err(Error::InvalidHistory("at least one time slot is required".into()));
        }
        if times.len() != slots.len() {
            return Err(Error::InvalidHistory(format!(
                "{} times for {} slot families",
                times.len(),
                slots.len()
            )));
        }
        if times
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less))
        {
            return Err(Error::InvalidHistory("time grid must be strictly increasing".into()));
        }
        for fam in &slots {
            if fam.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: fam.dim(),
                });
            }
        }

        let eigen = hermitian_eigensystem(&hamiltonian)?;
        let mut heisenberg = Vec::with_capacity(slots.len());
        for (fam, &t) in slots.iter().zip(&times) {
            let u_dag = eigen.map_spectrum(|l| C64::new(0.0, l * t).exp());
            let evolved = fam
                .members()
                .iter()
                .map(|p| p.conjugated(&u_dag))
                .collect::<Result<Vec<_>>>()?;
            heisenberg.push(evolved);
        }
        Ok(Self {
            initial_state,
            hamiltonian,
            times,
            slots,
            heisenberg,
        })
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial_state
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slots(&self) -> &[ProjectorFamily] {
        &self.slots
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_sizes(&self) -> Vec<usize> {
        self.slots.iter().map(|f| f.len()).collect()
    }

    /// Heisenberg-picture projector of member `index` at slot `slot`.
    pub fn heisenberg_member(&self, slot: usize, index: usize) -> &Projector {
        &self.heisenberg[slot][index]
    }

    pub fn history(&self, choice: Vec<usize>) -> Result<History<'_>> {
        History::new(self, choice)
    }

    /// Every fine-grained history, in lexicographic order of choices.
    pub fn fine_grained(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for_each_choice(&self.slot_sizes(), |c| out.push(c.to_vec()));
        out
    }

    /// Sum of [`history_probability_modified`] over all fine-grained histories.
    pub fn total_probability(&self) -> Result<f64> {
        let mut total = 0.0;
        for choice in self.fine_grained() {
            total += history_probability_modified(&self.history(choice)?)?;
        }
        Ok(total)
    }

    fn operators(&self, choice: &[usize]) -> Vec<&ComplexMatrix> {
        choice
            .iter()
            .enumerate()
            .map(|(slot, &i)| self.heisenberg[slot][i].matrix())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct History<'a> {
    family: &'a HistoryFamily,
    choice: Vec<usize>,
}

impl<'a> History<'a> {
    pub fn new(family: &'a HistoryFamily, choice: Vec<usize>) -> Result<Self> {
        if choice.len() != family.n_slots() {
            return Err(Error::InvalidHistory(format!(
                "history has {} events for {} slots",
                choice.len(),
                family.n_slots()
            )));
        }
        for (slot, &i) in choice.iter().enumerate() {
            let len = family.slots[slot].len();
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
        }
        Ok(Self { family, choice })
    }

    pub fn family(&self) -> &HistoryFamily {
        self.family
    }

    pub fn choice(&self) -> &[usize] {
        &self.choice
    }

    pub fn events(&self) -> Vec<HistoryEvent> {
        self.choice
            .iter()
            .zip(&self.family.times)
            .map(|(&projector_index, &time)| HistoryEvent { time, projector_index })
            .collect()
    }
}

/// Nested-anticommutator probability of a history. May be negative or exceed 1.
pub fn history_probability_modified(h: &History<'_>) -> Result<f64> {
    let ops = h.family.operators(&h.choice);
    modified_chain(h.family.initial_state.matrix(), &ops)
}

/// `Tr[Pₙ…P₁ ρ P₁…Pₙ]`, the chain-operator baseline.
pub fn history_probability_standard(h: &History<'_>) -> Result<f64> {
    let ops = h.family.operators(&h.choice);
    standard_chain(h.family.initial_state.matrix(), &ops)
}

fn modified_chain(rho: &ComplexMatrix, ops: &[&ComplexMatrix]) -> Result<f64> {
    let (last, rest) = ops.split_last().expect("at least one slot");
    let mut x = rho.clone();
    for p in rest {
        x = half_anticommutator(p, &x)?;
    }
    real_trace(last.trace_product(&x)?)
}

fn standard_chain(rho: &ComplexMatrix, ops: &[&ComplexMatrix]) -> Result<f64> {
    let mut x = rho.clone();
    for p in ops {
        x = p.matmul(&x)?.matmul(p)?;
    }
    real_trace(x.trace())
}

fn half_anticommutator(p: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(anticommutator(p, x)?.scale_real(0.5))
}

/// A branch of a coarse-grained family whose probability left `[-tol, 1 + tol]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Per slot, the members whose union forms the event.
    pub unions: Vec<Vec<usize>>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violations: Vec<Violation>,
    /// Fine-grained choice and its probability, in lexicographic order.
    pub probability_table: Vec<(Vec<usize>, f64)>,
    /// Number of union-histories evaluated.
    pub evaluated: usize,
}

/// Evaluates every history whose events are unions of slot members (all
/// nonempty subsets, independently per slot) and reports the probabilities
/// outside `[-tol, 1 + tol]`.
pub fn check_consistency(fam: &HistoryFamily, tol: f64) -> Result<ConsistencyReport> {
    let sizes = fam.slot_sizes();
    let mut count: u128 = 1;
    for &m in &sizes {
        count = count.saturating_mul(1u128.checked_shl(m as u32).unwrap_or(u128::MAX));
        if count > ENUMERATION_CAP {
            break;
        }
    }
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            count,
            cap: ENUMERATION_CAP,
        });
    }

    // union projectors per slot, indexed by nonempty member bitmask
    let dim = fam.initial_state.dim();
    let unions: Vec<Vec<(Vec<usize>, ComplexMatrix)>> = (0..fam.n_slots())
        .map(|slot| {
            (1u64..(1u64 << sizes[slot]))
                .map(|mask| {
                    let members: Vec<usize> = (0..sizes[slot]).filter(|i| mask >> i & 1 == 1).collect();
                    let mut m = ComplexMatrix::zeros(dim);
                    for &i in &members {
                        m = &m + fam.heisenberg[slot][i].matrix();
                    }
                    (members, m)
                })
                .collect()
        })
        .collect();

    let mut violations = Vec::new();
    let mut evaluated = 0usize;
    let mut path = Vec::with_capacity(fam.n_slots());
    walk_unions(
        &unions,
        fam.initial_state.matrix().clone(),
        &mut path,
        &mut |path, p| {
            evaluated += 1;
            if p < -tol || p > 1.0 + tol {
                violations.push(Violation {
                    unions: path.iter().map(|&(s, k)| unions[s][k].0.clone()).collect(),
                    probability: p,
                });
            }
        },
    )?;

    let mut probability_table = Vec::new();
    for choice in fam.fine_grained() {
        let p = history_probability_modified(&fam.history(choice.clone())?)?;
        probability_table.push((choice, p));
    }

    Ok(ConsistencyReport {
        consistent: violations.is_empty(),
        violations,
        probability_table,
        evaluated,
    })
}

type UnionVisitor<'a> = dyn FnMut(&[(usize, usize)], f64) + 'a;

// Depth-first over slots, sharing the nested anticommutator of each prefix.
fn walk_unions(
    unions: &[Vec<(Vec<usize>, ComplexMatrix)>],
    x: ComplexMatrix,
    path: &mut Vec<(usize, usize)>,
    visit: &mut UnionVisitor<'_>,
) -> Result<()> {
    let slot = path.len();
    let last = slot + 1 == unions.len();
    for (k, (_, q)) in unions[slot].iter().enumerate() {
        path.push((slot, k));
        if last {
            let p = real_trace(q.trace_product(&x)?)?;
            visit(path, p);
        } else {
            walk_unions(unions, half_anticommutator(q, &x)?, path, visit)?;
        }
        path.pop();
    }
    Ok(())
}

/// `max |p(P¹ + P²) − p(P¹) − p(P²)|` over fine-grained choices in the other
/// slots, where `parts` names two members of slot `slot`.
pub fn additivity_residual(fam: &HistoryFamily, slot: usize, parts: (usize, usize)) -> Result<f64> {
    if slot >= fam.n_slots() {
        return Err(Error::IndexOutOfRange {
            index: slot,
            len: fam.n_slots(),
        });
    }
    let len = fam.slots[slot].len();
    for i in [parts.0, parts.1] {
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
    }
    if parts.0 == parts.1 {
        return Err(Error::InvalidHistory("additivity needs two distinct members".into()));
    }
    let merged = fam.heisenberg[slot][parts.0].matrix() + fam.heisenberg[slot][parts.1].matrix();
    let rho = fam.initial_state.matrix();

    let mut sizes = fam.slot_sizes();
    sizes[slot] = 1;
    let mut worst = 0.0f64;
    let mut err = None;
    for_each_choice(&sizes, |choice| {
        if err.is_some() {
            return;
        }
        let mut c = choice.to_vec();
        let eval = |c: &[usize], replacement: Option<&ComplexMatrix>| {
            let mut ops = fam.operators(c);
            if let Some(m) = replacement {
                ops[slot] = m;
            }
            modified_chain(rho, &ops)
        };
        let result = (|| -> Result<f64> {
            let whole = eval(&c, Some(&merged))?;
            c[slot] = parts.0;
            let p1 = eval(&c, None)?;
            c[slot] = parts.1;
            let p2 = eval(&c, None)?;
            Ok((whole - p1 - p2).abs())
        })();
        match result {
            Ok(r) => worst = worst.max(r),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

/// `max |Σ_{k} p(…, Pₙ = k) − p(…)|` over branches of the family truncated
/// before its last slot.
pub fn marginalization_residual(fam: &HistoryFamily) -> Result<f64> {
    let n = fam.n_slots();
    if n < 2 {
        return Err(Error::InvalidHistory("marginalization needs at least two slots".into()));
    }
    let rho = fam.initial_state.matrix();
    let sizes = fam.slot_sizes();
    let last = sizes[n - 1];
    let mut worst = 0.0f64;
    let mut err = None;
    for_each_choice(&sizes[..n - 1], |prefix| {
        if err.is_some() {
            return;
        }
        let result = (|| -> Result<f64> {
            let truncated = modified_chain(rho, &fam.operators(prefix))?;
            let mut full = prefix.to_vec();
            full.push(0);
            let mut sum = 0.0;
            for k in 0..last {
                full[n - 1] = k;
                sum += modified_chain(rho, &fam.operators(&full))?;
            }
            Ok((sum - truncated).abs())
        })();
        match result {
            Ok(r) => worst = worst.max(r),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

/// Calls `f` on every index tuple with `0 ≤ cᵢ < sizes[i]`, last index fastest.
pub fn for_each_choice(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut c = vec![0usize; sizes.len()];
    loop {
        f(&c);
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            c[k] += 1;
            if c[k] < sizes[k] {
                break;
            }
            c[k] = 0;
        }
    }
}

/// Checks that a projector family is unchanged (within tolerance) by the
/// Hamiltonian evolution, i.e. every member commutes with `H`.
pub fn commutes_with_hamiltonian(fam: &ProjectorFamily, h: &ComplexMatrix) -> Result<bool> {
    for p in fam.members() {
        let ph = p.matrix().matmul(h)?;
        let hp = h.matmul(p.matrix())?;
        if ph.max_abs_diff(&hp)? > STRUCTURAL_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pauli_y;
    use crate::sampling::{random_density, random_hermitian, random_rank_one_family, rng_from_seed};
    use crate::state::event_probability;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn up_state() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::real_diagonal(&[1.0, 0.0])).unwrap()
    }

    fn qubit_basis_family(v: [f64; 2]) -> ProjectorFamily {
        let u = ComplexMatrix::from_real_rows(&[[v[0], -v[1]], [v[1], v[0]]]).unwrap();
        ProjectorFamily::from_unitary_columns(&u).unwrap()
    }

    fn angle_family(phi: f64) -> ProjectorFamily {
        qubit_basis_family([phi.cos(), phi.sin()])
    }

    // ρ = |↑⟩⟨↑|, H = 0, first slot {|+x⟩, |−x⟩}, second slot {|ψ(φ)⟩, |ψ(φ)⊥⟩}
    fn witness_family(phi: f64) -> HistoryFamily {
        HistoryFamily::new(
            up_state(),
            ComplexMatrix::zeros(2),
            vec![1.0, 2.0],
            vec![angle_family(PI / 4.0), angle_family(phi)],
        )
        .unwrap()
    }

    #[test]
    fn heisenberg_projector_examples() {
        let up = Projector::basis(2, 0);
        let h = pauli_y().scale_real(0.5);
        assert!(
            heisenberg_projector(&up, &h, 0.0)
                .unwrap()
                .matrix()
                .max_abs_diff(up.matrix())
                .unwrap()
                < 1e-15
        );
        let zero = ComplexMatrix::zeros(2);
        assert_eq!(heisenberg_projector(&up, &zero, 3.0).unwrap().matrix(), up.matrix());

        // U†|↑⟩ with U = exp(-i σy π/4) is the −x eigenstate
        let out = heisenberg_projector(&up, &h, PI / 2.0).unwrap();
        let minus_x = ComplexMatrix::from_real_rows(&[[0.5, -0.5], [-0.5, 0.5]]).unwrap();
        assert!(out.matrix().max_abs_diff(&minus_x).unwrap() < 1e-14);
        assert_eq!(out.rank(), 1);
        assert!(Projector::new(out.matrix().clone()).is_ok());
    }

    #[test]
    fn single_event_is_born_rule() {
        let mut rng = rng_from_seed(5);
        let rho = random_density(&mut rng, 3);
        let fam = random_rank_one_family(&mut rng, 3);
        let h = random_hermitian(&mut rng, 3);
        let hf = HistoryFamily::new(rho.clone(), h.clone(), vec![0.7], vec![fam.clone()]).unwrap();
        for k in 0..3 {
            let p = history_probability_modified(&hf.history(vec![k]).unwrap()).unwrap();
            let evolved = heisenberg_projector(&fam.members()[k], &h, 0.7).unwrap();
            assert!((p - event_probability(&rho, &evolved).unwrap()).abs() < 1e-12);
            let s = history_probability_standard(&hf.history(vec![k]).unwrap()).unwrap();
            assert!((p - s).abs() < 1e-12);
        }
    }

    #[test]
    fn up_then_plus_x_is_one_half() {
        let fam = HistoryFamily::new(
            up_state(),
            ComplexMatrix::zeros(2),
            vec![0.0, 1.0],
            vec![ProjectorFamily::computational(2), angle_family(PI / 4.0)],
        )
        .unwrap();
        let p = history_probability_modified(&fam.history(vec![0, 0]).unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    // Direct 2x2 oracle: ½{P₁, ρ} = [[½, ¼], [¼, 0]] and
    // ⟨ψ|·|ψ⟩ = ½cos²φ + ½cosφ sinφ.
    fn witness_modified_oracle(phi: f64) -> f64 {
        0.5 * phi.cos() * (phi.cos() + phi.sin())
    }

    // |⟨ψ|+x⟩|² |⟨+x|↑⟩|² = ½(cos φ + sin φ)² · ½
    fn witness_standard_oracle(phi: f64) -> f64 {
        0.25 * (phi.cos() + phi.sin()).powi(2)
    }

    #[test]
    fn witness_at_108_degrees() {
        let phi = 108f64.to_radians();
        let fam = witness_family(phi);
        let h = fam.history(vec![0, 0]).unwrap();
        let modified = history_probability_modified(&h).unwrap();
        let standard = history_probability_standard(&h).unwrap();
        assert!((modified - witness_modified_oracle(phi)).abs() < 1e-14);
        assert!((standard - witness_standard_oracle(phi)).abs() < 1e-14);
        assert!((modified - (-0.099_200_6)).abs() < 1e-6);
        assert!((standard - 0.103_053_7).abs() < 1e-6);
    }

    #[test]
    fn commuting_case_agrees_with_standard() {
        let rho = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.2, 0.3, 0.5])).unwrap();
        let h = ComplexMatrix::real_diagonal(&[0.4, -1.0, 2.0]);
        let fam = HistoryFamily::new(rho, h, vec![0.0, 0.5, 1.5], vec![ProjectorFamily::computational(3); 3]).unwrap();
        for choice in fam.fine_grained() {
            let h = fam.history(choice).unwrap();
            let a = history_probability_modified(&h).unwrap();
            let b = history_probability_standard(&h).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn consistency_examples() {
        let mut rng = rng_from_seed(8);
        let single = HistoryFamily::new(
            random_density(&mut rng, 3),
            random_hermitian(&mut rng, 3),
            vec![1.0],
            vec![random_rank_one_family(&mut rng, 3)],
        )
        .unwrap();
        let report = check_consistency(&single, DEFAULT_CONSISTENCY_TOL).unwrap();
        assert!(report.consistent);
        assert_eq!(report.evaluated, 7);

        let witness = witness_family(108f64.to_radians());
        let report = check_consistency(&witness, DEFAULT_CONSISTENCY_TOL).unwrap();
        assert!(!report.consistent);
        assert!(report
            .violations
            .iter()
            .any(|v| v.unions == vec![vec![0], vec![0]] && (v.probability + 0.0992).abs() < 1e-4));
        assert_eq!(report.evaluated, 9);
        assert_eq!(report.probability_table.len(), 4);

        let diag = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.36, 0.64])).unwrap();
        let pointer = HistoryFamily::new(
            diag,
            ComplexMatrix::zeros(2),
            vec![0.0, 1.0],
            vec![ProjectorFamily::computational(2); 2],
        )
        .unwrap();
        assert!(check_consistency(&pointer, DEFAULT_CONSISTENCY_TOL).unwrap().consistent);
    }

    #[test]
    fn enumeration_cap_refuses() {
        let rho = DensityMatrix::maximally_mixed(8);
        let fam = HistoryFamily::new(
            rho,
            ComplexMatrix::zeros(8),
            vec![0.0, 1.0, 2.0],
            vec![ProjectorFamily::computational(8); 3],
        )
        .unwrap();
        // 2^24 > 10^6
        assert!(matches!(
            check_consistency(&fam, 1e-9),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn additivity_examples() {
        let witness = witness_family(108f64.to_radians());
        assert!(additivity_residual(&witness, 1, (0, 1)).unwrap() < 1e-12);
        assert!(additivity_residual(&witness, 0, (1, 0)).unwrap() < 1e-12);

        let rho = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let fam = HistoryFamily::new(
            rho,
            ComplexMatrix::zeros(4),
            vec![0.0, 1.0],
            vec![ProjectorFamily::computational(4); 2],
        )
        .unwrap();
        assert_eq!(additivity_residual(&fam, 0, (0, 3)).unwrap(), 0.0);

        assert!(additivity_residual(&fam, 0, (1, 1)).is_err());
        assert!(additivity_residual(&fam, 2, (0, 1)).is_err());
    }

    #[test]
    fn marginalization_examples() {
        let witness = witness_family(1.0);
        assert!(marginalization_residual(&witness).unwrap() < 1e-12);

        let mut rng = rng_from_seed(2);
        let fam = HistoryFamily::new(
            random_density(&mut rng, 2),
            random_hermitian(&mut rng, 2),
            vec![0.0, 1.0],
            vec![
                random_rank_one_family(&mut rng, 2),
                ProjectorFamily::new(vec![Projector::identity(2)]).unwrap(),
            ],
        )
        .unwrap();
        assert!(marginalization_residual(&fam).unwrap() < 1e-15);

        let single =
            HistoryFamily::new(up_state(), ComplexMatrix::zeros(2), vec![0.0], vec![angle_family(0.3)]).unwrap();
        assert!(marginalization_residual(&single).is_err());
    }

    #[test]
    fn total_probability_is_one() {
        let mut rng = rng_from_seed(19);
        for _ in 0..5 {
            let fam = HistoryFamily::new(
                random_density(&mut rng, 3),
                random_hermitian(&mut rng, 3),
                vec![0.0, 0.8, 1.9],
                vec![
                    random_rank_one_family(&mut rng, 3),
                    random_rank_one_family(&mut rng, 3),
                    random_rank_one_family(&mut rng, 3),
                ],
            )
            .unwrap();
            assert!((fam.total_probability().unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn global_unitary_leaves_probabilities_unchanged() {
        let mut rng = rng_from_seed(23);
        let rho = random_density(&mut rng, 3);
        let slots = vec![random_rank_one_family(&mut rng, 3), random_rank_one_family(&mut rng, 3)];
        let fam = HistoryFamily::new(rho.clone(), ComplexMatrix::zeros(3), vec![0.0, 1.0], slots.clone()).unwrap();

        let w = crate::sampling::random_unitary(&mut rng, 3);
        let rho_w = crate::state::evolve(&rho, &w).unwrap();
        let slots_w = slots
            .iter()
            .map(|f| ProjectorFamily::new(f.members().iter().map(|p| p.conjugated(&w).unwrap()).collect()).unwrap())
            .collect();
        let fam_w = HistoryFamily::new(rho_w, ComplexMatrix::zeros(3), vec![0.0, 1.0], slots_w).unwrap();
        for choice in fam.fine_grained() {
            let a = history_probability_modified(&fam.history(choice.clone()).unwrap()).unwrap();
            let b = history_probability_modified(&fam_w.history(choice).unwrap()).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn family_validation() {
        let fam = angle_family(0.2);
        assert!(HistoryFamily::new(
            up_state(),
            ComplexMatrix::zeros(2),
            vec![1.0, 1.0],
            vec![fam.clone(), fam.clone()]
        )
        .is_err());
        assert!(HistoryFamily::new(
            up_state(),
            ComplexMatrix::zeros(2),
            vec![1.0],
            vec![fam.clone(), fam.clone()]
        )
        .is_err());
        assert!(HistoryFamily::new(up_state(), ComplexMatrix::zeros(3), vec![1.0], vec![fam.clone()]).is_err());
        let hf = HistoryFamily::new(up_state(), ComplexMatrix::zeros(2), vec![1.0], vec![fam]).unwrap();
        assert!(hf.history(vec![2]).is_err());
        assert!(hf.history(vec![0, 0]).is_err());
        let h = hf.history(vec![1]).unwrap();
        assert_eq!(
            h.events(),
            vec![HistoryEvent {
                time: 1.0,
                projector_index: 1
            }]
        );
    }

    #[test]
    fn pointer_projectors_commute_with_diagonal_hamiltonian() {
        let h = ComplexMatrix::real_diagonal(&[1.0, -1.0]);
        assert!(commutes_with_hamiltonian(&ProjectorFamily::computational(2), &h).unwrap());
        let x = qubit_basis_family([FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!(!commutes_with_hamiltonian(&x, &h).unwrap());
    }
}
