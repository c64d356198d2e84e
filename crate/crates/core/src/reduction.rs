//! State update after an observed event.
//!
//! Three rules are implemented side by side:
//!
//! - [`reduce_standard`]: the Lüders rule `PρP / Tr[ρP]`;
//! - [`reduce_lambda`]: a one-parameter family defined in a rank-1 pointer
//!   basis, `(½{ρ, P₁} − λ Σ_{j≠1}|ρ₁ⱼ| P₁ + λ Σ_{k≠1}|ρ₁ₖ| Pₖ) / Tr[ρP₁]`;
//! - [`reduce_modified`]: its `λ = 0` member, `½{P, ρ} / Tr[ρP]`, which needs
//!   no pointer basis.
//!
//! Averaging the λ-family over unread outcomes returns `ρ` exactly, whereas
//! the Lüders average discards the off-block part of `ρ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{anticommutator, frobenius_distance, ComplexMatrix, C64};
use crate::sampling::hermitize;
use crate::state::{event_probability, DensityMatrix, Projector, ProjectorFamily};
use crate::MIN_PROBABILITY;

/// Default tolerance of [`event_condition`].
pub const DEFAULT_EVENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Postulate {
    Standard,
    Lambda(f64),
    Modified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutcome {
    pub probability: f64,
    pub post_state: DensityMatrix,
    pub postulate: Postulate,
}

/// Lüders update `PρP / Tr[ρP]`.
pub fn reduce_standard(rho: &DensityMatrix, p: &Projector) -> Result<ReductionOutcome> {
    let prob = event_probability(rho, p)?;
    if prob <= MIN_PROBABILITY {
        return Err(Error::ZeroProbability(prob));
    }
    let projected = sandwich(p.matrix(), rho.matrix())?;
    let post_state = rho.with_same_threshold(hermitize(&projected.scale_real(1.0 / prob)))?;
    Ok(ReductionOutcome {
        probability: prob,
        post_state,
        postulate: Postulate::Standard,
    })
}

/// `Σₙ Pₙ ρ Pₙ`: the Lüders state when the outcome is not read.
pub fn unread_mixture_standard(rho: &DensityMatrix, family: &ProjectorFamily) -> Result<DensityMatrix> {
    check_family_dim(rho, family)?;
    let mut acc = ComplexMatrix::zeros(rho.dim());
    for p in family.members() {
        acc = acc.checked_add(&sandwich(p.matrix(), rho.matrix())?)?;
    }
    rho.with_same_threshold(hermitize(&acc))
}

/// Anticommutator update `½{P, ρ} / Tr[ρP]`.
///
/// Negative probabilities are accepted and recorded; only `|Tr[ρP]|` at or
/// below [`MIN_PROBABILITY`] is rejected. Whether the event can occur at all
/// is [`event_condition`]'s call.
pub fn reduce_modified(rho: &DensityMatrix, p: &Projector) -> Result<ReductionOutcome> {
    let prob = event_probability(rho, p)?;
    if prob.abs() <= MIN_PROBABILITY {
        return Err(Error::ZeroProbability(prob));
    }
    let sym = anticommutator(p.matrix(), rho.matrix())?.scale_real(0.5 / prob);
    let post_state = rho.with_same_threshold(hermitize(&sym))?;
    Ok(ReductionOutcome {
        probability: prob,
        post_state,
        postulate: Postulate::Modified,
    })
}

/// Pointer-basis λ-family update for outcome `index` of a rank-1 family.
pub fn reduce_lambda(
    rho: &DensityMatrix,
    family: &ProjectorFamily,
    index: usize,
    lambda: f64,
) -> Result<ReductionOutcome> {
    let numerator = LambdaNumerators::new(rho, family)?.numerator(index, lambda)?;
    let prob = event_probability(rho, family.member(index)?)?;
    if prob <= MIN_PROBABILITY {
        return Err(Error::ZeroProbability(prob));
    }
    let post_state = rho.with_same_threshold(hermitize(&numerator.scale_real(1.0 / prob)))?;
    Ok(ReductionOutcome {
        probability: prob,
        post_state,
        postulate: Postulate::Lambda(lambda),
    })
}

/// `Σₙ pₙ ρₙ` over the λ-family outcomes.
///
/// Each term is the unnormalised numerator `pₙ ρₙ`, so outcomes with
/// vanishing probability contribute without a division by zero.
pub fn unread_mixture_lambda(rho: &DensityMatrix, family: &ProjectorFamily, lambda: f64) -> Result<DensityMatrix> {
    let nums = LambdaNumerators::new(rho, family)?;
    let mut acc = ComplexMatrix::zeros(rho.dim());
    for n in 0..family.len() {
        acc = acc.checked_add(&nums.numerator(n, lambda)?)?;
    }
    rho.with_same_threshold(hermitize(&acc))
}

// ρ in the pointer basis, plus the family, ready to produce λ-numerators.
struct LambdaNumerators<'a> {
    rho: &'a DensityMatrix,
    family: &'a ProjectorFamily,
    moduli: Vec<Vec<f64>>,
}

impl<'a> LambdaNumerators<'a> {
    fn new(rho: &'a DensityMatrix, family: &'a ProjectorFamily) -> Result<Self> {
        check_family_dim(rho, family)?;
        let basis = family.basis_vectors()?;
        let rho_v: Vec<Vec<C64>> = basis.iter().map(|v| rho.matrix().apply(v)).collect::<Result<_>>()?;
        let moduli = basis
            .iter()
            .map(|vi| {
                rho_v
                    .iter()
                    .map(|rvj| vi.iter().zip(rvj).map(|(a, b)| a.conj() * b).sum::<C64>().norm())
                    .collect()
            })
            .collect();
        Ok(Self { rho, family, moduli })
    }

    fn numerator(&self, index: usize, lambda: f64) -> Result<ComplexMatrix> {
        let members = self.family.members();
        let target = self.family.member(index)?;
        let row = &self.moduli[index];
        let off_sum: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != index)
            .map(|(_, m)| m)
            .sum();

        let mut out = anticommutator(self.rho.matrix(), target.matrix())?.scale_real(0.5);
        out = out.checked_sub(&target.matrix().scale_real(lambda * off_sum))?;
        for (k, pk) in members.iter().enumerate() {
            if k != index {
                out = out.checked_add(&pk.matrix().scale_real(lambda * row[k]))?;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventCondition {
    /// `0 < p < 1`: the event may or may not occur.
    Branches,
    CertainTrue,
    CertainFalse,
    /// `p` outside `[0, 1]`: no event is produced.
    OutOfRange,
}

impl EventCondition {
    pub fn classify(p: f64, tol: f64) -> Self {
        if p < -tol || p > 1.0 + tol {
            EventCondition::OutOfRange
        } else if p.abs() <= tol {
            EventCondition::CertainFalse
        } else if p >= 1.0 - tol {
            EventCondition::CertainTrue
        } else {
            EventCondition::Branches
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EventCondition::Branches => "branches",
            EventCondition::CertainTrue => "certain_true",
            EventCondition::CertainFalse => "certain_false",
            EventCondition::OutOfRange => "out_of_range",
        }
    }

    pub fn produces_event(&self) -> bool {
        matches!(self, EventCondition::Branches)
    }
}

pub fn event_condition(rho: &DensityMatrix, p: &Projector, tol: f64) -> Result<EventCondition> {
    Ok(EventCondition::classify(event_probability(rho, p)?, tol))
}

/// Frobenius distance between the Lüders and anticommutator post-states.
pub fn postulate_distance(rho: &DensityMatrix, p: &Projector) -> Result<f64> {
    let standard = reduce_standard(rho, p)?;
    let modified = reduce_modified(rho, p)?;
    frobenius_distance(standard.post_state.matrix(), modified.post_state.matrix())
}

fn sandwich(p: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    p.matmul(rho)?.matmul(p)
}

fn check_family_dim(rho: &DensityMatrix, family: &ProjectorFamily) -> Result<()> {
    if family.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: family.dim(),
        });
    }
    Ok(())
}
