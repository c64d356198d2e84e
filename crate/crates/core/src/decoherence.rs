//! Bit-by-bit decoherence: one system qubit coupled to `N` environment qubits
//! through `H = σz ⊗ Σₖ gₖ σz⁽ᵏ⁾`.
//!
//! The Hamiltonian is diagonal in the computational basis, so the joint state
//! is evolved by multiplying each amplitude with its phase. Tracing out the
//! environment leaves the system populations untouched and multiplies the
//! coherence by one factor per environment qubit:
//!
//! ```text
//! z(t) = a b̄ Πₖ [cos(2gₖt) − i(|αₖ|² − |βₖ|²) sin(2gₖt)]
//! ```

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::sampling::{random_qubit, rng_from_seed};
use crate::state::DensityMatrix;

/// Largest environment that is simulated exactly (joint dimension 2^15).
pub const MAX_ENV_QUBITS: usize = 14;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BitByBitModel {
    a: C64,
    b: C64,
    couplings: Vec<f64>,
    env: Vec<(C64, C64)>,
    seed: Option<u64>,
}

impl BitByBitModel {
    pub fn new(a: C64, b: C64, couplings: Vec<f64>, env: Vec<(C64, C64)>) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        if couplings.len() != env.len() {
            return Err(Error::DimensionMismatch {
                expected: couplings.len(),
                found: env.len(),
            });
        }
        for (alpha, beta) in &env {
            let n = alpha.norm_sqr() + beta.norm_sqr();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized(n));
            }
        }
        if couplings.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            a,
            b,
            couplings,
            env,
            seed: None,
        })
    }

    /// Draws `n_env` couplings uniform on `[0, 1]` and Haar-uniform
    /// environment qubit states from `seed`.
    pub fn random(a: C64, b: C64, n_env: usize, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let mut couplings = Vec::with_capacity(n_env);
        let mut env = Vec::with_capacity(n_env);
        for _ in 0..n_env {
            couplings.push(rng.random::<f64>());
            env.push(random_qubit(&mut rng));
        }
        let mut model = Self::new(a, b, couplings, env)?;
        model.seed = Some(seed);
        Ok(model)
    }

    /// The same model restricted to its first `n_env` environment qubits.
    pub fn truncated(&self, n_env: usize) -> Self {
        let n = n_env.min(self.n_env());
        Self {
            a: self.a,
            b: self.b,
            couplings: self.couplings[..n].to_vec(),
            env: self.env[..n].to_vec(),
            seed: self.seed,
        }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn n_env(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn env_states(&self) -> &[(C64, C64)] {
        &self.env
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    fn check_cap(&self) -> Result<()> {
        if self.n_env() > MAX_ENV_QUBITS {
            return Err(Error::EnvironmentTooLarge {
                n: self.n_env(),
                cap: MAX_ENV_QUBITS,
            });
        }
        Ok(())
    }
}

/// `(a|↑⟩ + b|↓⟩) ⊗ Πₖ (αₖ|↑⟩ + βₖ|↓⟩)` with the system qubit as the most
/// significant bit and `|↑⟩` encoded as bit value 0.
pub fn build_joint_state(model: &BitByBitModel) -> Result<Vec<C64>> {
    model.check_cap()?;
    let mut psi = vec![model.a, model.b];
    for &(alpha, beta) in &model.env {
        let mut next = Vec::with_capacity(psi.len() * 2);
        for &amp in &psi {
            next.push(amp * alpha);
            next.push(amp * beta);
        }
        psi = next;
    }
    Ok(psi)
}

/// Joint state at time `t` under the σz-σz interaction.
pub fn evolve_joint(model: &BitByBitModel, t: f64) -> Result<Vec<C64>> {
    let mut psi = build_joint_state(model)?;
    let n = model.n_env();
    for (index, amp) in psi.iter_mut().enumerate() {
        let system_sign = if (index >> n) & 1 == 0 { 1.0 } else { -1.0 };
        let mut env_field = 0.0;
        for (k, g) in model.couplings.iter().enumerate() {
            let bit = (index >> (n - 1 - k)) & 1;
            env_field += if bit == 0 { *g } else { -*g };
        }
        let phase = -system_sign * env_field * t;
        *amp *= C64::from_polar(1.0, phase);
    }
    Ok(psi)
}

/// Reduced 2x2 matrix of the most significant qubit of a pure state,
/// `ρᵢⱼ = Σₑ ψ[i,e] ψ̄[j,e]`.
pub fn system_reduced_matrix(psi: &[C64]) -> ComplexMatrix {
    let half = psi.len() / 2;
    let (up, down) = psi.split_at(half);
    let dot = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(p, q)| p * q.conj()).sum() };
    ComplexMatrix::from_rows(&[[dot(up, up), dot(up, down)], [dot(down, up), dot(down, down)]]).expect("2x2")
}

/// Exact reduced system state at time `t`.
pub fn evolve_and_trace(model: &BitByBitModel, t: f64) -> Result<DensityMatrix> {
    let psi = evolve_joint(model, t)?;
    DensityMatrix::new(system_reduced_matrix(&psi))
}

/// Closed-form coherence `ρ↑↓(t)` of the reduced system state.
pub fn interference_amplitude(model: &BitByBitModel, t: f64) -> C64 {
    model
        .couplings
        .iter()
        .zip(&model.env)
        .fold(model.a * model.b.conj(), |acc, (&g, (alpha, beta))| {
            let bias = alpha.norm_sqr() - beta.norm_sqr();
            let (sin, cos) = Float::sin_cos(2.0 * g * t);
            acc * C64::new(cos, -bias * sin)
        })
}

/// `max_{i≠j} |ρᵢⱼ| / min(ρᵢᵢ, ρⱼⱼ)`; infinite when a diagonal entry is not positive.
pub fn damping_ratio(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let n = m.dim();
    if (0..n).any(|i| m[(i, i)].re <= 0.0) {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(m[(i, j)].norm() / m[(i, i)].re.min(m[(j, j)].re));
            }
        }
    }
    worst
}

/// `[[|a|², z], [z̄, 1 − |a|²]]`.
pub fn decohered_state(a2: f64, z: C64) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[C64::new(a2, 0.0), z], [z.conj(), C64::new(1.0 - a2, 0.0)]]).expect("2x2")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuppressionRow {
    pub n_env: usize,
    pub median_abs_z: f64,
    pub q25: f64,
    pub q75: f64,
    /// Per-trial `|z|`, in trial order.
    pub samples: Vec<f64>,
    /// Largest `|z_product − z_exact|` over trials; `None` when not verified.
    pub max_oracle_deviation: Option<f64>,
}

/// Seed of trial `trial` in a sweep seeded with `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Distribution of `|z(t)|` over `trials` random models for each environment size.
///
/// Each trial draws one model with `max(n_values)` environment qubits and
/// uses its prefixes, so sizes are nested: per trial, `|z|` cannot grow as
/// qubits are added. With `verify`, each value is also checked against the
/// exact partial trace.
pub fn suppression_sweep(
    a: C64,
    b: C64,
    n_values: &[usize],
    t: f64,
    trials: usize,
    seed: u64,
    verify: bool,
) -> Result<Vec<SuppressionRow>> {
    let n_max = n_values.iter().copied().max().unwrap_or(0);
    if n_max > MAX_ENV_QUBITS {
        return Err(Error::EnvironmentTooLarge {
            n: n_max,
            cap: MAX_ENV_QUBITS,
        });
    }
    let models = (0..trials)
        .map(|trial| BitByBitModel::random(a, b, n_max, trial_seed(seed, trial)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let mut samples = Vec::with_capacity(trials);
        let mut deviation: Option<f64> = verify.then_some(0.0);
        for model in &models {
            let sub = model.truncated(n);
            let z = interference_amplitude(&sub, t);
            if let Some(dev) = deviation.as_mut() {
                let exact = system_reduced_matrix(&evolve_joint(&sub, t)?)[(0, 1)];
                *dev = dev.max((exact - z).norm());
            }
            samples.push(z.norm());
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        rows.push(SuppressionRow {
            n_env: n,
            median_abs_z: quantile(&sorted, 0.5),
            q25: quantile(&sorted, 0.25),
            q75: quantile(&sorted, 0.75),
            samples,
            max_oracle_deviation: deviation,
        });
    }
    Ok(rows)
}

/// Linear-interpolation quantile of sorted data; NaN when empty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = Float::floor(pos) as usize;
    let hi = Float::ceil(pos) as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Fit of `ln(median |z|)` against `N`.
pub fn fit_log_suppression(rows: &[SuppressionRow]) -> LinearFit {
    let xs: Vec<f64> = rows.iter().map(|r| r.n_env as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| Float::ln(r.median_abs_z)).collect();
    linear_fit(&xs, &ys)
}
