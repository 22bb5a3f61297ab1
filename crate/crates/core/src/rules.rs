//! Probability rules, selective and nonselective state updates, and the
//! outcome-dependent unitary (LL) measurement channel.
//!
//! Probabilities are always indexed by branch, not by eigenvalue.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::RngCore;

use crate::distribution::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::state::{
    apply, von_neumann_entropy, DensityMatrix, Operator, StateVector, C64, PSD_TOL,
};

/// Branches with probability at or below this are treated as impossible:
/// they cannot be projected onto, conditioned on, or sampled.
pub const ZERO_PROB_TOL: f64 = 1e-12;

/// Tolerance on `U†U = 1` for LL post-measurement unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// Maximum off-block magnitude accepted as "already decohered".
pub const DECOHERED_TOL: f64 = 1e-8;

/// Maps a pure state and a projector family to outcome probabilities.
///
/// `NonBornExponent(q)` assigns `pᵢ ∝ ‖P̂ᵢψ‖^{2q}`. It is deterministic on
/// eigenstates for every `q` and coincides with `Born` at `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilityRule {
    Born,
    NonBornExponent(f64),
}

impl ProbabilityRule {
    pub fn nonborn_exponent(q: f64) -> Result<Self> {
        let rule = ProbabilityRule::NonBornExponent(q);
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProbabilityRule::Born => Ok(()),
            ProbabilityRule::NonBornExponent(q) if q.is_finite() && q > 0.0 => Ok(()),
            ProbabilityRule::NonBornExponent(q) => {
                Err(Error::invalid(format!("exponent must be finite and positive, got {q}")))
            }
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            ProbabilityRule::Born => 1.0,
            ProbabilityRule::NonBornExponent(q) => q,
        }
    }

    pub fn is_born(&self) -> bool {
        matches!(self, ProbabilityRule::Born)
    }

    /// Applies the rule to the Born weights `‖P̂ᵢψ‖²`.
    pub fn distribution_from_weights(&self, weights: &[f64]) -> Result<OutcomeDistribution> {
        self.validate()?;
        match *self {
            ProbabilityRule::Born => OutcomeDistribution::indexed(weights.to_vec()),
            ProbabilityRule::NonBornExponent(q) => {
                let powered: Vec<f64> = weights.iter().map(|w| w.max(0.0).powf(q)).collect();
                let total: f64 = powered.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::invalid("all branch weights vanish"));
                }
                OutcomeDistribution::indexed(powered.into_iter().map(|p| p / total).collect())
            }
        }
    }
}

/// `‖P̂ᵢ s‖²` for every branch.
pub fn branch_weights(s: &StateVector, obs: &Observable) -> Result<Vec<f64>> {
    obs.branches()
        .iter()
        .map(|b| apply(&b.projector, s).map(|v| v.norm_squared()))
        .collect()
}

pub fn rule_probabilities(
    rule: ProbabilityRule,
    s: &StateVector,
    obs: &Observable,
) -> Result<OutcomeDistribution> {
    rule.distribution_from_weights(&branch_weights(s, obs)?)
}

/// Projection postulate: `P̂ᵢ s / ‖P̂ᵢ s‖`.
pub fn project_update(s: &StateVector, obs: &Observable, i: usize) -> Result<StateVector> {
    let projected = apply(obs.projector(i)?, s)?;
    let weight = projected.norm_squared();
    if weight <= ZERO_PROB_TOL {
        return Err(Error::ZeroProbabilityBranch { branch: i, probability: weight });
    }
    StateVector::normalize(s.dims().to_vec(), projected)
}

/// How a selective measurement picks its branch.
pub enum BranchChoice<'a> {
    Sample(&'a mut dyn RngCore),
    Forced(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub branch_index: usize,
    pub eigenvalue: f64,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Draws an index from `dist` (returns the label, not the position).
pub fn sample_outcome(dist: &OutcomeDistribution, rng: &mut dyn RngCore) -> Result<usize> {
    let index = WeightedIndex::new(dist.probs())
        .map_err(|e| Error::invalid(format!("cannot sample: {e}")))?;
    Ok(dist.labels()[index.sample(rng)])
}

/// Selective measurement: pick a branch by `rule` (or force one), collapse by
/// the projection postulate.
pub fn measure_selective(
    s: &StateVector,
    obs: &Observable,
    rule: ProbabilityRule,
    choice: BranchChoice<'_>,
) -> Result<MeasurementRecord> {
    let dist = rule_probabilities(rule, s, obs)?;
    let branch = match choice {
        BranchChoice::Forced(i) => {
            obs.projector(i)?;
            i
        }
        BranchChoice::Sample(rng) => sample_outcome(&dist, rng)?,
    };
    let probability = dist.probs()[branch];
    if probability <= ZERO_PROB_TOL {
        return Err(Error::ZeroProbabilityBranch { branch, probability });
    }
    Ok(MeasurementRecord {
        branch_index: branch,
        eigenvalue: obs.eigenvalue(branch)?,
        probability,
        post_state: project_update(s, obs, branch)?,
    })
}

/// Ideal projective measurement followed by a result-dependent unitary:
/// outcome `n` occurs with Born probability and leaves `Uₙ P̂ₙ s / ‖P̂ₙ s‖`.
/// Impossible branches are omitted from the output.
pub fn ll_channel(
    s: &StateVector,
    obs: &Observable,
    post_unitaries: &[Operator],
) -> Result<Vec<MeasurementRecord>> {
    if post_unitaries.len() != obs.branch_count() {
        return Err(Error::invalid(format!(
            "{} post-measurement unitaries for {} branches",
            post_unitaries.len(),
            obs.branch_count()
        )));
    }
    for u in post_unitaries {
        if u.dims() != obs.dims() {
            return Err(Error::invalid(format!(
                "post-measurement unitary acts on {:?}, observable on {:?}",
                u.dims(),
                obs.dims()
            )));
        }
        u.check_unitary(UNITARY_TOL)?;
    }
    let born = rule_probabilities(ProbabilityRule::Born, s, obs)?;
    let mut records = Vec::new();
    for (n, u) in post_unitaries.iter().enumerate() {
        let probability = born.probs()[n];
        if probability <= ZERO_PROB_TOL {
            continue;
        }
        let collapsed = project_update(s, obs, n)?;
        let evolved = apply(u, &collapsed)?;
        records.push(MeasurementRecord {
            branch_index: n,
            eigenvalue: obs.eigenvalue(n)?,
            probability,
            post_state: StateVector::normalize(s.dims().to_vec(), evolved)?,
        });
    }
    Ok(records)
}

/// Dephasing in the measurement basis: `ρ ↦ ∑ᵢ P̂ᵢ ρ P̂ᵢ`.
pub fn nonselective_channel(rho: &DensityMatrix, obs: &Observable) -> Result<DensityMatrix> {
    if rho.dims() != obs.dims() {
        return Err(Error::invalid(format!(
            "density on {:?}, observable on {:?}",
            rho.dims(),
            obs.dims()
        )));
    }
    let n = rho.dim();
    let mut out = nalgebra::DMatrix::<C64>::zeros(n, n);
    for b in obs.branches() {
        let p = b.projector.matrix();
        out += p * rho.matrix() * p;
    }
    Ok(DensityMatrix::from_trusted(rho.dims().to_vec(), out))
}

/// `max_{i≠j} |P̂ᵢ ρ P̂ⱼ|`.
pub fn off_block_magnitude(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    if rho.dims() != obs.dims() {
        return Err(Error::invalid("density and observable dims differ"));
    }
    let mut worst: f64 = 0.0;
    for (i, bi) in obs.branches().iter().enumerate() {
        for (j, bj) in obs.branches().iter().enumerate() {
            if i == j {
                continue;
            }
            let block = bi.projector.matrix() * rho.matrix() * bj.projector.matrix();
            worst = block.iter().map(|z| z.norm()).fold(worst, f64::max);
        }
    }
    Ok(worst)
}

/// Reads out branch `i` from an already-decohered density matrix, returning
/// `(pᵢ, P̂ᵢρP̂ᵢ / pᵢ)` with `pᵢ = Tr(P̂ᵢρ)`.
///
/// A decohered ρ is a mixture of branch eigenstates, on which every rule is
/// deterministic, so `pᵢ` is the same for every [`ProbabilityRule`].
pub fn classical_selective(
    rho: &DensityMatrix,
    obs: &Observable,
    i: usize,
    rule: ProbabilityRule,
) -> Result<(f64, DensityMatrix)> {
    rule.validate()?;
    let off = off_block_magnitude(rho, obs)?;
    if off > DECOHERED_TOL {
        return Err(Error::NotDecohered(off));
    }
    let p = obs.projector(i)?.matrix();
    let probability = (p * rho.matrix()).trace().re;
    if probability <= PSD_TOL {
        return Err(Error::ZeroProbabilityBranch { branch: i, probability });
    }
    let post = (p * rho.matrix() * p).unscale(probability);
    Ok((probability, DensityMatrix::from_trusted(rho.dims().to_vec(), post)))
}

/// `∑ᵢ pᵢ S(ρᵢ)` over the possible branches of a decohered ρ.
pub fn average_selective_entropy(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..obs.branch_count() {
        match classical_selective(rho, obs, i, ProbabilityRule::Born) {
            Ok((p, post)) => total += p * von_neumann_entropy(&post)?,
            Err(Error::ZeroProbabilityBranch { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}
