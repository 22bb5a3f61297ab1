//! Can Bob tell whether Alice measured?
//!
//! Alice holds subsystem 0 of a bipartite pure state and either performs a
//! Born measurement of her observable or does nothing. Bob then measures his
//! observable on subsystem 1 with some [`ProbabilityRule`]. If Alice measured,
//! Bob faces the proper mixture of collapsed global states and his statistics
//! are the weighted sum of the rule applied to each member. If she did not,
//! the rule sees the intact global state. Both arms use Bob's projectors lifted
//! to `1 ⊗ R̂ⱼ`. Any gap between the two distributions is a signal that
//! crosses from Alice to Bob without interaction; under the Born rule the gap
//! vanishes identically.

use rand::RngCore;

use crate::distribution::{tv_distance, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::rules::{
    project_update, rule_probabilities, sample_outcome, ProbabilityRule, ZERO_PROB_TOL,
};
use crate::state::StateVector;

/// Weighted collection of pure states (a proper mixture).
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, StateVector)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, StateVector)>) -> Result<Self> {
        let (_, first) = members.first().ok_or_else(|| Error::invalid("empty ensemble"))?;
        let dims = first.dims().to_vec();
        let mut total = 0.0;
        for (w, s) in &members {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::invalid(format!("ensemble weight {w}")));
            }
            if s.dims() != dims.as_slice() {
                return Err(Error::invalid("ensemble members have different dims"));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, StateVector)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `∑ₖ wₖ · rule(ψₖ)`.
    pub fn distribution(&self, rule: ProbabilityRule, obs: &Observable) -> Result<OutcomeDistribution> {
        let mut acc = vec![0.0; obs.branch_count()];
        for (w, s) in &self.members {
            let p = rule_probabilities(rule, s, obs)?;
            for (slot, x) in acc.iter_mut().zip(p.probs()) {
                *slot += w * x;
            }
        }
        OutcomeDistribution::indexed(acc)
    }
}

/// Alice's choice for one transmitted bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AliceChoice {
    /// Bit 0: Alice leaves her half alone.
    Idle,
    /// Bit 1: Alice measures her observable.
    Measure,
}

impl AliceChoice {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(AliceChoice::Idle),
            1 => Ok(AliceChoice::Measure),
            other => Err(Error::invalid(format!("bit must be 0 or 1, got {other}"))),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            AliceChoice::Idle => 0,
            AliceChoice::Measure => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TelepathyScenario {
    state: StateVector,
    alice_obs: Observable,
    bob_obs: Observable,
    bob_rule: ProbabilityRule,
    alice_global: Observable,
    bob_global: Observable,
}

impl TelepathyScenario {
    /// `state` must have exactly two subsystems; Alice's observable acts on
    /// the first, Bob's on the second.
    pub fn new(
        state: StateVector,
        alice_obs: Observable,
        bob_obs: Observable,
        bob_rule: ProbabilityRule,
    ) -> Result<Self> {
        if state.dims().len() != 2 {
            return Err(Error::invalid(format!(
                "telepathy state needs two subsystems, got dims {:?}",
                state.dims()
            )));
        }
        bob_rule.validate()?;
        let dims = state.dims().to_vec();
        let alice_global = alice_obs.embed(&dims, 0)?;
        let bob_global = bob_obs.embed(&dims, 1)?;
        Ok(Self { state, alice_obs, bob_obs, bob_rule, alice_global, bob_global })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn alice_obs(&self) -> &Observable {
        &self.alice_obs
    }

    pub fn bob_obs(&self) -> &Observable {
        &self.bob_obs
    }

    pub fn bob_rule(&self) -> ProbabilityRule {
        self.bob_rule
    }

    pub fn with_rule(&self, rule: ProbabilityRule) -> Result<Self> {
        Self::new(self.state.clone(), self.alice_obs.clone(), self.bob_obs.clone(), rule)
    }

    /// Roles swapped: the old Bob becomes the (Born) sender and the old Alice
    /// reads with `bob_rule`.
    pub fn reversed(&self) -> Result<Self> {
        Self::new(
            self.state.permute_subsystems(&[1, 0])?,
            self.bob_obs.clone(),
            self.alice_obs.clone(),
            self.bob_rule,
        )
    }

    /// Born measurement by Alice, collapsed by the projection postulate.
    /// Impossible branches are dropped.
    pub fn alice_measures(&self) -> Result<Ensemble> {
        let weights = rule_probabilities(ProbabilityRule::Born, &self.state, &self.alice_global)?;
        let mut members = Vec::new();
        for (i, w) in weights.iter() {
            if w <= ZERO_PROB_TOL {
                continue;
            }
            members.push((w, project_update(&self.state, &self.alice_global, i)?));
        }
        // dropped mass is at most ZERO_PROB_TOL per branch
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        for (w, _) in &mut members {
            *w /= total;
        }
        Ensemble::new(members)
    }

    pub fn bob_distribution_with_alice(&self) -> Result<OutcomeDistribution> {
        self.alice_measures()?.distribution(self.bob_rule, &self.bob_global)
    }

    pub fn bob_distribution_without_alice(&self) -> Result<OutcomeDistribution> {
        rule_probabilities(self.bob_rule, &self.state, &self.bob_global)
    }

    pub fn bob_distribution(&self, choice: AliceChoice) -> Result<OutcomeDistribution> {
        match choice {
            AliceChoice::Idle => self.bob_distribution_without_alice(),
            AliceChoice::Measure => self.bob_distribution_with_alice(),
        }
    }

    /// Total-variation distance between Bob's two arms.
    pub fn signaling_gap(&self) -> Result<f64> {
        tv_distance(&self.bob_distribution_with_alice()?, &self.bob_distribution_without_alice()?)
    }

    /// Finite-ensemble run of the protocol: `shots` fresh pairs, Alice acts
    /// according to `choice` on each, Bob records one outcome per pair.
    pub fn channel_simulation(
        &self,
        choice: AliceChoice,
        shots: u64,
        rng: &mut dyn RngCore,
    ) -> Result<OutcomeDistribution> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let mut counts = vec![0u64; self.bob_obs.branch_count()];
        match choice {
            AliceChoice::Idle => {
                let bob = self.bob_distribution_without_alice()?;
                for _ in 0..shots {
                    counts[sample_outcome(&bob, rng)?] += 1;
                }
            }
            AliceChoice::Measure => {
                let ensemble = self.alice_measures()?;
                let alice = OutcomeDistribution::indexed(
                    ensemble.members().iter().map(|(w, _)| *w).collect(),
                )?;
                let per_member = ensemble
                    .members()
                    .iter()
                    .map(|(_, s)| rule_probabilities(self.bob_rule, s, &self.bob_global))
                    .collect::<Result<Vec<_>>>()?;
                for _ in 0..shots {
                    let member = sample_outcome(&alice, rng)?;
                    counts[sample_outcome(&per_member[member], rng)?] += 1;
                }
            }
        }
        OutcomeDistribution::from_counts(&counts)
    }
}

/// `√p|00⟩ + √(1−p)|11⟩`.
pub fn asymmetric_pair(p: f64) -> Result<StateVector> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("weight {p} outside [0, 1]")));
    }
    StateVector::from_real(vec![2, 2], &[p.sqrt(), 0.0, 0.0, (1.0 - p).sqrt()])
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn maximally_entangled_pair() -> StateVector {
    asymmetric_pair(0.5).expect("valid weight")
}
