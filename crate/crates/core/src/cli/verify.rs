//! Randomized invariant batteries behind `qmeasure verify`.

use std::fmt::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::run::{ENTROPY_SLACK, EQUIVALENCE_TOL, EXACT_TOL};
use super::{CliError, DEFAULT_SEED};
use crate::distribution::{tv_distance, OutcomeDistribution};
use crate::error::Result;
use crate::observable::Observable;
use crate::pointer::{
    brute_force_joint, projection_equivalence_report, run_scheme, PointerSchemeSetup, SchemeMode,
};
use crate::random::{random_density, random_observable, random_state, random_unitary, Spectrum};
use crate::rules::{
    average_selective_entropy, ll_channel, nonselective_channel, project_update, rule_probabilities,
    ProbabilityRule,
};
use crate::signaling::{asymmetric_pair, maximally_entangled_pair, AliceChoice, TelepathyScenario};
use crate::state::{unitary_taking, von_neumann_entropy, Operator, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub trials: usize,
    /// Largest small-system dimension drawn by the random batteries.
    pub dims_limit: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { trials: 200, dims_limit: 6, seed: DEFAULT_SEED }
    }
}

/// Worst deviation seen by one battery.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryResult {
    pub name: &'static str,
    pub trials: usize,
    pub worst: f64,
    pub tolerance: f64,
    /// `(trial, trial seed, message)` of the first failing trial.
    pub failure: Option<(usize, u64, String)>,
    pub elapsed: Duration,
}

impl BatteryResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.worst <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub config: VerifyConfig,
    pub batteries: Vec<BatteryResult>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.batteries.iter().all(BatteryResult::passed)
    }

    pub fn battery(&self, name: &str) -> Option<&BatteryResult> {
        self.batteries.iter().find(|b| b.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let c = self.config;
        let _ = writeln!(out, "verify: trials={} dims_limit={} seed={}", c.trials, c.dims_limit, c.seed);
        for b in &self.batteries {
            let status = if b.passed() { "ok" } else { "FAIL" };
            let _ = writeln!(
                out,
                "  {status:<4} {:<24} trials={:<4} worst={:.3e} tol={:.0e} ({:.2?})",
                b.name, b.trials, b.worst, b.tolerance, b.elapsed
            );
            if let Some((trial, seed, message)) = &b.failure {
                let _ = writeln!(out, "       trial {trial} (trial seed {seed}): {message}");
            }
        }
        out
    }
}

/// Seed of trial `trial` in battery number `battery`.
pub fn trial_seed(seed: u64, battery: u64, trial: usize) -> u64 {
    seed ^ (battery << 48) ^ trial as u64
}

type Check = fn(&VerifyConfig, usize, &mut ChaCha8Rng) -> Result<f64>;

struct Battery {
    name: &'static str,
    tolerance: f64,
    /// `false` runs a single fixed trial.
    randomized: bool,
    check: Check,
}

const BATTERIES: &[Battery] = &[
    Battery { name: "epr_singlet", tolerance: EXACT_TOL, randomized: false, check: epr_singlet },
    Battery { name: "projection_equivalence", tolerance: EQUIVALENCE_TOL, randomized: true, check: projection_equivalence },
    Battery { name: "scheme_agreement", tolerance: EXACT_TOL, randomized: true, check: scheme_agreement },
    Battery { name: "brute_force_oracle", tolerance: EXACT_TOL, randomized: true, check: brute_force_oracle },
    Battery { name: "no_signaling", tolerance: EXACT_TOL, randomized: true, check: no_signaling },
    Battery { name: "telepathy_witness", tolerance: 1e-6, randomized: false, check: telepathy_witness },
    Battery { name: "telepathy_monte_carlo", tolerance: 0.01, randomized: false, check: telepathy_monte_carlo },
    Battery { name: "born_marginals", tolerance: EXACT_TOL, randomized: false, check: born_marginals },
    Battery { name: "entropy_monotonicity", tolerance: ENTROPY_SLACK, randomized: true, check: entropy_monotonicity },
    Battery { name: "ll_invariance", tolerance: EXACT_TOL, randomized: true, check: ll_invariance },
    Battery { name: "ll_state_preparation", tolerance: EXACT_TOL, randomized: true, check: ll_state_preparation },
];

pub fn battery_names() -> Vec<&'static str> {
    BATTERIES.iter().map(|b| b.name).collect()
}

/// Runs every battery. Errors only on a bad configuration; property
/// failures are recorded in the summary.
pub fn verify(config: VerifyConfig) -> std::result::Result<VerifySummary, CliError> {
    if config.trials == 0 {
        return Err(CliError::Numeric(crate::error::Error::InvalidInput("trials must be at least 1".into())));
    }
    if config.dims_limit < 2 {
        return Err(CliError::Numeric(crate::error::Error::InvalidInput("dims limit must be at least 2".into())));
    }
    let batteries = BATTERIES
        .iter()
        .enumerate()
        .map(|(index, battery)| run_battery(&config, index as u64, battery))
        .collect();
    Ok(VerifySummary { config, batteries })
}

fn run_battery(config: &VerifyConfig, index: u64, battery: &Battery) -> BatteryResult {
    let start = Instant::now();
    let trials = if battery.randomized { config.trials } else { 1 };
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for trial in 0..trials {
        let seed = trial_seed(config.seed, index, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match (battery.check)(config, trial, &mut rng) {
            Ok(d) if d.is_finite() && d <= battery.tolerance => worst = worst.max(d),
            Ok(d) => {
                worst = if d.is_finite() { worst.max(d) } else { f64::INFINITY };
                failure = Some((trial, seed, format!("deviation {d:e} exceeds {:e}", battery.tolerance)));
                break;
            }
            Err(e) => {
                failure = Some((trial, seed, e.to_string()));
                break;
            }
        }
    }
    BatteryResult { name: battery.name, trials, worst, tolerance: battery.tolerance, failure, elapsed: start.elapsed() }
}

/// Small-system dimension for a trial: cycles through `2..=limit`.
fn cycle_dim(limit: usize, trial: usize) -> usize {
    2 + trial % (limit - 1)
}

/// Even trials use degenerate observables.
fn pointer_setup(config: &VerifyConfig, trial: usize, max_dim: usize, rng: &mut ChaCha8Rng) -> Result<PointerSchemeSetup> {
    let d = cycle_dim(config.dims_limit.min(max_dim), trial / 2);
    let spectrum = if trial % 2 == 0 { Spectrum::Degenerate } else { Spectrum::Any };
    let psi = random_state(vec![d], rng)?;
    let a = random_observable(vec![d], spectrum, rng)?;
    let b = random_observable(vec![d], spectrum, rng)?;
    PointerSchemeSetup::two_pointer(psi, a, b)
}

fn epr_singlet(_: &VerifyConfig, _: usize, _: &mut ChaCha8Rng) -> Result<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = StateVector::from_real(vec![2], &[h, -h])?;
    let setup = PointerSchemeSetup::one_pointer(psi, Observable::sigma_z(), Observable::sigma_z())?;
    let singlet = StateVector::from_real(vec![2, 2], &[0.0, h, -h, 0.0])?;
    Ok(run_scheme(&setup)?.final_state.max_amp_deviation(&singlet).unwrap_or(f64::INFINITY))
}

fn projection_equivalence(config: &VerifyConfig, trial: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let setup = pointer_setup(config, trial, usize::MAX, rng)?;
    let two = projection_equivalence_report(&setup)?;
    let one = projection_equivalence_report(&setup.in_mode(SchemeMode::OnePointer)?)?;
    Ok(two.max(one))
}

fn scheme_agreement(config: &VerifyConfig, trial: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let setup = pointer_setup(config, trial, usize::MAX, rng)?;
    let two = run_scheme(&setup)?.joint;
    let one = run_scheme(&setup.in_mode(SchemeMode::OnePointer)?)?.joint;
    Ok(two.max_abs_deviation(&one).unwrap_or(f64::INFINITY))
}

fn brute_force_oracle(config: &VerifyConfig, trial: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    // d ≤ 4 keeps d·N·M ≤ 64
    let setup = pointer_setup(config, trial, 4, rng)?;
    let direct = run_scheme(&setup)?.joint;
    Ok(brute_force_joint(&setup)?.max_abs_deviation(&direct).unwrap_or(f64::INFINITY))
}

fn no_signaling(config: &VerifyConfig, _: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let limit = config.dims_limit.min(4);
    let (d1, d2) = (rng.random_range(2..=limit), rng.random_range(2..=limit));
    let psi = random_state(vec![d1, d2], rng)?;
    let a = random_observable(vec![d1], Spectrum::Any, rng)?;
    let b = random_observable(vec![d2], Spectrum::Any, rng)?;
    let scenario = TelepathyScenario::new(psi, a, b, ProbabilityRule::Born)?;
    Ok(scenario.signaling_gap()?.max(scenario.reversed()?.signaling_gap()?))
}

fn witness() -> Result<TelepathyScenario> {
    TelepathyScenario::new(
        asymmetric_pair(0.36)?,
        Observable::sigma_z(),
        Observable::sigma_z(),
        ProbabilityRule::nonborn_exponent(2.0)?,
    )
}

fn telepathy_witness(_: &VerifyConfig, _: usize, _: &mut ChaCha8Rng) -> Result<f64> {
    let p: f64 = 0.36;
    let without = p * p / (p * p + (1.0 - p) * (1.0 - p));
    // σz branch 0 is |1⟩
    let expected_with = OutcomeDistribution::indexed(vec![1.0 - p, p])?;
    let expected_without = OutcomeDistribution::indexed(vec![1.0 - without, without])?;
    let s = witness()?;
    let with = s.bob_distribution(AliceChoice::Measure)?;
    let idle = s.bob_distribution(AliceChoice::Idle)?;
    Ok(with
        .max_abs_deviation(&expected_with)?
        .max(idle.max_abs_deviation(&expected_without)?)
        .max((s.signaling_gap()? - (p - without)).abs()))
}

fn telepathy_monte_carlo(_: &VerifyConfig, _: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let s = witness()?;
    let with = s.channel_simulation(AliceChoice::Measure, 100_000, rng)?;
    let idle = s.channel_simulation(AliceChoice::Idle, 100_000, rng)?;
    Ok((tv_distance(&with, &idle)? - s.signaling_gap()?).abs())
}

fn born_marginals(_: &VerifyConfig, _: usize, _: &mut ChaCha8Rng) -> Result<f64> {
    let bell = maximally_entangled_pair();
    let half = OutcomeDistribution::indexed(vec![0.5, 0.5])?;
    let mut worst: f64 = 0.0;
    for position in 0..2 {
        let obs = Observable::sigma_z().embed(&[2, 2], position)?;
        worst = worst.max(rule_probabilities(ProbabilityRule::Born, &bell, &obs)?.max_abs_deviation(&half)?);
    }
    Ok(worst)
}

/// Positive part of the worst entropy-inequality violation.
fn entropy_monotonicity(config: &VerifyConfig, trial: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = cycle_dim(config.dims_limit.min(8), trial);
    let rho = random_density(vec![d], rng)?;
    let obs = random_observable(vec![d], Spectrum::Any, rng)?;
    let before = von_neumann_entropy(&rho)?;
    let after_channel = nonselective_channel(&rho, &obs)?;
    let after = von_neumann_entropy(&after_channel)?;
    let selective = average_selective_entropy(&after_channel, &obs)?;
    Ok((before - after).max(selective - before).max(0.0))
}

fn ll_invariance(config: &VerifyConfig, trial: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = cycle_dim(config.dims_limit, trial);
    let psi = random_state(vec![d], rng)?;
    let obs = random_observable(vec![d], Spectrum::Any, rng)?;
    let unitaries = (0..obs.branch_count())
        .map(|_| random_unitary(vec![d], rng))
        .collect::<Result<Vec<_>>>()?;
    let born = rule_probabilities(ProbabilityRule::Born, &psi, &obs)?;
    let mut worst: f64 = 0.0;
    for rec in ll_channel(&psi, &obs, &unitaries)? {
        worst = worst.max((rec.probability - born.probs()[rec.branch_index]).abs());
    }
    Ok(worst)
}

fn ll_state_preparation(config: &VerifyConfig, trial: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = cycle_dim(config.dims_limit, trial);
    let psi = random_state(vec![d], rng)?;
    let target = random_state(vec![d], rng)?;
    let obs = random_observable(vec![d], Spectrum::Any, rng)?;
    let unitaries = (0..obs.branch_count())
        .map(|n| unitary_taking(&project_update(&psi, &obs, n)?, &target))
        .collect::<Result<Vec<Operator>>>()?;
    let mut worst: f64 = 0.0;
    for rec in ll_channel(&psi, &obs, &unitaries)? {
        worst = worst.max(rec.post_state.max_amp_deviation(&target).unwrap_or(f64::INFINITY));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_runs_and_reports() {
        let summary = verify(VerifyConfig { trials: 1, ..VerifyConfig::default() }).unwrap();
        assert!(summary.passed(), "{}", summary.render());
        assert_eq!(summary.batteries.len(), battery_names().len());
        assert!(summary.render().contains("projection_equivalence"));
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(verify(VerifyConfig { trials: 0, ..VerifyConfig::default() }).is_err());
    }

    #[test]
    fn trial_seeds_differ_across_batteries_and_trials() {
        assert_ne!(trial_seed(1, 0, 1), trial_seed(1, 1, 1));
        assert_ne!(trial_seed(1, 0, 1), trial_seed(1, 0, 2));
    }
}
