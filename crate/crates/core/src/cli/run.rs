//! Turns a parsed [`ScenarioFile`] into library calls and a [`Report`].

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::Report;
use super::scenario::{LlUnitaries, ObservableSpec, ScenarioFile, ScenarioKind, StateSpec};
use super::{CliError, DEFAULT_SEED};
use crate::distribution::tv_distance;
use crate::error::Error;
use crate::observable::{observable_from_branches, pauli_x, pauli_y, pauli_z, Branch, Observable};
use crate::pointer::{
    brute_force_joint, conditional_b_given_a, marginal_a, marginal_b, projection_equivalence_report,
    run_scheme, PointerSchemeSetup, SchemeMode,
};
use crate::random::random_unitary;
use crate::rules::{
    average_selective_entropy, classical_selective, ll_channel, nonselective_channel,
    project_update, rule_probabilities, ProbabilityRule, ZERO_PROB_TOL,
};
use crate::signaling::{asymmetric_pair, maximally_entangled_pair, AliceChoice, TelepathyScenario};
use crate::state::{
    decode_index, density_from_pure, inner, unitary_taking, von_neumann_entropy, DensityMatrix,
    Operator, StateVector, C64,
};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Tolerance for the exact identities checked after each run.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for the projection-equivalence deviation.
pub const EQUIVALENCE_TOL: f64 = 1e-10;
/// Slack for entropy inequalities.
pub const ENTROPY_SLACK: f64 = 1e-10;

pub fn build_state(spec: &StateSpec, dims: Option<&[usize]>) -> Result<StateVector, Error> {
    let s = match spec {
        StateSpec::EprBohm => StateVector::from_real(vec![2], &[H, -H])?,
        StateSpec::Singlet => StateVector::from_real(vec![2, 2], &[0.0, H, -H, 0.0])?,
        StateSpec::Bell => maximally_entangled_pair(),
        StateSpec::Asymmetric(p) => asymmetric_pair(*p)?,
        StateSpec::Up => StateVector::basis(vec![2], 0)?,
        StateSpec::Down => StateVector::basis(vec![2], 1)?,
        StateSpec::Plus => StateVector::from_real(vec![2], &[H, H])?,
        StateSpec::Minus => StateVector::from_real(vec![2], &[H, -H])?,
        StateSpec::Basis(k) => {
            let dims = dims.ok_or_else(|| Error::invalid("state basis(k) needs `dims`"))?;
            return StateVector::basis(dims.to_vec(), *k);
        }
        StateSpec::Amplitudes(amps) => {
            let dims = dims.map_or_else(|| vec![amps.len()], <[usize]>::to_vec);
            return StateVector::normalize(dims, DVector::from_vec(amps.clone()));
        }
    };
    match dims {
        Some(d) if d != s.dims() => StateVector::new(d.to_vec(), s.amps().iter().copied().collect()),
        _ => Ok(s),
    }
}

fn square(rows: &[Vec<C64>]) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), rows.len(), |r, c| rows[r][c])
}

/// Builds an observable acting on a system with the given subsystem dims.
pub fn build_observable(spec: &ObservableSpec, dims: &[usize]) -> Result<Observable, Error> {
    let matrix = match spec {
        ObservableSpec::SigmaX => pauli_x().matrix().clone(),
        ObservableSpec::SigmaY => pauli_y().matrix().clone(),
        ObservableSpec::SigmaZ => pauli_z().matrix().clone(),
        ObservableSpec::SpinZ(twice) => Observable::spin_z(*twice).reconstruct().matrix().clone(),
        ObservableSpec::Identity(d) => DMatrix::identity(*d, *d),
        ObservableSpec::Matrix(rows) => square(rows),
        ObservableSpec::Branches(branches) => {
            let branches = branches
                .iter()
                .map(|(value, rows)| {
                    Ok(Branch { eigenvalue: *value, projector: Operator::new(dims.to_vec(), square(rows))? })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            return observable_from_branches(branches);
        }
    };
    Observable::from_matrix(&Operator::new(dims.to_vec(), matrix)?)
}

fn check(name: &str, value: f64, tol: f64) -> Result<(), CliError> {
    if value.is_finite() && value <= tol {
        Ok(())
    } else {
        Err(CliError::Invariant { name: name.to_string(), detail: format!("{value:e} exceeds {tol:e}") })
    }
}

fn spin_label(digits: &[usize]) -> String {
    digits.iter().map(|&d| if d == 0 { '↑' } else { '↓' }).collect()
}

/// Runs one scenario. `default_id` names the report when the file has no `id`.
pub fn run_scenario(file: &ScenarioFile, default_id: &str) -> Result<Report, CliError> {
    let id = file.id.clone().unwrap_or_else(|| default_id.to_string());
    let mut report = Report::new(id, file.kind.name());
    match file.kind {
        ScenarioKind::TwoPointer => pointer_scenario(file, SchemeMode::TwoPointer, &mut report)?,
        ScenarioKind::OnePointer => pointer_scenario(file, SchemeMode::OnePointer, &mut report)?,
        ScenarioKind::Epr => epr(file, &mut report)?,
        ScenarioKind::SternGerlach => stern_gerlach(file, &mut report)?,
        ScenarioKind::LlScheme => ll_scheme(file, &mut report)?,
        ScenarioKind::Telepathy => telepathy(file, &mut report)?,
        ScenarioKind::EntropyDemo => entropy_demo(file, &mut report)?,
    }
    if let Some(row) = report.rows.iter().find(|r| !r.value.is_finite()) {
        return Err(CliError::Invariant {
            name: "finite_values".into(),
            detail: format!("{} is {}", row.quantity, row.value),
        });
    }
    Ok(report)
}

fn state_or(file: &ScenarioFile, default: StateSpec) -> Result<StateVector, Error> {
    build_state(file.state.as_ref().unwrap_or(&default), file.dims.as_deref())
}

fn obs_or(spec: &Option<ObservableSpec>, default: ObservableSpec, dims: &[usize]) -> Result<Observable, Error> {
    build_observable(spec.as_ref().unwrap_or(&default), dims)
}

fn push_joint(report: &mut Report, setup: &PointerSchemeSetup, joint: &crate::pointer::JointDistribution) -> Result<(), Error> {
    report.push_list("eigenvalue_a", &setup.obs_a().eigenvalues());
    report.push_list("eigenvalue_b", &setup.obs_b().eigenvalues());
    for i in 0..joint.a_count() {
        for j in 0..joint.b_count() {
            report.push_labeled("p_ij", format!("{i},{j}"), joint.get(i, j));
        }
    }
    report.push_list("p_i", marginal_a(joint).probs());
    report.push_list("p_j", marginal_b(joint).probs());
    for (i, pi) in marginal_a(joint).iter() {
        if pi <= ZERO_PROB_TOL {
            continue;
        }
        for (j, p) in conditional_b_given_a(joint, i)?.iter() {
            report.push_labeled("p_j|i", format!("{i},{j}"), p);
        }
    }
    Ok(())
}

fn pointer_scenario(file: &ScenarioFile, mode: SchemeMode, report: &mut Report) -> Result<(), CliError> {
    let psi = state_or(file, StateSpec::Plus)?;
    let a = obs_or(&file.obs_a, ObservableSpec::SigmaZ, psi.dims())?;
    let b = obs_or(&file.obs_b, ObservableSpec::SigmaX, psi.dims())?;
    let born_a = rule_probabilities(ProbabilityRule::Born, &psi, &a)?;
    let mut setup = match mode {
        SchemeMode::TwoPointer => PointerSchemeSetup::two_pointer(psi, a, b)?,
        SchemeMode::OnePointer => PointerSchemeSetup::one_pointer(psi, a, b)?,
    };
    if file.pointer_n.is_some() || file.pointer_m.is_some() {
        let n = file.pointer_n.unwrap_or(setup.n_pointer1());
        setup = setup.with_pointer_dims(n, file.pointer_m)?;
    }
    let outcome = run_scheme(&setup)?;
    push_joint(report, &setup, &outcome.joint)?;

    let equivalence = projection_equivalence_report(&setup)?;
    let other = match mode {
        SchemeMode::TwoPointer => SchemeMode::OnePointer,
        SchemeMode::OnePointer => SchemeMode::TwoPointer,
    };
    let agreement = run_scheme(&setup.in_mode(other)?)?.joint.max_abs_deviation(&outcome.joint).unwrap_or(f64::INFINITY);
    let marginal = marginal_a(&outcome.joint).max_abs_deviation(&born_a)?;
    report.push("max_projection_deviation", equivalence);
    report.push("scheme_agreement_deviation", agreement);
    report.push("born_marginal_deviation", marginal);
    let brute = if mode == SchemeMode::TwoPointer {
        let d = brute_force_joint(&setup)?.max_abs_deviation(&outcome.joint).unwrap_or(f64::INFINITY);
        report.push("brute_force_deviation", d);
        Some(d)
    } else {
        None
    };

    check("projection_equivalence", equivalence, EQUIVALENCE_TOL)?;
    check("scheme_agreement", agreement, EXACT_TOL)?;
    check("born_marginal", marginal, EXACT_TOL)?;
    if let Some(d) = brute {
        check("brute_force_agreement", d, EXACT_TOL)?;
    }
    Ok(())
}

fn epr(file: &ScenarioFile, report: &mut Report) -> Result<(), CliError> {
    let spec = file.state.clone().unwrap_or(StateSpec::EprBohm);
    let psi = build_state(&spec, None)?;
    if psi.dims() != [2] {
        return Err(Error::invalid(format!("epr needs a single qubit, got dims {:?}", psi.dims())).into());
    }
    let b = obs_or(&file.obs_b, ObservableSpec::SigmaZ, &[2])?;
    let setup = PointerSchemeSetup::one_pointer(psi, Observable::sigma_z(), b)?;
    let outcome = run_scheme(&setup)?;
    let dims = setup.composite_dims();
    for (k, amp) in outcome.final_state.amps().iter().enumerate() {
        let label = spin_label(&decode_index(k, &dims));
        report.push_labeled("final_amp_re", label.clone(), amp.re);
        report.push_labeled("final_amp_im", label, amp.im);
    }
    push_joint(report, &setup, &outcome.joint)?;
    let equivalence = projection_equivalence_report(&setup)?;
    report.push("max_projection_deviation", equivalence);
    check("projection_equivalence", equivalence, EQUIVALENCE_TOL)?;
    if spec == StateSpec::EprBohm {
        let singlet = build_state(&StateSpec::Singlet, None)?;
        let d = outcome.final_state.max_amp_deviation(&singlet).unwrap_or(f64::INFINITY);
        report.push("singlet_deviation", d);
        check("epr_singlet", d, EXACT_TOL)?;
    }
    Ok(())
}

fn stern_gerlach(file: &ScenarioFile, report: &mut Report) -> Result<(), CliError> {
    let psi = state_or(file, StateSpec::Plus)?;
    let obs = obs_or(&file.obs_a, ObservableSpec::SpinZ(1), psi.dims())?;
    let omega = file.omega.clone().unwrap_or_else(|| obs.eigenvalues());
    if omega.len() != obs.branch_count() {
        return Err(Error::invalid(format!("{} frequencies for {} branches", omega.len(), obs.branch_count())).into());
    }
    let dt = file.dt.unwrap_or(1.0);
    let identity = Operator::identity(psi.dims().to_vec())?;
    let unitaries: Vec<Operator> =
        omega.iter().map(|w| identity.scale(C64::from_polar(1.0, -w * dt))).collect();
    let records = ll_channel(&psi, &obs, &unitaries)?;
    let born = rule_probabilities(ProbabilityRule::Born, &psi, &obs)?;
    report.push_list("eigenvalue", &obs.eigenvalues());
    report.push_list("p", born.probs());
    let mut worst: f64 = 0.0;
    for rec in &records {
        let collapsed = project_update(&psi, &obs, rec.branch_index)?;
        let overlap = inner(&collapsed, &rec.post_state)?;
        let n = rec.branch_index.to_string();
        report.push_labeled("phase", n.clone(), overlap.arg());
        report.push_labeled("overlap_modulus", n, overlap.norm());
        let expected = C64::from_polar(1.0, -omega[rec.branch_index] * dt);
        worst = worst.max((overlap - expected).norm());
        worst = worst.max((rec.probability - born.probs()[rec.branch_index]).abs());
    }
    report.push("phase_only_deviation", worst);
    check("phase_only_post_state", worst, EXACT_TOL)?;
    Ok(())
}

fn ll_scheme(file: &ScenarioFile, report: &mut Report) -> Result<(), CliError> {
    let psi = state_or(file, StateSpec::Plus)?;
    let obs = obs_or(&file.obs_a, ObservableSpec::SigmaZ, psi.dims())?;
    let dims = psi.dims().to_vec();
    let mode = file.ll_unitaries.unwrap_or(LlUnitaries::Random);
    let mut target = None;
    let unitaries = match mode {
        LlUnitaries::Identity => vec![Operator::identity(dims.clone())?; obs.branch_count()],
        LlUnitaries::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(file.seed.unwrap_or(DEFAULT_SEED));
            (0..obs.branch_count())
                .map(|_| random_unitary(dims.clone(), &mut rng))
                .collect::<Result<Vec<_>, _>>()?
        }
        LlUnitaries::Prepare => {
            let t = build_state(file.target.as_ref().unwrap_or(&StateSpec::Basis(0)), Some(&dims))?;
            let us = (0..obs.branch_count())
                .map(|n| match project_update(&psi, &obs, n) {
                    Ok(collapsed) => unitary_taking(&collapsed, &t),
                    Err(Error::ZeroProbabilityBranch { .. }) => Operator::identity(dims.clone()),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>, _>>()?;
            target = Some(t);
            us
        }
    };
    let records = ll_channel(&psi, &obs, &unitaries)?;
    let plain = ll_channel(&psi, &obs, &vec![Operator::identity(dims.clone())?; obs.branch_count()])?;
    report.push_list("eigenvalue", &obs.eigenvalues());
    let mut invariance: f64 = 0.0;
    for (rec, base) in records.iter().zip(&plain) {
        report.push_labeled("p", rec.branch_index.to_string(), rec.probability);
        invariance = invariance.max((rec.probability - base.probability).abs());
    }
    for a in &records {
        for b in &records {
            if a.branch_index < b.branch_index {
                let overlap = inner(&a.post_state, &b.post_state)?.norm();
                report.push_labeled("post_overlap", format!("{},{}", a.branch_index, b.branch_index), overlap);
            }
        }
    }
    report.push("probability_invariance_deviation", invariance);
    check("probability_invariance", invariance, EXACT_TOL)?;
    if let Some(t) = target {
        let worst = records
            .iter()
            .map(|r| r.post_state.max_amp_deviation(&t).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        report.push("target_deviation", worst);
        check("state_preparation", worst, EXACT_TOL)?;
    }
    Ok(())
}

fn telepathy(file: &ScenarioFile, report: &mut Report) -> Result<(), CliError> {
    let psi = state_or(file, StateSpec::Asymmetric(0.36))?;
    if psi.dims().len() != 2 {
        return Err(Error::invalid(format!("telepathy needs two subsystems, got dims {:?}", psi.dims())).into());
    }
    let (da, db) = (psi.dims()[0], psi.dims()[1]);
    let alice = obs_or(&file.obs_a, ObservableSpec::SigmaZ, &[da])?;
    let bob = obs_or(&file.obs_b, ObservableSpec::SigmaZ, &[db])?;
    let scenario = TelepathyScenario::new(psi, alice, bob, file.rule)?;
    let alice_born = rule_probabilities(
        ProbabilityRule::Born,
        scenario.state(),
        &scenario.alice_obs().embed(scenario.state().dims(), 0)?,
    )?;
    report.push("q", file.rule.exponent());
    report.push_list("alice_born", alice_born.probs());
    let with = scenario.bob_distribution(AliceChoice::Measure)?;
    let without = scenario.bob_distribution(AliceChoice::Idle)?;
    report.push_list("bob_with_alice", with.probs());
    report.push_list("bob_without_alice", without.probs());
    let gap = scenario.signaling_gap()?;
    let reverse = scenario.reversed()?.signaling_gap()?;
    report.push("signaling_gap", gap);
    report.push("reverse_signaling_gap", reverse);

    let shots = file.shots.unwrap_or(100_000);
    if shots > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(file.seed.unwrap_or(DEFAULT_SEED));
        let mc_with = scenario.channel_simulation(AliceChoice::Measure, shots, &mut rng)?;
        let mc_without = scenario.channel_simulation(AliceChoice::Idle, shots, &mut rng)?;
        report.push("shots", shots as f64);
        report.push_list("mc_bob_with_alice", mc_with.probs());
        report.push_list("mc_bob_without_alice", mc_without.probs());
        report.push("mc_signaling_gap", tv_distance(&mc_with, &mc_without)?);
    }
    if file.rule.is_born() {
        check("no_signaling", gap, EXACT_TOL)?;
        check("no_signaling_reverse", reverse, EXACT_TOL)?;
    }
    Ok(())
}

fn entropy_demo(file: &ScenarioFile, report: &mut Report) -> Result<(), CliError> {
    let psi = state_or(file, StateSpec::Plus)?;
    let obs = obs_or(&file.obs_a, ObservableSpec::SigmaZ, psi.dims())?;
    let noise = file.noise.unwrap_or(0.0);
    let rho = DensityMatrix::mixture(&[
        (1.0 - noise, density_from_pure(&psi)),
        (noise, DensityMatrix::maximally_mixed(psi.dims().to_vec())?),
    ])?;
    let after = nonselective_channel(&rho, &obs)?;
    let (s_before, s_after) = (von_neumann_entropy(&rho)?, von_neumann_entropy(&after)?);
    let s_selective = average_selective_entropy(&after, &obs)?;
    report.push_list("eigenvalue", &obs.eigenvalues());
    for i in 0..obs.branch_count() {
        match classical_selective(&after, &obs, i, ProbabilityRule::Born) {
            Ok((p, post)) => {
                report.push_labeled("p", i.to_string(), p);
                report.push_labeled("entropy_branch", i.to_string(), von_neumann_entropy(&post)?);
            }
            Err(Error::ZeroProbabilityBranch { .. }) => report.push_labeled("p", i.to_string(), 0.0),
            Err(e) => return Err(e.into()),
        }
    }
    report.push("purity_before", rho.purity());
    report.push("entropy_before", s_before);
    report.push("entropy_after", s_after);
    report.push("entropy_selective_average", s_selective);
    check("nonselective_entropy_increase", s_before - s_after, ENTROPY_SLACK)?;
    check("selective_entropy_decrease", s_selective - s_before, ENTROPY_SLACK)?;
    Ok(())
}
