//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line on each `cargo test` run.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qmeasure::observable::Observable;
use qmeasure::pointer::{
    brute_force_joint, conditional_b_given_a, run_one_pointer, run_two_pointer, PointerSchemeSetup,
    SchemeMode,
};
use qmeasure::random::{random_density, random_observable, random_state, random_unitary, Spectrum};
use qmeasure::rules::{
    average_selective_entropy, ll_channel, nonselective_channel, project_update, ProbabilityRule,
};
use qmeasure::signaling::{asymmetric_pair, maximally_entangled_pair, AliceChoice, TelepathyScenario};
use qmeasure::state::{
    density_from_pure, partial_trace, unitary_taking, von_neumann_entropy, Operator, StateVector, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:.0?}"))
}

fn e(err: qmeasure::error::Error) -> String {
    err.to_string()
}

// ---- hand oracles, written against raw matrices ----

/// `‖P v‖²`
fn weight(p: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    (p * v).norm_squared()
}

fn born_after_collapse(psi: &DVector<C64>, pa: &DMatrix<C64>, b: &Observable) -> Vec<f64> {
    let collapsed = pa * psi;
    let collapsed = collapsed.unscale(collapsed.norm());
    b.branches().iter().map(|br| weight(br.projector.matrix(), &collapsed)).collect()
}

fn entropy_bits(rho: &DMatrix<C64>) -> f64 {
    let h = (rho + rho.adjoint()).unscale(2.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-15)
        .map(|&l| -l * l.log2())
        .sum()
}

fn has_degenerate_branch(obs: &Observable) -> bool {
    (0..obs.branch_count()).any(|i| obs.rank(i).is_ok_and(|r| r >= 2))
}

fn random_setup(trial: usize, rng: &mut ChaCha8Rng) -> Result<PointerSchemeSetup, String> {
    let d = 2 + trial % 5;
    let spectrum = if trial % 3 == 0 { Spectrum::Degenerate } else { Spectrum::Any };
    let psi = random_state(vec![d], rng).map_err(e)?;
    let a = random_observable(vec![d], spectrum, rng).map_err(e)?;
    let b = random_observable(vec![d], spectrum, rng).map_err(e)?;
    PointerSchemeSetup::two_pointer(psi, a, b).map_err(e)
}

// ---- criteria ----

fn epr_reproduction() -> Outcome {
    let start = Instant::now();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = StateVector::from_real(vec![2], &[h, -h]).map_err(e)?;
    let setup = PointerSchemeSetup::one_pointer(psi, Observable::sigma_z(), Observable::sigma_z()).map_err(e)?;
    let final_state = run_one_pointer(&setup).map_err(e)?.final_state;
    // |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩
    let expected = [0.0, h, -h, 0.0];
    let worst = final_state
        .amps()
        .iter()
        .zip(expected)
        .map(|(a, x)| (a - C64::new(x, 0.0)).norm())
        .fold(0.0, f64::max);
    ensure(worst < 1e-12, || format!("amplitude deviation {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("max amplitude deviation {worst:.1e}"))
}

struct SchemeStats {
    setups: usize,
    degenerate: usize,
    equivalence: f64,
    agreement: f64,
    elapsed: Duration,
}

fn scheme_batch() -> Result<SchemeStats, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut stats = SchemeStats { setups: 0, degenerate: 0, equivalence: 0.0, agreement: 0.0, elapsed: Duration::ZERO };
    for trial in 0..200 {
        let setup = random_setup(trial, &mut rng)?;
        if has_degenerate_branch(setup.obs_a()) && has_degenerate_branch(setup.obs_b()) {
            stats.degenerate += 1;
        }
        let two = run_two_pointer(&setup).map_err(e)?.joint;
        let one = run_one_pointer(&setup.in_mode(SchemeMode::OnePointer).map_err(e)?).map_err(e)?.joint;
        stats.agreement = stats.agreement.max(two.max_abs_deviation(&one).unwrap_or(f64::INFINITY));

        let psi = setup.small_state().amps();
        for (i, branch) in setup.obs_a().branches().iter().enumerate() {
            if weight(branch.projector.matrix(), psi) <= 1e-12 {
                continue;
            }
            let oracle = born_after_collapse(psi, branch.projector.matrix(), setup.obs_b());
            for joint in [&two, &one] {
                let conditional = conditional_b_given_a(joint, i).map_err(e)?;
                for (got, want) in conditional.probs().iter().zip(&oracle) {
                    stats.equivalence = stats.equivalence.max((got - want).abs());
                }
            }
        }
        stats.setups += 1;
    }
    stats.elapsed = start.elapsed();
    Ok(stats)
}

fn projection_equivalence(stats: &SchemeStats) -> Outcome {
    ensure(stats.setups >= 200, || format!("only {} setups", stats.setups))?;
    ensure(stats.degenerate >= 50, || format!("only {} doubly degenerate setups", stats.degenerate))?;
    ensure(stats.equivalence < 1e-10, || format!("deviation {:e}", stats.equivalence))?;
    within(stats.elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "{} setups ({} with degenerate A and B), max |p_j|i - Born| {:.1e}, {:.2?}",
        stats.setups, stats.degenerate, stats.equivalence, stats.elapsed
    ))
}

fn scheme_agreement(stats: &SchemeStats) -> Outcome {
    ensure(stats.agreement < 1e-12, || format!("deviation {:e}", stats.agreement))?;
    Ok(format!("{} setups, max joint deviation {:.1e}", stats.setups, stats.agreement))
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(96);
    let (mut worst, mut largest, mut count) = (0.0f64, 0, 0);
    for trial in 0..60 {
        let d = rng.random_range(2..=4);
        let psi = random_state(vec![d], &mut rng).map_err(e)?;
        let a = random_observable(vec![d], Spectrum::Any, &mut rng).map_err(e)?;
        let b = random_observable(vec![d], Spectrum::Any, &mut rng).map_err(e)?;
        let mut setup = PointerSchemeSetup::two_pointer(psi, a, b).map_err(e)?;
        if trial % 2 == 1 {
            // oversized pointers, still within the dimension budget
            let n = setup.n_pointer1() + 1;
            let m = setup.m_pointer2().unwrap_or(1) + 1;
            if d * n * m <= 96 {
                setup = setup.with_pointer_dims(n, Some(m)).map_err(e)?;
            }
        }
        let total = setup.total_dim();
        ensure(total <= 96, || format!("total dimension {total}"))?;
        largest = largest.max(total);
        let direct = run_two_pointer(&setup).map_err(e)?.joint;
        let brute = brute_force_joint(&setup).map_err(e)?;
        worst = worst.max(brute.max_abs_deviation(&direct).unwrap_or(f64::INFINITY));
        count += 1;
    }
    ensure(worst < 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("{count} setups (largest total dim {largest}), max deviation {worst:.1e}"))
}

fn no_signaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let (mut worst, mut oracle) = (0.0f64, 0.0f64);
    for _ in 0..120 {
        let (d1, d2) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let psi = random_state(vec![d1, d2], &mut rng).map_err(e)?;
        let a = random_observable(vec![d1], Spectrum::Any, &mut rng).map_err(e)?;
        let b = random_observable(vec![d2], Spectrum::Any, &mut rng).map_err(e)?;
        // Bob's marginal from his reduced state alone
        let rho_b = partial_trace(&density_from_pure(&psi), &[1]).map_err(e)?;
        let reduced: Vec<f64> = b
            .branches()
            .iter()
            .map(|br| (br.projector.matrix() * rho_b.matrix()).trace().re)
            .collect();
        let s = TelepathyScenario::new(psi, a, b, ProbabilityRule::Born).map_err(e)?;
        let with = s.bob_distribution(AliceChoice::Measure).map_err(e)?;
        for (x, y) in with.probs().iter().zip(&reduced) {
            oracle = oracle.max((x - y).abs());
        }
        worst = worst
            .max(s.signaling_gap().map_err(e)?)
            .max(s.reversed().map_err(e)?.signaling_gap().map_err(e)?);
    }
    ensure(worst < 1e-12, || format!("gap {worst:e}"))?;
    ensure(oracle < 1e-12, || format!("reduced-state mismatch {oracle:e}"))?;
    Ok(format!("120 scenarios, both directions, max gap {worst:.1e}"))
}

fn telepathy_witness() -> Outcome {
    let p: f64 = 0.36;
    let idle0 = p * p / (p * p + (1.0 - p) * (1.0 - p));
    let s = TelepathyScenario::new(
        asymmetric_pair(p).map_err(e)?,
        Observable::sigma_z(),
        Observable::sigma_z(),
        ProbabilityRule::nonborn_exponent(2.0).map_err(e)?,
    )
    .map_err(e)?;
    // σz branch 1 (eigenvalue +1) is |0⟩, branch 0 is |1⟩
    let with = s.bob_distribution(AliceChoice::Measure).map_err(e)?;
    let idle = s.bob_distribution(AliceChoice::Idle).map_err(e)?;
    let with_basis = [with.probs()[1], with.probs()[0]];
    let idle_basis = [idle.probs()[1], idle.probs()[0]];
    ensure((with_basis[0] - 0.36).abs() < 1e-12 && (with_basis[1] - 0.64).abs() < 1e-12, || {
        format!("with-Alice {with_basis:?}")
    })?;
    ensure((idle_basis[0] - idle0).abs() < 1e-12, || format!("without-Alice {idle_basis:?}"))?;
    ensure((idle_basis[0] - 0.240356).abs() < 1e-6, || format!("without-Alice {idle_basis:?}"))?;
    let gap = s.signaling_gap().map_err(e)?;
    ensure((gap - 0.119643).abs() < 1e-6, || format!("gap {gap}"))?;
    ensure((gap - (p - idle0)).abs() < 1e-12, || format!("gap {gap} vs oracle {}", p - idle0))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1729);
    let shots = 100_000;
    let mc_with = s.channel_simulation(AliceChoice::Measure, shots, &mut rng).map_err(e)?;
    let mc_idle = s.channel_simulation(AliceChoice::Idle, shots, &mut rng).map_err(e)?;
    let mc_gap = qmeasure::distribution::tv_distance(&mc_with, &mc_idle).map_err(e)?;
    ensure((mc_gap - gap).abs() < 0.01, || format!("Monte Carlo gap {mc_gap}"))?;
    Ok(format!(
        "with {with_basis:.6?}, without {idle_basis:.6?}, gap {gap:.6}, {shots}-shot gap {mc_gap:.4}"
    ))
}

fn born_marginals() -> Outcome {
    let bell = maximally_entangled_pair();
    let rho = density_from_pure(&bell);
    let mut worst = 0.0f64;
    for keep in 0..2 {
        let reduced = partial_trace(&rho, &[keep]).map_err(e)?;
        for branch in Observable::sigma_z().branches() {
            let p = (branch.projector.matrix() * reduced.matrix()).trace().re;
            worst = worst.max((p - 0.5).abs());
        }
        let global = Observable::sigma_z().embed(&[2, 2], keep).map_err(e)?;
        let dist = qmeasure::rules::rule_probabilities(ProbabilityRule::Born, &bell, &global).map_err(e)?;
        for p in dist.probs() {
            worst = worst.max((p - 0.5).abs());
        }
    }
    ensure(worst < 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("both parties (1/2, 1/2), max deviation {worst:.1e}"))
}

fn entropy_taxonomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut increase, mut decrease, mut channel) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for trial in 0..60 {
        let d = 2 + trial % 7;
        let rho = random_density(vec![d], &mut rng).map_err(e)?;
        let obs = random_observable(vec![d], Spectrum::Any, &mut rng).map_err(e)?;
        let after = nonselective_channel(&rho, &obs).map_err(e)?;
        // ∑ PρP by hand
        let mut oracle = DMatrix::<C64>::zeros(d, d);
        for br in obs.branches() {
            let p = br.projector.matrix();
            oracle += p * rho.matrix() * p;
        }
        channel = channel.max((after.matrix() - &oracle).camax());

        let before = entropy_bits(rho.matrix());
        let after_s = entropy_bits(&oracle);
        let selective = average_selective_entropy(&after, &obs).map_err(e)?;
        let library = von_neumann_entropy(&rho).map_err(e)?;
        ensure((library - before).abs() < 1e-9, || format!("entropy {library} vs {before}"))?;
        increase = increase.min(after_s - before);
        decrease = decrease.min(before - selective);
    }
    ensure(channel < 1e-12, || format!("channel deviation {channel:e}"))?;
    ensure(increase >= -1e-10, || format!("nonselective entropy dropped by {:e}", -increase))?;
    ensure(decrease >= -1e-10, || format!("selective average exceeded by {:e}", -decrease))?;
    Ok(format!(
        "60 density matrices, min S_after - S_before {increase:.2e}, min S_before - avg S_sel {decrease:.2e}"
    ))
}

fn ll_scheme() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let (mut invariance, mut preparation) = (0.0f64, 0.0f64);
    for trial in 0..60 {
        let d = 2 + trial % 5;
        let psi = random_state(vec![d], &mut rng).map_err(e)?;
        let obs = random_observable(vec![d], Spectrum::Any, &mut rng).map_err(e)?;
        let unitaries = (0..obs.branch_count())
            .map(|_| random_unitary(vec![d], &mut rng))
            .collect::<Result<Vec<_>, _>>()
            .map_err(e)?;
        for rec in ll_channel(&psi, &obs, &unitaries).map_err(e)? {
            let oracle = weight(obs.branches()[rec.branch_index].projector.matrix(), psi.amps());
            invariance = invariance.max((rec.probability - oracle).abs());
        }

        let target = random_state(vec![d], &mut rng).map_err(e)?;
        let prepare = (0..obs.branch_count())
            .map(|n| unitary_taking(&project_update(&psi, &obs, n)?, &target))
            .collect::<Result<Vec<Operator>, _>>()
            .map_err(e)?;
        for rec in ll_channel(&psi, &obs, &prepare).map_err(e)? {
            preparation = preparation.max(rec.post_state.max_amp_deviation(&target).unwrap_or(f64::INFINITY));
        }
    }
    ensure(invariance < 1e-12, || format!("probability deviation {invariance:e}"))?;
    ensure(preparation < 1e-12, || format!("post-state deviation {preparation:e}"))?;
    Ok(format!("60 unitary sets, probability deviation {invariance:.1e}, preparation deviation {preparation:.1e}"))
}

fn verify_default() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qmeasure"))
        .arg("verify")
        .output()
        .map_err(|err| err.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(0), || {
        format!("exit {:?}\n{}{}", out.status.code(), String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("exit 0 in {elapsed:.2?}"))
}

fn main() -> ExitCode {
    let schemes = scheme_batch();
    let from_batch = |f: fn(&SchemeStats) -> Outcome| match &schemes {
        Ok(stats) => f(stats),
        Err(err) => Err(err.clone()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("EPR reproduction", epr_reproduction()),
        ("projection-postulate equivalence", from_batch(projection_equivalence)),
        ("scheme agreement", from_batch(scheme_agreement)),
        ("brute-force oracle agreement", oracle_agreement()),
        ("no-signaling under Born", no_signaling()),
        ("telepathy witness", telepathy_witness()),
        ("Born marginals", born_marginals()),
        ("entropy taxonomy", entropy_taxonomy()),
        ("LL scheme", ll_scheme()),
        ("verify under defaults", verify_default()),
    ];
    let mut failed = 0;
    for (k, (name, result)) in results.iter().enumerate() {
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
