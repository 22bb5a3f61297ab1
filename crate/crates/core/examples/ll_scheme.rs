// Measurement followed by a result-dependent unitary. Arbitrary unitaries
// leave the statistics alone; a suitable choice prepares one fixed state
// whatever the result.

use std::error::Error;

use qmeasure::random::{random_observable, random_state, random_unitary, Spectrum};
use qmeasure::rules::{ll_channel, project_update, rule_probabilities, ProbabilityRule};
use qmeasure::state::{inner, unitary_taking, Operator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let psi = random_state(vec![4], &mut rng)?;
    let obs = random_observable(vec![4], Spectrum::NonDegenerate, &mut rng)?;
    let born = rule_probabilities(ProbabilityRule::Born, &psi, &obs)?;
    println!("Born probabilities {:?}", born.probs());

    let random: Vec<Operator> = (0..obs.branch_count())
        .map(|_| random_unitary(vec![4], &mut rng))
        .collect::<Result<_, _>>()?;
    for rec in ll_channel(&psi, &obs, &random)? {
        println!("  random unitaries: branch {} p={:.6}", rec.branch_index, rec.probability);
    }

    let target = random_state(vec![4], &mut rng)?;
    let prepare: Vec<Operator> = (0..obs.branch_count())
        .map(|n| unitary_taking(&project_update(&psi, &obs, n)?, &target))
        .collect::<Result<_, _>>()?;
    let records = ll_channel(&psi, &obs, &prepare)?;
    for rec in &records {
        let fidelity = inner(&target, &rec.post_state)?.norm_sqr();
        println!("  preparation: branch {} fidelity with target {fidelity:.12}", rec.branch_index);
        assert!((fidelity - 1.0).abs() < 1e-12);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
