// Alice either measures her half of an entangled pair or does nothing; Bob
// looks at his outcome statistics. With the Born rule they do not depend on
// Alice's choice. With an exponent rule they do.

use std::error::Error;

use qmeasure::distribution::tv_distance;
use qmeasure::observable::Observable;
use qmeasure::rules::ProbabilityRule;
use qmeasure::signaling::{asymmetric_pair, AliceChoice, TelepathyScenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let pair = asymmetric_pair(0.36)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1729);
    for rule in [ProbabilityRule::Born, ProbabilityRule::nonborn_exponent(2.0)?] {
        let s = TelepathyScenario::new(pair.clone(), Observable::sigma_z(), Observable::sigma_z(), rule)?;
        let with = s.bob_distribution(AliceChoice::Measure)?;
        let without = s.bob_distribution(AliceChoice::Idle)?;
        println!("{rule:?}");
        println!("  Bob, Alice measures: {:?}", with.probs());
        println!("  Bob, Alice idle:     {:?}", without.probs());
        println!("  gap {:.6}  reverse gap {:.6}", s.signaling_gap()?, s.reversed()?.signaling_gap()?);

        let shots = 100_000;
        let mc_with = s.channel_simulation(AliceChoice::Measure, shots, &mut rng)?;
        let mc_without = s.channel_simulation(AliceChoice::Idle, shots, &mut rng)?;
        println!("  {shots} shots per arm: empirical gap {:.4}", tv_distance(&mc_with, &mc_without)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
