// Entropy before a measurement, after the nonselective channel, and on
// average after reading out the result.

use std::error::Error;

use qmeasure::random::{random_density, random_observable, Spectrum};
use qmeasure::rules::{average_selective_entropy, nonselective_channel};
use qmeasure::state::von_neumann_entropy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    println!("{:>3} {:>10} {:>12} {:>12}", "d", "S(ρ)", "S(∑PρP)", "∑p S(ρ_i)");
    for d in 2..=8 {
        let rho = random_density(vec![d], &mut rng)?;
        let obs = random_observable(vec![d], Spectrum::Any, &mut rng)?;
        let decohered = nonselective_channel(&rho, &obs)?;
        let before = von_neumann_entropy(&rho)?;
        let after = von_neumann_entropy(&decohered)?;
        let selective = average_selective_entropy(&decohered, &obs)?;
        println!("{d:>3} {before:>10.5} {after:>12.5} {selective:>12.5}");
        assert!(after >= before - 1e-10 && selective <= before + 1e-10);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
