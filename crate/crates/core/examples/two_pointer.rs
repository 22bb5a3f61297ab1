// Two consecutive measurements recorded on two pointers, compared with the
// projection postulate and with a brute-force readout of the final state.

use std::error::Error;

use qmeasure::observable::Observable;
use qmeasure::pointer::{
    brute_force_joint, conditional_b_given_a, marginal_a, projection_equivalence_report, run_two_pointer,
    PointerSchemeSetup,
};
use qmeasure::random::{random_observable, random_state, Spectrum};
use qmeasure::state::{StateVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let psi = StateVector::new(vec![2], vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)])?;
    let setup = PointerSchemeSetup::two_pointer(psi, Observable::sigma_z(), Observable::sigma_x())?;
    let outcome = run_two_pointer(&setup)?;
    println!("p_ij = {}", outcome.joint.matrix());
    println!("p_i  = {:?}", marginal_a(&outcome.joint).probs());
    for i in 0..2 {
        println!("p_j|{i} = {:?}", conditional_b_given_a(&outcome.joint, i)?.probs());
    }

    // a degenerate qutrit with oversized pointers
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = random_state(vec![3], &mut rng)?;
    let a = random_observable(vec![3], Spectrum::Degenerate, &mut rng)?;
    let b = random_observable(vec![3], Spectrum::Any, &mut rng)?;
    let setup = PointerSchemeSetup::two_pointer(psi, a, b)?.with_pointer_dims(4, Some(5))?;
    let direct = run_two_pointer(&setup)?.joint;
    let brute = brute_force_joint(&setup)?;
    let projection = projection_equivalence_report(&setup)?;
    let oracle = brute.max_abs_deviation(&direct).unwrap_or(f64::INFINITY);
    println!("composite dims {:?}", setup.composite_dims());
    println!("projection-postulate deviation {projection:.1e}, brute-force deviation {oracle:.1e}");
    assert!(projection < 1e-10 && oracle < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
