// One pointer records the first measurement; the second observable is
// measured directly on the small system. The joint matches the two-pointer
// scheme.

use std::error::Error;

use qmeasure::pointer::{run_scheme, PointerSchemeSetup, SchemeMode};
use qmeasure::random::{random_observable, random_state, Spectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for d in 3..=6 {
        let psi = random_state(vec![d], &mut rng)?;
        let a = random_observable(vec![d], Spectrum::Any, &mut rng)?;
        let b = random_observable(vec![d], Spectrum::Degenerate, &mut rng)?;
        let one = PointerSchemeSetup::one_pointer(psi, a, b)?;
        let two = one.in_mode(SchemeMode::TwoPointer)?;
        let joint_one = run_scheme(&one)?.joint;
        let joint_two = run_scheme(&two)?.joint;
        let deviation = joint_one.max_abs_deviation(&joint_two).unwrap_or(f64::INFINITY);
        println!(
            "d={d}: {}x{} joint, one-pointer dims {:?}, two-pointer dims {:?}, deviation {deviation:.1e}",
            joint_one.a_count(),
            joint_one.b_count(),
            one.composite_dims(),
            two.composite_dims()
        );
        assert!(deviation < 1e-12);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
