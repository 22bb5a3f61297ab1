// A spin in (|↑⟩ − |↓⟩)/√2 coupled to a spin pointer by a controlled-NOT.
// The composite ends in the singlet.

use std::error::Error;

use qmeasure::observable::Observable;
use qmeasure::pointer::{conditional_b_given_a, run_one_pointer, shift_unitary_a, PointerSchemeSetup};
use qmeasure::state::{decode_index, StateVector};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = StateVector::from_real(vec![2], &[h, -h])?;
    let setup = PointerSchemeSetup::one_pointer(psi, Observable::sigma_z(), Observable::sigma_z())?;

    let u = shift_unitary_a(&setup)?;
    println!("coupling unitary on |small, pointer⟩ (flips the pointer when the spin is ↑):");
    for r in 0..4 {
        let row: Vec<f64> = (0..4).map(|c| u.matrix()[(r, c)].re).collect();
        println!("  {row:?}");
    }

    let outcome = run_one_pointer(&setup)?;
    let labels = ["↑", "↓"];
    for (k, amp) in outcome.final_state.amps().iter().enumerate() {
        let d = decode_index(k, &[2, 2]);
        println!("  |{}{}⟩  {:+.6}", labels[d[0]], labels[d[1]], amp.re);
    }
    let singlet = StateVector::from_real(vec![2, 2], &[0.0, h, -h, 0.0])?;
    let deviation = outcome.final_state.max_amp_deviation(&singlet).unwrap_or(f64::INFINITY);
    println!("deviation from singlet {deviation:.1e}");
    assert!(deviation < 1e-12);

    for i in 0..2 {
        println!("p(small | pointer branch {i}) = {:?}", conditional_b_given_a(&outcome.joint, i)?.probs());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
