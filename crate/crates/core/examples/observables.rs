// Building observables from matrices and projector families, and applying
// the probability rules to a state.

use std::error::Error;

use nalgebra::DMatrix;
use qmeasure::observable::{Branch, Observable, observable_from_branches};
use qmeasure::rules::{ProbabilityRule, rule_probabilities};
use qmeasure::state::{Operator, StateVector};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // diag(1, 1, -1): a degenerate eigenvalue clusters into one rank-2 branch
    let h = Operator::diagonal(&[1.0, 1.0, -1.0])?;
    let obs = Observable::from_matrix(&h)?;
    println!("eigenvalues {:?}", obs.eigenvalues());
    for i in 0..obs.branch_count() {
        println!("  branch {i}: eigenvalue {} rank {}", obs.eigenvalue(i)?, obs.rank(i)?);
    }
    assert_eq!(obs.rank(1)?, 2);

    let psi = StateVector::from_real(vec![3], &[0.6, 0.0, 0.8])?;
    let born = rule_probabilities(ProbabilityRule::Born, &psi, &obs)?;
    let weighted = rule_probabilities(ProbabilityRule::nonborn_exponent(2.0)?, &psi, &obs)?;
    println!("Born        {:?}", born.probs());
    println!("exponent 2  {:?}", weighted.probs());

    // overlapping projectors are rejected
    let p = |rows: [[f64; 2]; 2]| {
        Operator::from_matrix(DMatrix::from_fn(2, 2, |r, c| rows[r][c].into()))
    };
    let bad = observable_from_branches(vec![
        Branch { eigenvalue: 0.0, projector: p([[1.0, 0.0], [0.0, 0.0]])? },
        Branch { eigenvalue: 1.0, projector: p([[0.5, 0.5], [0.5, 0.5]])? },
    ]);
    println!("overlapping family: {}", bad.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
