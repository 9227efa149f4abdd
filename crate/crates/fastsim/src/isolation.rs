use crate::candidate::Candidate;
use crate::kinematics::delta_r;
use crate::Error;

/// Relative isolation of `candidates[index]`: the scalar pt sum of the
/// other candidates within a cone of `dr_max` (strict), divided by the
/// candidate's own pt. Momentum directions define the cone. Fails on a
/// zero-pt reference, whose ratio would be meaningless.
pub fn isolation_ratio(
    candidates: &[Candidate],
    index: usize,
    dr_max: f64,
) -> Result<f64, Error> {
    let around = &candidates[index];
    let pt = around.momentum.pt();
    if pt == 0.0 {
        return Err(Error::ZeroPt);
    }
    let (eta, phi) = (around.momentum.eta(), around.momentum.phi());
    let mut sum = 0.0;
    for (j, other) in candidates.iter().enumerate() {
        if j == index {
            continue;
        }
        if delta_r(eta, phi, other.momentum.eta(), other.momentum.phi()) < dr_max {
            sum += other.momentum.pt();
        }
    }
    Ok(sum / pt)
}

/// Isolation decision at a threshold (strict: a ratio exactly at the
/// threshold is not isolated).
pub fn is_isolated(
    candidates: &[Candidate],
    index: usize,
    dr_max: f64,
    threshold: f64,
) -> Result<bool, Error> {
    Ok(isolation_ratio(candidates, index, dr_max)? < threshold)
}
