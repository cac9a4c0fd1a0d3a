//! Transport-dual membership: does some coupling of `mu` and `nu` have cross
//! moment `sum gamma_ij x_i y_j^T = Id`?

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::measure::DiscreteMeasure;

use super::lp::phase_one;
use super::Coupling;

/// Phase-1 objective at or below this value counts as feasible.
pub const DUAL_FEASIBILITY_TOL: f64 = 1e-8;
/// Frobenius residual a witness coupling must achieve on `sum x y^T = Id`.
pub const DUAL_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum DualMembership {
    Member {
        witness: Coupling,
        moment_residual: f64,
        phase_one_objective: f64,
    },
    /// Certificate of infeasibility: the minimal total constraint violation.
    NotMember { phase_one_objective: f64 },
}

impl DualMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, DualMembership::Member { .. })
    }

    pub fn phase_one_objective(&self) -> f64 {
        match self {
            DualMembership::Member {
                phase_one_objective,
                ..
            }
            | DualMembership::NotMember {
                phase_one_objective,
            } => *phase_one_objective,
        }
    }
}

/// `||sum mass x y^T - Id||_F` for a coupling between measures of equal dimension.
pub fn moment_residual(gamma: &Coupling) -> f64 {
    let n = gamma.mu().dim();
    gamma
        .cross_moment()
        .sub(&Matrix::identity(n))
        .map(|d| d.frobenius_norm())
        .unwrap_or(f64::INFINITY)
}

/// Decides `nu ∈ D_mu` by phase-1 simplex over couplings `gamma_ij >= 0` with
/// both marginal constraints and the `n^2` moment equalities.
pub fn dual_membership(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DualMembership> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    let (m, k, d) = (mu.len(), nu.len(), mu.dim());
    let vars = m * k;
    let rows = m + k + d * d;
    let mut a = Matrix::zeros(rows, vars);
    let mut b = vec![0.0; rows];

    for i in 0..m {
        for j in 0..k {
            a[(i, i * k + j)] = 1.0;
        }
        b[i] = mu.mass(i);
    }
    for j in 0..k {
        for i in 0..m {
            a[(m + j, i * k + j)] = 1.0;
        }
        b[m + j] = nu.mass(j);
    }
    for p in 0..d {
        for q in 0..d {
            let r = m + k + p * d + q;
            for i in 0..m {
                let xp = mu.point(i)[p];
                for j in 0..k {
                    a[(r, i * k + j)] = xp * nu.point(j)[q];
                }
            }
            b[r] = if p == q { 1.0 } else { 0.0 };
        }
    }

    let result = phase_one(&a, &b)?;
    if result.objective > DUAL_FEASIBILITY_TOL {
        return Ok(DualMembership::NotMember {
            phase_one_objective: result.objective,
        });
    }

    let entries: Vec<(usize, usize, f64)> = result
        .x
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(idx, &v)| (idx / k, idx % k, v))
        .collect();
    let witness = Coupling::new(mu.clone(), nu.clone(), entries).map_err(|e| {
        Error::NumericalInstability(format!(
            "phase-1 objective {:e} is feasible but the extracted plan is invalid: {e}",
            result.objective
        ))
    })?;
    let residual = moment_residual(&witness);
    if residual > DUAL_RESIDUAL_TOL {
        return Err(Error::NumericalInstability(format!(
            "phase-1 objective {:e} is feasible but the witness moment residual is {residual:e}",
            result.objective
        )));
    }
    Ok(DualMembership::Member {
        witness,
        moment_residual: residual,
        phase_one_objective: result.objective,
    })
}
