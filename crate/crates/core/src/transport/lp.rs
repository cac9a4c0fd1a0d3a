//! Dense phase-1 simplex for feasibility of `A x = b, x >= 0`.
//!
//! Rows are equilibrated to unit max-norm. Pricing is Dantzig's rule, falling
//! back to Bland's rule during runs of degenerate pivots so cycling cannot
//! occur. The ratio test is Harris-style: among rows within a small tolerance
//! of the minimum ratio, the largest pivot wins. The final basis is re-solved
//! against the original system to remove accumulated tableau drift.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Smallest admissible pivot on the equilibrated tableau.
const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-11;
/// Primal feasibility slack used by the Harris ratio test.
const HARRIS_TOL: f64 = 1e-12;
/// Stop as soon as the artificial mass drops below this (equilibrated units).
const FEASIBLE_STOP: f64 = 1e-14;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;
const MAX_PIVOTS: usize = 50_000;

/// Outcome of phase 1: the point reached (original variables only) and its
/// total constraint violation `||A x - b||_1`, which is zero iff feasible.
#[derive(Clone, Debug)]
pub struct PhaseOne {
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

/// Minimizes the sum of artificial variables for `A x = b, x >= 0`, starting
/// from the all-artificial basis.
pub fn phase_one(a: &Matrix, b: &[f64]) -> Result<PhaseOne> {
    let (rows, cols) = a.shape();
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: b.len(),
        });
    }
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut t = vec![0.0; rows * width];
    for r in 0..rows {
        let row_max = a.row(r).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if row_max > 0.0 { 1.0 / row_max } else { 1.0 };
        let sign = if b[r] < 0.0 { -scale } else { scale };
        for c in 0..cols {
            t[r * width + c] = sign * a[(r, c)];
        }
        t[r * width + cols + r] = 1.0;
        t[r * width + rhs] = sign * b[r];
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced costs of the phase-1 objective; obj[rhs] holds minus the objective.
    let mut obj = vec![0.0; width];
    for r in 0..rows {
        for c in 0..cols {
            obj[c] -= t[r * width + c];
        }
        obj[rhs] -= t[r * width + rhs];
    }

    let mut pivots = 0;
    let mut degenerate = 0;
    loop {
        if -obj[rhs] <= FEASIBLE_STOP {
            break;
        }
        let bland = degenerate >= DEGENERATE_STREAK;
        let enter = if bland {
            (0..cols + rows).find(|&c| obj[c] < -REDUCED_COST_TOL)
        } else {
            (0..cols + rows)
                .filter(|&c| obj[c] < -REDUCED_COST_TOL)
                .min_by(|&i, &j| obj[i].total_cmp(&obj[j]))
        };
        let Some(enter) = enter else {
            break;
        };
        let Some(pr) = ratio_test(&t, width, rhs, enter, &basis, bland) else {
            // A phase-1 objective is bounded below by zero, so a missing pivot
            // row means the tableau has lost accuracy.
            return Err(Error::NumericalInstability(
                "phase-1 ratio test found no pivot row".into(),
            ));
        };
        if pivots == MAX_PIVOTS {
            return Err(Error::NoConvergence {
                what: "phase-1 simplex",
                iterations: pivots,
                residual: -obj[rhs],
            });
        }

        let before = -obj[rhs];
        pivot(&mut t, &mut obj, width, pr, enter);
        basis[pr] = enter;
        pivots += 1;
        if -obj[rhs] < before - HARRIS_TOL {
            degenerate = 0;
        } else {
            degenerate += 1;
        }
    }

    let x = resolve_basis(a, b, &basis, cols).unwrap_or_else(|| {
        let mut x = vec![0.0; cols];
        for (r, &var) in basis.iter().enumerate() {
            if var < cols {
                x[var] = t[r * width + rhs].max(0.0);
            }
        }
        x
    });
    let ax = a.mul_vec(&x)?;
    let objective = ax.iter().zip(b).map(|(l, r)| (l - r).abs()).sum();
    Ok(PhaseOne {
        objective,
        x,
        pivots,
    })
}

fn ratio_test(
    t: &[f64],
    width: usize,
    rhs: usize,
    enter: usize,
    basis: &[usize],
    bland: bool,
) -> Option<usize> {
    let rows = basis.len();
    let col = |r: usize| t[r * width + enter];
    let value = |r: usize| t[r * width + rhs].max(0.0);
    if bland {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in (0..rows).filter(|&r| col(r) > PIVOT_TOL) {
            let ratio = value(r) / col(r);
            let better = match leave {
                None => true,
                Some(l) => ratio < best || (ratio == best && basis[r] < basis[l]),
            };
            if better {
                best = ratio;
                leave = Some(r);
            }
        }
        return leave;
    }
    let bound = (0..rows)
        .filter(|&r| col(r) > PIVOT_TOL)
        .map(|r| (value(r) + HARRIS_TOL) / col(r))
        .fold(f64::INFINITY, f64::min);
    (0..rows)
        .filter(|&r| col(r) > PIVOT_TOL && value(r) / col(r) <= bound)
        .max_by(|&i, &j| col(i).total_cmp(&col(j)).then(basis[j].cmp(&basis[i])))
}

fn pivot(t: &mut [f64], obj: &mut [f64], width: usize, pr: usize, enter: usize) {
    let rows = t.len() / width;
    let rhs = width - 1;
    let p = t[pr * width + enter];
    for c in 0..width {
        t[pr * width + c] /= p;
    }
    t[pr * width + enter] = 1.0;
    let pivot_row: Vec<f64> = t[pr * width..(pr + 1) * width].to_vec();
    for r in 0..rows {
        if r == pr {
            continue;
        }
        let f = t[r * width + enter];
        if f != 0.0 {
            let row = &mut t[r * width..(r + 1) * width];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[enter] = 0.0;
            // Harris steps may leave tiny negative basic values.
            if row[rhs] < 0.0 && row[rhs] > -HARRIS_TOL {
                row[rhs] = 0.0;
            }
        }
    }
    let f = obj[enter];
    for (v, pv) in obj.iter_mut().zip(&pivot_row) {
        *v -= f * pv;
    }
    obj[enter] = 0.0;
}

/// Solves `B x_B = b` for the final basis (artificial columns are unit
/// vectors), clipping round-off negatives. `None` if the basis is singular.
fn resolve_basis(a: &Matrix, b: &[f64], basis: &[usize], cols: usize) -> Option<Vec<f64>> {
    let n = basis.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let mut row: Vec<f64> = basis
                .iter()
                .map(|&var| {
                    if var < cols {
                        a[(r, var)]
                    } else if var - cols == r {
                        if b[r] < 0.0 {
                            -1.0
                        } else {
                            1.0
                        }
                    } else {
                        0.0
                    }
                })
                .collect();
            row.push(b[r]);
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        let col_max = (0..n).fold(0.0f64, |acc, i| acc.max(m[i][k].abs()));
        if m[p][k].abs() <= 1e-13 * col_max.max(f64::MIN_POSITIVE) || m[p][k] == 0.0 {
            return None;
        }
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..=n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    let mut xb = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * xb[j]).sum();
        xb[i] = (m[i][n] - s) / m[i][i];
    }
    if !xb.iter().all(|v| v.is_finite()) {
        return None;
    }
    let mut x = vec![0.0; cols];
    for (k, &var) in basis.iter().enumerate() {
        if var < cols {
            x[var] = xb[k].max(0.0);
        }
    }
    Some(x)
}
