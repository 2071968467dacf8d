//! Exhaustive enumeration of binary assignments for small instances.

use alloc::vec;
use alloc::vec::Vec;

use super::{LinearProgram, MilpError, MilpSolution, MilpStatus, Sense};
use crate::math;

pub const BRUTE_FORCE_MAX_BINARIES: usize = 20;

const FEAS_TOL: f64 = 1e-9;

/// Completes `x` (binaries already set) by choosing the single continuous
/// variable, if any, optimally. Returns `None` when no completion is
/// feasible. Non-binary variables other than the continuous one must be
/// absent.
pub fn evaluate_fixed_binaries(lp: &LinearProgram, binaries: &[f64]) -> Result<Option<(Vec<f64>, f64)>, MilpError> {
    lp.validate()?;
    if binaries.len() != lp.num_vars() {
        return Err(MilpError::DimensionMismatch);
    }
    let continuous = continuous_var(lp)?;
    Ok(complete(lp, binaries.to_vec(), continuous))
}

fn continuous_var(lp: &LinearProgram) -> Result<Option<usize>, MilpError> {
    let mut found = None;
    for j in 0..lp.num_vars() {
        if !lp.binary[j] {
            if found.is_some() {
                return Err(MilpError::TooManyContinuous);
            }
            found = Some(j);
        }
    }
    Ok(found)
}

fn complete(lp: &LinearProgram, mut x: Vec<f64>, continuous: Option<usize>) -> Option<(Vec<f64>, f64)> {
    let (mut lo, mut hi) = match continuous {
        Some(t) => (lp.lower[t], lp.upper[t]),
        None => (0.0, 0.0),
    };
    for row in &lp.rows {
        let mut rest = 0.0;
        let mut coef = 0.0;
        for &(j, v) in &row.coeffs {
            if Some(j) == continuous {
                coef += v;
            } else {
                rest += v * x[j];
            }
        }
        let slack = row.rhs - rest;
        if coef == 0.0 {
            let ok = match row.sense {
                Sense::Le => slack >= -FEAS_TOL,
                Sense::Ge => slack <= FEAS_TOL,
                Sense::Eq => math::abs(slack) <= FEAS_TOL,
            };
            if !ok {
                return None;
            }
            continue;
        }
        let limit = slack / coef;
        match (row.sense, coef > 0.0) {
            (Sense::Le, true) | (Sense::Ge, false) => hi = hi.min(limit),
            (Sense::Le, false) | (Sense::Ge, true) => lo = lo.max(limit),
            (Sense::Eq, _) => {
                lo = lo.max(limit);
                hi = hi.min(limit);
            }
        }
    }
    if let Some(t) = continuous {
        if lo > hi + FEAS_TOL {
            return None;
        }
        let c = lp.objective[t];
        let v = if c > 0.0 {
            hi
        } else if c < 0.0 {
            lo
        } else if lo.is_finite() {
            lo
        } else {
            hi
        };
        if !v.is_finite() {
            return None;
        }
        x[t] = v;
    }
    let obj = lp.objective_value(&x);
    Some((x, obj))
}

/// Exact optimum by enumerating every binary assignment; the (at most one)
/// continuous variable is solved in closed form for each assignment.
pub fn brute_force(lp: &LinearProgram) -> Result<MilpSolution, MilpError> {
    lp.validate()?;
    let bins: Vec<usize> = (0..lp.num_vars()).filter(|&j| lp.binary[j]).collect();
    if bins.len() > BRUTE_FORCE_MAX_BINARIES {
        return Err(MilpError::InstanceTooLarge { binaries: bins.len() });
    }
    let continuous = continuous_var(lp)?;

    // Rows over binaries with nonnegative coefficients can prune partial
    // assignments in the `<=` direction.
    let prunable: Vec<usize> = (0..lp.rows.len())
        .filter(|&i| {
            let r = &lp.rows[i];
            r.sense == Sense::Le && r.coeffs.iter().all(|&(j, v)| lp.binary[j] && v >= 0.0)
        })
        .collect();
    let mut loads = vec![0.0; lp.rows.len()];

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut x = vec![0.0; lp.num_vars()];
    for &j in &bins {
        x[j] = lp.lower[j];
    }
    let mut nodes = 0usize;
    search(lp, &bins, 0, &mut x, continuous, &prunable, &mut loads, &mut best, &mut nodes);

    Ok(match best {
        Some((x, objective)) => MilpSolution { status: MilpStatus::Optimal, x, objective, gap: 0.0, nodes },
        None => MilpSolution { status: MilpStatus::Infeasible, x: Vec::new(), objective: f64::NAN, gap: 0.0, nodes },
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    lp: &LinearProgram,
    bins: &[usize],
    depth: usize,
    x: &mut Vec<f64>,
    continuous: Option<usize>,
    prunable: &[usize],
    loads: &mut [f64],
    best: &mut Option<(Vec<f64>, f64)>,
    nodes: &mut usize,
) {
    if depth == bins.len() {
        *nodes += 1;
        if let Some((cand, obj)) = complete(lp, x.clone(), continuous) {
            if best.as_ref().map_or(true, |(_, b)| obj > *b) {
                *best = Some((cand, obj));
            }
        }
        return;
    }
    let j = bins[depth];
    let (lo, hi) = (lp.lower[j], lp.upper[j]);
    for v in [0.0, 1.0] {
        if v < lo || v > hi {
            continue;
        }
        x[j] = v;
        let mut ok = true;
        if v != 0.0 {
            for &i in prunable {
                let row = &lp.rows[i];
                let add: f64 = row.coeffs.iter().filter(|&&(jj, _)| jj == j).map(|&(_, c)| c).sum();
                loads[i] += add;
                if loads[i] > row.rhs + FEAS_TOL {
                    ok = false;
                }
            }
        }
        if ok {
            search(lp, bins, depth + 1, x, continuous, prunable, loads, best, nodes);
        }
        if v != 0.0 {
            for &i in prunable {
                let row = &lp.rows[i];
                let add: f64 = row.coeffs.iter().filter(|&&(jj, _)| jj == j).map(|&(_, c)| c).sum();
                loads[i] -= add;
            }
        }
        x[j] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_lp, Sense};

    #[test]
    fn no_binaries_matches_lp() {
        let mut lp = LinearProgram::new();
        let t = lp.add_var(1.0, 0.0, 10.0, false);
        lp.add_row(vec![(t, 1.0)], Sense::Le, 3.0);
        let b = brute_force(&lp).unwrap();
        let r = solve_lp(&lp);
        assert_eq!(b.x, r.x);
        assert_eq!(b.objective, r.objective);
    }

    #[test]
    fn one_element_one_user() {
        // max t - 1e-3 b  s.t. t - 0.5 b <= 1
        let mut lp = LinearProgram::new();
        let b = lp.add_binary(-1e-3);
        let t = lp.add_var(1.0, 0.0, 1.5, false);
        lp.add_row(vec![(t, 1.0), (b, -0.5)], Sense::Le, 1.0);
        let s = brute_force(&lp).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert_eq!(s.x[b], 1.0);
        assert!((s.objective - 1.499).abs() < 1e-12);
    }

    #[test]
    fn infeasible() {
        let mut lp = LinearProgram::new();
        let b = lp.add_binary(1.0);
        lp.add_row(vec![(b, 1.0)], Sense::Ge, 2.0);
        assert_eq!(brute_force(&lp).unwrap().status, MilpStatus::Infeasible);
    }

    #[test]
    fn limits() {
        let mut lp = LinearProgram::new();
        for _ in 0..21 {
            lp.add_binary(1.0);
        }
        assert_eq!(brute_force(&lp), Err(MilpError::InstanceTooLarge { binaries: 21 }));
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, 1.0, false);
        lp.add_var(1.0, 0.0, 1.0, false);
        assert_eq!(brute_force(&lp), Err(MilpError::TooManyContinuous));
    }

    #[test]
    fn fixed_binaries_completion() {
        let mut lp = LinearProgram::new();
        let b = lp.add_binary(0.0);
        let t = lp.add_var(1.0, 0.0, 5.0, false);
        lp.add_row(vec![(t, 1.0), (b, -2.0)], Sense::Le, 1.0);
        let (x, obj) = evaluate_fixed_binaries(&lp, &[1.0, 0.0]).unwrap().unwrap();
        assert_eq!(x, vec![1.0, 3.0]);
        assert_eq!(obj, 3.0);
    }
}
