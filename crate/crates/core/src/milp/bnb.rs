//! Best-first branch-and-bound over binary variables.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::simplex::{Basis, Engine, Outcome};
use super::{LinearProgram, MilpError, MilpSolution, MilpStatus};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MilpConfig {
    /// Maximum number of evaluated nodes (the root counts as one).
    pub node_limit: usize,
    /// Relative optimality gap: nodes whose bound does not exceed
    /// `incumbent + gap_tolerance·(1 + |incumbent|)` are pruned.
    pub gap_tolerance: f64,
    /// Distance from 0 or 1 below which a binary counts as integral.
    pub integrality_tolerance: f64,
}

impl Default for MilpConfig {
    fn default() -> Self {
        Self { node_limit: 100_000, gap_tolerance: 1e-9, integrality_tolerance: 1e-9 }
    }
}

/// Problem-specific callbacks for the search.
pub trait BranchHooks {
    /// Upper bound on the objective of any completion of a node with the
    /// given variable bounds. Called before the node LP is solved.
    fn node_bound(&mut self, _lower: &[f64], _upper: &[f64], _incumbent: f64) -> f64 {
        f64::INFINITY
    }

    /// A feasible point derived from the LP solution of a node, if any.
    fn heuristic(&mut self, _lp: &LinearProgram, _lower: &[f64], _upper: &[f64], _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoHooks;

impl BranchHooks for NoHooks {}

struct Node {
    bound: f64,
    depth: u32,
    id: u64,
    parent: u64,
    fixings: Rc<Vec<(u32, bool)>>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: larger bound first, then deeper, then older.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(self.depth.cmp(&other.depth)).then(other.id.cmp(&self.id))
    }
}

/// Solves with no hooks; see [`solve_milp_with`].
pub fn solve_milp(
    lp: &LinearProgram,
    config: &MilpConfig,
    incumbent: Option<&[f64]>,
) -> Result<MilpSolution, MilpError> {
    solve_milp_with(lp, config, incumbent, &mut NoHooks)
}

/// Maximizes `lp` with binary variables enforced. A feasible `incumbent`
/// seeds the search; infeasible seeds are ignored.
pub fn solve_milp_with(
    lp: &LinearProgram,
    config: &MilpConfig,
    incumbent: Option<&[f64]>,
    hooks: &mut dyn BranchHooks,
) -> Result<MilpSolution, MilpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let tol = config.integrality_tolerance;
    let mut best_x: Option<Vec<f64>> = None;
    let mut best_obj = f64::NEG_INFINITY;
    let offer = |x: &[f64], best_x: &mut Option<Vec<f64>>, best_obj: &mut f64| {
        let x = snap_binaries(lp, x, tol);
        if lp.is_feasible(&x, 1e-9) {
            let obj = lp.objective_value(&x);
            if obj > *best_obj {
                *best_obj = obj;
                *best_x = Some(x);
            }
        }
    };
    if let Some(x) = incumbent {
        if x.len() == n {
            offer(x, &mut best_x, &mut best_obj);
        }
    }
    let prune_level = |inc: f64| {
        if inc.is_finite() {
            inc + config.gap_tolerance * (1.0 + math::abs(inc))
        } else {
            inc
        }
    };

    let mut engine = Engine::new(lp);
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::INFINITY,
        depth: 0,
        id: 0,
        parent: u64::MAX,
        fixings: Rc::new(Vec::new()),
        basis: None,
    });
    let mut next_id = 1u64;
    let mut nodes = 0usize;
    let mut last_solved: Option<(u64, u64)> = None;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    // Bound left behind by nodes that could not be processed reliably.
    let mut lost_bound = f64::NEG_INFINITY;

    while let Some(node) = heap.pop() {
        if node.bound <= prune_level(best_obj) {
            continue;
        }
        if nodes >= config.node_limit {
            heap.push(node);
            break;
        }
        nodes += 1;

        lower.copy_from_slice(&lp.lower);
        upper.copy_from_slice(&lp.upper);
        for &(j, v) in node.fixings.iter() {
            let v = if v { 1.0 } else { 0.0 };
            lower[j as usize] = v;
            upper[j as usize] = v;
        }
        let hook_bound = hooks.node_bound(&lower, &upper, best_obj);
        if hook_bound <= prune_level(best_obj) {
            continue;
        }
        for j in 0..n {
            if lp.binary[j] && engine.bounds(j) != (lower[j], upper[j]) {
                engine.set_bounds(j, lower[j], upper[j]);
            }
        }
        let related = match last_solved {
            Some((id, parent)) => node.parent == id || node.parent == parent,
            None => true,
        };
        if !related {
            if let Some(b) = &node.basis {
                engine.load_basis(b);
            }
        }
        let outcome = engine.solve_warm();
        last_solved = Some((node.id, node.parent));
        let x = engine.structural_values();
        let (lp_bound, x) = match outcome {
            Outcome::Optimal => (lp.objective_value(&x), Some(x)),
            Outcome::Infeasible => continue,
            Outcome::Unbounded => (f64::INFINITY, Some(x)),
            Outcome::IterationLimit => {
                let retry = engine.solve_cold();
                let x = engine.structural_values();
                if retry == Outcome::Optimal {
                    (lp.objective_value(&x), Some(x))
                } else if retry == Outcome::Infeasible {
                    continue;
                } else {
                    (f64::INFINITY, None)
                }
            }
        };
        let bound = lp_bound.min(hook_bound).min(node.bound);
        if bound <= prune_level(best_obj) {
            continue;
        }

        let branch_var = match &x {
            Some(x) => {
                if let Some(h) = hooks.heuristic(lp, &lower, &upper, x) {
                    offer(&h, &mut best_x, &mut best_obj);
                }
                match most_fractional(lp, x, tol) {
                    None => {
                        offer(x, &mut best_x, &mut best_obj);
                        continue;
                    }
                    Some(j) => j,
                }
            }
            None => match (0..n).find(|&j| lp.binary[j] && lower[j] != upper[j]) {
                Some(j) => j,
                None => {
                    lost_bound = lost_bound.max(bound);
                    continue;
                }
            },
        };
        let up_first = x.as_ref().map_or(true, |x| x[branch_var] >= 0.5);
        let basis = Rc::new(engine.save_basis());
        for value in if up_first { [true, false] } else { [false, true] } {
            let mut fixings = Vec::with_capacity(node.fixings.len() + 1);
            fixings.extend_from_slice(&node.fixings);
            fixings.push((branch_var as u32, value));
            heap.push(Node {
                bound,
                depth: node.depth + 1,
                id: next_id,
                parent: node.id,
                fixings: Rc::new(fixings),
                basis: Some(Rc::clone(&basis)),
            });
            next_id += 1;
        }
    }

    let open_bound =
        heap.iter().filter(|nd| nd.bound > prune_level(best_obj)).map(|nd| nd.bound).fold(lost_bound, f64::max);
    match best_x {
        None => {
            if open_bound == f64::NEG_INFINITY {
                Ok(MilpSolution { status: MilpStatus::Infeasible, x: Vec::new(), objective: f64::NAN, gap: 0.0, nodes })
            } else {
                Ok(MilpSolution {
                    status: MilpStatus::NodeLimit,
                    x: Vec::new(),
                    objective: f64::NAN,
                    gap: f64::INFINITY,
                    nodes,
                })
            }
        }
        Some(x) => {
            let (status, gap) = if open_bound == f64::NEG_INFINITY {
                (MilpStatus::Optimal, 0.0)
            } else {
                (MilpStatus::NodeLimit, open_bound - best_obj)
            };
            Ok(MilpSolution { status, x, objective: best_obj, gap, nodes })
        }
    }
}

fn most_fractional(lp: &LinearProgram, x: &[f64], tol: f64) -> Option<usize> {
    let mut best = None;
    let mut best_frac = tol;
    for (j, &v) in x.iter().enumerate() {
        if !lp.binary[j] {
            continue;
        }
        let frac = (v - math::floor(v)).min(math::floor(v) + 1.0 - v);
        if frac > best_frac {
            best_frac = frac;
            best = Some(j);
        }
    }
    best
}

fn snap_binaries(lp: &LinearProgram, x: &[f64], tol: f64) -> Vec<f64> {
    x.iter()
        .zip(&lp.binary)
        .map(|(&v, &b)| {
            if b && math::abs(v) <= tol {
                0.0
            } else if b && math::abs(v - 1.0) <= tol {
                1.0
            } else {
                v
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_lp, Sense};
    use alloc::vec;

    #[test]
    fn integral_relaxation_single_node() {
        let mut lp = LinearProgram::new();
        let _b = lp.add_binary(1.0);
        let t = lp.add_var(1.0, 0.0, 5.0, false);
        lp.add_row(vec![(t, 1.0)], Sense::Le, 2.0);
        let s = solve_milp(&lp, &MilpConfig::default(), None).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert_eq!(s.nodes, 1);
        assert_eq!(s.x, vec![1.0, 2.0]);
        assert!(solve_lp(&lp).status.is_optimal());
    }

    #[test]
    fn exclusive_pair() {
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(1.0);
        let b = lp.add_binary(1.0);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Sense::Le, 1.0);
        let s = solve_milp(&lp, &MilpConfig::default(), None).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert_eq!(s.x[a] + s.x[b], 1.0);
    }

    #[test]
    fn fractional_relaxation_needs_branching() {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 4, 4a + b + 2c <= 5 (binaries)
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(5.0);
        let b = lp.add_binary(4.0);
        let c = lp.add_binary(3.0);
        lp.add_row(vec![(a, 2.0), (b, 3.0), (c, 1.0)], Sense::Le, 4.0);
        lp.add_row(vec![(a, 4.0), (b, 1.0), (c, 2.0)], Sense::Le, 5.0);
        let s = solve_milp(&lp, &MilpConfig::default(), None).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        // Candidates: {a,c}: 2+1<=4, 4+2>5 no; {a,b}: 5>4 no; {b,c}: 4<=4, 3<=5 -> 7; {a}: 5.
        assert!((s.objective - 7.0).abs() < 1e-12);
        assert!(lp.is_feasible(&s.x, 1e-9));
    }

    #[test]
    fn infeasible_problem() {
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(1.0);
        lp.add_row(vec![(a, 2.0)], Sense::Eq, 1.0);
        let s = solve_milp(&lp, &MilpConfig::default(), None).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_gap() {
        let mut lp = LinearProgram::new();
        let vars: Vec<usize> = (0..12).map(|i| lp.add_binary(1.0 + 0.01 * i as f64)).collect();
        lp.add_row(vars.iter().map(|&j| (j, 2.0)).collect(), Sense::Le, 11.0);
        let cfg = MilpConfig { node_limit: 1, ..MilpConfig::default() };
        let s = solve_milp(&lp, &cfg, None).unwrap();
        assert_eq!(s.nodes, 1);
        assert_eq!(s.status, MilpStatus::NodeLimit);
        let full = solve_milp(&lp, &MilpConfig::default(), None).unwrap();
        assert_eq!(full.status, MilpStatus::Optimal);
        assert!(full.x.iter().sum::<f64>() == 5.0);
    }

    #[test]
    fn seed_incumbent_is_kept_when_optimal() {
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(1.0);
        let b = lp.add_binary(1.0);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Sense::Le, 1.0);
        let s = solve_milp(&lp, &MilpConfig::default(), Some(&[0.0, 1.0])).unwrap();
        assert_eq!(s.x, vec![0.0, 1.0]);
        assert_eq!(s.status, MilpStatus::Optimal);
    }
}
