//! Mirror-to-user assignment maximizing the minimum optical SNR.
//!
//! The exact problem is
//!
//! ```text
//! maximize    t - ε·Σ β[l,k,u]
//! subject to  Σ_{l,u} β[l,k,u] <= 1                 for every element k
//!             t - Σ_{l,k} a[l,k,u]·β[l,k,u] <= c[u]  for every active user u
//!             β binary
//! ```
//!
//! [`build_problem`] writes it out verbatim. The solvers work on an
//! equivalent smaller program: for a given element and user only the
//! strongest LED is kept, users that can never be the minimum are left
//! without elements, exclusivity rows are kept only for contested elements
//! and all values are scaled so the largest mirror term is one.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::ChannelCoefficients;
use crate::milp::{solve_milp_with, BranchHooks, LinearProgram, MilpConfig, MilpError, MilpStatus, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TieBreak {
    /// Lowest user index among equal minima; lowest element, then LED,
    /// among equal gains.
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    /// Per-element penalty in the objective, in optical-SNR units.
    pub epsilon: f64,
    pub milp: MilpConfig,
    pub tie_break: TieBreak,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { epsilon: 1e-3, milp: MilpConfig::default(), tie_break: TieBreak::LowestIndex }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), AllocationError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(AllocationError::InvalidEpsilon);
        }
        if self.milp.node_limit == 0 || !(self.milp.gap_tolerance >= 0.0) || !(self.milp.integrality_tolerance >= 0.0) {
            return Err(AllocationError::InvalidSolverConfig);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AllocationError {
    EmptyActiveSet,
    UserOutOfRange(usize),
    InvalidEpsilon,
    InvalidThreshold,
    InvalidSolverConfig,
    NonFiniteCoefficient,
    Solver(MilpError),
    /// The solver finished without any feasible assignment (not expected:
    /// the empty assignment is always feasible).
    NoSolution,
}

impl fmt::Display for AllocationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AllocationError::EmptyActiveSet => f.write_str("active user set is empty"),
            AllocationError::UserOutOfRange(u) => write!(f, "user {u} is out of range"),
            AllocationError::InvalidEpsilon => f.write_str("epsilon must be positive and finite"),
            AllocationError::InvalidThreshold => f.write_str("threshold must be positive and finite"),
            AllocationError::InvalidSolverConfig => f.write_str("invalid solver limits or tolerances"),
            AllocationError::NonFiniteCoefficient => f.write_str("channel coefficients must be finite and nonnegative"),
            AllocationError::Solver(e) => write!(f, "solver: {e}"),
            AllocationError::NoSolution => f.write_str("solver returned no feasible assignment"),
        }
    }
}

impl core::error::Error for AllocationError {}

impl From<MilpError> for AllocationError {
    fn from(e: MilpError) -> Self {
        AllocationError::Solver(e)
    }
}

/// Mirror `element` redirects LED `led` towards `user`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    pub led: usize,
    pub element: usize,
    pub user: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SolveStatus {
    Optimal,
    /// Node budget exhausted in at least one solve; best assignment found.
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Allocation {
    /// Sorted by element.
    pub assignments: Vec<Assignment>,
    /// Minimum `γ'` over the supported users; zero when none is supported.
    pub gamma_prime_min: f64,
    pub per_user_gamma_prime: Vec<f64>,
    pub supported_users: Vec<usize>,
    /// Users removed by the outage-pruning loop, in removal order.
    pub removed_users: Vec<usize>,
    pub oris_used: usize,
    pub status: SolveStatus,
    /// Largest bound gap over the solves (objective units).
    pub gap: f64,
    /// Branch-and-bound nodes over all solves.
    pub nodes: usize,
    /// Number of optimization problems solved.
    pub solves: usize,
}

impl Allocation {
    fn from_assignments(coeffs: &ChannelCoefficients, mut assignments: Vec<Assignment>, supported: Vec<usize>) -> Self {
        assignments.sort_by_key(|a| (a.element, a.led, a.user));
        let mut g = coeffs.c.clone();
        for a in &assignments {
            g[a.user] += coeffs.term(a.led, a.element, a.user);
        }
        let gamma_prime_min = min_over(&g, &supported);
        Self {
            oris_used: assignments.len(),
            assignments,
            gamma_prime_min,
            per_user_gamma_prime: g,
            supported_users: supported,
            removed_users: Vec::new(),
            status: SolveStatus::Optimal,
            gap: 0.0,
            nodes: 0,
            solves: 0,
        }
    }

    /// Whether user `u` meets `gamma_prime_threshold` and is served.
    pub fn user_served(&self, u: usize, gamma_prime_threshold: f64) -> bool {
        self.supported_users.binary_search(&u).is_ok() && self.per_user_gamma_prime[u] >= gamma_prime_threshold
    }

    /// Number of users that are unsupported or below the threshold.
    pub fn outage_count(&self, gamma_prime_threshold: f64) -> usize {
        (0..self.per_user_gamma_prime.len()).filter(|&u| !self.user_served(u, gamma_prime_threshold)).count()
    }

    /// Every element is used at most once.
    pub fn is_exclusive(&self) -> bool {
        self.assignments.windows(2).all(|w| w[0].element != w[1].element)
    }
}

fn min_over(g: &[f64], users: &[usize]) -> f64 {
    if users.is_empty() {
        return 0.0;
    }
    users.iter().map(|&u| g[u]).fold(f64::INFINITY, f64::min)
}

fn check_coeffs(coeffs: &ChannelCoefficients) -> Result<(), AllocationError> {
    let ok = coeffs.c.iter().all(|v| v.is_finite() && *v >= 0.0)
        && coeffs.a.iter().all(|t| t.value.is_finite() && t.value >= 0.0 && (t.user as usize) < coeffs.users());
    if ok {
        Ok(())
    } else {
        Err(AllocationError::NonFiniteCoefficient)
    }
}

fn normalize_users(coeffs: &ChannelCoefficients, active: &[usize]) -> Result<Vec<usize>, AllocationError> {
    let mut users = active.to_vec();
    users.sort_unstable();
    users.dedup();
    if let Some(&u) = users.iter().find(|&&u| u >= coeffs.users()) {
        return Err(AllocationError::UserOutOfRange(u));
    }
    if users.is_empty() {
        return Err(AllocationError::EmptyActiveSet);
    }
    Ok(users)
}

/// The full program over the given active users, with variable `i < n-1`
/// standing for `variables[i]` and the last variable for `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    pub lp: LinearProgram,
    pub variables: Vec<Assignment>,
    pub t: usize,
}

impl AllocationProblem {
    /// Assignments whose variables are one in `x`.
    pub fn decode(&self, x: &[f64]) -> Vec<Assignment> {
        self.variables.iter().zip(x).filter(|(_, v)| **v > 0.5).map(|(a, _)| *a).collect()
    }
}

/// Writes out the exact program: one binary per stored mirror term of an
/// active user, one exclusivity row per element that has a variable and
/// one row per active user.
pub fn build_problem(
    coeffs: &ChannelCoefficients,
    active: &[usize],
    epsilon: f64,
) -> Result<AllocationProblem, AllocationError> {
    check_coeffs(coeffs)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(AllocationError::InvalidEpsilon);
    }
    let users = normalize_users(coeffs, active)?;
    let mut lp = LinearProgram::new();
    let mut variables = Vec::new();
    let mut by_element: Vec<Vec<usize>> = vec![Vec::new(); coeffs.elements];
    let mut user_rows = Vec::with_capacity(users.len());
    let mut t_max = 0.0f64;
    for &u in &users {
        let mut row = Vec::new();
        let mut reach = coeffs.c[u];
        for term in coeffs.terms_of(u) {
            if term.value <= 0.0 {
                continue;
            }
            let j = lp.add_binary(-epsilon);
            variables.push(Assignment { led: term.led as usize, element: term.element as usize, user: u });
            by_element[term.element as usize].push(j);
            row.push((j, -term.value));
            reach += term.value;
        }
        t_max = t_max.max(reach);
        user_rows.push(row);
    }
    let t = lp.add_var(1.0, 0.0, t_max, false);
    for vars in by_element.iter().filter(|v| !v.is_empty()) {
        lp.add_row(vars.iter().map(|&j| (j, 1.0)).collect(), Sense::Le, 1.0);
    }
    for (row, &u) in user_rows.into_iter().zip(&users) {
        let mut coeffs_row = Vec::with_capacity(row.len() + 1);
        coeffs_row.push((t, 1.0));
        coeffs_row.extend(row);
        lp.add_row(coeffs_row, Sense::Le, coeffs.c[u]);
    }
    Ok(AllocationProblem { lp, variables, t })
}

/// No mirrors: every user keeps its constant term.
pub fn no_oris_baseline(coeffs: &ChannelCoefficients) -> Allocation {
    let all: Vec<usize> = (0..coeffs.users()).collect();
    Allocation::from_assignments(coeffs, Vec::new(), all)
}

/// Repeatedly hands the current minimum user its strongest unassigned
/// element until that user has none left.
pub fn greedy_allocate(coeffs: &ChannelCoefficients, active: &[usize]) -> Allocation {
    let mut users = active.to_vec();
    users.sort_unstable();
    users.dedup();
    users.retain(|&u| u < coeffs.users());
    let mut g = coeffs.c.clone();
    let mut taken = vec![false; coeffs.elements];
    let mut lists: Vec<Vec<Assignment>> = users
        .iter()
        .map(|&u| {
            let mut list: Vec<(f64, Assignment)> = coeffs
                .terms_of(u)
                .iter()
                .filter(|t| t.value > 0.0)
                .map(|t| (t.value, Assignment { led: t.led as usize, element: t.element as usize, user: u }))
                .collect();
            list.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1.element, a.1.led).cmp(&(b.1.element, b.1.led))));
            list.into_iter().map(|(_, a)| a).collect()
        })
        .collect();
    let mut next = vec![0usize; users.len()];
    let mut out = Vec::new();
    loop {
        let Some(i) = argmin(users.iter().map(|&u| g[u])) else { break };
        let list = &mut lists[i];
        while next[i] < list.len() && taken[list[next[i]].element] {
            next[i] += 1;
        }
        if next[i] == list.len() {
            break;
        }
        let a = list[next[i]];
        next[i] += 1;
        taken[a.element] = true;
        g[a.user] += coeffs.term(a.led, a.element, a.user);
        out.push(a);
    }
    lists.clear();
    let mut alloc = Allocation::from_assignments(coeffs, out, users);
    alloc.solves = 0;
    alloc
}

/// Index of the smallest value; the first one on ties.
fn argmin(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.map_or(true, |(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    element: usize,
    led: usize,
    gain: f64,
    var: usize,
}

/// Scaled, reduced form of the program for one active set.
struct Reduced {
    /// Original indices of users that receive variables.
    users: Vec<usize>,
    c: Vec<f64>,
    /// Per reduced user, strongest first.
    cands: Vec<Vec<Candidate>>,
    /// Variable -> (reduced user, position in `cands`).
    vars: Vec<(usize, usize)>,
    lp: LinearProgram,
    t: usize,
    scale: f64,
    eps: f64,
    elements: usize,
}

impl Reduced {
    /// `None` when no active user can gain from any element.
    fn new(coeffs: &ChannelCoefficients, active: &[usize], epsilon: f64) -> Option<Self> {
        let mut per_user: Vec<Vec<(usize, usize, f64)>> = Vec::with_capacity(active.len());
        let mut t_ub = f64::INFINITY;
        for &u in active {
            // Terms are sorted by (element, led): keep the first strongest LED.
            let mut best: Vec<(usize, usize, f64)> = Vec::new();
            for t in coeffs.terms_of(u) {
                if !(t.value > 0.0) {
                    continue;
                }
                let (k, l) = (t.element as usize, t.led as usize);
                match best.last_mut() {
                    Some(last) if last.0 == k => {
                        if t.value > last.2 {
                            *last = (k, l, t.value);
                        }
                    }
                    _ => best.push((k, l, t.value)),
                }
            }
            let reach = coeffs.c[u] + best.iter().map(|b| b.2).sum::<f64>();
            t_ub = t_ub.min(reach);
            per_user.push(best);
        }
        let mut users = Vec::new();
        let mut lists = Vec::new();
        for (i, &u) in active.iter().enumerate() {
            if coeffs.c[u] < t_ub && !per_user[i].is_empty() {
                users.push(u);
                lists.push(core::mem::take(&mut per_user[i]));
            }
        }
        let scale = lists.iter().flatten().map(|b| b.2).fold(0.0f64, f64::max);
        if users.is_empty() || !(scale > 0.0) {
            return None;
        }
        let eps = epsilon / scale;
        let mut lp = LinearProgram::new();
        let mut vars = Vec::new();
        let mut cands = Vec::with_capacity(users.len());
        let mut users_of_element: Vec<Vec<usize>> = vec![Vec::new(); coeffs.elements];
        for list in &lists {
            let mut cs: Vec<Candidate> = list
                .iter()
                .map(|&(k, l, a)| {
                    let var = lp.add_binary(-eps);
                    users_of_element[k].push(var);
                    Candidate { element: k, led: l, gain: a / scale, var }
                })
                .collect();
            cs.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.element.cmp(&b.element)));
            cands.push(cs);
        }
        vars.resize(lp.num_vars(), (0, 0));
        for (i, cs) in cands.iter().enumerate() {
            for (p, c) in cs.iter().enumerate() {
                vars[c.var] = (i, p);
            }
        }
        let t = lp.add_var(1.0, 0.0, t_ub / scale, false);
        for vs in users_of_element.iter().filter(|v| v.len() > 1) {
            lp.add_row(vs.iter().map(|&j| (j, 1.0)).collect(), Sense::Le, 1.0);
        }
        let c: Vec<f64> = users.iter().map(|&u| coeffs.c[u] / scale).collect();
        for (i, cs) in cands.iter().enumerate() {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(cs.len() + 1);
            row.push((t, 1.0));
            let mut by_var: Vec<(usize, f64)> = cs.iter().map(|c| (c.var, -c.gain)).collect();
            by_var.sort_by_key(|e| e.0);
            row.extend(by_var);
            lp.add_row(row, Sense::Le, c[i]);
        }
        Some(Self { users, c, cands, vars, lp, t, scale, eps, elements: coeffs.elements })
    }

    /// Objective and feasible point for a set of chosen variables.
    fn point(&self, chosen: &[usize]) -> (f64, Vec<f64>) {
        let mut x = vec![0.0; self.lp.num_vars()];
        let mut g = self.c.clone();
        for &v in chosen {
            x[v] = 1.0;
            let (i, p) = self.vars[v];
            g[i] += self.cands[i][p].gain;
        }
        let t = g.iter().copied().fold(f64::INFINITY, f64::min).min(self.lp.upper[self.t]);
        x[self.t] = t;
        (t - self.eps * chosen.len() as f64, x)
    }

    /// Greedy completion of `chosen` followed by removal of elements that do
    /// not hold up the minimum.
    fn improve(&self, chosen: &mut Vec<usize>) {
        let mut g = self.c.clone();
        let mut taken = vec![false; self.elements];
        for &v in chosen.iter() {
            let (i, p) = self.vars[v];
            g[i] += self.cands[i][p].gain;
            taken[self.cands[i][p].element] = true;
        }
        let mut next = vec![0usize; self.users.len()];
        while let Some(i) = argmin(g.iter().copied()) {
            let cs = &self.cands[i];
            while next[i] < cs.len() && taken[cs[next[i]].element] {
                next[i] += 1;
            }
            if next[i] == cs.len() {
                break;
            }
            let c = cs[next[i]];
            taken[c.element] = true;
            g[i] += c.gain;
            chosen.push(c.var);
        }
        let t = g.iter().copied().fold(f64::INFINITY, f64::min);
        let mut order: Vec<usize> = chosen.clone();
        order.sort_by(|&a, &b| {
            let (ia, pa) = self.vars[a];
            let (ib, pb) = self.vars[b];
            self.cands[ia][pa].gain.total_cmp(&self.cands[ib][pb].gain).then(a.cmp(&b))
        });
        let mut keep = vec![true; self.lp.num_vars()];
        for v in order {
            let (i, p) = self.vars[v];
            let gain = self.cands[i][p].gain;
            if g[i] - gain >= t {
                g[i] -= gain;
                keep[v] = false;
            }
        }
        chosen.retain(|&v| keep[v]);
        chosen.sort_unstable();
    }

    fn from_assignments(&self, assignments: &[Assignment]) -> Vec<usize> {
        let mut used = vec![false; self.elements];
        let mut chosen = Vec::new();
        for a in assignments {
            let Ok(i) = self.users.binary_search(&a.user) else { continue };
            if used[a.element] {
                continue;
            }
            if let Some(c) = self.cands[i].iter().find(|c| c.element == a.element) {
                used[a.element] = true;
                chosen.push(c.var);
            }
        }
        chosen.sort_unstable();
        chosen
    }

    fn decode(&self, x: &[f64]) -> Vec<Assignment> {
        (0..self.vars.len())
            .filter(|&v| x[v] > 0.5)
            .map(|v| {
                let (i, p) = self.vars[v];
                let c = self.cands[i][p];
                Assignment { led: c.led, element: c.element, user: self.users[i] }
            })
            .collect()
    }
}

/// Cardinality bound and rounding heuristic for the reduced program.
struct Hooks<'a> {
    r: &'a Reduced,
}

impl BranchHooks for Hooks<'_> {
    fn node_bound(&mut self, lower: &[f64], upper: &[f64], _incumbent: f64) -> f64 {
        let r = self.r;
        let mut owner = vec![usize::MAX; r.elements];
        let mut fixed_ones = 0usize;
        let mut base = r.c.clone();
        for v in 0..r.vars.len() {
            if lower[v] > 0.5 {
                let (i, p) = r.vars[v];
                let c = r.cands[i][p];
                owner[c.element] = i;
                base[i] += c.gain;
                fixed_ones += 1;
            }
        }
        // Prefix sums of the free gains per user, strongest first.
        let mut prefix: Vec<Vec<f64>> = Vec::with_capacity(r.users.len());
        let mut t_max = upper[r.t];
        for (i, cs) in r.cands.iter().enumerate() {
            let mut acc = base[i];
            let mut pre = vec![acc];
            for c in cs {
                let free = lower[c.var] < 0.5 && upper[c.var] > 0.5 && owner[c.element] == usize::MAX;
                if free {
                    acc += c.gain;
                    pre.push(acc);
                }
            }
            t_max = t_max.min(acc);
            prefix.push(pre);
        }
        let fixed_cost = r.eps * fixed_ones as f64;
        let count = |t: f64| -> usize {
            prefix
                .iter()
                .map(|pre| {
                    // Smallest n with pre[n] >= t.
                    let n = pre.partition_point(|&v| v < t - 1e-12);
                    n.min(pre.len() - 1)
                })
                .sum()
        };
        let mut best = t_max - r.eps * count(t_max) as f64;
        for pre in &prefix {
            for &v in pre {
                if v < t_max {
                    best = best.max(v - r.eps * count(v) as f64);
                }
            }
        }
        best - fixed_cost
    }

    fn heuristic(&mut self, _lp: &LinearProgram, _lower: &[f64], _upper: &[f64], x: &[f64]) -> Option<Vec<f64>> {
        let r = self.r;
        let mut used = vec![false; r.elements];
        let mut chosen = Vec::new();
        for v in 0..r.vars.len() {
            let (i, p) = r.vars[v];
            let k = r.cands[i][p].element;
            if x[v] > 1.0 - 1e-6 && !used[k] {
                used[k] = true;
                chosen.push(v);
            }
        }
        r.improve(&mut chosen);
        Some(r.point(&chosen).1)
    }
}

/// Exact single-shot assignment over `active` users: the max-min program
/// with the element penalty.
pub fn solve_single_shot(
    coeffs: &ChannelCoefficients,
    active: &[usize],
    config: &SolverConfig,
) -> Result<Allocation, AllocationError> {
    solve_with_seed(coeffs, active, config, None)
}

fn solve_with_seed(
    coeffs: &ChannelCoefficients,
    active: &[usize],
    config: &SolverConfig,
    seed: Option<&[Assignment]>,
) -> Result<Allocation, AllocationError> {
    config.validate()?;
    check_coeffs(coeffs)?;
    let users = normalize_users(coeffs, active)?;
    let Some(r) = Reduced::new(coeffs, &users, config.epsilon) else {
        let mut alloc = Allocation::from_assignments(coeffs, Vec::new(), users);
        alloc.solves = 1;
        return Ok(alloc);
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |chosen: &[usize]| {
        let (obj, x) = r.point(chosen);
        if best.as_ref().map_or(true, |b| obj > b.0) {
            best = Some((obj, x));
        }
    };
    let mut fresh = Vec::new();
    r.improve(&mut fresh);
    consider(&fresh);
    if let Some(seed) = seed {
        let mut warm = r.from_assignments(seed);
        consider(&warm);
        r.improve(&mut warm);
        consider(&warm);
    }
    let incumbent = best.map(|b| b.1);
    let mut hooks = Hooks { r: &r };
    let sol = solve_milp_with(&r.lp, &config.milp, incumbent.as_deref(), &mut hooks)?;
    if sol.x.is_empty() {
        return Err(AllocationError::NoSolution);
    }
    let mut alloc = Allocation::from_assignments(coeffs, r.decode(&sol.x), users);
    alloc.status = match sol.status {
        MilpStatus::Optimal => SolveStatus::Optimal,
        _ => SolveStatus::NodeLimit,
    };
    alloc.gap = sol.gap * r.scale;
    alloc.nodes = sol.nodes;
    alloc.solves = 1;
    Ok(alloc)
}

/// Outage pruning: solve, and while the minimum is below
/// `gamma_prime_threshold` drop the minimum user (lowest index on ties)
/// and solve again for the rest.
pub fn algorithm1(
    coeffs: &ChannelCoefficients,
    gamma_prime_threshold: f64,
    config: &SolverConfig,
) -> Result<Allocation, AllocationError> {
    if !(gamma_prime_threshold > 0.0 && gamma_prime_threshold.is_finite()) {
        return Err(AllocationError::InvalidThreshold);
    }
    let chain = algorithm1_chain(coeffs, gamma_prime_threshold, config)?;
    Ok(select_from_chain(&chain, gamma_prime_threshold))
}

/// Every intermediate allocation of the pruning loop run against
/// `max_threshold`; entry `i` is the allocation after `i` removals and the
/// first entry is the single-shot solution. The removal order does not
/// depend on the threshold, so [`select_from_chain`] recovers the result
/// for any threshold up to `max_threshold`.
pub fn algorithm1_chain(
    coeffs: &ChannelCoefficients,
    max_threshold: f64,
    config: &SolverConfig,
) -> Result<Vec<Allocation>, AllocationError> {
    config.validate()?;
    check_coeffs(coeffs)?;
    let mut active: Vec<usize> = (0..coeffs.users()).collect();
    let mut removed = Vec::new();
    let mut chain = Vec::new();
    let mut nodes = 0usize;
    let mut gap = 0.0f64;
    let mut status = SolveStatus::Optimal;
    let mut prev: Option<Allocation> = None;
    loop {
        let mut alloc = if active.is_empty() {
            Allocation::from_assignments(coeffs, Vec::new(), Vec::new())
        } else {
            let seed: Option<Vec<Assignment>> = prev.as_ref().map(|p| p.assignments.clone());
            solve_with_seed(coeffs, &active, config, seed.as_deref())?
        };
        nodes += alloc.nodes;
        gap = gap.max(alloc.gap);
        if alloc.status == SolveStatus::NodeLimit {
            status = SolveStatus::NodeLimit;
        }
        alloc.nodes = nodes;
        alloc.gap = gap;
        alloc.status = status;
        alloc.solves = chain.len() + usize::from(!active.is_empty());
        alloc.removed_users = removed.clone();
        let done = active.is_empty() || alloc.gamma_prime_min >= max_threshold;
        if !done {
            let g = &alloc.per_user_gamma_prime;
            let i = argmin(active.iter().map(|&u| g[u])).expect("active set is nonempty");
            let u = active.remove(i);
            removed.push(u);
        }
        chain.push(alloc.clone());
        if done {
            break;
        }
        let mut next_seed = alloc;
        let last = *removed.last().expect("a user was removed");
        next_seed.assignments.retain(|a| a.user != last);
        prev = Some(next_seed);
    }
    Ok(chain)
}

/// Result of the pruning loop for `gamma_prime_threshold` from a chain.
pub fn select_from_chain(chain: &[Allocation], gamma_prime_threshold: f64) -> Allocation {
    chain
        .iter()
        .find(|a| a.supported_users.is_empty() || a.gamma_prime_min >= gamma_prime_threshold)
        .or(chain.last())
        .cloned()
        .expect("chain is nonempty")
}

/// Minimum `γ'` after removing each assigned element in turn, for checking
/// that every element holds up the minimum.
pub fn removal_sweep(coeffs: &ChannelCoefficients, alloc: &Allocation) -> Vec<f64> {
    (0..alloc.assignments.len())
        .map(|skip| {
            let rest: Vec<Assignment> =
                alloc.assignments.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, a)| *a).collect();
            let mut g = coeffs.c.clone();
            for a in &rest {
                g[a.user] += coeffs.term(a.led, a.element, a.user);
            }
            min_over(&g, &alloc.supported_users)
        })
        .collect()
}

/// Objective `γ'_min - ε·(elements used)` of an allocation.
pub fn penalized_objective(alloc: &Allocation, epsilon: f64) -> f64 {
    alloc.gamma_prime_min - epsilon * alloc.oris_used as f64
}
