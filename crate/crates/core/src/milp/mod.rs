//! Mixed-integer linear programming: problem description, LP relaxation,
//! branch-and-bound over binary variables and an enumeration oracle.
//!
//! Problems are always maximized. Every variable needs at least one finite
//! bound; binary variables must have bounds inside `[0, 1]`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::math;

mod bnb;
mod brute;
mod simplex;

pub use bnb::{solve_milp, solve_milp_with, BranchHooks, MilpConfig, NoHooks};
pub use brute::{brute_force, evaluate_fixed_binaries, BRUTE_FORCE_MAX_BINARIES};
pub use simplex::solve_lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// A sparse constraint row `Σ coeff·x  sense  rhs`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective·x` subject to rows and variable bounds.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary: Vec<bool>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MilpError {
    DimensionMismatch,
    InvalidBounds(usize),
    InvalidCoefficient {
        row: usize,
    },
    /// Too many binaries for exhaustive enumeration.
    InstanceTooLarge {
        binaries: usize,
    },
    /// Enumeration supports at most one continuous variable.
    TooManyContinuous,
}

impl fmt::Display for MilpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MilpError::DimensionMismatch => f.write_str("objective, bounds and binary flags differ in length"),
            MilpError::InvalidBounds(j) => write!(f, "variable {j} has invalid bounds"),
            MilpError::InvalidCoefficient { row } => write!(f, "row {row} has an invalid coefficient"),
            MilpError::InstanceTooLarge { binaries } => {
                write!(f, "{binaries} binaries exceed the enumeration limit of {BRUTE_FORCE_MAX_BINARIES}")
            }
            MilpError::TooManyContinuous => f.write_str("enumeration needs at most one continuous variable"),
        }
    }
}

impl core::error::Error for MilpError {}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.binary.iter().filter(|b| **b).count()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, objective: f64, lower: f64, upper: f64, binary: bool) -> usize {
        self.objective.push(objective);
        self.lower.push(lower);
        self.upper.push(upper);
        self.binary.push(binary);
        self.objective.len() - 1
    }

    pub fn add_binary(&mut self, objective: f64) -> usize {
        self.add_var(objective, 0.0, 1.0, true)
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n || self.binary.len() != n {
            return Err(MilpError::DimensionMismatch);
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let ok = !lo.is_nan()
                && !hi.is_nan()
                && lo <= hi
                && (lo.is_finite() || hi.is_finite())
                && lo != f64::INFINITY
                && hi != f64::NEG_INFINITY
                && self.objective[j].is_finite()
                && (!self.binary[j] || (lo >= 0.0 && hi <= 1.0));
            if !ok {
                return Err(MilpError::InvalidBounds(j));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() || row.coeffs.iter().any(|&(j, v)| j >= n || !v.is_finite()) {
                return Err(MilpError::InvalidCoefficient { row: i });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, v)| v * x[j]).sum();
            let v = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => math::abs(lhs - row.rhs),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Whether `x` satisfies every row and bound within `tol` and has
    /// binary variables within `tol` of 0 or 1.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && self.max_violation(x) <= tol
            && self.binary.iter().zip(x).all(|(b, v)| !*b || math::abs(*v) <= tol || math::abs(v - 1.0) <= tol)
    }

    /// Writes the problem in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let name = |j: usize| alloc::format!("x{j}");
        let term = |out: &mut String, first: bool, v: f64, j: usize| {
            if first {
                let _ = write!(out, " {v:?} {}", name(j));
            } else if v < 0.0 {
                let _ = write!(out, " - {:?} {}", -v, name(j));
            } else {
                let _ = write!(out, " + {v:?} {}", name(j));
            }
        };
        out.push_str("\\ written by oris-core\nMaximize\n obj:");
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut out, first, c, j);
                first = false;
            }
        }
        if first {
            out.push_str(" 0 x0");
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{i}:");
            let mut first = true;
            for &(j, v) in &row.coeffs {
                if v != 0.0 {
                    term(&mut out, first, v, j);
                    first = false;
                }
            }
            if first {
                out.push_str(" 0 x0");
            }
            let _ = writeln!(out, " {} {:?}", row.sense.symbol(), row.rhs);
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => {
                    let _ = writeln!(out, " {lo:?} <= {} <= {hi:?}", name(j));
                }
                (true, false) => {
                    let _ = writeln!(out, " {} >= {lo:?}", name(j));
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {} <= {hi:?}", name(j));
                }
                (false, false) => {
                    let _ = writeln!(out, " {} free", name(j));
                }
            }
        }
        let bins: Vec<usize> = (0..self.num_vars()).filter(|&j| self.binary[j]).collect();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for j in bins {
                let _ = writeln!(out, " {}", name(j));
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The simplex stopped without reaching optimality (numerical trouble).
    IterationLimit,
}

impl LpStatus {
    pub fn is_optimal(self) -> bool {
        self == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    /// Node budget exhausted; the solution is the best incumbent found.
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Best remaining upper bound minus the incumbent objective.
    pub gap: f64,
    pub nodes: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validation() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 10.0, false);
        lp.add_row(vec![(x, 1.0)], Sense::Le, 3.0);
        assert!(lp.validate().is_ok());
        lp.lower[0] = 11.0;
        assert_eq!(lp.validate(), Err(MilpError::InvalidBounds(0)));
        lp.lower[0] = f64::NEG_INFINITY;
        lp.upper[0] = f64::INFINITY;
        assert!(lp.validate().is_err());
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, 2.0, true);
        assert!(lp.validate().is_err());
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, 1.0, false);
        lp.add_row(vec![(3, 1.0)], Sense::Le, 1.0);
        assert!(lp.validate().is_err());
    }

    #[test]
    fn lp_text_format() {
        let mut lp = LinearProgram::new();
        let b = lp.add_binary(-0.001);
        let t = lp.add_var(1.0, 0.0, 5.0, false);
        lp.add_row(vec![(t, 1.0), (b, -0.5)], Sense::Le, 1.0);
        let text = lp.to_lp_format();
        assert!(text.contains("Maximize\n obj: -0.001 x0 + 1.0 x1"));
        assert!(text.contains(" r0: 1.0 x1 - 0.5 x0 <= 1.0"));
        assert!(text.contains("Binaries\n x0\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn feasibility_check() {
        let mut lp = LinearProgram::new();
        let a = lp.add_binary(1.0);
        let b = lp.add_binary(1.0);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Sense::Le, 1.0);
        assert!(lp.is_feasible(&[1.0, 0.0], 1e-9));
        assert!(!lp.is_feasible(&[1.0, 1.0], 1e-9));
        assert!(!lp.is_feasible(&[0.5, 0.0], 1e-9));
    }
}
