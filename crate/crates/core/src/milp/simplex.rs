//! Bounded-variable revised simplex with an explicit dense basis inverse.
//!
//! Columns are structural variables, then one slack per row, then one
//! artificial per row. Slack bounds encode the row sense (`<=`: `[0, ∞)`,
//! `>=`: `(-∞, 0]`, `=`: `[0, 0]`). Artificials are only opened in phase one
//! for rows the starting point violates; afterwards they are fixed at zero.
//! Internally the engine minimizes `-objective`.

use alloc::vec;
use alloc::vec::Vec;

use super::{LinearProgram, LpSolution, LpStatus, Sense};
use crate::math;

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFRESH_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl From<Outcome> for LpStatus {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterationLimit => LpStatus::IterationLimit,
        }
    }
}

/// Compact snapshot of a basis that can be reloaded under other bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Basis {
    basic: Vec<u32>,
    at_upper: Vec<bool>,
}

/// The basis is kept in factored form. Rows whose slack or artificial is
/// basic contribute unit columns; only the kernel `M = A[T, K]` (structural
/// basic columns `K` against the remaining rows `T`) is inverted densely.
/// Kernel position `p` pairs column `kcols[p]` with row `trows[p]`, which
/// is the row position that column occupies in `head`.
pub(crate) struct Engine {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Phase-two costs (minimization).
    cost2: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    head: Vec<usize>,
    trows: Vec<usize>,
    kcols: Vec<usize>,
    /// Kernel position of each row, `NONE` outside `T`.
    tpos: Vec<usize>,
    /// `M⁻¹`, indexed `[kernel column][kernel row]`.
    kinv: Vec<Vec<f64>>,
    d: Vec<f64>,
    since_refresh: usize,
    pub iterations: usize,
    b_scale: f64,
}

const NONE: usize = usize::MAX;

impl Engine {
    pub fn new(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars();
        let total = n + 2 * m;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                if v != 0.0 {
                    match cols[j].last_mut() {
                        Some(last) if last.0 == i => last.1 += v,
                        _ => cols[j].push((i, v)),
                    }
                }
            }
        }
        for col in cols.iter_mut().take(n) {
            col.retain(|e| e.1 != 0.0);
        }
        let mut lo = Vec::with_capacity(total);
        let mut hi = Vec::with_capacity(total);
        lo.extend_from_slice(&lp.lower);
        hi.extend_from_slice(&lp.upper);
        for (i, row) in lp.rows.iter().enumerate() {
            cols[n + i].push((i, 1.0));
            let (l, h) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
        }
        for i in 0..m {
            cols[n + m + i].push((i, 1.0));
            lo.push(0.0);
            hi.push(0.0);
        }
        let mut cost2 = vec![0.0; total];
        for j in 0..n {
            cost2[j] = -lp.objective[j];
        }
        let b: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        let b_scale = 1.0 + b.iter().fold(0.0f64, |a, v| a.max(math::abs(*v)));
        let mut e = Self {
            m,
            n,
            cols,
            b,
            lo,
            hi,
            cost: cost2.clone(),
            cost2,
            x: vec![0.0; total],
            status: vec![Status::Lower; total],
            head: vec![0; m],
            trows: Vec::new(),
            kcols: Vec::new(),
            tpos: vec![NONE; m],
            kinv: Vec::new(),
            d: vec![0.0; total],
            since_refresh: 0,
            iterations: 0,
            b_scale,
        };
        e.cold_start();
        e
    }

    fn total(&self) -> usize {
        self.n + 2 * self.m
    }

    fn art(&self, i: usize) -> usize {
        self.n + self.m + i
    }

    fn unit_row(&self, j: usize) -> usize {
        if j < self.n + self.m {
            j - self.n
        } else {
            j - self.n - self.m
        }
    }

    /// Sign of the unit column `j` (slack or artificial).
    fn unit_sign(&self, j: usize) -> f64 {
        self.cols[j][0].1
    }

    fn coef(&self, i: usize, j: usize) -> f64 {
        let col = &self.cols[j];
        col.binary_search_by(|e| e.0.cmp(&i)).map_or(0.0, |p| col[p].1)
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.m + self.n) + 1000
    }

    fn clear_kernel(&mut self) {
        for &i in &self.trows {
            self.tpos[i] = NONE;
        }
        self.trows.clear();
        self.kcols.clear();
        self.kinv.clear();
    }

    /// Slack basis with structurals at a finite bound; opens artificials for
    /// violated rows and selects phase-one costs if any were opened.
    fn cold_start(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n {
            if self.lo[j].is_finite() {
                self.x[j] = self.lo[j];
                self.status[j] = Status::Lower;
            } else {
                self.x[j] = self.hi[j];
                self.status[j] = Status::Upper;
            }
        }
        let mut residual = self.b.clone();
        for j in 0..n {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, v) in &self.cols[j] {
                    residual[i] -= v * xj;
                }
            }
        }
        self.clear_kernel();
        let mut phase_one = false;
        for i in 0..m {
            let s = n + i;
            let a = self.art(i);
            self.lo[a] = 0.0;
            self.hi[a] = 0.0;
            self.x[a] = 0.0;
            self.status[a] = Status::Lower;
            let r = residual[i];
            if r >= self.lo[s] - FEAS_TOL && r <= self.hi[s] + FEAS_TOL {
                self.status[s] = Status::Basic;
                self.x[s] = r;
                self.head[i] = s;
                self.cols[a][0].1 = 1.0;
            } else {
                let (bound, st) =
                    if r < self.lo[s] { (self.lo[s], Status::Lower) } else { (self.hi[s], Status::Upper) };
                self.status[s] = st;
                self.x[s] = bound;
                let e = r - bound;
                self.cols[a][0].1 = if e >= 0.0 { 1.0 } else { -1.0 };
                self.hi[a] = f64::INFINITY;
                self.status[a] = Status::Basic;
                self.x[a] = math::abs(e);
                self.head[i] = a;
                phase_one = true;
            }
        }
        if phase_one {
            self.cost = vec![0.0; self.total()];
            for i in 0..m {
                let a = self.art(i);
                if self.hi[a] > 0.0 {
                    self.cost[a] = 1.0;
                }
            }
        } else {
            self.cost.clone_from(&self.cost2);
        }
        self.compute_duals();
        self.since_refresh = 0;
    }

    fn in_phase_one(&self) -> bool {
        (0..self.m).any(|i| self.hi[self.art(i)] > 0.0)
    }

    /// Ends phase one: fixes every artificial at zero and restores costs.
    fn close_phase_one(&mut self) {
        for i in 0..self.m {
            let a = self.art(i);
            self.hi[a] = 0.0;
            if self.status[a] != Status::Basic {
                self.status[a] = Status::Lower;
                self.x[a] = 0.0;
            }
        }
        self.cost.clone_from(&self.cost2);
        self.compute_primal();
        self.compute_duals();
    }

    /// Solves from the slack basis.
    pub fn solve_cold(&mut self) -> Outcome {
        self.cold_start();
        if self.in_phase_one() {
            match self.primal() {
                Outcome::Optimal => {}
                other => return other,
            }
            let infeasibility: f64 = (0..self.m).map(|i| self.x[self.art(i)]).sum();
            if infeasibility > FEAS_TOL * self.b_scale {
                return Outcome::Infeasible;
            }
            self.close_phase_one();
        }
        self.primal()
    }

    /// Re-optimizes after bound changes: dual simplex for the bound
    /// violations, then primal simplex for any remaining dual infeasibility.
    pub fn solve_warm(&mut self) -> Outcome {
        if self.in_phase_one() {
            return self.solve_cold();
        }
        match self.dual() {
            Outcome::Optimal => {}
            Outcome::Infeasible => return Outcome::Infeasible,
            _ => return self.solve_cold(),
        }
        match self.primal() {
            Outcome::Optimal => Outcome::Optimal,
            Outcome::Unbounded => Outcome::Unbounded,
            _ => self.solve_cold(),
        }
    }

    /// Changes the bounds of a structural variable. Nonbasic variables move
    /// to the corresponding bound; basic values are left for the next solve.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.status[j] == Status::Basic {
            return;
        }
        let (st, v) = if self.status[j] == Status::Upper && hi.is_finite() && lo < hi {
            (Status::Upper, hi)
        } else if lo.is_finite() {
            (Status::Lower, lo)
        } else {
            (Status::Upper, hi)
        };
        let delta = v - self.x[j];
        self.status[j] = st;
        self.x[j] = v;
        if delta != 0.0 {
            let w = self.ftran(j);
            for r in 0..self.m {
                if w[r] != 0.0 {
                    let h = self.head[r];
                    self.x[h] -= w[r] * delta;
                }
            }
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    pub fn save_basis(&self) -> Basis {
        Basis {
            basic: self.head.iter().map(|&h| h as u32).collect(),
            at_upper: self.status.iter().map(|s| *s == Status::Upper).collect(),
        }
    }

    /// Loads a saved basis under the current bounds. Returns `false` (and
    /// leaves a cold start in place) when the basis cannot be factored.
    pub fn load_basis(&mut self, basis: &Basis) -> bool {
        if self.in_phase_one() {
            self.close_phase_one();
        }
        for j in 0..self.total() {
            let upper = basis.at_upper[j] && self.hi[j].is_finite() && self.lo[j] < self.hi[j];
            self.status[j] = if upper || !self.lo[j].is_finite() { Status::Upper } else { Status::Lower };
        }
        for (r, &h) in basis.basic.iter().enumerate() {
            self.head[r] = h as usize;
            self.status[h as usize] = Status::Basic;
        }
        for j in 0..self.total() {
            match self.status[j] {
                Status::Lower => self.x[j] = self.lo[j],
                Status::Upper => self.x[j] = self.hi[j],
                Status::Basic => {}
            }
        }
        if !self.reinvert() {
            self.cold_start();
            return false;
        }
        self.cost.clone_from(&self.cost2);
        self.compute_primal();
        self.compute_duals();
        self.since_refresh = 0;
        true
    }

    /// Current minimization objective with phase-two costs.
    #[cfg(test)]
    pub fn min_objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost2[j] * self.x[j]).sum()
    }

    pub fn structural_values(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    /// `Σ_p A[i, kcols[p]]·v[p]` for every row `i`, as a dense vector.
    fn kernel_combination(&self, v: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.m];
        for (p, &j) in self.kcols.iter().enumerate() {
            if v[p] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    acc[i] += a * v[p];
                }
            }
        }
        acc
    }

    /// Solves `B w = rhs` for a dense row-indexed right-hand side; the
    /// result is indexed by row position.
    fn solve_dense(&self, rhs: &[f64]) -> Vec<f64> {
        let r = self.kcols.len();
        let mut w = vec![0.0; self.m];
        let mut wk = vec![0.0; r];
        for (p, row) in self.kinv.iter().enumerate() {
            let mut s = 0.0;
            for (q, &t) in self.trows.iter().enumerate() {
                let v = rhs[t];
                if v != 0.0 {
                    s += row[q] * v;
                }
            }
            wk[p] = s;
        }
        let acc = self.kernel_combination(&wk);
        for i in 0..self.m {
            if self.tpos[i] == NONE {
                w[i] = (rhs[i] - acc[i]) / self.unit_sign(self.head[i]);
            }
        }
        for (p, &t) in self.trows.iter().enumerate() {
            w[t] = wk[p];
        }
        w
    }

    /// `B⁻¹ a_j` indexed by row position.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut rhs = vec![0.0; self.m];
        for &(i, v) in &self.cols[j] {
            rhs[i] += v;
        }
        self.solve_dense(&rhs)
    }

    /// Row `r` of `B⁻¹` as a dense row-indexed vector.
    fn btran_row(&self, r: usize) -> Vec<f64> {
        let mut rho = vec![0.0; self.m];
        match self.tpos[r] {
            NONE => {
                let sigma = self.unit_sign(self.head[r]);
                // -(A[r, K] M⁻¹) / σ on kernel rows, 1/σ at r.
                let v: Vec<f64> = self.kcols.iter().map(|&j| self.coef(r, j)).collect();
                for (q, &t) in self.trows.iter().enumerate() {
                    let mut s = 0.0;
                    for (p, &vp) in v.iter().enumerate() {
                        if vp != 0.0 {
                            s += vp * self.kinv[p][q];
                        }
                    }
                    rho[t] = -s / sigma;
                }
                rho[r] = 1.0 / sigma;
            }
            p => {
                for (q, &t) in self.trows.iter().enumerate() {
                    rho[t] = self.kinv[p][q];
                }
            }
        }
        rho
    }

    fn row_dot(&self, rho: &[f64], j: usize) -> f64 {
        self.cols[j].iter().map(|&(i, v)| rho[i] * v).sum()
    }

    fn compute_primal(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.total() {
            if self.status[j] != Status::Basic {
                let xj = self.x[j];
                if xj != 0.0 {
                    for &(i, v) in &self.cols[j] {
                        rhs[i] -= v * xj;
                    }
                }
            }
        }
        let w = self.solve_dense(&rhs);
        for (r, &v) in w.iter().enumerate() {
            let h = self.head[r];
            self.x[h] = v;
        }
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            if self.tpos[i] == NONE {
                let h = self.head[i];
                y[i] = self.cost[h] / self.unit_sign(h);
            }
        }
        // y_T = (c_K - y_N A[N, K]) M⁻¹
        let g: Vec<f64> = self
            .kcols
            .iter()
            .map(|&j| {
                let mut s = self.cost[j];
                for &(i, v) in &self.cols[j] {
                    if self.tpos[i] == NONE {
                        s -= y[i] * v;
                    }
                }
                s
            })
            .collect();
        for (q, &t) in self.trows.iter().enumerate() {
            let mut s = 0.0;
            for (p, &gp) in g.iter().enumerate() {
                if gp != 0.0 {
                    s += gp * self.kinv[p][q];
                }
            }
            y[t] = s;
        }
        for j in 0..self.total() {
            self.d[j] = if self.status[j] == Status::Basic { 0.0 } else { self.cost[j] - self.row_dot(&y, j) };
        }
    }

    fn primal_residual(&self) -> f64 {
        let mut r = self.b.clone();
        for j in 0..self.total() {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, v) in &self.cols[j] {
                    r[i] -= v * xj;
                }
            }
        }
        r.iter().fold(0.0f64, |a, v| a.max(math::abs(*v)))
    }

    /// Recomputes values and reduced costs, refactoring the kernel when the
    /// updated inverse has drifted.
    fn refresh(&mut self) {
        self.compute_primal();
        if self.primal_residual() > 1e-9 * self.b_scale {
            if !self.reinvert() {
                self.cold_start();
                return;
            }
            self.compute_primal();
        }
        self.compute_duals();
        self.since_refresh = 0;
    }

    /// Refactors the kernel from the set of basic columns in `head`.
    fn reinvert(&mut self) -> bool {
        let (n, m) = (self.n, self.m);
        let mut unit_of_row = vec![NONE; m];
        let mut structural = Vec::new();
        for &h in &self.head {
            if h < n {
                structural.push(h);
            } else {
                let i = self.unit_row(h);
                if unit_of_row[i] != NONE {
                    return false;
                }
                unit_of_row[i] = h;
            }
        }
        structural.sort_unstable();
        let trows: Vec<usize> = (0..m).filter(|&i| unit_of_row[i] == NONE).collect();
        if trows.len() != structural.len() {
            return false;
        }
        let r = trows.len();
        // Gauss-Jordan on [M | I] with partial pivoting; M is [T][K].
        let mut a: Vec<Vec<f64>> =
            trows.iter().map(|&t| structural.iter().map(|&j| self.coef(t, j)).collect()).collect();
        let mut inv: Vec<Vec<f64>> = (0..r).map(|i| (0..r).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect();
        for c in 0..r {
            let mut piv = c;
            for i in c + 1..r {
                if math::abs(a[i][c]) > math::abs(a[piv][c]) {
                    piv = i;
                }
            }
            if math::abs(a[piv][c]) < 1e-11 {
                return false;
            }
            a.swap(c, piv);
            inv.swap(c, piv);
            let p = a[c][c];
            for k in 0..r {
                a[c][k] /= p;
                inv[c][k] /= p;
            }
            for i in 0..r {
                if i != c {
                    let f = a[i][c];
                    if f != 0.0 {
                        for k in 0..r {
                            a[i][k] -= f * a[c][k];
                            inv[i][k] -= f * inv[c][k];
                        }
                    }
                }
            }
        }
        // `inv` now holds M⁻¹ with rows indexed by K and columns by T.
        self.clear_kernel();
        for (p, &t) in trows.iter().enumerate() {
            self.tpos[t] = p;
        }
        self.trows = trows;
        self.kcols = structural;
        self.kinv = inv;
        for i in 0..m {
            if unit_of_row[i] != NONE {
                self.head[i] = unit_of_row[i];
            }
        }
        self.sync_head();
        for &h in &self.head {
            self.status[h] = Status::Basic;
        }
        true
    }

    fn sync_head(&mut self) {
        for (p, &t) in self.trows.iter().enumerate() {
            self.head[t] = self.kcols[p];
        }
    }

    fn swap_kernel_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for row in &mut self.kinv {
            row.swap(a, b);
        }
        self.trows.swap(a, b);
        self.tpos[self.trows[a]] = a;
        self.tpos[self.trows[b]] = b;
    }

    /// Adds row `i` and column `q` to the kernel.
    fn kernel_grow(&mut self, i: usize, q: usize) {
        let r = self.kcols.len();
        let u: Vec<f64> = self.trows.iter().map(|&t| self.coef(t, q)).collect();
        let v: Vec<f64> = self.kcols.iter().map(|&j| self.coef(i, j)).collect();
        let alpha = self.coef(i, q);
        let nu: Vec<f64> = self.kinv.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect();
        let mut vn = vec![0.0; r];
        for (p, &vp) in v.iter().enumerate() {
            if vp != 0.0 {
                for (q2, x) in vn.iter_mut().enumerate() {
                    *x += vp * self.kinv[p][q2];
                }
            }
        }
        let s = alpha - v.iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>();
        for (p, row) in self.kinv.iter_mut().enumerate() {
            if nu[p] != 0.0 {
                for (t, x) in row.iter_mut().enumerate() {
                    *x += nu[p] * vn[t] / s;
                }
            }
            row.push(-nu[p] / s);
        }
        let mut last: Vec<f64> = vn.iter().map(|x| -x / s).collect();
        last.push(1.0 / s);
        self.kinv.push(last);
        self.tpos[i] = r;
        self.trows.push(i);
        self.kcols.push(q);
    }

    /// Replaces kernel column at position `p` by column `q`.
    fn kernel_replace_col(&mut self, p: usize, q: usize) {
        let u: Vec<f64> = self.trows.iter().map(|&t| self.coef(t, q)).collect();
        let z: Vec<f64> = self.kinv.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect();
        let zp = z[p];
        let pivot_row: Vec<f64> = self.kinv[p].iter().map(|x| x / zp).collect();
        for (k, row) in self.kinv.iter_mut().enumerate() {
            if k == p {
                row.clone_from(&pivot_row);
            } else if z[k] != 0.0 {
                for (x, pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= z[k] * pr;
                }
            }
        }
        self.kcols[p] = q;
    }

    /// Replaces kernel row at position `a` by row `i`.
    fn kernel_replace_row(&mut self, a: usize, i: usize) {
        let r = self.kcols.len();
        let v: Vec<f64> = self.kcols.iter().map(|&j| self.coef(i, j)).collect();
        let mut z = vec![0.0; r];
        for (p, &vp) in v.iter().enumerate() {
            if vp != 0.0 {
                for (t, x) in z.iter_mut().enumerate() {
                    *x += vp * self.kinv[p][t];
                }
            }
        }
        let za = z[a];
        z[a] -= 1.0;
        for row in self.kinv.iter_mut() {
            let c = row[a];
            if c != 0.0 {
                for (x, zt) in row.iter_mut().zip(&z) {
                    *x -= c * zt / za;
                }
            }
        }
        self.tpos[self.trows[a]] = NONE;
        self.trows[a] = i;
        self.tpos[i] = a;
    }

    /// Removes kernel row and column at the same position `b`.
    fn kernel_remove(&mut self, b: usize) {
        let nb: Vec<f64> = self.kinv[b].clone();
        let piv = nb[b];
        for (p, row) in self.kinv.iter_mut().enumerate() {
            if p == b {
                continue;
            }
            let c = row[b];
            if c != 0.0 {
                for (x, y) in row.iter_mut().zip(&nb) {
                    *x -= c * y / piv;
                }
            }
        }
        self.kinv.swap_remove(b);
        for row in &mut self.kinv {
            row.swap_remove(b);
        }
        self.tpos[self.trows[b]] = NONE;
        self.trows.swap_remove(b);
        self.kcols.swap_remove(b);
        if b < self.trows.len() {
            self.tpos[self.trows[b]] = b;
        }
    }

    /// Column `q` enters the basis at row position `r`.
    fn change_basis(&mut self, r: usize, q: usize) {
        let leaving = self.head[r];
        let n = self.n;
        match (q < n, leaving < n) {
            (true, false) => self.kernel_grow(r, q),
            (true, true) => self.kernel_replace_col(self.tpos[r], q),
            (false, true) => {
                let i = self.unit_row(q);
                let (a, b) = (self.tpos[i], self.tpos[r]);
                self.swap_kernel_rows(a, b);
                self.kernel_remove(b);
                self.head[i] = q;
            }
            (false, false) => {
                let i = self.unit_row(q);
                if i == r {
                    self.head[r] = q;
                } else {
                    let a = self.tpos[i];
                    self.kernel_replace_row(a, r);
                    self.head[i] = q;
                }
            }
        }
        self.sync_head();
    }

    /// Basis change: column `q` enters in row `r`; `alpha` is the pivot row
    /// `ρ_r·A` over all columns computed before the update.
    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], leaving_status: Status) {
        let ratio = self.d[q] / alpha[q];
        for j in 0..self.total() {
            if self.status[j] != Status::Basic && alpha[j] != 0.0 {
                self.d[j] -= ratio * alpha[j];
            }
        }
        let leaving = self.head[r];
        self.d[leaving] = -ratio;
        self.d[q] = 0.0;
        self.change_basis(r, q);
        self.status[q] = Status::Basic;
        self.status[leaving] = leaving_status;
        self.since_refresh += 1;
        self.iterations += 1;
    }

    fn pivot_row(&self, r: usize) -> Vec<f64> {
        let rho = self.btran_row(r);
        (0..self.total()).map(|j| if self.status[j] == Status::Basic { 0.0 } else { self.row_dot(&rho, j) }).collect()
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lo[j] == self.hi[j]
    }

    /// Primal simplex with Dantzig pricing and a Bland fallback after a run
    /// of degenerate pivots.
    fn primal(&mut self) -> Outcome {
        let cap = self.iteration_cap();
        let degenerate_limit = 10 * (self.m + self.n);
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > cap {
                return Outcome::IterationLimit;
            }
            if self.since_refresh >= REFRESH_EVERY {
                self.refresh();
            }
            // Pricing.
            let mut q = usize::MAX;
            let mut best = 0.0;
            for j in 0..self.total() {
                let st = self.status[j];
                if st == Status::Basic || self.is_fixed(j) {
                    continue;
                }
                let dj = self.d[j];
                let score = match st {
                    Status::Lower if dj < -OPT_TOL => -dj,
                    Status::Upper if dj > OPT_TOL => dj,
                    _ => continue,
                };
                if bland {
                    q = j;
                    break;
                }
                if score > best {
                    best = score;
                    q = j;
                }
            }
            if q == usize::MAX {
                // Confirm with fresh duals before declaring optimality.
                if self.since_refresh > 0 {
                    self.refresh();
                    if self.has_primal_candidate() {
                        continue;
                    }
                }
                return Outcome::Optimal;
            }
            let dir = if self.status[q] == Status::Lower { 1.0 } else { -1.0 };
            let w = self.ftran(q);

            // Ratio test.
            let mut theta = self.hi[q] - self.lo[q];
            let mut leave = usize::MAX;
            let mut leave_status = Status::Lower;
            let mut leave_w = 0.0;
            for r in 0..self.m {
                let wr = w[r];
                if math::abs(wr) <= PIVOT_TOL {
                    continue;
                }
                let h = self.head[r];
                let rate = -dir * wr;
                let (limit, st) = if rate < 0.0 {
                    if !self.lo[h].is_finite() {
                        continue;
                    }
                    (((self.x[h] - self.lo[h]) / -rate).max(0.0), Status::Lower)
                } else {
                    if !self.hi[h].is_finite() {
                        continue;
                    }
                    (((self.hi[h] - self.x[h]) / rate).max(0.0), Status::Upper)
                };
                let better = if leave == usize::MAX {
                    limit <= theta
                } else if bland {
                    limit < theta || (limit <= theta + 1e-12 && h < self.head[leave])
                } else {
                    limit < theta - 1e-12 || (limit <= theta + 1e-12 && math::abs(wr) > math::abs(leave_w))
                };
                if better {
                    theta = limit;
                    leave = r;
                    leave_status = st;
                    leave_w = wr;
                }
            }
            if !theta.is_finite() {
                return Outcome::Unbounded;
            }
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            // Move.
            let step = dir * theta;
            self.x[q] += step;
            for r in 0..self.m {
                if w[r] != 0.0 {
                    let h = self.head[r];
                    self.x[h] -= w[r] * step;
                }
            }
            if leave == usize::MAX {
                // Bound flip of the entering variable.
                if dir > 0.0 {
                    self.status[q] = Status::Upper;
                    self.x[q] = self.hi[q];
                } else {
                    self.status[q] = Status::Lower;
                    self.x[q] = self.lo[q];
                }
                self.iterations += 1;
                continue;
            }
            let h = self.head[leave];
            self.x[h] = if leave_status == Status::Lower { self.lo[h] } else { self.hi[h] };
            let alpha = self.pivot_row(leave);
            self.pivot(leave, q, &alpha, leave_status);
        }
    }

    fn has_primal_candidate(&self) -> bool {
        (0..self.total()).any(|j| {
            !self.is_fixed(j)
                && match self.status[j] {
                    Status::Lower => self.d[j] < -OPT_TOL,
                    Status::Upper => self.d[j] > OPT_TOL,
                    Status::Basic => false,
                }
        })
    }

    /// Dual simplex with a two-pass (Harris) ratio test.
    fn dual(&mut self) -> Outcome {
        let cap = self.iteration_cap();
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > cap {
                return Outcome::IterationLimit;
            }
            if self.since_refresh >= REFRESH_EVERY {
                self.refresh();
            }
            // Leaving row: largest bound violation.
            let mut r = usize::MAX;
            let mut worst = FEAS_TOL;
            let mut to_lower = true;
            for row in 0..self.m {
                let h = self.head[row];
                let below = self.lo[h] - self.x[h];
                let above = self.x[h] - self.hi[h];
                if below > worst {
                    worst = below;
                    r = row;
                    to_lower = true;
                } else if above > worst {
                    worst = above;
                    r = row;
                    to_lower = false;
                }
            }
            if r == usize::MAX {
                if self.since_refresh > 0 {
                    self.refresh();
                    let h_ok = (0..self.m).all(|row| {
                        let h = self.head[row];
                        self.x[h] >= self.lo[h] - FEAS_TOL && self.x[h] <= self.hi[h] + FEAS_TOL
                    });
                    if !h_ok {
                        continue;
                    }
                }
                return Outcome::Optimal;
            }
            let alpha = self.pivot_row(r);
            // Candidates and their dual ratios.
            let eligible = |j: usize, a: f64, st: Status| -> bool {
                match (to_lower, st) {
                    (true, Status::Lower) => a < -PIVOT_TOL,
                    (true, Status::Upper) => a > PIVOT_TOL,
                    (false, Status::Lower) => a > PIVOT_TOL,
                    (false, Status::Upper) => a < -PIVOT_TOL,
                    _ => {
                        let _ = j;
                        false
                    }
                }
            };
            let slack_dj = |st: Status, dj: f64| -> f64 {
                match st {
                    Status::Lower => dj.max(0.0),
                    _ => (-dj).max(0.0),
                }
            };
            let mut bound = f64::INFINITY;
            for j in 0..self.total() {
                let st = self.status[j];
                if st == Status::Basic || self.is_fixed(j) || !eligible(j, alpha[j], st) {
                    continue;
                }
                let t = (slack_dj(st, self.d[j]) + OPT_TOL) / math::abs(alpha[j]);
                if t < bound {
                    bound = t;
                }
            }
            if !bound.is_finite() {
                return Outcome::Infeasible;
            }
            let mut q = usize::MAX;
            let mut q_abs = 0.0;
            for j in 0..self.total() {
                let st = self.status[j];
                if st == Status::Basic || self.is_fixed(j) || !eligible(j, alpha[j], st) {
                    continue;
                }
                let t = slack_dj(st, self.d[j]) / math::abs(alpha[j]);
                if t <= bound && math::abs(alpha[j]) > q_abs {
                    q_abs = math::abs(alpha[j]);
                    q = j;
                }
            }
            let w = self.ftran(q);
            if math::abs(w[r] - alpha[q]) > 1e-7 * (1.0 + math::abs(alpha[q])) {
                // Inverse has drifted; refactor and retry.
                if !self.reinvert() {
                    return Outcome::IterationLimit;
                }
                self.compute_primal();
                self.compute_duals();
                self.since_refresh = 0;
                continue;
            }
            let h = self.head[r];
            let target = if to_lower { self.lo[h] } else { self.hi[h] };
            let delta = (self.x[h] - target) / w[r];
            self.x[q] += delta;
            for row in 0..self.m {
                if w[row] != 0.0 {
                    let hh = self.head[row];
                    self.x[hh] -= w[row] * delta;
                }
            }
            self.x[h] = target;
            let leave_status = if to_lower { Status::Lower } else { Status::Upper };
            self.pivot(r, q, &alpha, leave_status);
        }
    }
}

/// Solves the LP relaxation (binary flags are ignored).
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    if lp.validate().is_err() {
        return LpSolution { status: LpStatus::Infeasible, x: Vec::new(), objective: f64::NAN, iterations: 0 };
    }
    let mut engine = Engine::new(lp);
    let outcome = engine.solve_cold();
    let x = engine.structural_values();
    let objective = lp.objective_value(&x);
    LpSolution { status: outcome.into(), x, objective, iterations: engine.iterations }
}
