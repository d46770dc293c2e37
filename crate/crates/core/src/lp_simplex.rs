//! Dense bounded-variable primal simplex for equality-form LPs.
//!
//! Solves `min c'x  s.t.  Ax = b,  0 <= x <= u` (entries of `u` may be
//! infinite) with a two-phase method on an explicit basis inverse. Phase 1
//! starts from one artificial per row; surviving artificials are fixed at
//! zero for phase 2 so that their columns keep carrying the basis inverse.
//! A previous optimal basis can be handed back in to skip phase 1 when
//! columns have only been appended.

use serde::Serialize;
use thiserror::Error;

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-7;
const OPT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PivotRule {
    /// Smallest eligible index enters and leaves; never cycles.
    #[default]
    Bland,
    /// Most negative reduced cost enters.
    Dantzig,
}

/// Sparse column: `(row, coefficient)` pairs.
pub type SparseColumn = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub rhs: Vec<f64>,
    pub costs: Vec<f64>,
    pub columns: Vec<SparseColumn>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(rhs: Vec<f64>) -> Self {
        LinearProgram {
            rhs,
            costs: Vec::new(),
            columns: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Appends a variable with bounds `[0, upper]`; returns its index.
    pub fn add_column(&mut self, cost: f64, entries: SparseColumn, upper: f64) -> usize {
        self.costs.push(cost);
        self.columns.push(entries);
        self.upper.push(upper);
        self.columns.len() - 1
    }

    fn check(&self) -> Result<(), LpError> {
        let m = self.n_rows();
        if self.costs.len() != self.columns.len() || self.upper.len() != self.columns.len() {
            return Err(LpError::Malformed("costs, columns and bounds differ in length".into()));
        }
        for (j, col) in self.columns.iter().enumerate() {
            if let Some(&(r, _)) = col.iter().find(|&&(r, _)| r >= m) {
                return Err(LpError::Malformed(format!("column {j} references row {r} of {m}")));
            }
            if self.upper[j].is_nan() || self.upper[j] < 0.0 {
                return Err(LpError::Malformed(format!("column {j} has negative upper bound")));
            }
        }
        if self.rhs.iter().chain(&self.costs).any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("non-finite cost or right-hand side".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("internal error: linear program is unbounded")]
    Unbounded,
    #[error("internal error: simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasicVar {
    Structural(usize),
    Artificial(usize),
}

/// Basis description reusable across solves of LPs that share rows and a
/// prefix of columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Basis {
    pub basic: Vec<BasicVar>,
    pub at_upper: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    /// Row duals `y` with reduced costs `d = c - A'y`.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// `b'y - sum_j u_j max(0, -d_j)`.
    pub dual_objective: f64,
    pub basis: Basis,
    pub iterations: usize,
}

impl LpSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }

    /// Strong-duality check at the stated relative tolerance.
    pub fn satisfies_strong_duality(&self, tol: f64) -> bool {
        self.duality_gap() <= tol * (1.0 + self.objective.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Basic(usize),
    Lower,
    Upper,
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    rule: PivotRule,
    /// +1 or -1 so that every scaled right-hand side is non-negative.
    sign: Vec<f64>,
    upper: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    x: Vec<f64>,
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    max_iterations: usize,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a LinearProgram, rule: PivotRule) -> Self {
        let m = lp.n_rows();
        let n = lp.n_cols();
        let sign = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut upper = lp.upper.clone();
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));
        Tableau {
            lp,
            m,
            n,
            rule,
            sign,
            upper,
            basis: Vec::new(),
            status: vec![Status::Lower; n + m],
            x: vec![0.0; n + m],
            binv: Vec::new(),
            iterations: 0,
            since_refactor: 0,
            max_iterations: 50 * (n + 2 * m) + 10_000,
        }
    }

    fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for &(r, a) in &self.lp.columns[j] {
                f(r, a * self.sign[r]);
            }
        } else {
            f(j - self.n, 1.0);
        }
    }

    fn b(&self, r: usize) -> f64 {
        self.lp.rhs[r] * self.sign[r]
    }

    fn var_to_basic(&self, j: usize) -> BasicVar {
        if j < self.n {
            BasicVar::Structural(j)
        } else {
            BasicVar::Artificial(j - self.n)
        }
    }

    /// Inverts the current basis matrix; `false` when it is singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            self.for_each_entry(j, |r, v| a[r * m + pos] += v);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let pivot_row = (col..m)
                .max_by(|&p, &q| a[p * m + col].abs().total_cmp(&a[q * m + col].abs()))
                .unwrap();
            let p = a[pivot_row * m + col];
            if p.abs() < 1e-11 {
                return false;
            }
            if pivot_row != col {
                for k in 0..m {
                    a.swap(pivot_row * m + k, col * m + k);
                    inv.swap(pivot_row * m + k, col * m + k);
                }
            }
            for k in 0..m {
                a[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = a[i * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        a[i * m + k] -= f * a[col * m + k];
                        inv[i * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basic_values();
        true
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs: Vec<f64> = (0..m).map(|r| self.b(r)).collect();
        for j in 0..self.n + m {
            if self.status[j] == Status::Upper {
                let u = self.upper[j];
                self.for_each_entry(j, |r, a| rhs[r] -= a * u);
            }
        }
        for (pos, &j) in self.basis.iter().enumerate() {
            let row = &self.binv[pos * m..(pos + 1) * m];
            self.x[j] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
    }

    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (pos, &j) in self.basis.iter().enumerate() {
            let cb = costs[j];
            if cb != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for (yk, &b) in y.iter_mut().zip(row) {
                    *yk += cb * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, costs: &[f64], y: &[f64]) -> f64 {
        let mut d = costs[j];
        self.for_each_entry(j, |r, a| d -= a * y[r]);
        d
    }

    fn column_in_basis(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        self.for_each_entry(j, |r, a| {
            for (i, al) in alpha.iter_mut().enumerate() {
                *al += self.binv[i * m + r] * a;
            }
        });
        alpha
    }

    /// Picks the entering variable and its direction (+1 increase, -1 decrease).
    fn choose_entering(&self, costs: &[f64], y: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            let dir = match self.status[j] {
                Status::Basic(_) => continue,
                _ if self.upper[j] <= 0.0 => continue,
                Status::Lower => 1.0,
                Status::Upper => -1.0,
            };
            let d = self.reduced_cost(j, costs, y);
            if d * dir < -OPT_TOL {
                match self.rule {
                    PivotRule::Bland => return Some((j, dir)),
                    PivotRule::Dantzig => {
                        if best.is_none_or(|(_, _, s)| d.abs() > s) {
                            best = Some((j, dir, d.abs()));
                        }
                    }
                }
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// One pivot or bound flip. Returns `Ok(false)` at optimality.
    fn step(&mut self, costs: &[f64]) -> Result<bool, LpError> {
        let y = self.duals(costs);
        let Some((q, dir)) = self.choose_entering(costs, &y) else {
            return Ok(false);
        };
        let alpha = self.column_in_basis(q);

        // Ratio test; ties resolved by smallest variable index.
        let mut leave: Option<(usize, f64, Status)> = None;
        for (pos, &j) in self.basis.iter().enumerate() {
            let rate = -dir * alpha[pos];
            let (ratio, bound) = if rate < -PIVOT_TOL {
                ((self.x[j] / -rate).max(0.0), Status::Lower)
            } else if rate > PIVOT_TOL && self.upper[j].is_finite() {
                (((self.upper[j] - self.x[j]) / rate).max(0.0), Status::Upper)
            } else {
                continue;
            };
            let better = match leave {
                None => true,
                Some((p, best, _)) => ratio < best - RATIO_TIE || (ratio <= best + RATIO_TIE && j < self.basis[p]),
            };
            if better {
                leave = Some((pos, ratio, bound));
            }
        }

        let flip = self.upper[q];
        let theta = match leave {
            Some((_, ratio, _)) if ratio <= flip + RATIO_TIE => ratio,
            _ if flip.is_finite() => flip,
            _ => return Err(LpError::Unbounded),
        };

        self.x[q] += dir * theta;
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] -= dir * theta * alpha[pos];
        }

        match leave {
            Some((pos, ratio, bound)) if ratio <= flip + RATIO_TIE => {
                let out = self.basis[pos];
                self.x[out] = if bound == Status::Upper { self.upper[out] } else { 0.0 };
                self.status[out] = bound;
                self.basis[pos] = q;
                self.status[q] = Status::Basic(pos);
                self.pivot_inverse(pos, &alpha);
            }
            _ => {
                self.status[q] = if dir > 0.0 { Status::Upper } else { Status::Lower };
                self.x[q] = if dir > 0.0 { self.upper[q] } else { 0.0 };
            }
        }

        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY && !self.refactor() {
            return Err(LpError::Malformed("basis became singular".into()));
        }
        if self.iterations > self.max_iterations {
            return Err(LpError::IterationLimit(self.max_iterations));
        }
        Ok(true)
    }

    #[allow(clippy::needless_range_loop)]
    fn pivot_inverse(&mut self, pos: usize, alpha: &[f64]) {
        let m = self.m;
        let p = alpha[pos];
        for k in 0..m {
            self.binv[pos * m + k] /= p;
        }
        for i in 0..m {
            if i == pos || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[pos * m + k];
            }
        }
    }

    fn optimize(&mut self, costs: &[f64]) -> Result<(), LpError> {
        while self.step(costs)? {}
        Ok(())
    }

    fn cold_start(&mut self) {
        let (n, m) = (self.n, self.m);
        self.basis = (n..n + m).collect();
        for (pos, &j) in self.basis.iter().enumerate() {
            self.status[j] = Status::Basic(pos);
        }
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = 1.0;
        }
        self.recompute_basic_values();
    }

    fn phase_one(&mut self) -> Result<bool, LpError> {
        let (n, m) = (self.n, self.m);
        let costs: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
        self.optimize(&costs)?;
        let infeasibility: f64 = (n..n + m).map(|j| self.x[j]).sum();
        if infeasibility > FEAS_TOL * (1.0 + self.lp.rhs.iter().map(|b| b.abs()).sum::<f64>()) {
            return Ok(false);
        }
        // Drive zero-valued artificials out of the basis where possible.
        for pos in 0..m {
            if self.basis[pos] < n {
                continue;
            }
            let row: Vec<f64> = self.binv[pos * m..(pos + 1) * m].to_vec();
            let entering = (0..n).find(|&j| {
                if matches!(self.status[j], Status::Basic(_)) || self.upper[j] <= 0.0 {
                    return false;
                }
                let mut v = 0.0;
                self.for_each_entry(j, |r, a| v += row[r] * a);
                v.abs() > 1e-7
            });
            if let Some(j) = entering {
                let alpha = self.column_in_basis(j);
                let out = self.basis[pos];
                self.status[out] = Status::Lower;
                self.x[out] = 0.0;
                self.basis[pos] = j;
                self.status[j] = Status::Basic(pos);
                self.pivot_inverse(pos, &alpha);
            }
        }
        for j in n..n + m {
            self.upper[j] = 0.0;
            if !matches!(self.status[j], Status::Basic(_)) {
                self.status[j] = Status::Lower;
                self.x[j] = 0.0;
            }
        }
        if !self.refactor() {
            return Err(LpError::Malformed("basis became singular".into()));
        }
        Ok(true)
    }

    fn try_warm_start(&mut self, warm: &Basis) -> bool {
        let (n, m) = (self.n, self.m);
        if warm.basic.len() != m {
            return false;
        }
        for j in n..n + m {
            self.upper[j] = 0.0;
        }
        let mut seen = vec![false; n + m];
        let mut basis = Vec::with_capacity(m);
        for &b in &warm.basic {
            let j = match b {
                BasicVar::Structural(j) if j < n => j,
                BasicVar::Artificial(i) if i < m => n + i,
                _ => return false,
            };
            if std::mem::replace(&mut seen[j], true) {
                return false;
            }
            basis.push(j);
        }
        self.status = vec![Status::Lower; n + m];
        for &j in &warm.at_upper {
            if j >= n || seen[j] || !self.upper[j].is_finite() {
                return false;
            }
            self.status[j] = Status::Upper;
        }
        for j in 0..n + m {
            self.x[j] = match self.status[j] {
                Status::Upper => self.upper[j],
                _ => 0.0,
            };
        }
        for (pos, &j) in basis.iter().enumerate() {
            self.status[j] = Status::Basic(pos);
        }
        self.basis = basis;
        if !self.refactor() {
            return false;
        }
        self.basis
            .iter()
            .all(|&j| self.x[j] >= -FEAS_TOL && self.x[j] <= self.upper[j] + FEAS_TOL)
    }

    fn reset(&mut self) {
        let (n, m) = (self.n, self.m);
        self.upper = self.lp.upper.clone();
        self.upper.extend(std::iter::repeat_n(f64::INFINITY, m));
        self.status = vec![Status::Lower; n + m];
        self.x = vec![0.0; n + m];
    }

    fn finish(&mut self, status: LpStatus) -> LpSolution {
        let n = self.n;
        let mut costs = self.lp.costs.clone();
        costs.extend(std::iter::repeat_n(0.0, self.m));
        let y_scaled = self.duals(&costs);
        let reduced: Vec<f64> = (0..n).map(|j| self.reduced_cost(j, &costs, &y_scaled)).collect();
        let duals: Vec<f64> = y_scaled.iter().zip(&self.sign).map(|(y, s)| y * s).collect();
        let primal: Vec<f64> = self.x[..n].iter().map(|&v| v.clamp(0.0, f64::INFINITY)).collect();
        let objective = primal.iter().zip(&self.lp.costs).map(|(x, c)| x * c).sum();
        let mut dual_objective: f64 = duals.iter().zip(&self.lp.rhs).map(|(y, b)| y * b).sum();
        for (j, &d) in reduced.iter().enumerate() {
            if d < 0.0 && self.lp.upper[j].is_finite() {
                dual_objective += self.lp.upper[j] * d;
            }
        }
        let basis = Basis {
            basic: self.basis.iter().map(|&j| self.var_to_basic(j)).collect(),
            at_upper: (0..n).filter(|&j| self.status[j] == Status::Upper).collect(),
        };
        LpSolution {
            status,
            primal,
            objective,
            duals,
            reduced_costs: reduced,
            dual_objective,
            basis,
            iterations: self.iterations,
        }
    }
}

/// Solves `lp` from scratch with Bland's rule.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, PivotRule::Bland, None)
}

/// Solves `lp`, starting from `warm` when it is a valid primal-feasible basis
/// for this LP (columns may have been appended since it was produced).
pub fn solve_with(lp: &LinearProgram, rule: PivotRule, warm: Option<&Basis>) -> Result<LpSolution, LpError> {
    lp.check()?;
    let mut tab = Tableau::new(lp, rule);
    let warmed = warm.is_some_and(|w| tab.try_warm_start(w));
    if !warmed {
        tab.reset();
        tab.cold_start();
        if !tab.phase_one()? {
            return Ok(tab.finish(LpStatus::Infeasible));
        }
    }
    let mut costs = lp.costs.clone();
    costs.extend(std::iter::repeat_n(0.0, tab.m));
    tab.optimize(&costs)?;
    if !tab.refactor() {
        return Err(LpError::Malformed("basis became singular".into()));
    }
    Ok(tab.finish(LpStatus::Optimal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Vertex enumeration: every choice of `m` basic columns with the rest at
    /// 0 or their (finite) upper bound, solved by Gaussian elimination.
    fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
        let m = lp.n_rows();
        let n = lp.n_cols();
        let dense: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut c = vec![0.0; m];
                for &(r, a) in &lp.columns[j] {
                    c[r] += a;
                }
                c
            })
            .collect();
        let mut best: Option<f64> = None;
        let mut chosen = Vec::new();
        subsets(n, m, 0, &mut chosen, &mut |basic| {
            let rest: Vec<usize> = (0..n).filter(|j| !basic.contains(j)).collect();
            for mask in 0u32..(1 << rest.len()) {
                let mut x = vec![0.0; n];
                let mut ok = true;
                for (bit, &j) in rest.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        if !lp.upper[j].is_finite() {
                            ok = false;
                            break;
                        }
                        x[j] = lp.upper[j];
                    }
                }
                if !ok {
                    continue;
                }
                let mut rhs = lp.rhs.clone();
                for &j in &rest {
                    for r in 0..m {
                        rhs[r] -= dense[j][r] * x[j];
                    }
                }
                let Some(sol) = gauss(basic.iter().map(|&j| dense[j].clone()).collect(), rhs) else {
                    continue;
                };
                for (k, &j) in basic.iter().enumerate() {
                    x[j] = sol[k];
                }
                if (0..n).all(|j| x[j] >= -1e-9 && x[j] <= lp.upper[j] + 1e-9) {
                    let obj: f64 = (0..n).map(|j| lp.costs[j] * x[j]).sum();
                    best = Some(best.map_or(obj, |b| b.min(obj)));
                }
            }
        });
        best
    }

    fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for j in start..n {
            cur.push(j);
            subsets(n, k, j + 1, cur, f);
            cur.pop();
        }
    }

    fn full_row_rank(lp: &LinearProgram) -> bool {
        let m = lp.n_rows();
        let mut found = false;
        let dense: Vec<Vec<f64>> = lp
            .columns
            .iter()
            .map(|c| {
                let mut d = vec![0.0; m];
                for &(r, a) in c {
                    d[r] += a;
                }
                d
            })
            .collect();
        subsets(lp.n_cols(), m, 0, &mut Vec::new(), &mut |s| {
            found |= gauss(s.iter().map(|&j| dense[j].clone()).collect(), vec![0.0; m]).is_some();
        });
        found
    }

    /// Solves `sum_k cols[k] * z_k = rhs`; `None` if singular.
    #[allow(clippy::needless_range_loop)]
    fn gauss(cols: Vec<Vec<f64>>, rhs: Vec<f64>) -> Option<Vec<f64>> {
        let m = rhs.len();
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row: Vec<f64> = cols.iter().map(|c| c[r]).collect();
                row.push(rhs[r]);
                row
            })
            .collect();
        for c in 0..m {
            let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
            if a[p][c].abs() < 1e-10 {
                return None;
            }
            a.swap(p, c);
            for r in 0..m {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=m {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        Some((0..m).map(|r| a[r][m] / a[r][r]).collect())
    }

    /// Random master-shaped LP: `r` reservation rows, `n` vehicle rows, one
    /// trivial column per vehicle, one uncovered variable per reservation,
    /// plus random plan columns.
    fn master_like(r: usize, n: usize, plans: &[(usize, u8, f64)], uncov: &[f64], trivial: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new(vec![1.0; r + n]);
        for (i, &c) in uncov.iter().enumerate().take(r) {
            lp.add_column(c, vec![(i, 1.0)], 1.0);
        }
        for (v, &c) in trivial.iter().enumerate().take(n) {
            lp.add_column(c, vec![(r + v, 1.0)], 1.0);
        }
        for &(v, mask, c) in plans {
            let mut col: SparseColumn = (0..r).filter(|&i| mask >> i & 1 == 1).map(|i| (i, 1.0)).collect();
            col.push((r + v % n, 1.0));
            lp.add_column(c, col, 1.0);
        }
        lp
    }

    fn assert_optimality_conditions(lp: &LinearProgram, sol: &LpSolution) {
        assert_eq!(sol.status, LpStatus::Optimal);
        for r in 0..lp.n_rows() {
            let lhs: f64 = lp
                .columns
                .iter()
                .zip(&sol.primal)
                .map(|(c, x)| c.iter().filter(|e| e.0 == r).map(|e| e.1).sum::<f64>() * x)
                .sum();
            assert!((lhs - lp.rhs[r]).abs() <= 1e-7, "row {r} residual");
        }
        for (j, &d) in sol.reduced_costs.iter().enumerate() {
            let x = sol.primal[j];
            if x > 1e-7 && x < lp.upper[j] - 1e-7 {
                assert!(d.abs() <= 1e-7, "interior variable {j} has reduced cost {d}");
            }
            if x <= 1e-7 {
                assert!(d >= -1e-7, "variable {j} at lower bound has reduced cost {d}");
            }
        }
        assert!(sol.satisfies_strong_duality(1e-6), "gap {}", sol.duality_gap());
    }

    #[test]
    fn trivial_columns_only() {
        let lp = master_like(2, 2, &[], &[3.0, 5.0], &[1.5, 0.0]);
        let sol = solve(&lp).unwrap();
        assert_optimality_conditions(&lp, &sol);
        assert!(sol.primal.iter().all(|&x| (x - 1.0).abs() < 1e-9));
        assert!((sol.objective - 9.5).abs() < 1e-9);
    }

    #[test]
    fn serving_column_beats_fuel_car() {
        let lp = master_like(1, 1, &[(0, 0b1, 2.0)], &[4.0], &[1.0]);
        let sol = solve(&lp).unwrap();
        assert_optimality_conditions(&lp, &sol);
        assert!((sol.primal[2] - 1.0).abs() < 1e-9);
        assert!(sol.primal[0].abs() < 1e-9);
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded_are_reported() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_column(1.0, vec![(0, 1.0), (1, 1.0)], 0.4);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_column(-1.0, vec![(0, 1.0)], f64::INFINITY);
        lp.add_column(0.0, vec![(0, -1.0)], f64::INFINITY);
        assert_eq!(solve(&lp).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn malformed_lp() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_column(1.0, vec![(3, 1.0)], 1.0);
        assert!(matches!(solve(&lp), Err(LpError::Malformed(_))));
    }

    #[test]
    fn negative_rhs_rows_are_handled() {
        let mut lp = LinearProgram::new(vec![-2.0]);
        lp.add_column(1.0, vec![(0, -1.0)], 5.0);
        lp.add_column(3.0, vec![(0, -2.0)], 5.0);
        let sol = solve(&lp).unwrap();
        assert_optimality_conditions(&lp, &sol);
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.duals[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn warm_start_after_appending_columns() {
        let mut lp = master_like(3, 2, &[(0, 0b011, 3.0)], &[2.0, 2.0, 2.0], &[1.0, 1.0]);
        let first = solve(&lp).unwrap();
        lp.add_column(0.5, vec![(2, 1.0), (4, 1.0)], 1.0);
        let cold = solve(&lp).unwrap();
        let warm = solve_with(&lp, PivotRule::Bland, Some(&first.basis)).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-9);
        assert_optimality_conditions(&lp, &warm);
        assert!(warm.iterations <= cold.iterations);
    }

    #[test]
    fn deterministic_basis() {
        let lp = master_like(
            3,
            2,
            &[(0, 0b011, 3.0), (1, 0b110, 1.0), (1, 0b001, 0.2)],
            &[2.0, 2.0, 2.0],
            &[1.0, 1.0],
        );
        assert_eq!(solve(&lp).unwrap().basis, solve(&lp).unwrap().basis);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_vertex_enumeration(
            r in 1usize..4, n in 1usize..3,
            plans in proptest::collection::vec((0usize..3, 0u8..16, 0.0f64..6.0), 0..6),
            uncov in proptest::collection::vec(0.5f64..5.0, 3),
            trivial in proptest::collection::vec(0.0f64..4.0, 2),
        ) {
            let lp = master_like(r, n, &plans, &uncov, &trivial);
            prop_assume!(lp.n_cols() <= 12);
            let expected = vertex_enumeration(&lp).expect("trivial columns keep the LP feasible");
            for rule in [PivotRule::Bland, PivotRule::Dantzig] {
                let sol = solve_with(&lp, rule, None).unwrap();
                assert_optimality_conditions(&lp, &sol);
                prop_assert!((sol.objective - expected).abs() <= 1e-6, "{:?}: {} vs {}", rule, sol.objective, expected);
            }
        }

        #[test]
        fn general_bounded_lps_match_vertex_enumeration(
            m in 1usize..4,
            cols in proptest::collection::vec(
                (proptest::collection::vec(-2i8..3, 3), -3.0f64..3.0, prop_oneof![Just(f64::INFINITY), 0.5f64..3.0]),
                1..8),
            rhs in proptest::collection::vec(-3i8..4, 3),
        ) {
            let mut lp = LinearProgram::new(rhs[..m].iter().map(|&b| b as f64).collect());
            for (coefs, c, u) in &cols {
                let entries = (0..m).filter(|&r| coefs[r] != 0).map(|r| (r, coefs[r] as f64)).collect();
                lp.add_column(*c, entries, *u);
            }
            prop_assume!(full_row_rank(&lp));
            let expected = vertex_enumeration(&lp);
            match solve(&lp) {
                Ok(sol) if sol.status == LpStatus::Optimal => {
                    let e = expected.expect("solver found a point, enumeration must too");
                    prop_assert!((sol.objective - e).abs() <= 1e-6, "{} vs {}", sol.objective, e);
                    prop_assert!(sol.satisfies_strong_duality(1e-6));
                }
                Ok(_) => prop_assert!(expected.is_none()),
                Err(LpError::Unbounded) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
