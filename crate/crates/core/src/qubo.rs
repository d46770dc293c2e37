//! Penalty QUBO for the set-partition master.
//!
//! Variables are the pool columns `lambda_p` (pool order) followed by the
//! uncovered indicators `y_r`. Each equality row `sum x = 1` contributes
//! `M (sum x - 1)^2`, expanded with `x^2 = x`, on top of the linear master
//! objective.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::colgen::ColumnPool;
use crate::model::DiscretizedInstance;

#[derive(Debug, Error, PartialEq)]
pub enum QuboError {
    #[error("assignment has {got} variables, model has {expected}")]
    Length { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuboVar {
    Lambda { vehicle: usize, hash: u64 },
    Y { reservation: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    vars: Vec<QuboVar>,
    coeffs: BTreeMap<(usize, usize), f64>,
    offset: f64,
    penalty: f64,
    objective: Vec<f64>,
    constraints: Vec<Vec<usize>>,
}

/// `2 (sum_p max(c_p, 0) + sum_r uncovered_r) + 1`: exceeds the objective of
/// every feasible assignment, so any violated row costs more than it can save.
pub fn default_penalty(pool: &ColumnPool, dinst: &DiscretizedInstance) -> f64 {
    let cols: f64 = pool.columns().iter().map(|c| c.cost.max(0.0)).sum();
    let unc: f64 = (0..dinst.n_reservations()).map(|r| dinst.uncovered_cost(r)).sum();
    2.0 * (cols + unc) + 1.0
}

pub fn build(pool: &ColumnPool, dinst: &DiscretizedInstance) -> QuboModel {
    build_with_penalty(pool, dinst, default_penalty(pool, dinst))
}

pub fn build_with_penalty(pool: &ColumnPool, dinst: &DiscretizedInstance, penalty: f64) -> QuboModel {
    let n_cols = pool.len();
    let r = dinst.n_reservations();
    let mut vars = Vec::with_capacity(n_cols + r);
    let mut objective = Vec::with_capacity(n_cols + r);
    for col in pool.columns() {
        vars.push(QuboVar::Lambda {
            vehicle: col.vehicle,
            hash: col.fingerprint(),
        });
        objective.push(col.cost);
    }
    for res in 0..r {
        vars.push(QuboVar::Y { reservation: res });
        objective.push(dinst.uncovered_cost(res));
    }

    let mut rows: Vec<Vec<usize>> = (0..r).map(|res| vec![n_cols + res]).collect();
    rows.extend((0..pool.n_vehicles()).map(|_| Vec::new()));
    for (p, col) in pool.columns().iter().enumerate() {
        for &s in &col.served {
            rows[s].push(p);
        }
        rows[r + col.vehicle].push(p);
    }
    for row in &mut rows {
        row.sort_unstable();
    }
    QuboModel::from_parts(vars, objective, rows, penalty)
}

impl QuboModel {
    /// Assembles the coefficient map from a linear objective and equality
    /// rows with unit coefficients and right-hand side 1.
    pub fn from_parts(vars: Vec<QuboVar>, objective: Vec<f64>, constraints: Vec<Vec<usize>>, penalty: f64) -> Self {
        let mut coeffs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut offset = 0.0;
        for (i, &c) in objective.iter().enumerate() {
            *coeffs.entry((i, i)).or_default() += c;
        }
        for row in &constraints {
            offset += penalty;
            for (a, &i) in row.iter().enumerate() {
                *coeffs.entry((i, i)).or_default() -= penalty;
                for &j in &row[a + 1..] {
                    let key = if i <= j { (i, j) } else { (j, i) };
                    *coeffs.entry(key).or_default() += 2.0 * penalty;
                }
            }
        }
        coeffs.retain(|_, v| *v != 0.0);
        QuboModel {
            vars,
            coeffs,
            offset,
            penalty,
            objective,
            constraints,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[QuboVar] {
        &self.vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Vec<usize>] {
        &self.constraints
    }

    /// Upper-triangular coefficients keyed `(i, j)` with `i <= j`.
    pub fn coefficients(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.coeffs
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.get(&key).copied().unwrap_or(0.0)
    }

    fn check_len(&self, x: &FixedBitSet) -> Result<(), QuboError> {
        if x.len() != self.n_vars() {
            return Err(QuboError::Length {
                expected: self.n_vars(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn energy(&self, x: &FixedBitSet) -> Result<f64, QuboError> {
        self.check_len(x)?;
        Ok(self.offset
            + self
                .coeffs
                .iter()
                .filter(|(&(i, j), _)| x[i] && x[j])
                .map(|(_, v)| v)
                .sum::<f64>())
    }

    /// Splits the energy into the master objective and the penalty term.
    pub fn decompose(&self, x: &FixedBitSet) -> Result<(f64, f64), QuboError> {
        self.check_len(x)?;
        let obj = x.ones().map(|i| self.objective[i]).sum();
        let pen = self
            .constraints
            .iter()
            .map(|row| {
                let s = row.iter().filter(|&&i| x[i]).count() as f64 - 1.0;
                self.penalty * s * s
            })
            .sum();
        Ok((obj, pen))
    }

    pub fn is_feasible(&self, x: &FixedBitSet) -> bool {
        x.len() == self.n_vars()
            && self
                .constraints
                .iter()
                .all(|row| row.iter().filter(|&&i| x[i]).count() == 1)
    }

    /// Diagonal and symmetric off-diagonal neighbour lists for incremental
    /// flip evaluation.
    pub fn adjacency(&self) -> Adjacency {
        let n = self.n_vars();
        let mut diag = vec![0.0; n];
        let mut neighbours = vec![Vec::new(); n];
        for (&(i, j), &v) in &self.coeffs {
            if i == j {
                diag[i] = v;
            } else {
                neighbours[i].push((j, v));
                neighbours[j].push((i, v));
            }
        }
        Adjacency { diag, neighbours }
    }

    pub fn export(&self) -> String {
        let mut s = String::new();
        writeln!(s, "qubo {} {} {}", self.n_vars(), self.offset, self.penalty).unwrap();
        for (&(i, j), v) in &self.coeffs {
            writeln!(s, "{i} {j} {v}").unwrap();
        }
        for (i, var) in self.vars.iter().enumerate() {
            match var {
                QuboVar::Lambda { vehicle, hash } => writeln!(s, "# var {i} lambda {vehicle}:{hash:016x}").unwrap(),
                QuboVar::Y { reservation } => writeln!(s, "# var {i} y {reservation}").unwrap(),
            }
        }
        for (i, c) in self.objective.iter().enumerate() {
            writeln!(s, "# objective {i} {c}").unwrap();
        }
        for (j, row) in self.constraints.iter().enumerate() {
            write!(s, "# constraint {j}").unwrap();
            for i in row {
                write!(s, " {i}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn import(text: &str) -> Result<Self, QuboError> {
        Parser::default().run(text)
    }
}

#[derive(Debug, Clone)]
pub struct Adjacency {
    pub diag: Vec<f64>,
    pub neighbours: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    /// Energy change from flipping bit `i` of `x`.
    pub fn flip_delta(&self, x: &[bool], i: usize) -> f64 {
        let field = self.diag[i]
            + self.neighbours[i]
                .iter()
                .filter(|&&(j, _)| x[j])
                .map(|&(_, v)| v)
                .sum::<f64>();
        if x[i] {
            -field
        } else {
            field
        }
    }
}

#[derive(Default)]
struct Parser {
    header: Option<(usize, f64, f64)>,
    coeffs: BTreeMap<(usize, usize), f64>,
    vars: BTreeMap<usize, QuboVar>,
    objective: BTreeMap<usize, f64>,
    constraints: BTreeMap<usize, Vec<usize>>,
}

fn err(line: usize, message: impl Into<String>) -> QuboError {
    QuboError::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T, QuboError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("invalid {what} `{tok}`")))
}

impl Parser {
    fn n(&self, line: usize) -> Result<usize, QuboError> {
        self.header
            .map(|h| h.0)
            .ok_or_else(|| err(line, "header `qubo <N> <offset> <M>` must come first"))
    }

    fn index(&self, line: usize, tok: Option<&str>) -> Result<usize, QuboError> {
        let i: usize = num(line, tok, "index")?;
        let n = self.n(line)?;
        if i >= n {
            return Err(err(line, format!("index {i} out of range for {n} variables")));
        }
        Ok(i)
    }

    fn run(mut self, text: &str) -> Result<QuboModel, QuboError> {
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            if let Some(comment) = l.strip_prefix('#') {
                self.comment(line, comment)?;
                continue;
            }
            let mut toks = l.split_whitespace();
            if self.header.is_none() {
                if toks.next() != Some("qubo") {
                    return Err(err(line, "header `qubo <N> <offset> <M>` must come first"));
                }
                let n = num(line, toks.next(), "variable count")?;
                let offset = num(line, toks.next(), "offset")?;
                let m = num(line, toks.next(), "penalty")?;
                self.header = Some((n, offset, m));
            } else {
                let i = self.index(line, toks.next())?;
                let j = self.index(line, toks.next())?;
                let v: f64 = num(line, toks.next(), "value")?;
                if i > j {
                    return Err(err(line, format!("coefficient ({i}, {j}) is below the diagonal")));
                }
                if self.coeffs.insert((i, j), v).is_some() {
                    return Err(err(line, format!("duplicate coefficient ({i}, {j})")));
                }
            }
            if toks.next().is_some() {
                return Err(err(line, "trailing tokens"));
            }
        }
        let (n, offset, penalty) = self.header.ok_or_else(|| err(0, "missing header"))?;
        let mut vars = Vec::with_capacity(n);
        let mut objective = Vec::with_capacity(n);
        for i in 0..n {
            vars.push(
                *self
                    .vars
                    .get(&i)
                    .ok_or_else(|| err(0, format!("missing `# var {i}`")))?,
            );
            objective.push(self.objective.get(&i).copied().unwrap_or(0.0));
        }
        let constraints: Vec<Vec<usize>> = self.constraints.into_values().collect();
        Ok(QuboModel {
            vars,
            coeffs: self.coeffs,
            offset,
            penalty,
            objective,
            constraints,
        })
    }

    fn comment(&mut self, line: usize, body: &str) -> Result<(), QuboError> {
        let mut toks = body.split_whitespace();
        match toks.next() {
            Some("var") => {
                let i = self.index(line, toks.next())?;
                let var = match toks.next() {
                    Some("lambda") => {
                        let tag = toks.next().ok_or_else(|| err(line, "missing vehicle:hash"))?;
                        let (v, h) = tag.split_once(':').ok_or_else(|| err(line, "expected vehicle:hash"))?;
                        QuboVar::Lambda {
                            vehicle: num(line, Some(v), "vehicle")?,
                            hash: u64::from_str_radix(h, 16).map_err(|_| err(line, format!("invalid hash `{h}`")))?,
                        }
                    }
                    Some("y") => QuboVar::Y {
                        reservation: num(line, toks.next(), "reservation")?,
                    },
                    _ => return Err(err(line, "variable kind must be `lambda` or `y`")),
                };
                if self.vars.insert(i, var).is_some() {
                    return Err(err(line, format!("variable {i} declared twice")));
                }
            }
            Some("objective") => {
                let i = self.index(line, toks.next())?;
                let v = num(line, toks.next(), "value")?;
                self.objective.insert(i, v);
            }
            Some("constraint") => {
                let j: usize = num(line, toks.next(), "constraint index")?;
                if j != self.constraints.len() {
                    return Err(err(line, format!("constraint {j} out of order")));
                }
                let row = toks.map(|t| self.index(line, Some(t))).collect::<Result<Vec<_>, _>>()?;
                self.constraints.insert(j, row);
                return Ok(());
            }
            // Free-form comments are allowed.
            _ => return Ok(()),
        }
        if toks.next().is_some() {
            return Err(err(line, "trailing tokens"));
        }
        Ok(())
    }
}

/// Decodes a bit vector into its lambda and y parts for the given pool size.
pub fn split(x: &FixedBitSet, n_cols: usize) -> (Vec<usize>, Vec<usize>) {
    let mut cols = Vec::new();
    let mut ys = Vec::new();
    for i in x.ones() {
        if i < n_cols {
            cols.push(i);
        } else {
            ys.push(i - n_cols);
        }
    }
    (cols, ys)
}
