use crate::error::{Error, Result};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `max` or `min` of `c^T x` subject to sparse rows, `x >= 0`.
#[derive(Debug, Clone)]
pub struct LpProblem<S> {
    pub maximize: bool,
    pub objective: Vec<S>,
    pub rows: Vec<(Vec<(usize, S)>, Sense, S)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub objective: S,
    pub x: Vec<S>,
    /// Row duals; `objective == sum(duals[i] * rhs[i])`.
    pub duals: Vec<S>,
}

impl<S: Scalar> LpProblem<S> {
    pub fn new(vars: usize, maximize: bool) -> Self {
        LpProblem {
            maximize,
            objective: vec![S::zero(); vars],
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, S)>, sense: Sense, rhs: S) {
        self.rows.push((coeffs, sense, rhs));
    }
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    obj: Vec<S>,
    basis: Vec<usize>,
    width: usize,
}

const BLAND_AFTER: usize = 50;

impl<S: Scalar> Tableau<S> {
    fn rhs(&self, i: usize) -> &S {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        let row: Vec<S> = self.rows[r].iter().map(|x| x.clone() / p.clone()).collect();
        for (i, other) in self.rows.iter_mut().enumerate() {
            if i == r || other[c].is_zero() {
                continue;
            }
            let f = other[c].clone();
            for (x, y) in other.iter_mut().zip(&row) {
                if !y.is_zero() {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
            other[c] = S::zero();
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (x, y) in self.obj.iter_mut().zip(&row) {
                if !y.is_zero() {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
            self.obj[c] = S::zero();
        }
        self.rows[r] = row;
        self.basis[r] = c;
    }

    /// Minimizes the objective row over columns `< allowed`.
    fn optimize(&mut self, allowed: usize, max_iter: usize) -> Result<()> {
        let mut degenerate = 0;
        for _ in 0..max_iter {
            let entering = if degenerate < BLAND_AFTER {
                let mut best: Option<usize> = None;
                for j in 0..allowed {
                    if self.obj[j].is_neg() && best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                        best = Some(j);
                    }
                }
                best
            } else {
                (0..allowed).find(|&j| self.obj[j].is_neg())
            };
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_pos() {
                    continue;
                }
                let mut rhs = self.rhs(i).clone();
                if rhs.is_negative() {
                    rhs = S::zero();
                }
                let ratio = rhs / a.clone();
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            if ratio.near_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::IterationLimit(max_iter))
    }
}

/// Two-phase simplex on a dense tableau. Dantzig pricing, switching to
/// Bland's rule after a run of degenerate pivots.
pub fn solve_explicit_lp<S: Scalar>(p: &LpProblem<S>) -> Result<LpSolution<S>> {
    let n = p.vars();
    let m = p.rows.len();
    let mut flipped = vec![false; m];
    let mut senses = Vec::with_capacity(m);
    for (i, (_, sense, rhs)) in p.rows.iter().enumerate() {
        let mut s = *sense;
        if rhs.is_negative() {
            flipped[i] = true;
            s = match s {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        senses.push(s);
    }
    let slack_count = senses.iter().filter(|s| **s != Sense::Eq).count();
    let art_count = senses.iter().filter(|s| **s != Sense::Le).count();
    let art_start = n + slack_count;
    let width = art_start + art_count;
    let mut rows = vec![vec![S::zero(); width + 1]; m];
    let mut basis = vec![0; m];
    let mut ident = vec![0; m];
    let (mut next_slack, mut next_art) = (n, art_start);
    for (i, (coeffs, _, rhs)) in p.rows.iter().enumerate() {
        let sign = if flipped[i] { -S::one() } else { S::one() };
        for (j, a) in coeffs {
            rows[i][*j] = rows[i][*j].clone() + sign.clone() * a.clone();
        }
        rows[i][width] = sign * rhs.clone();
        match senses[i] {
            Sense::Le => {
                rows[i][next_slack] = S::one();
                basis[i] = next_slack;
                ident[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                rows[i][next_slack] = -S::one();
                next_slack += 1;
                rows[i][next_art] = S::one();
                basis[i] = next_art;
                ident[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                rows[i][next_art] = S::one();
                basis[i] = next_art;
                ident[i] = next_art;
                next_art += 1;
            }
        }
    }
    let max_iter = 50 * (m + width + 10);
    let mut t = Tableau {
        rows,
        obj: vec![S::zero(); width + 1],
        basis,
        width,
    };
    if art_count > 0 {
        for j in art_start..width {
            t.obj[j] = S::one();
        }
        for i in 0..m {
            if t.basis[i] >= art_start {
                for j in 0..=width {
                    t.obj[j] = t.obj[j].clone() - t.rows[i][j].clone();
                }
            }
        }
        t.optimize(width, max_iter)?;
        let infeas = -t.obj[width].clone();
        if infeas.is_pos() {
            return Err(Error::Infeasible);
        }
        for i in 0..m {
            if t.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| !t.rows[i][j].near_zero()) {
                    t.pivot(i, j);
                }
            }
        }
    }
    let cost: Vec<S> = (0..width)
        .map(|j| {
            if j < n {
                if p.maximize {
                    -p.objective[j].clone()
                } else {
                    p.objective[j].clone()
                }
            } else {
                S::zero()
            }
        })
        .collect();
    let mut obj: Vec<S> = cost.clone();
    obj.push(S::zero());
    for i in 0..m {
        let cb = cost[t.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..=width {
            obj[j] = obj[j].clone() - cb.clone() * t.rows[i][j].clone();
        }
    }
    t.obj = obj;
    t.optimize(art_start, max_iter)?;
    let mut x = vec![S::zero(); n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i).clone();
        }
    }
    let mut duals = Vec::with_capacity(m);
    for i in 0..m {
        let mut y = S::zero();
        for k in 0..m {
            let cb = &cost[t.basis[k]];
            if !cb.is_zero() {
                y = y + cb.clone() * t.rows[k][ident[i]].clone();
            }
        }
        if flipped[i] {
            y = -y;
        }
        if p.maximize {
            y = -y;
        }
        duals.push(y);
    }
    let objective = S::sum(
        p.objective
            .iter()
            .zip(&x)
            .map(|(c, v)| c.clone() * v.clone()),
    );
    Ok(LpSolution {
        objective,
        x,
        duals,
    })
}
