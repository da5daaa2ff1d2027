use crate::error::{Error, Result};
use crate::netmodel::StreamRef;
use crate::num::Scalar;

/// Column classes in Bland order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColumnKind {
    Matching,
    Theta,
    Surplus(usize),
    Artificial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column<S> {
    pub kind: ColumnKind,
    /// Activated streams of a matching column, empty otherwise.
    pub arcs: Vec<StreamRef>,
    pub coeffs: Vec<S>,
    pub cost: S,
    /// Generation order, used for tie breaking among matching columns.
    pub id: usize,
}

impl<S> Column<S> {
    fn key(&self) -> (u8, usize) {
        match self.kind {
            ColumnKind::Matching => (0, self.id),
            ColumnKind::Theta => (1, 0),
            ColumnKind::Surplus(k) => (2, k),
            ColumnKind::Artificial => (3, 0),
        }
    }
}

/// Entering candidate: the reduced cost `eta` and its column.
#[derive(Debug, Clone)]
pub struct Priced<S> {
    pub eta: S,
    pub column: Column<S>,
}

pub trait Pricer<S> {
    /// Most negative reduced cost column for the simplex multipliers `duals`.
    fn price(&mut self, duals: &[S]) -> Result<Priced<S>>;
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub refactor_every: usize,
}

impl SimplexOptions {
    pub fn for_rows(m: usize) -> Self {
        SimplexOptions {
            max_iterations: 10 * m * m,
            refactor_every: 50,
        }
    }
}

/// Basic columns with the inverse basis matrix kept in product form; row `i`
/// of the basis belongs to `columns[i]`.
#[derive(Debug, Clone)]
pub struct BasisState<S> {
    pub columns: Vec<Column<S>>,
    pub rhs: Vec<S>,
    pub values: Vec<S>,
    inverse: Vec<Vec<S>>,
    next_id: usize,
    since_refactor: usize,
}

impl<S: Scalar> BasisState<S> {
    pub fn new(columns: Vec<Column<S>>, rhs: Vec<S>) -> Result<Self> {
        let next_id = columns.iter().map(|c| c.id + 1).max().unwrap_or(0);
        let mut st = BasisState {
            columns,
            rhs,
            values: Vec::new(),
            inverse: Vec::new(),
            next_id,
            since_refactor: 0,
        };
        st.refactor()?;
        if st.values.iter().any(|v| v.is_neg()) {
            return Err(Error::Numerical("initial basis is not primal feasible".into()));
        }
        Ok(st)
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    /// Recomputes the inverse from the basic columns by Gauss-Jordan
    /// elimination.
    pub fn refactor(&mut self) -> Result<()> {
        let m = self.rows();
        if self.columns.len() != m {
            return Err(Error::SingularBasis);
        }
        let mut a: Vec<Vec<S>> = (0..m)
            .map(|i| (0..m).map(|j| self.columns[j].coeffs[i].clone()).collect())
            .collect();
        let mut inv: Vec<Vec<S>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        for c in 0..m {
            let piv = (c..m)
                .filter(|&r| !a[r][c].is_zero())
                .max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())
                .ok_or(Error::SingularBasis)?;
            if a[piv][c].abs() <= S::tol() * S::from_int(1000) && !S::EXACT {
                return Err(Error::SingularBasis);
            }
            a.swap(c, piv);
            inv.swap(c, piv);
            let p = a[c][c].clone();
            for j in 0..m {
                a[c][j] = a[c][j].clone() / p.clone();
                inv[c][j] = inv[c][j].clone() / p.clone();
            }
            for r in 0..m {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for j in 0..m {
                    a[r][j] = a[r][j].clone() - f.clone() * a[c][j].clone();
                    inv[r][j] = inv[r][j].clone() - f.clone() * inv[c][j].clone();
                }
            }
        }
        self.inverse = inv;
        self.values = self.solve(&self.rhs);
        self.since_refactor = 0;
        Ok(())
    }

    /// `B^-1 u`.
    pub fn solve(&self, u: &[S]) -> Vec<S> {
        self.inverse
            .iter()
            .map(|row| {
                S::sum(
                    row.iter()
                        .zip(u)
                        .filter(|(_, b)| !b.is_zero())
                        .map(|(a, b)| a.clone() * b.clone()),
                )
            })
            .collect()
    }

    /// Simplex multipliers `p^T = c_B^T B^-1`.
    pub fn duals(&self) -> Vec<S> {
        let m = self.rows();
        (0..m)
            .map(|j| {
                S::sum((0..m).filter(|&i| !self.columns[i].cost.is_zero()).map(|i| {
                    self.columns[i].cost.clone() * self.inverse[i][j].clone()
                }))
            })
            .collect()
    }

    pub fn objective(&self) -> S {
        S::sum(
            self.columns
                .iter()
                .zip(&self.values)
                .map(|(c, v)| c.cost.clone() * v.clone()),
        )
    }

    /// Value of the basic column of `kind`, zero when nonbasic.
    pub fn value_of(&self, kind: ColumnKind) -> S {
        self.columns
            .iter()
            .zip(&self.values)
            .find(|(c, _)| c.kind == kind)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(S::zero)
    }

    fn pivot(&mut self, r: usize, d: &[S], mut column: Column<S>) -> Result<()> {
        let m = self.rows();
        let dr = d[r].clone();
        let step = self.values[r].clone() / dr.clone();
        for i in 0..m {
            if i == r {
                continue;
            }
            if !d[i].is_zero() {
                self.values[i] = self.values[i].clone() - step.clone() * d[i].clone();
            }
        }
        self.values[r] = step;
        let pivot_row: Vec<S> = self.inverse[r].iter().map(|x| x.clone() / dr.clone()).collect();
        for i in 0..m {
            if i == r || d[i].is_zero() {
                continue;
            }
            let f = d[i].clone();
            for j in 0..m {
                self.inverse[i][j] = self.inverse[i][j].clone() - f.clone() * pivot_row[j].clone();
            }
        }
        self.inverse[r] = pivot_row;
        if column.kind == ColumnKind::Matching {
            column.id = self.next_id;
            self.next_id += 1;
        }
        self.columns[r] = column;
        self.since_refactor += 1;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimplexRun<S> {
    pub state: BasisState<S>,
    pub iterations: usize,
    /// Objective value after each pivot, starting with the initial basis.
    pub objective_trace: Vec<S>,
}

/// Minimizes `f^T x` over `U x = g, x >= 0` with columns supplied by `pricer`.
/// Entering columns come from the pricer; the leaving row follows the
/// minimum ratio test with ties broken by column class, then index.
pub fn revised_simplex<S: Scalar, P: Pricer<S>>(
    mut state: BasisState<S>,
    pricer: &mut P,
    opts: SimplexOptions,
) -> Result<SimplexRun<S>> {
    let mut trace = vec![state.objective()];
    let mut iterations = 0;
    loop {
        let duals = state.duals();
        let priced = pricer.price(&duals)?;
        if !priced.eta.is_neg() {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::IterationLimit(opts.max_iterations));
        }
        let d = state.solve(&priced.column.coeffs);
        let mut leave: Option<(usize, S)> = None;
        for i in 0..state.rows() {
            if !d[i].is_pos() {
                continue;
            }
            let mut x = state.values[i].clone();
            if x.is_negative() {
                x = S::zero();
            }
            let ratio = x / d[i].clone();
            let better = match &leave {
                None => true,
                Some((r, best)) => {
                    ratio < *best
                        || (ratio == *best && state.columns[i].key() < state.columns[*r].key())
                }
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Unbounded);
        };
        state.pivot(r, &d, priced.column)?;
        if state.since_refactor >= opts.refactor_every {
            state.refactor()?;
        }
        iterations += 1;
        trace.push(state.objective());
        log::trace!("simplex iteration {iterations}: objective {}", trace.last().unwrap());
    }
    Ok(SimplexRun {
        state,
        iterations,
        objective_trace: trace,
    })
}
