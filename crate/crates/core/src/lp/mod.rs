//! Linear programming: a dense two-phase tableau solver for explicit LPs and
//! a revised simplex driver for column generation.

mod explicit;
mod revised;

pub use explicit::{solve_explicit_lp, LpProblem, LpSolution, Sense};
pub use revised::{
    revised_simplex, BasisState, Column, ColumnKind, Priced, Pricer, SimplexOptions, SimplexRun,
};
