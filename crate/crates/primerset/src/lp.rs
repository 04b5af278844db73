//! Dense two-phase primal simplex for small linear programs.
//!
//! Problems are stated as minimization over nonnegative variables with
//! optional upper bounds and `>=` / `<=` rows. Pivoting follows Bland's
//! rule, so runs are deterministic and never cycle. The scalar type is
//! generic over [`LpScalar`]; `f64` is the intended type, `f32` works with
//! looser tolerances.

use std::fmt;

use num_traits::{Float, NumAssign, NumCast};
use thiserror::Error;

pub trait LpScalar:
    Float + NumAssign + std::iter::Sum + fmt::Debug + fmt::Display + 'static
{
    fn default_tol() -> Self {
        NumCast::from(1e-9).unwrap()
    }
}

impl LpScalar for f64 {}

impl LpScalar for f32 {
    fn default_tol() -> Self {
        1e-4
    }
}

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("row {row:?}: unknown variable id {var}")]
    UnknownVar { row: String, var: VarId },
    #[error("row {row:?}: variable {var} appears twice")]
    DuplicateVar { row: String, var: VarId },
    #[error("variable {var:?}: negative upper bound")]
    NegativeUpperBound { var: String },
    #[error("tableau would need {cells} cells, over the limit of {limit} (MPSSL_LP_MAX_CELLS)")]
    TooLarge { cells: u64, limit: u64 },
}

#[derive(Debug, Clone)]
struct Variable<T> {
    name: String,
    objective: T,
    upper: Option<T>,
}

#[derive(Debug, Clone)]
struct Row<T> {
    name: String,
    sense: Sense,
    rhs: T,
    terms: Vec<(VarId, T)>,
}

/// A minimization problem over variables `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LpProblem<T> {
    vars: Vec<Variable<T>>,
    rows: Vec<Row<T>>,
}

impl<T: LpScalar> LpProblem<T> {
    pub fn new() -> Self {
        LpProblem {
            vars: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a variable with the given objective coefficient and optional
    /// upper bound; the lower bound is always 0.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        objective: T,
        upper: Option<T>,
    ) -> Result<VarId, LpError> {
        let name = name.into();
        if let Some(u) = upper {
            if u < T::zero() {
                return Err(LpError::NegativeUpperBound { var: name });
            }
        }
        self.vars.push(Variable {
            name,
            objective,
            upper,
        });
        Ok(self.vars.len() - 1)
    }

    /// Adds a `sum(terms) sense rhs` row. Zero coefficients are dropped;
    /// duplicate or unknown variables are rejected.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: Sense,
        rhs: T,
        terms: &[(VarId, T)],
    ) -> Result<(), LpError> {
        let name = name.into();
        let mut kept: Vec<(VarId, T)> = Vec::with_capacity(terms.len());
        for &(var, coeff) in terms {
            if var >= self.vars.len() {
                return Err(LpError::UnknownVar { row: name, var });
            }
            if terms.iter().filter(|&&(v, _)| v == var).count() > 1 {
                return Err(LpError::DuplicateVar { row: name, var });
            }
            if coeff != T::zero() {
                kept.push((var, coeff));
            }
        }
        self.rows.push(Row {
            name,
            sense,
            rhs,
            terms: kept,
        });
        Ok(())
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.vars[var].name
    }

    pub fn objective_value(&self, values: &[T]) -> T {
        self.vars
            .iter()
            .zip(values)
            .map(|(v, &x)| v.objective * x)
            .sum()
    }

    /// Names of the rows and bounds `values` violates beyond `tol`; empty
    /// means feasible.
    pub fn check_feasible(&self, values: &[T], tol: T) -> Vec<String> {
        let mut violated = Vec::new();
        for (i, v) in self.vars.iter().enumerate() {
            if values[i] < -tol {
                violated.push(format!("{} >= 0", v.name));
            }
            if let Some(u) = v.upper {
                if values[i] > u + tol {
                    violated.push(format!("{} <= {}", v.name, u));
                }
            }
        }
        for row in &self.rows {
            let lhs: T = row.terms.iter().map(|&(v, c)| c * values[v]).sum();
            let ok = match row.sense {
                Sense::Ge => lhs >= row.rhs - tol,
                Sense::Le => lhs <= row.rhs + tol,
            };
            if !ok {
                violated.push(row.name.clone());
            }
        }
        violated
    }
}

impl<T: LpScalar> fmt::Display for LpProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "min")?;
        for (i, v) in self.vars.iter().enumerate() {
            if v.objective != T::zero() {
                write!(f, " {} {}", if i > 0 { "+" } else { "" }, v.objective)?;
                write!(f, " {}", v.name)?;
            }
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "  {}:", row.name)?;
            for (i, &(var, c)) in row.terms.iter().enumerate() {
                write!(f, " {}{} {}", if i > 0 { "+ " } else { "" }, c, self.vars[var].name)?;
            }
            let op = match row.sense {
                Sense::Ge => ">=",
                Sense::Le => "<=",
            };
            writeln!(f, " {} {}", op, row.rhs)?;
        }
        for v in &self.vars {
            match v.upper {
                Some(u) => writeln!(f, "  0 <= {} <= {}", v.name, u)?,
                None => writeln!(f, "  0 <= {}", v.name)?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// One value per variable; empty unless `status == Optimal`.
    pub values: Vec<T>,
    /// Objective at `values`; NaN unless `status == Optimal`.
    pub objective: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<T> {
    pub feas_tol: T,
    pub opt_tol: T,
    pub max_iters: usize,
    pub max_cells: u64,
}

/// Tableau cell limit: 50 million unless `MPSSL_LP_MAX_CELLS` overrides it.
pub fn lp_max_cells() -> u64 {
    std::env::var("MPSSL_LP_MAX_CELLS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(50_000_000)
}

impl<T: LpScalar> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            feas_tol: T::default_tol(),
            opt_tol: T::default_tol(),
            max_iters: 50_000,
            max_cells: lp_max_cells(),
        }
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>, // m rows, each n_cols coefficients then the rhs
    obj: Vec<T>,       // reduced costs then the negated objective value
    basis: Vec<usize>,
    n_cols: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn rhs(&self, i: usize) -> T {
        self.rows[i][self.n_cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let scale = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= scale;
        }
        self.rows[r][c] = T::one();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c];
            if factor != T::zero() {
                for j in 0..=self.n_cols {
                    let d = self.rows[r][j] * factor;
                    self.rows[i][j] -= d;
                }
                self.rows[i][c] = T::zero();
            }
        }
        let factor = self.obj[c];
        if factor != T::zero() {
            for j in 0..=self.n_cols {
                let d = self.rows[r][j] * factor;
                self.obj[j] -= d;
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Bland's rule: entering column is the lowest-index eligible one,
    /// leaving row breaks ratio ties toward the lowest basic index.
    /// Returns the status, leaving `Optimal` for "no entering column".
    fn run(
        &mut self,
        enterable: usize,
        opts: &SolveOptions<T>,
        iterations: &mut usize,
    ) -> LpStatus {
        loop {
            let entering = (0..enterable).find(|&j| self.obj[j] < -opts.opt_tol);
            let Some(c) = entering else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > opts.feas_tol {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best || (ratio == best && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return LpStatus::Unbounded;
            };
            self.pivot(r, c);
            *iterations += 1;
            if *iterations >= opts.max_iters {
                return LpStatus::IterationLimit;
            }
        }
    }
}

/// Solves the problem with the two-phase simplex method. Upper bounds
/// become explicit `<=` rows; `>=` rows get surplus and artificial
/// variables; phase one minimizes the artificials and phase two the real
/// objective.
pub fn solve_lp<T: LpScalar>(
    problem: &LpProblem<T>,
    opts: &SolveOptions<T>,
) -> Result<LpSolution<T>, LpError> {
    let n = problem.vars.len();

    // size the tableau before any dense allocation: flipping a negative rhs
    // turns Ge into Le and vice versa, and upper-bound rows are always Le
    let n_ub = problem.vars.iter().filter(|v| v.upper.is_some()).count();
    let m = problem.rows.len() + n_ub;
    let n_art = problem
        .rows
        .iter()
        .filter(|r| (r.sense == Sense::Ge) != (r.rhs < T::zero()))
        .count();
    let n_cols = n + m + n_art; // structural, slack or surplus, artificial
    let cells = (m as u64 + 1) * (n_cols as u64 + 1);
    if cells > opts.max_cells {
        return Err(LpError::TooLarge {
            cells,
            limit: opts.max_cells,
        });
    }

    // normalized rows: dense coefficients, rhs >= 0, needs_artificial
    let mut dense: Vec<(Vec<T>, T, bool)> = Vec::new();
    for row in &problem.rows {
        let mut coeffs = vec![T::zero(); n];
        for &(v, c) in &row.terms {
            coeffs[v] = c;
        }
        let mut rhs = row.rhs;
        let mut sense = row.sense;
        if rhs < T::zero() {
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
            rhs = -rhs;
            sense = match sense {
                Sense::Ge => Sense::Le,
                Sense::Le => Sense::Ge,
            };
        }
        dense.push((coeffs, rhs, sense == Sense::Ge));
    }
    for (v, var) in problem.vars.iter().enumerate() {
        if let Some(u) = var.upper {
            let mut coeffs = vec![T::zero(); n];
            coeffs[v] = T::one();
            dense.push((coeffs, u, false));
        }
    }

    debug_assert_eq!(m, dense.len());
    debug_assert_eq!(n_art, dense.iter().filter(|&&(_, _, ge)| ge).count());

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        obj: vec![T::zero(); n_cols + 1],
        basis: vec![0; m],
        n_cols,
    };
    let mut art = n + m;
    for (i, (coeffs, rhs, ge)) in dense.iter().enumerate() {
        let mut row = vec![T::zero(); n_cols + 1];
        row[..n].copy_from_slice(coeffs);
        row[n_cols] = *rhs;
        if *ge {
            row[n + i] = -T::one(); // surplus
            row[art] = T::one();
            t.basis[i] = art;
            art += 1;
        } else {
            row[n + i] = T::one(); // slack
            t.basis[i] = n + i;
        }
        t.rows.push(row);
    }

    let mut iterations = 0;

    // phase one: minimize the artificial sum; reduced costs start as the
    // negated sum of the artificial rows
    if n_art > 0 {
        for i in 0..m {
            if t.basis[i] >= n + m {
                for j in 0..=n_cols {
                    let d = t.rows[i][j];
                    t.obj[j] -= d;
                }
            }
        }
        for a in n + m..n_cols {
            t.obj[a] = T::zero();
        }
        let status = t.run(n + m, opts, &mut iterations);
        match status {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => {
                return Ok(LpSolution {
                    status,
                    values: Vec::new(),
                    objective: T::nan(),
                    iterations,
                })
            }
            _ => unreachable!("phase one is bounded"),
        }
        let infeas = -t.obj[n_cols];
        if infeas > opts.feas_tol {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective: T::nan(),
                iterations,
            });
        }
        // drive leftover basic artificials out; rows with no real
        // coefficients are redundant and stay inert
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(c) =
                    (0..n + m).find(|&j| t.rows[i][j].abs() > opts.feas_tol)
                {
                    t.pivot(i, c);
                }
            }
        }
    }

    // phase two: restore the real objective and price out the basis
    for j in 0..=n_cols {
        t.obj[j] = T::zero();
    }
    for (v, var) in problem.vars.iter().enumerate() {
        t.obj[v] = var.objective;
    }
    for i in 0..m {
        let b = t.basis[i];
        let factor = t.obj[b];
        if factor != T::zero() {
            for j in 0..=n_cols {
                let d = t.rows[i][j] * factor;
                t.obj[j] -= d;
            }
            t.obj[b] = T::zero();
        }
    }
    let status = t.run(n + m, opts, &mut iterations);
    if status != LpStatus::Optimal {
        return Ok(LpSolution {
            status,
            values: Vec::new(),
            objective: T::nan(),
            iterations,
        });
    }

    let mut values = vec![T::zero(); n];
    for i in 0..m {
        if t.basis[i] < n {
            values[t.basis[i]] = t.rhs(i).max(T::zero());
        }
    }
    let objective = problem.objective_value(&values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        iterations,
    })
}
