//! Interior-point backend on the clarabel conic solver.
//!
//! The model is lowered to clarabel's form `min q'x  s.t.  Ax + s = b,
//! s in K`: equality rows and fixed variables into the zero cone, inequality
//! rows and finite bounds into the nonnegative cone (with `>=` rows negated).
//! Clarabel reports the dual of `Ax + s = b` with the opposite sign from the
//! sensitivity convention this crate uses, so duals are flipped (and flipped
//! back again for the negated rows) on the way out.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus,
    SupportedConeT::{NonnegativeConeT, ZeroConeT},
};

use super::{max_violation, LpError, LpModel, LpOutcome, LpSolution, Relation, SolveLp};

#[derive(Debug, Clone)]
pub struct ClarabelSolver {
    /// Feasibility / duality-gap tolerance handed to the solver.
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

impl SolveLp for ClarabelSolver {
    fn solve(&self, model: &LpModel) -> Result<LpOutcome, LpError> {
        model.validate()?;
        let n = model.num_vars();

        // Triplets in (row, col, val) with equality rows first. `row_of[i]`
        // remembers where original row i landed, `negated[i]` whether it was
        // a >= row flipped into <=.
        let mut trips: Vec<(usize, usize, f64)> = Vec::new();
        let mut b = Vec::new();
        let mut row_of = vec![usize::MAX; model.num_cons()];
        let mut negated = vec![false; model.num_cons()];
        let mut next = 0usize;

        for (i, con) in model.cons.iter().enumerate() {
            if con.rel == Relation::Eq {
                row_of[i] = next;
                for &(v, c) in &con.terms {
                    trips.push((next, v, c));
                }
                b.push(con.rhs);
                next += 1;
            }
        }
        // Fixed variables join the zero cone as x_j = lo.
        for (j, v) in model.vars.iter().enumerate() {
            if v.lo == v.hi {
                trips.push((next, j, 1.0));
                b.push(v.lo);
                next += 1;
            }
        }
        let n_eq = next;

        for (i, con) in model.cons.iter().enumerate() {
            let sgn = match con.rel {
                Relation::Le => 1.0,
                Relation::Ge => {
                    negated[i] = true;
                    -1.0
                }
                Relation::Eq => continue,
            };
            row_of[i] = next;
            for &(v, c) in &con.terms {
                trips.push((next, v, sgn * c));
            }
            b.push(sgn * con.rhs);
            next += 1;
        }
        for (j, v) in model.vars.iter().enumerate() {
            if v.lo == v.hi {
                continue;
            }
            if v.hi.is_finite() {
                trips.push((next, j, 1.0));
                b.push(v.hi);
                next += 1;
            }
            if v.lo.is_finite() {
                trips.push((next, j, -1.0));
                b.push(-v.lo);
                next += 1;
            }
        }
        let n_ineq = next - n_eq;

        let a = csc_from_triplets(next, n, &mut trips);
        let p = CscMatrix::<f64>::zeros((n, n));
        let q: Vec<f64> = model.vars.iter().map(|v| v.obj).collect();
        let cones = [ZeroConeT(n_eq), NonnegativeConeT(n_ineq)];
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(self.max_iter)
            .tol_feas(self.tol)
            .tol_gap_abs(self.tol)
            .tol_gap_rel(self.tol)
            .build()
            .map_err(|e| LpError::SolverFailure(format!("settings: {e}")))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| LpError::SolverFailure(format!("setup: {e}")))?;
        solver.solve();

        match solver.solution.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => {}
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                return Ok(LpOutcome::Infeasible)
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                return Ok(LpOutcome::Unbounded)
            }
            other => {
                return Err(LpError::SolverFailure(format!(
                    "interior-point status {other:?}"
                )))
            }
        }

        let primal = solver.solution.x.clone();
        let dual: Vec<f64> = row_of
            .iter()
            .zip(&negated)
            .map(|(&r, &neg)| {
                let z = solver.solution.z[r];
                if neg {
                    z
                } else {
                    -z
                }
            })
            .collect();
        let viol = max_violation(model, &primal);
        let scale = 1.0 + b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if viol > 1e-6 * scale {
            return Err(LpError::SolverFailure(format!(
                "interior point converged loosely; worst residual {viol:.3e}"
            )));
        }
        Ok(LpOutcome::Optimal(LpSolution {
            objective: solver.solution.obj_val,
            primal,
            dual,
        }))
    }
}

fn csc_from_triplets(rows: usize, cols: usize, trips: &mut [(usize, usize, f64)]) -> CscMatrix<f64> {
    trips.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let mut colptr = vec![0usize; cols + 1];
    let mut rowval: Vec<usize> = Vec::with_capacity(trips.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(trips.len());
    let mut last = None;
    for &(r, c, v) in trips.iter() {
        if last == Some((c, r)) {
            // Duplicate (row, col) mentions accumulate.
            *nzval.last_mut().unwrap() += v;
        } else {
            rowval.push(r);
            nzval.push(v);
            colptr[c + 1] += 1;
            last = Some((c, r));
        }
    }
    for c in 0..cols {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(rows, cols, colptr, rowval, nzval)
}
