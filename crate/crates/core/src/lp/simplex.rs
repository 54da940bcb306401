//! Dense two-phase revised simplex over bounded variables.
//!
//! This is the dependency-free reference backend. It keeps an explicit basis
//! inverse, so iterations cost O(m^2); fine for the small models it is routed
//! (toy grids, per-datacenter plans, unit tests), hopeless for the joint
//! multi-day programs, which go to the interior-point backend instead.
//!
//! Phase 1 installs slacks as the starting basis where the row residual fits
//! the slack's range and unit-cost artificials where it does not. Phase 2
//! fixes the artificials at zero and optimizes the real objective from the
//! feasible basis. Entering variables are picked by largest reduced-cost
//! violation, switching to Bland's rule after a long degenerate streak so
//! cycling cannot occur.

use super::{max_violation, LpError, LpModel, LpOutcome, LpSolution, Relation, SolveLp};

#[derive(Debug, Clone)]
pub struct SimplexSolver {
    /// Absolute feasibility tolerance on bounds and rows.
    pub feas_tol: f64,
    /// Absolute reduced-cost tolerance for optimality.
    pub opt_tol: f64,
    /// Iteration cap; 0 derives one from the model size.
    pub max_iter: usize,
}

impl Default for SimplexSolver {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            max_iter: 0,
        }
    }
}

impl SolveLp for SimplexSolver {
    fn solve(&self, model: &LpModel) -> Result<LpOutcome, LpError> {
        model.validate()?;
        if model.num_cons() == 0 {
            return Ok(solve_unconstrained(model));
        }
        let mut t = Tableau::build(model, self);
        match t.run()? {
            Status::Optimal => {}
            Status::Infeasible => return Ok(LpOutcome::Infeasible),
            Status::Unbounded => return Ok(LpOutcome::Unbounded),
        }
        let primal: Vec<f64> = t.x[..t.nstruct].to_vec();
        let objective: f64 = model
            .vars
            .iter()
            .zip(&primal)
            .map(|(v, x)| v.obj * x)
            .sum();
        let dual = t.duals();
        let viol = max_violation(model, &primal);
        let scale = 1.0 + t.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if viol > 1e-6 * scale {
            return Err(LpError::SolverFailure(format!(
                "simplex reported optimal but worst residual is {viol:.3e}"
            )));
        }
        Ok(LpOutcome::Optimal(LpSolution {
            objective,
            primal,
            dual,
        }))
    }
}

/// No rows: every variable sits at the bound its cost prefers.
fn solve_unconstrained(model: &LpModel) -> LpOutcome {
    let mut primal = Vec::with_capacity(model.num_vars());
    for v in &model.vars {
        let x = if v.obj > 0.0 {
            if v.lo.is_finite() {
                v.lo
            } else {
                return LpOutcome::Unbounded;
            }
        } else if v.obj < 0.0 {
            if v.hi.is_finite() {
                v.hi
            } else {
                return LpOutcome::Unbounded;
            }
        } else if v.lo.is_finite() {
            v.lo
        } else if v.hi.is_finite() {
            v.hi
        } else {
            0.0
        };
        primal.push(x);
    }
    let objective = model.vars.iter().zip(&primal).map(|(v, x)| v.obj * x).sum();
    LpOutcome::Optimal(LpSolution {
        objective,
        primal,
        dual: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stat {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable parked at zero.
    Free,
}

enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

enum Step {
    /// Entering variable crosses to its other bound; basis unchanged.
    Flip(f64),
    /// Basic variable in `row` blocks after step `t`.
    Pivot { row: usize, t: f64, to_lower: bool },
    Unbounded,
}

struct Tableau {
    m: usize,
    nstruct: usize,
    /// Structurals, then one slack per row, then artificials.
    cols: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Phase-2 objective (zero on slacks and artificials).
    cost: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    stat: Vec<Stat>,
    x: Vec<f64>,
    /// Row-major m-by-m basis inverse.
    binv: Vec<f64>,
    n_artificial: usize,
    opt_tol: f64,
    max_iter: usize,
}

impl Tableau {
    fn build(model: &LpModel, cfg: &SimplexSolver) -> Self {
        let m = model.num_cons();
        let nstruct = model.num_vars();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nstruct];
        let mut lo: Vec<f64> = model.vars.iter().map(|v| v.lo).collect();
        let mut hi: Vec<f64> = model.vars.iter().map(|v| v.hi).collect();
        let mut cost: Vec<f64> = model.vars.iter().map(|v| v.obj).collect();
        let mut b = Vec::with_capacity(m);

        for (r, con) in model.cons.iter().enumerate() {
            // Merge duplicate mentions of a variable within the row.
            let mut merged: std::collections::BTreeMap<usize, f64> = Default::default();
            for &(v, c) in &con.terms {
                *merged.entry(v).or_insert(0.0) += c;
            }
            for (v, c) in merged {
                if c != 0.0 {
                    cols[v].push((r, c));
                }
            }
            b.push(con.rhs);
        }

        // Nonbasic starting point: nearest finite bound, zero for free vars.
        let mut x = vec![0.0; nstruct];
        let mut stat = vec![Stat::Free; nstruct];
        for j in 0..nstruct {
            if lo[j].is_finite() {
                x[j] = lo[j];
                stat[j] = Stat::Lower;
            } else if hi[j].is_finite() {
                x[j] = hi[j];
                stat[j] = Stat::Upper;
            }
        }

        // Row residuals at the starting point decide slack vs artificial.
        let mut resid = b.clone();
        for j in 0..nstruct {
            if x[j] != 0.0 {
                for &(r, c) in &cols[j] {
                    resid[r] -= c * x[j];
                }
            }
        }

        let mut basis = vec![usize::MAX; m];
        for (r, con) in model.cons.iter().enumerate() {
            let (slo, shi) = match con.rel {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            let sj = cols.len();
            cols.push(vec![(r, 1.0)]);
            lo.push(slo);
            hi.push(shi);
            cost.push(0.0);
            let clamped = resid[r].clamp(slo, shi);
            if clamped == resid[r] {
                basis[r] = sj;
                x.push(resid[r]);
                stat.push(Stat::Basic);
            } else {
                x.push(clamped);
                stat.push(if clamped == slo { Stat::Lower } else { Stat::Upper });
            }
        }
        let mut n_artificial = 0;
        for r in 0..m {
            if basis[r] != usize::MAX {
                continue;
            }
            let rem = resid[r] - x[nstruct + r];
            let aj = cols.len();
            cols.push(vec![(r, rem.signum())]);
            lo.push(0.0);
            hi.push(f64::INFINITY);
            cost.push(0.0);
            x.push(rem.abs());
            stat.push(Stat::Basic);
            basis[r] = aj;
            n_artificial += 1;
        }

        // Starting basis is diagonal (slacks/artificials), so its inverse is
        // the signs of the basic columns.
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0 / cols[basis[r]][0].1;
        }

        let max_iter = if cfg.max_iter > 0 {
            cfg.max_iter
        } else {
            (20_000 + 100 * (m + cols.len())).min(400_000)
        };
        Tableau {
            m,
            nstruct,
            cols,
            lo,
            hi,
            cost,
            b,
            basis,
            stat,
            x,
            binv,
            n_artificial,
            opt_tol: cfg.opt_tol,
            max_iter,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.nstruct + self.m
    }

    fn run(&mut self) -> Result<Status, LpError> {
        if self.n_artificial > 0 {
            match self.iterate(true)? {
                Status::Optimal => {}
                s => return Ok(s),
            }
            let infeas: f64 = (self.nstruct + self.m..self.cols.len())
                .map(|j| self.x[j])
                .sum();
            let scale = 1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if infeas > 1e-7 * scale {
                return Ok(Status::Infeasible);
            }
            self.retire_artificials();
        }
        self.iterate(false)
    }

    /// Pins every artificial to zero, pivoting basic ones out where a real
    /// column can take their row. Rows where none can are redundant and keep
    /// their artificial basic at zero, now fixed.
    fn retire_artificials(&mut self) {
        for r in 0..self.m {
            let a = self.basis[r];
            if !self.is_artificial(a) {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.nstruct + self.m {
                if self.stat[j] == Stat::Basic {
                    continue;
                }
                // Only row r of B^-1 * a_j matters for eligibility.
                let piv: f64 = self.cols[j]
                    .iter()
                    .map(|&(ri, c)| self.binv[r * self.m + ri] * c)
                    .sum();
                if piv.abs() > 1e-7 && best.map_or(true, |(_, p)| piv.abs() > p.abs()) {
                    best = Some((j, piv));
                }
            }
            if let Some((j, _)) = best {
                let w = self.ftran(j);
                let xj = self.x[j];
                self.replace_basis(r, j, &w);
                // Degenerate swap: values are untouched.
                self.x[j] = xj;
                self.stat[a] = Stat::Lower;
                self.x[a] = 0.0;
            }
        }
        for j in self.nstruct + self.m..self.cols.len() {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
        }
    }

    fn phase_cost(&self, phase1: bool, j: usize) -> f64 {
        if phase1 {
            if self.is_artificial(j) {
                1.0
            } else {
                0.0
            }
        } else {
            self.cost[j]
        }
    }

    /// y = c_B * B^-1 for the active phase's costs.
    fn dual_row(&self, phase1: bool) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let cb = self.phase_cost(phase1, self.basis[r]);
            if cb != 0.0 {
                for k in 0..m {
                    y[k] += cb * self.binv[r * m + k];
                }
            }
        }
        y
    }

    fn duals(&self) -> Vec<f64> {
        self.dual_row(false)
    }

    fn reduced_cost(&self, y: &[f64], phase1: bool, j: usize) -> f64 {
        let mut d = self.phase_cost(phase1, j);
        for &(r, c) in &self.cols[j] {
            d -= y[r] * c;
        }
        d
    }

    /// Entering column and step direction (+1 away from lower, -1 away from
    /// upper), or None when the phase is optimal.
    fn price(&self, y: &[f64], phase1: bool, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            if self.stat[j] == Stat::Basic || self.lo[j] == self.hi[j] {
                continue;
            }
            if !phase1 && self.is_artificial(j) {
                continue;
            }
            let d = self.reduced_cost(y, phase1, j);
            let dir = match self.stat[j] {
                Stat::Lower if d < -self.opt_tol => 1.0,
                Stat::Upper if d > self.opt_tol => -1.0,
                Stat::Free if d.abs() > self.opt_tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.map_or(true, |(_, _, score)| d.abs() > score) {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(r, c) in &self.cols[j] {
            for i in 0..m {
                w[i] += self.binv[i * m + r] * c;
            }
        }
        w
    }

    /// Maximum step for entering column q moving in direction `dir`; basic
    /// values change by -dir * t * w.
    fn ratio_test(&self, q: usize, dir: f64, w: &[f64]) -> Step {
        let mut t_best = if self.lo[q].is_finite() && self.hi[q].is_finite() {
            self.hi[q] - self.lo[q]
        } else {
            f64::INFINITY
        };
        let mut blocker: Option<(usize, bool)> = None;
        let wmax = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let piv_tol = 1e-9 * (1.0 + wmax);
        for r in 0..self.m {
            let delta = dir * w[r];
            let jb = self.basis[r];
            let (t, to_lower) = if delta > piv_tol {
                if !self.lo[jb].is_finite() {
                    continue;
                }
                ((self.x[jb] - self.lo[jb]) / delta, true)
            } else if delta < -piv_tol {
                if !self.hi[jb].is_finite() {
                    continue;
                }
                ((self.x[jb] - self.hi[jb]) / delta, false)
            } else {
                continue;
            };
            let t = t.max(0.0);
            // Strict improvement, or an equal step through a sturdier pivot.
            let take = match blocker {
                None => t < t_best,
                Some((rb, _)) => {
                    t < t_best - 1e-12 || (t <= t_best + 1e-12 && w[r].abs() > w[rb].abs())
                }
            };
            if take {
                t_best = t.min(t_best);
                blocker = Some((r, to_lower));
            }
        }
        match blocker {
            Some((row, to_lower)) => Step::Pivot {
                row,
                t: t_best,
                to_lower,
            },
            None if t_best.is_finite() => Step::Flip(t_best),
            None => Step::Unbounded,
        }
    }

    fn replace_basis(&mut self, row: usize, q: usize, w: &[f64]) {
        let m = self.m;
        let piv = w[row];
        for i in 0..m {
            if i != row {
                let f = w[i] / piv;
                if f != 0.0 {
                    for k in 0..m {
                        self.binv[i * m + k] -= f * self.binv[row * m + k];
                    }
                }
            }
        }
        for k in 0..m {
            self.binv[row * m + k] /= piv;
        }
        self.basis[row] = q;
        self.stat[q] = Stat::Basic;
    }

    /// Rebuild B^-1 and basic values from scratch to shed accumulated drift.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut bmat = vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for &(ri, c) in &self.cols[j] {
                bmat[ri * m + r] = c;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        // Gauss-Jordan with partial pivoting.
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_val = bmat[col * m + col].abs();
            for r in col + 1..m {
                if bmat[r * m + col].abs() > piv_val {
                    piv_row = r;
                    piv_val = bmat[r * m + col].abs();
                }
            }
            if piv_val < 1e-12 {
                return Err(LpError::SolverFailure(
                    "singular basis during refactorization".into(),
                ));
            }
            if piv_row != col {
                for k in 0..m {
                    bmat.swap(col * m + k, piv_row * m + k);
                    inv.swap(col * m + k, piv_row * m + k);
                }
            }
            let p = bmat[col * m + col];
            for k in 0..m {
                bmat[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for r in 0..m {
                if r != col {
                    let f = bmat[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            bmat[r * m + k] -= f * bmat[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;

        let mut rhs = self.b.clone();
        for j in 0..self.cols.len() {
            if self.stat[j] != Stat::Basic && self.x[j] != 0.0 {
                for &(r, c) in &self.cols[j] {
                    rhs[r] -= c * self.x[j];
                }
            }
        }
        for r in 0..m {
            let mut v = 0.0;
            for k in 0..m {
                v += self.binv[r * m + k] * rhs[k];
            }
            self.x[self.basis[r]] = v;
        }
        Ok(())
    }

    fn iterate(&mut self, phase1: bool) -> Result<Status, LpError> {
        let mut bland = false;
        let mut degen_streak = 0usize;
        for iter in 0..self.max_iter {
            if iter > 0 && iter % 512 == 0 {
                self.refactor()?;
            }
            let y = self.dual_row(phase1);
            let Some((q, dir)) = self.price(&y, phase1, bland) else {
                return Ok(Status::Optimal);
            };
            let w = self.ftran(q);
            match self.ratio_test(q, dir, &w) {
                Step::Unbounded => {
                    return if phase1 {
                        Err(LpError::SolverFailure(
                            "phase-1 descent unbounded; numerical breakdown".into(),
                        ))
                    } else {
                        Ok(Status::Unbounded)
                    };
                }
                Step::Flip(t) => {
                    self.apply_step(q, dir, t, &w);
                    self.stat[q] = match self.stat[q] {
                        Stat::Lower => Stat::Upper,
                        Stat::Upper => Stat::Lower,
                        s => s,
                    };
                    self.x[q] = if self.stat[q] == Stat::Upper {
                        self.hi[q]
                    } else {
                        self.lo[q]
                    };
                    degen_streak = 0;
                }
                Step::Pivot { row, t, to_lower } => {
                    let leaving = self.basis[row];
                    self.apply_step(q, dir, t, &w);
                    self.replace_basis(row, q, &w);
                    self.stat[leaving] = if to_lower { Stat::Lower } else { Stat::Upper };
                    self.x[leaving] = if to_lower {
                        self.lo[leaving]
                    } else {
                        self.hi[leaving]
                    };
                    if t <= 1e-12 {
                        degen_streak += 1;
                        if degen_streak > 500 {
                            bland = true;
                        }
                    } else {
                        degen_streak = 0;
                    }
                }
            }
        }
        Err(LpError::SolverFailure(format!(
            "iteration limit {} reached",
            self.max_iter
        )))
    }

    fn apply_step(&mut self, q: usize, dir: f64, t: f64, w: &[f64]) {
        if t == 0.0 {
            return;
        }
        self.x[q] += dir * t;
        for r in 0..self.m {
            if w[r] != 0.0 {
                self.x[self.basis[r]] -= dir * t * w[r];
            }
        }
    }
}
