//! Linear programming layer shared by every optimization in this crate.
//!
//! Models are always minimization problems over bounded continuous variables
//! with `<=` / `==` / `>=` row constraints. Two interchangeable backends sit
//! behind [`SolveLp`]: a dense two-phase simplex ([`SimplexSolver`]) that has
//! no third-party dependencies, and a sparse interior-point backend
//! ([`ClarabelSolver`]) for the larger models. [`AutoSolver`] picks between
//! them by model size and is what callers normally want.
//!
//! Dual values follow the sensitivity convention: the dual of a row is the
//! derivative of the optimal objective with respect to that row's right-hand
//! side. For a minimization problem that makes equality-row duals signed,
//! `<=`-row duals nonpositive and `>=`-row duals nonnegative. Nodal prices
//! downstream are exactly these duals, so the convention is load-bearing.

mod clarabel_backend;
mod simplex;

pub use clarabel_backend::ClarabelSolver;
pub use simplex::SimplexSolver;

use std::fmt::Write as _;

use thiserror::Error;

/// Handle to a variable in one [`LpModel`]. Only meaningful for the model
/// that created it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(pub(crate) usize);

/// Handle to a constraint row in one [`LpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ConId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct VarDef {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub obj: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ConDef {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

/// A linear program: minimize `c'x` subject to row constraints and variable
/// bounds. Build incrementally with [`add_var`](Self::add_var) and
/// [`add_con`](Self::add_con), then hand to a [`SolveLp`] backend.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub(crate) vars: Vec<VarDef>,
    pub(crate) cons: Vec<ConDef>,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("invalid model:\n{}", issues.join("\n"))]
    Invalid { issues: Vec<String> },
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with bounds `[lo, hi]` (either side may be infinite,
    /// `lo == hi` fixes the variable) and objective coefficient `obj`.
    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: f64, obj: f64) -> VarId {
        self.vars.push(VarDef {
            name: name.into(),
            lo,
            hi,
            obj,
        });
        VarId(self.vars.len() - 1)
    }

    /// Adds the row `sum(coef * var) rel rhs`. Duplicate variable mentions
    /// are merged at solve time.
    pub fn add_con(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        rel: Relation,
        rhs: f64,
    ) -> ConId {
        self.cons.push(ConDef {
            name: name.into(),
            terms: terms.into_iter().map(|(v, c)| (v.0, c)).collect(),
            rel,
            rhs,
        });
        ConId(self.cons.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_cons(&self) -> usize {
        self.cons.len()
    }

    /// Structural checks: bound ordering, finite coefficients, and that every
    /// row references variables of this model. Collects every offense rather
    /// than stopping at the first.
    pub fn validate(&self) -> Result<(), LpError> {
        let mut issues = Vec::new();
        for (i, v) in self.vars.iter().enumerate() {
            if v.lo.is_nan() || v.hi.is_nan() {
                issues.push(format!("variable '{}' (#{i}) has NaN bounds", v.name));
            } else if v.lo > v.hi {
                issues.push(format!(
                    "variable '{}' (#{i}) has lower bound {} above upper bound {}",
                    v.name, v.lo, v.hi
                ));
            }
            if !v.obj.is_finite() {
                issues.push(format!(
                    "variable '{}' (#{i}) has non-finite objective coefficient {}",
                    v.name, v.obj
                ));
            }
        }
        for (i, c) in self.cons.iter().enumerate() {
            if !c.rhs.is_finite() {
                issues.push(format!(
                    "constraint '{}' (#{i}) has non-finite rhs {}",
                    c.name, c.rhs
                ));
            }
            for &(v, coef) in &c.terms {
                if v >= self.vars.len() {
                    issues.push(format!(
                        "constraint '{}' (#{i}) references unknown variable #{v}",
                        c.name
                    ));
                }
                if !coef.is_finite() {
                    issues.push(format!(
                        "constraint '{}' (#{i}) has non-finite coefficient {coef}",
                        c.name
                    ));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(LpError::Invalid { issues })
        }
    }

    /// Writes the model in CPLEX LP text format, for external inspection.
    /// Variables are emitted as `v{i}` and rows as `c{i}`; original names
    /// appear as comments since arbitrary strings are not LP-format safe.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ exported linear program\n");
        for (i, v) in self.vars.iter().enumerate() {
            let _ = writeln!(out, "\\ v{i} = {}", v.name);
        }
        for (i, c) in self.cons.iter().enumerate() {
            let _ = writeln!(out, "\\ c{i} = {}", c.name);
        }
        out.push_str("Minimize\n obj:");
        let mut first = true;
        for (i, v) in self.vars.iter().enumerate() {
            if v.obj != 0.0 {
                let _ = write!(out, " {}{} v{i}", sign_word(v.obj, first), v.obj.abs());
                first = false;
            }
        }
        if first {
            out.push_str(" 0 v0");
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.cons.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            let mut first = true;
            for &(v, coef) in &c.terms {
                if coef != 0.0 {
                    let _ = write!(out, " {}{} v{v}", sign_word(coef, first), coef.abs());
                    first = false;
                }
            }
            if first {
                out.push_str(" 0 v0");
            }
            let rel = match c.rel {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {rel} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (i, v) in self.vars.iter().enumerate() {
            let _ = match (v.lo.is_finite(), v.hi.is_finite()) {
                (true, true) => writeln!(out, " {} <= v{i} <= {}", v.lo, v.hi),
                (true, false) => writeln!(out, " v{i} >= {}", v.lo),
                (false, true) => writeln!(out, " -inf <= v{i} <= {}", v.hi),
                (false, false) => writeln!(out, " v{i} free"),
            };
        }
        out.push_str("End\n");
        out
    }
}

fn sign_word(x: f64, first: bool) -> &'static str {
    match (x < 0.0, first) {
        (true, _) => "- ",
        (false, true) => "",
        (false, false) => "+ ",
    }
}

/// Solution of an [`LpModel`] that reached optimality.
#[derive(Debug, Clone)]
pub struct LpSolution {
    objective: f64,
    primal: Vec<f64>,
    dual: Vec<f64>,
}

impl LpSolution {
    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Optimal value of a variable.
    pub fn value(&self, v: VarId) -> f64 {
        self.primal[v.0]
    }

    /// Sensitivity dual of a row: d(objective)/d(rhs).
    pub fn dual(&self, c: ConId) -> f64 {
        self.dual[c.0]
    }

    pub fn primal(&self) -> &[f64] {
        &self.primal
    }

    pub fn duals(&self) -> &[f64] {
        &self.dual
    }
}

/// Outcome of a solve: the status taxonomy callers must handle.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    /// Unwraps the optimal solution, mapping the other statuses to a
    /// [`LpError::SolverFailure`] tagged with `what` for context.
    pub fn expect_optimal(self, what: &str) -> Result<LpSolution, LpError> {
        match self {
            LpOutcome::Optimal(s) => Ok(s),
            LpOutcome::Infeasible => Err(LpError::SolverFailure(format!("{what}: infeasible"))),
            LpOutcome::Unbounded => Err(LpError::SolverFailure(format!("{what}: unbounded"))),
        }
    }
}

/// A backend able to solve [`LpModel`]s. Implementations must be safe to
/// share across threads; they hold tolerances, not per-solve state.
pub trait SolveLp: Send + Sync {
    fn solve(&self, model: &LpModel) -> Result<LpOutcome, LpError>;
}

/// Size-based router: dense simplex for small models (exact vertex solutions,
/// crisp duals), interior point for everything else.
#[derive(Debug, Clone)]
pub struct AutoSolver {
    pub simplex_limit: usize,
    simplex: SimplexSolver,
    clarabel: ClarabelSolver,
}

impl Default for AutoSolver {
    fn default() -> Self {
        Self {
            simplex_limit: 600,
            simplex: SimplexSolver::default(),
            clarabel: ClarabelSolver::default(),
        }
    }
}

impl SolveLp for AutoSolver {
    fn solve(&self, model: &LpModel) -> Result<LpOutcome, LpError> {
        if model.num_vars() + model.num_cons() <= self.simplex_limit {
            self.simplex.solve(model)
        } else {
            self.clarabel.solve(model)
        }
    }
}

/// The solver downstream code uses unless a caller overrides it.
pub fn default_solver() -> AutoSolver {
    AutoSolver::default()
}

/// Largest violation of bounds and row constraints at `primal`, in the units
/// of the constraints. Solver postconditions check this against a tolerance.
pub fn max_violation(model: &LpModel, primal: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (v, x) in model.vars.iter().zip(primal) {
        if v.lo.is_finite() {
            worst = worst.max(v.lo - x);
        }
        if v.hi.is_finite() {
            worst = worst.max(x - v.hi);
        }
    }
    for c in &model.cons {
        let lhs: f64 = c.terms.iter().map(|&(v, coef)| coef * primal[v]).sum();
        let r = lhs - c.rhs;
        let viol = match c.rel {
            Relation::Le => r,
            Relation::Ge => -r,
            Relation::Eq => r.abs(),
        };
        worst = worst.max(viol);
    }
    worst
}

/// Objective of the dual program at the reported duals, taking variable
/// bounds as implicit rows priced by the primal reduced costs. Equals the
/// primal objective at optimality (strong duality); tests lean on that.
pub fn dual_objective(model: &LpModel, sol: &LpSolution) -> f64 {
    // Reduced cost of each variable under the row duals.
    let mut red: Vec<f64> = model.vars.iter().map(|v| v.obj).collect();
    for (c, &y) in model.cons.iter().zip(&sol.dual) {
        for &(v, coef) in &c.terms {
            red[v] -= y * coef;
        }
    }
    let mut obj: f64 = model
        .cons
        .iter()
        .zip(&sol.dual)
        .map(|(c, &y)| y * c.rhs)
        .sum();
    // A positive reduced cost is supported by the lower bound, a negative one
    // by the upper; free variables must have zero reduced cost at optimality.
    for (v, &d) in model.vars.iter().zip(&red) {
        if d > 0.0 && v.lo.is_finite() {
            obj += d * v.lo;
        } else if d < 0.0 && v.hi.is_finite() {
            obj += d * v.hi;
        }
    }
    obj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backends() -> Vec<(&'static str, Box<dyn SolveLp>)> {
        vec![
            ("simplex", Box::new(SimplexSolver::default())),
            ("clarabel", Box::new(ClarabelSolver::default())),
        ]
    }

    #[test]
    fn minimize_single_bounded_var() {
        for (name, s) in backends() {
            let mut m = LpModel::new();
            let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
            m.add_con("floor", [(x, 1.0)], Relation::Ge, 3.0);
            let sol = s.solve(&m).unwrap().expect_optimal("t").unwrap();
            assert!((sol.objective() - 3.0).abs() < 1e-7, "{name}");
            assert!((sol.value(x) - 3.0).abs() < 1e-7, "{name}");
        }
    }

    #[test]
    fn equality_dual_is_unit() {
        for (name, s) in backends() {
            let mut m = LpModel::new();
            let x = m.add_var("x", 0.0, f64::INFINITY, 1.0);
            let y = m.add_var("y", 0.0, f64::INFINITY, 1.0);
            let c = m.add_con("sum", [(x, 1.0), (y, 1.0)], Relation::Eq, 5.0);
            let sol = s.solve(&m).unwrap().expect_optimal("t").unwrap();
            assert!((sol.objective() - 5.0).abs() < 1e-7, "{name}");
            assert!((sol.dual(c) - 1.0).abs() < 1e-6, "{name}: dual {}", sol.dual(c));
        }
    }

    #[test]
    fn conflicting_rows_are_infeasible() {
        for (name, s) in backends() {
            let mut m = LpModel::new();
            let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
            m.add_con("cap", [(x, 1.0)], Relation::Le, 1.0);
            m.add_con("floor", [(x, 1.0)], Relation::Ge, 2.0);
            match s.solve(&m).unwrap() {
                LpOutcome::Infeasible => {}
                other => panic!("{name}: expected infeasible, got {other:?}"),
            }
        }
    }

    #[test]
    fn free_descent_is_unbounded() {
        for (name, s) in backends() {
            let mut m = LpModel::new();
            let x = m.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
            m.add_con("cap", [(x, 1.0)], Relation::Le, 10.0);
            match s.solve(&m).unwrap() {
                LpOutcome::Unbounded => {}
                other => panic!("{name}: expected unbounded, got {other:?}"),
            }
        }
    }

    #[test]
    fn validation_reports_every_offense() {
        let mut m = LpModel::new();
        let x = m.add_var("x", 2.0, 1.0, 1.0);
        m.add_con("bad", [(x, f64::NAN)], Relation::Le, f64::INFINITY);
        m.cons[0].terms.push((99, 1.0));
        match m.validate() {
            Err(LpError::Invalid { issues }) => {
                assert_eq!(issues.len(), 4, "{issues:?}");
                assert!(issues.iter().any(|s| s.contains("'x'")));
                assert!(issues.iter().any(|s| s.contains("'bad'")));
            }
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn lp_format_round_trips_relations() {
        let mut m = LpModel::new();
        let x = m.add_var("x", 0.0, 4.0, -1.5);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        m.add_con("a", [(x, 1.0), (y, -2.0)], Relation::Le, 3.0);
        m.add_con("b", [(y, 1.0)], Relation::Eq, 0.5);
        let text = m.to_lp_format();
        assert!(text.contains("Minimize"));
        assert!(text.contains("c0: 1 v0 - 2 v1 <= 3"));
        assert!(text.contains("c1: 1 v1 = 0.5"));
        assert!(text.contains("0 <= v0 <= 4"));
        assert!(text.contains("v1 free"));
    }

    #[test]
    fn resolve_is_deterministic() {
        let m = {
            let mut m = LpModel::new();
            let x = m.add_var("x", 0.0, 10.0, 2.0);
            let y = m.add_var("y", 0.0, 10.0, 3.0);
            m.add_con("mix", [(x, 1.0), (y, 2.0)], Relation::Ge, 7.0);
            m
        };
        for (_, s) in backends() {
            let a = s.solve(&m).unwrap().expect_optimal("t").unwrap();
            let b = s.solve(&m).unwrap().expect_optimal("t").unwrap();
            let rel = (a.objective() - b.objective()).abs() / (1.0 + a.objective().abs());
            assert!(rel <= 1e-8);
            assert_eq!(a.primal(), b.primal());
        }
    }
}
