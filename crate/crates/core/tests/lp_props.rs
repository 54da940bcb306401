//! Property tests pitting the two LP backends against each other on random
//! feasible, bounded models. Agreement here is the main defense against a
//! silent sign or indexing slip in either backend, since the simplex and the
//! interior-point method share no code.

use dcflex_core::lp::{
    dual_objective, max_violation, ClarabelSolver, LpModel, LpOutcome, Relation, SimplexSolver,
    SolveLp,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct RandomLp {
    model: LpModel,
}

/// Builds an LP that is feasible (a known point satisfies every row) and
/// bounded (every variable is boxed).
fn random_lp() -> impl Strategy<Value = RandomLp> {
    let var = (
        -50.0f64..0.0,
        0.0f64..50.0,
        prop::num::f64::NORMAL.prop_map(|c| c % 10.0),
    );
    let vars = prop::collection::vec(var, 1..8);
    vars.prop_flat_map(|vars| {
        let n = vars.len();
        let point = prop::collection::vec(0.0f64..1.0, n);
        let row = (
            prop::collection::vec(-5.0f64..5.0, n),
            prop_oneof![Just(Relation::Le), Just(Relation::Eq), Just(Relation::Ge)],
            0.0f64..10.0,
        );
        let rows = prop::collection::vec(row, 0..8);
        (Just(vars), point, rows).prop_map(|(vars, point, rows)| {
            let mut model = LpModel::new();
            let ids: Vec<_> = vars
                .iter()
                .enumerate()
                .map(|(i, &(lo, hi, c))| model.add_var(format!("x{i}"), lo, hi, c))
                .collect();
            // Interior-ish witness point keeps equality rows satisfiable.
            let witness: Vec<f64> = vars
                .iter()
                .zip(&point)
                .map(|(&(lo, hi, _), t)| lo + t * (hi - lo))
                .collect();
            for (k, (coefs, rel, slack)) in rows.into_iter().enumerate() {
                let lhs: f64 = coefs.iter().zip(&witness).map(|(c, x)| c * x).sum();
                let rhs = match rel {
                    Relation::Le => lhs + slack,
                    Relation::Ge => lhs - slack,
                    Relation::Eq => lhs,
                };
                let terms: Vec<_> = ids.iter().copied().zip(coefs).collect();
                model.add_con(format!("r{k}"), terms, rel, rhs);
            }
            RandomLp { model }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn backends_agree_and_duality_holds(lp in random_lp()) {
        let simplex = SimplexSolver::default();
        let clarabel = ClarabelSolver::default();
        let a = simplex.solve(&lp.model).unwrap();
        let b = clarabel.solve(&lp.model).unwrap();
        let (sa, sb) = match (a, b) {
            (LpOutcome::Optimal(sa), LpOutcome::Optimal(sb)) => (sa, sb),
            (other_a, other_b) => {
                panic!("feasible bounded LP not solved: simplex={other_a:?} ipm={other_b:?}")
            }
        };
        let scale = 1.0 + sa.objective().abs();
        prop_assert!(
            (sa.objective() - sb.objective()).abs() <= 1e-5 * scale,
            "objectives diverge: {} vs {}", sa.objective(), sb.objective()
        );
        prop_assert!(max_violation(&lp.model, sa.primal()) <= 1e-6 * scale);
        prop_assert!(max_violation(&lp.model, sb.primal()) <= 1e-5 * scale);
        // Strong duality, checked per backend on its own duals.
        for sol in [&sa, &sb] {
            let gap = (dual_objective(&lp.model, sol) - sol.objective()).abs();
            prop_assert!(gap <= 1e-5 * scale, "duality gap {gap}");
        }
    }
}
