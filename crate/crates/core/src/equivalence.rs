//! Exhaustive equivalence over all inputs up to a depth.

use crate::model::Decl;
use crate::semantics::{evaluate, Outcome, StepBudget};
use crate::trees::{trees_up_to_depth, RankedAlphabet, Tree};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result")]
pub enum Equivalence {
    Equal { depth: usize, checked: usize },
    Witness { input: Tree, left: Option<Tree>, right: Option<Tree> },
    /// a step budget ran out on this input
    Inconclusive { input: Tree },
}

impl Equivalence {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equivalence::Equal { .. })
    }
}

/// Compares two deterministic evaluable declarations on every tree over `alphabet`
/// of height ≤ depth, in canonical order; the first difference is the witness.
pub fn bounded_equivalence_over(
    d1: &Decl,
    d2: &Decl,
    alphabet: &RankedAlphabet,
    depth: usize,
    budget: &StepBudget,
) -> Equivalence {
    let trees = trees_up_to_depth(alphabet, depth);
    let n = trees.len();
    for s in trees {
        let l = evaluate(d1, &s, budget);
        let r = evaluate(d2, &s, budget);
        if matches!(l, Outcome::BudgetExhausted) || matches!(r, Outcome::BudgetExhausted) {
            return Equivalence::Inconclusive { input: s };
        }
        if l != r {
            return Equivalence::Witness {
                input: s,
                left: l.into_option(),
                right: r.into_option(),
            };
        }
    }
    Equivalence::Equal { depth, checked: n }
}

/// [`bounded_equivalence_over`] on the input alphabet of `d1`.
pub fn bounded_equivalence(d1: &Decl, d2: &Decl, depth: usize) -> Equivalence {
    bounded_equivalence_over(d1, d2, d1.input(), depth, &StepBudget::default())
}
