//! Budgeted conjugacy test via super summit sets.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::garside::{all_simple_elements, normal_form, words_equal, NormalForm, PermutationBraid};
use super::word::{cycle_type, BraidWord, WordError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotConjugateReason {
    ExponentSum,
    PermutationCycleType,
    SummitBounds,
    SuperSummitSetsDisjoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ConjugacyVerdict {
    /// `witness⁻¹ · w₁ · witness = w₂`.
    Yes { witness: BraidWord },
    No { reason: NotConjugateReason },
    Unknown { explored: usize },
}

impl ConjugacyVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ConjugacyVerdict::Yes { .. } => "yes",
            ConjugacyVerdict::No { .. } => "no",
            ConjugacyVerdict::Unknown { .. } => "unknown",
        }
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, ConjugacyVerdict::Yes { .. })
    }
}

/// Default number of normal-form conjugations the summit search may spend.
pub const DEFAULT_BUDGET: usize = 200_000;

fn simple_word(s: &PermutationBraid) -> BraidWord {
    BraidWord::new(s.n().max(1), s.to_letters()).expect("letters in range")
}

/// Conjugates into the super summit set by iterated cycling and decycling.
/// Returns the representative and the accumulated conjugator c with c⁻¹·w·c = x.
fn to_super_summit(w: &BraidWord, budget: &mut usize) -> (NormalForm, BraidWord) {
    let n = w.n_strands();
    let delta_len = n * n.saturating_sub(1) / 2;
    let mut x = normal_form(w);
    let mut conj = BraidWord::identity(n);

    let mut tries = 0;
    let mut best = (x.clone(), conj.clone());
    while tries <= delta_len && *budget > 0 {
        let (y, c) = x.cycling();
        *budget = budget.saturating_sub(1);
        conj = conj.concat(&simple_word(&c)).expect("same n");
        x = y;
        if x.inf > best.0.inf {
            best = (x.clone(), conj.clone());
            tries = 0;
        } else {
            tries += 1;
        }
    }
    let (mut x, mut conj) = best;
    let mut best = (x.clone(), conj.clone());
    tries = 0;
    while tries <= delta_len && *budget > 0 {
        let (y, a) = x.decycling();
        *budget = budget.saturating_sub(1);
        conj = conj.concat(&simple_word(&a).inverse()).expect("same n");
        x = y;
        if x.sup() < best.0.sup() {
            best = (x.clone(), conj.clone());
            tries = 0;
        } else {
            tries += 1;
        }
    }
    best.1 = best.1.reduce();
    best
}

/// Decides whether `w1` and `w2` are conjugate, spending at most `budget`
/// normal-form conjugations in the summit search.
pub fn are_conjugate(w1: &BraidWord, w2: &BraidWord, budget: usize) -> Result<ConjugacyVerdict, WordError> {
    let n = w1.n_strands();
    if n != w2.n_strands() {
        return Err(WordError::StrandMismatch(n, w2.n_strands()));
    }
    if w1.exponent_sum() != w2.exponent_sum() {
        return Ok(ConjugacyVerdict::No { reason: NotConjugateReason::ExponentSum });
    }
    if cycle_type(&w1.permutation()) != cycle_type(&w2.permutation()) {
        return Ok(ConjugacyVerdict::No { reason: NotConjugateReason::PermutationCycleType });
    }
    // conjugators of length at most one
    let mut short = vec![BraidWord::identity(n)];
    for i in 1..n as i32 {
        short.push(BraidWord::new(n, vec![i]).expect("in range"));
        short.push(BraidWord::new(n, vec![-i]).expect("in range"));
    }
    let mut budget = budget;
    for u in &short {
        if budget == 0 {
            return Ok(ConjugacyVerdict::Unknown { explored: 0 });
        }
        budget -= 1;
        if words_equal(&w1.conjugate_by(u)?, w2)? {
            return Ok(ConjugacyVerdict::Yes { witness: u.clone() });
        }
    }

    let (x1, c1) = to_super_summit(w1, &mut budget);
    let (x2, c2) = to_super_summit(w2, &mut budget);
    if budget == 0 {
        return Ok(ConjugacyVerdict::Unknown { explored: 0 });
    }
    if x1.inf != x2.inf || x1.sup() != x2.sup() {
        return Ok(ConjugacyVerdict::No { reason: NotConjugateReason::SummitBounds });
    }

    // breadth-first search of the super summit set of x1; parents record d
    let simples: Vec<PermutationBraid> = all_simple_elements(n).into_iter().filter(|s| !s.is_identity()).collect();
    let mut parent: HashMap<NormalForm, Option<(NormalForm, PermutationBraid)>> = HashMap::new();
    parent.insert(x1.clone(), None);
    let mut queue = VecDeque::from([x1.clone()]);
    let mut found = x1 == x2;
    let (inf, sup) = (x1.inf, x1.sup());
    while !found {
        let Some(x) = queue.pop_front() else { break };
        if budget < simples.len() {
            return Ok(ConjugacyVerdict::Unknown { explored: parent.len() });
        }
        budget -= simples.len();
        let next: Vec<(NormalForm, &PermutationBraid)> = simples
            .par_iter()
            .map(|s| (x.conjugate_by_simple(s), s))
            .filter(|(y, _)| y.inf == inf && y.sup() == sup)
            .collect();
        for (y, s) in next {
            if parent.contains_key(&y) {
                continue;
            }
            parent.insert(y.clone(), Some((x.clone(), s.clone())));
            if y == x2 {
                found = true;
                break;
            }
            queue.push_back(y);
        }
    }
    if !found {
        return Ok(ConjugacyVerdict::No { reason: NotConjugateReason::SuperSummitSetsDisjoint });
    }

    // d with d⁻¹·x1·d = x2, built from the parent chain
    let mut chain = Vec::new();
    let mut cur = x2.clone();
    while let Some(Some((prev, s))) = parent.get(&cur) {
        chain.push(s.clone());
        cur = prev.clone();
    }
    let mut d = BraidWord::identity(n);
    for s in chain.iter().rev() {
        d = d.concat(&simple_word(s))?;
    }
    let witness = c1.concat(&d)?.concat(&c2.inverse())?.reduce();
    debug_assert!(words_equal(&w1.conjugate_by(&witness)?, w2)?);
    if !words_equal(&w1.conjugate_by(&witness)?, w2)? {
        return Ok(ConjugacyVerdict::Unknown { explored: parent.len() });
    }
    Ok(ConjugacyVerdict::Yes { witness })
}

/// Re-checks a verdict: witnesses must conjugate, reasons must re-derive.
pub fn verify_verdict(w1: &BraidWord, w2: &BraidWord, v: &ConjugacyVerdict) -> Result<bool, WordError> {
    Ok(match v {
        ConjugacyVerdict::Yes { witness } => words_equal(&w1.conjugate_by(witness)?, w2)?,
        ConjugacyVerdict::No { reason } => match reason {
            NotConjugateReason::ExponentSum => w1.exponent_sum() != w2.exponent_sum(),
            NotConjugateReason::PermutationCycleType => {
                cycle_type(&w1.permutation()) != cycle_type(&w2.permutation())
            }
            NotConjugateReason::SummitBounds | NotConjugateReason::SuperSummitSetsDisjoint => {
                let mut b = usize::MAX;
                let (x1, _) = to_super_summit(w1, &mut b);
                let (x2, _) = to_super_summit(w2, &mut b);
                match reason {
                    NotConjugateReason::SummitBounds => x1.inf != x2.inf || x1.sup() != x2.sup(),
                    _ => matches!(are_conjugate(w1, w2, usize::MAX)?, ConjugacyVerdict::No { .. }),
                }
            }
        },
        ConjugacyVerdict::Unknown { .. } => true,
    })
}
