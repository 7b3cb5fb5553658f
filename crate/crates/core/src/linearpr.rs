//! Linear partition refinement along the final sequence.
//!
//! The congruence after `i` rounds is the kernel of a finite generator set
//! `F_i`: pairs of vectors on which every generator agrees. `F_0 = {o}`, and a
//! round composes the newest generators with each letter matrix, keeping only
//! rows that are not already in the span. When a round keeps nothing the
//! kernel is invariant under every `t_a`, contained in `ker(o)`, and equal to
//! weighted language equivalence.

use std::fmt;

use crate::automata::WeightedAutomaton;
use crate::error::{Error, Result};
use crate::language::Word;
use crate::linalg::{CongruencePresentation, Functional, StateId, Vector};
use crate::linsolve::{Redundancy, SpanSolver};
use crate::semiring::Semiring;

/// A generator row together with the word it evaluates: `row = σ_l(·)(word)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator<K> {
    pub word: Word,
    pub row: Functional<K>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementState<K> {
    iteration: usize,
    generators: Vec<Generator<K>>,
    frontier: Vec<usize>,
    stabilized: bool,
    rational_fallback: bool,
}

impl<K: Semiring> RefinementState<K> {
    /// `F_0 = {o}`.
    pub fn initial(aut: &WeightedAutomaton<K>) -> Self {
        RefinementState {
            iteration: 0,
            generators: vec![Generator {
                word: Word::empty(),
                row: aut.output().clone(),
            }],
            frontier: vec![0],
            stabilized: false,
            rational_fallback: false,
        }
    }

    /// The index `i` of the current generator set `F_i`.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn generators(&self) -> &[Generator<K>] {
        &self.generators
    }

    /// Generators added by the most recent round.
    pub fn frontier(&self) -> impl Iterator<Item = &Generator<K>> {
        self.frontier.iter().map(|&i| &self.generators[i])
    }

    pub fn is_stabilized(&self) -> bool {
        self.stabilized
    }

    /// True if some pruning decision relied on a span over ℚ rather than a
    /// nonnegative combination.
    pub fn used_rational_fallback(&self) -> bool {
        self.rational_fallback
    }

    pub fn rows(&self) -> Vec<Functional<K>> {
        self.generators.iter().map(|g| g.row.clone()).collect()
    }

    pub fn presentation(&self, states: &[StateId]) -> CongruencePresentation<K> {
        CongruencePresentation::new(states.to_vec(), self.rows())
    }
}

/// One round: `F_{i+1} = F_i ∪ {g∘t_a | g new in F_i, a ∈ A}` minus rows
/// already in the span. Candidates are tried generator by generator in
/// insertion order, letters in alphabet order.
pub fn refine_step<K: SpanSolver>(
    state: &RefinementState<K>,
    aut: &WeightedAutomaton<K>,
) -> Result<RefinementState<K>> {
    let mut next = state.clone();
    next.frontier.clear();
    for &gi in &state.frontier {
        for a in aut.alphabet() {
            let g = &state.generators[gi];
            let candidate = g.row.compose(aut.transition(a)?);
            let rows = next.rows();
            match K::kernel_redundant(&rows, &candidate) {
                Redundancy::Redundant { rational_fallback } => {
                    next.rational_fallback |= rational_fallback;
                }
                Redundancy::Independent => {
                    next.frontier.push(next.generators.len());
                    next.generators.push(Generator {
                        word: g.word.prepend(a),
                        row: candidate,
                    });
                }
                Redundancy::Unavailable(reason) => {
                    return Err(Error::SolverUnavailable {
                        semiring: K::DESCRIPTOR,
                        reason,
                    })
                }
            }
        }
    }
    next.iteration += 1;
    next.stabilized = next.frontier.is_empty();
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinementOutcome<K> {
    /// `F_j` and `F_{j+1}` have the same span; its kernel is `~l`.
    Stabilized {
        presentation: CongruencePresentation<K>,
        generators: Vec<Generator<K>>,
        iterations: usize,
        rational_fallback: bool,
    },
    /// Still growing after `max_iter` rounds. The generators are sound
    /// separators but their kernel may be coarser than `~l`.
    BoundExceeded {
        presentation: CongruencePresentation<K>,
        generators: Vec<Generator<K>>,
        max_iter: usize,
    },
}

impl<K: Semiring> RefinementOutcome<K> {
    pub fn presentation(&self) -> &CongruencePresentation<K> {
        match self {
            RefinementOutcome::Stabilized { presentation, .. }
            | RefinementOutcome::BoundExceeded { presentation, .. } => presentation,
        }
    }

    pub fn generators(&self) -> &[Generator<K>] {
        match self {
            RefinementOutcome::Stabilized { generators, .. }
            | RefinementOutcome::BoundExceeded { generators, .. } => generators,
        }
    }

    pub fn is_stabilized(&self) -> bool {
        matches!(self, RefinementOutcome::Stabilized { .. })
    }

    /// The first generator, in insertion order, on which `u` and `v` differ.
    /// Valid for either outcome: each generator is a word's weight functional.
    pub fn separating_word(&self, u: &Vector<K>, v: &Vector<K>) -> Option<(Word, K, K)> {
        self.generators().iter().find_map(|g| {
            let (l, r) = (g.row.apply(u), g.row.apply(v));
            (l != r).then(|| (g.word.clone(), l, r))
        })
    }
}

/// Default round budget: `|X| + 1` over a field, `4·|X|·|A|` otherwise.
pub fn default_max_iter<K: Semiring>(aut: &WeightedAutomaton<K>) -> usize {
    let n = aut.states().len();
    if K::DESCRIPTOR.is_field() {
        n + 1
    } else {
        (4 * n * aut.alphabet().len()).max(1)
    }
}

/// Runs rounds until the span stops growing or `max_iter` rounds have run.
pub fn run_refinement<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    max_iter: usize,
) -> Result<RefinementOutcome<K>> {
    if max_iter == 0 {
        return Err(Error::Usage("max_iter must be at least 1".into()));
    }
    let mut state = RefinementState::initial(aut);
    for _ in 0..max_iter {
        let next = refine_step(&state, aut)?;
        if next.is_stabilized() {
            return Ok(RefinementOutcome::Stabilized {
                presentation: next.presentation(aut.states()),
                iterations: state.iteration(),
                rational_fallback: next.used_rational_fallback(),
                generators: next.generators,
            });
        }
        state = next;
    }
    Ok(RefinementOutcome::BoundExceeded {
        presentation: state.presentation(aut.states()),
        generators: state.generators,
        max_iter,
    })
}

/// `u ~l v` read off a stabilized presentation.
pub fn decide_equiv<K: Semiring>(
    outcome: &RefinementOutcome<K>,
    u: &Vector<K>,
    v: &Vector<K>,
) -> Result<bool> {
    match outcome {
        RefinementOutcome::Stabilized { presentation, .. } => Ok(presentation.relates(u, v)),
        RefinementOutcome::BoundExceeded { max_iter, .. } => Err(Error::Usage(format!(
            "refinement did not stabilize within {max_iter} rounds"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearBisimVerdict<K> {
    /// `o` and every `g∘t_a` lie in the span of the generators, so the kernel
    /// is contained in `ker(o)` and invariant under each `t_a`.
    SufficientOk,
    NotCertified { row: Functional<K>, reason: String },
}

impl<K> LinearBisimVerdict<K> {
    pub fn is_ok(&self) -> bool {
        matches!(self, LinearBisimVerdict::SufficientOk)
    }
}

impl<K: Semiring> fmt::Display for LinearBisimVerdict<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearBisimVerdict::SufficientOk => f.write_str("linear bisimulation (certified)"),
            LinearBisimVerdict::NotCertified { row, reason } => {
                write!(f, "not certified: {reason}: {row}")
            }
        }
    }
}

/// Checks the span certificate for the kernel of `presentation` being a
/// K-linear bisimulation. Over a field a failure is a genuine refutation;
/// elsewhere it only means no certificate was found.
pub fn check_linear_bisimulation<K: SpanSolver>(
    presentation: &CongruencePresentation<K>,
    aut: &WeightedAutomaton<K>,
) -> Result<LinearBisimVerdict<K>> {
    let gens = presentation.generators();
    let check = |row: &Functional<K>, what: String| -> Result<Option<LinearBisimVerdict<K>>> {
        match K::kernel_redundant(gens, row) {
            Redundancy::Redundant { .. } => Ok(None),
            Redundancy::Independent => Ok(Some(LinearBisimVerdict::NotCertified {
                row: row.clone(),
                reason: what,
            })),
            Redundancy::Unavailable(reason) => Err(Error::SolverUnavailable {
                semiring: K::DESCRIPTOR,
                reason,
            }),
        }
    };
    if let Some(v) = check(aut.output(), "output row outside the span".into())? {
        return Ok(v);
    }
    for (i, g) in gens.iter().enumerate() {
        for a in aut.alphabet() {
            let row = g.compose(aut.transition(a)?);
            if let Some(v) = check(&row, format!("generator {i} composed with `{a}` outside the span"))? {
                return Ok(v);
            }
        }
    }
    Ok(LinearBisimVerdict::SufficientOk)
}
