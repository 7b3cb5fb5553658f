//! K-weighted bisimulation on the states of a weighted automaton.
//!
//! An equivalence `R` is a weighted bisimulation when related states have the
//! same output and, for every letter and every class `C` of `R`, the same
//! total weight into `C`. The largest one is computed by signature
//! refinement: start from the partition by output and split blocks by their
//! per-letter class sums until nothing changes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::automata::WeightedAutomaton;
use crate::error::{Error, Result};
use crate::linalg::StateId;
use crate::semiring::Semiring;

pub use crate::partition::Partition;

/// Why a partition fails to be a weighted bisimulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BisimWitness<K> {
    Output {
        x1: StateId,
        x2: StateId,
        o1: K,
        o2: K,
    },
    Transition {
        x1: StateId,
        x2: StateId,
        letter: String,
        block: Vec<StateId>,
        w1: K,
        w2: K,
    },
}

impl<K: Semiring> fmt::Display for BisimWitness<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BisimWitness::Output { x1, x2, o1, o2 } => {
                write!(f, "o({x1}) = {o1} but o({x2}) = {o2}")
            }
            BisimWitness::Transition {
                x1,
                x2,
                letter,
                block,
                w1,
                w2,
            } => {
                let block: Vec<&str> = block.iter().map(StateId::as_str).collect();
                write!(
                    f,
                    "on `{letter}` into {{{}}}: {x1} has weight {w1} but {x2} has weight {w2}",
                    block.join(",")
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BisimVerdict<K> {
    Bisimulation,
    Violation(BisimWitness<K>),
}

impl<K> BisimVerdict<K> {
    pub fn is_ok(&self) -> bool {
        matches!(self, BisimVerdict::Bisimulation)
    }
}

/// Total weight from `x` on `letter` into each block, indexed like `partition.blocks()`.
pub fn class_sums<K: Semiring>(
    aut: &WeightedAutomaton<K>,
    x: &str,
    letter: &str,
    block_index: &BTreeMap<StateId, usize>,
    blocks: usize,
) -> Result<Vec<K>> {
    let mut sums = vec![K::zero(); blocks];
    if let Some(col) = aut.transition(letter)?.column(x) {
        for (y, k) in col.iter() {
            let b = block_index[y];
            sums[b] = sums[b].plus(k);
        }
    }
    Ok(sums)
}

fn check_cover<K: Semiring>(aut: &WeightedAutomaton<K>, partition: &Partition) -> Result<()> {
    Partition::new(aut.states(), partition.blocks().to_vec()).map(|_| ())
}

/// Checks both bisimulation conditions; returns the first violation found
/// (blocks in order, each member compared against the block's least member).
pub fn is_weighted_bisimulation<K: Semiring>(
    aut: &WeightedAutomaton<K>,
    partition: &Partition,
) -> Result<BisimVerdict<K>> {
    check_cover(aut, partition)?;
    let index = partition.block_index();
    for block in partition.blocks() {
        let rep = &block[0];
        let o_rep = aut.output_of(rep.as_str());
        for x in &block[1..] {
            let o_x = aut.output_of(x.as_str());
            if o_x != o_rep {
                return Ok(BisimVerdict::Violation(BisimWitness::Output {
                    x1: rep.clone(),
                    x2: x.clone(),
                    o1: o_rep,
                    o2: o_x,
                }));
            }
        }
        for letter in aut.alphabet() {
            let rep_sums = class_sums(aut, rep.as_str(), letter, &index, partition.len())?;
            for x in &block[1..] {
                let sums = class_sums(aut, x.as_str(), letter, &index, partition.len())?;
                if let Some(b) = (0..partition.len()).find(|&b| sums[b] != rep_sums[b]) {
                    return Ok(BisimVerdict::Violation(BisimWitness::Transition {
                        x1: rep.clone(),
                        x2: x.clone(),
                        letter: letter.clone(),
                        block: partition.blocks()[b].clone(),
                        w1: rep_sums[b].clone(),
                        w2: sums[b].clone(),
                    }));
                }
            }
        }
    }
    Ok(BisimVerdict::Bisimulation)
}

fn group_by<S: Eq + std::hash::Hash>(
    states: &[StateId],
    mut key: impl FnMut(&StateId) -> S,
) -> Partition {
    let mut groups: HashMap<S, Vec<StateId>> = HashMap::new();
    for s in states {
        groups.entry(key(s)).or_default().push(s.clone());
    }
    Partition::normalized(groups.into_values().collect())
}

/// The largest weighted bisimulation `~w`, with the number of refinement
/// rounds that changed the partition.
pub fn largest_weighted_bisimulation_with_rounds<K: Semiring>(
    aut: &WeightedAutomaton<K>,
) -> (Partition, usize) {
    let states = aut.states();
    let mut current = group_by(states, |x| aut.output_of(x.as_str()));
    let mut rounds = 0;
    loop {
        let index = current.block_index();
        let next = group_by(states, |x| {
            let sig: Vec<Vec<K>> = aut
                .alphabet()
                .iter()
                .map(|a| {
                    class_sums(aut, x.as_str(), a, &index, current.len())
                        .expect("letters come from the alphabet")
                })
                .collect();
            (index[x], sig)
        });
        if next.len() == current.len() {
            return (current, rounds);
        }
        current = next;
        rounds += 1;
    }
}

/// The largest weighted bisimulation `~w` on `aut`.
pub fn largest_weighted_bisimulation<K: Semiring>(aut: &WeightedAutomaton<K>) -> Partition {
    largest_weighted_bisimulation_with_rounds(aut).0
}

/// A failed instance of the homomorphism equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomWitness<K> {
    Output {
        x: StateId,
        src: K,
        dst: K,
    },
    Transition {
        x: StateId,
        letter: String,
        target: StateId,
        src: K,
        dst: K,
    },
}

impl<K: Semiring> fmt::Display for HomWitness<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomWitness::Output { x, src, dst } => {
                write!(f, "o({x}) = {src} but o(h({x})) = {dst}")
            }
            HomWitness::Transition {
                x,
                letter,
                target,
                src,
                dst,
            } => write!(
                f,
                "on `{letter}`: weight from {x} into h⁻¹({target}) is {src} but t(h({x}))({target}) = {dst}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomVerdict<K> {
    Homomorphism,
    Violation(HomWitness<K>),
}

impl<K> HomVerdict<K> {
    pub fn is_ok(&self) -> bool {
        matches!(self, HomVerdict::Homomorphism)
    }
}

/// Checks that `h` commutes with outputs and with class-summed transitions:
/// `o_X(x) = o_Y(h x)` and `Σ_{x'∈h⁻¹(y)} t_X(x)(a)(x') = t_Y(h x)(a)(y)`.
pub fn is_w_homomorphism<K: Semiring>(
    src: &WeightedAutomaton<K>,
    dst: &WeightedAutomaton<K>,
    state_map: &BTreeMap<StateId, StateId>,
) -> Result<HomVerdict<K>> {
    if src.alphabet() != dst.alphabet() {
        return Err(Error::Usage("automata have different alphabets".into()));
    }
    for x in src.states() {
        match state_map.get(x) {
            None => return Err(Error::Usage(format!("state map undefined on `{x}`"))),
            Some(y) if !dst.has_state(y.as_str()) => {
                return Err(Error::Usage(format!("`{y}` is not a target state")))
            }
            Some(_) => {}
        }
    }
    for x in src.states() {
        let (o_src, o_dst) = (src.output_of(x.as_str()), dst.output_of(state_map[x].as_str()));
        if o_src != o_dst {
            return Ok(HomVerdict::Violation(HomWitness::Output {
                x: x.clone(),
                src: o_src,
                dst: o_dst,
            }));
        }
    }
    for x in src.states() {
        let hx = &state_map[x];
        for a in src.alphabet() {
            let mut pushed: BTreeMap<&StateId, K> = BTreeMap::new();
            if let Some(col) = src.transition(a)?.column(x.as_str()) {
                for (x2, k) in col.iter() {
                    let y = &state_map[x2];
                    let prev = pushed.remove(y).unwrap_or_else(K::zero);
                    pushed.insert(y, prev.plus(k));
                }
            }
            for y in dst.states() {
                let lhs = pushed.get(y).cloned().unwrap_or_else(K::zero);
                let rhs = dst.weight(hx.as_str(), a, y.as_str());
                if lhs != rhs {
                    return Ok(HomVerdict::Violation(HomWitness::Transition {
                        x: x.clone(),
                        letter: a.clone(),
                        target: y.clone(),
                        src: lhs,
                        dst: rhs,
                    }));
                }
            }
        }
    }
    Ok(HomVerdict::Homomorphism)
}

/// `ker(h)` as a partition of `states`.
pub fn kernel_partition(states: &[StateId], state_map: &BTreeMap<StateId, StateId>) -> Partition {
    Partition::from_key(states, |x| state_map[x].clone())
}

/// The canonical map `ε_R` sending each state to its block's least member,
/// which is how [`WeightedAutomaton::quotient`] names blocks.
pub fn canonical_projection(partition: &Partition) -> BTreeMap<StateId, StateId> {
    partition
        .blocks()
        .iter()
        .flat_map(|b| b.iter().map(move |s| (s.clone(), b[0].clone())))
        .collect()
}
