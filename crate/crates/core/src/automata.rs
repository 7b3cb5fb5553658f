//! Weighted automata over a semiring, their JSON file format, and the
//! constructions on them (quotient by a bisimulation, disjoint union).
//!
//! A [`WeightedAutomaton`] `(X, ⟨o, t⟩)` on a finite state set is also the
//! presentation of its linear automaton `(K(X), ⟨o♯, t♯⟩)`: the output row and
//! the per-letter matrices are the same data, read either on states or on
//! vectors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{weight_error, Functional, LinearMap, StateId, Vector};
use crate::partition::Partition;
use crate::semiring::{
    Boolean, Descriptor, Integer, MaxTimes, Natural, NonnegRational, Rational, Semiring, Tropical,
};
use crate::setbisim::{is_weighted_bisimulation, BisimVerdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedAutomaton<K> {
    states: Vec<StateId>,
    alphabet: Vec<String>,
    output: Functional<K>,
    transitions: BTreeMap<String, LinearMap<K>>,
}

/// Collects states, letters, outputs and edges, then validates them together.
#[derive(Clone, Debug)]
pub struct AutomatonBuilder<K> {
    states: Vec<(String, String)>,
    alphabet: Vec<(String, String)>,
    output: Vec<(String, String, K)>,
    edges: Vec<(String, String, String, String, K)>,
}

impl<K: Semiring> AutomatonBuilder<K> {
    pub fn new() -> Self {
        AutomatonBuilder {
            states: Vec::new(),
            alphabet: Vec::new(),
            output: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn state(mut self, id: &str) -> Self {
        let loc = format!("states[{}]", self.states.len());
        self.states.push((loc, id.to_string()));
        self
    }

    pub fn states<'a>(self, ids: impl IntoIterator<Item = &'a str>) -> Self {
        ids.into_iter().fold(self, |b, s| b.state(s))
    }

    pub fn letter(mut self, letter: &str) -> Self {
        let loc = format!("alphabet[{}]", self.alphabet.len());
        self.alphabet.push((loc, letter.to_string()));
        self
    }

    pub fn letters<'a>(self, letters: impl IntoIterator<Item = &'a str>) -> Self {
        letters.into_iter().fold(self, |b, l| b.letter(l))
    }

    pub fn output(mut self, state: &str, weight: K) -> Self {
        let loc = format!("output.{state}");
        self.output.push((loc, state.to_string(), weight));
        self
    }

    pub fn edge(mut self, from: &str, letter: &str, to: &str, weight: K) -> Self {
        let loc = format!("transitions[{}]", self.edges.len());
        self.edges.push((
            loc,
            from.to_string(),
            letter.to_string(),
            to.to_string(),
            weight,
        ));
        self
    }

    pub fn build(self) -> Result<WeightedAutomaton<K>> {
        let mut states = BTreeSet::new();
        for (loc, s) in &self.states {
            if !states.insert(StateId::from(s.as_str())) {
                return Err(Error::Duplicate {
                    location: loc.clone(),
                    name: s.clone(),
                });
            }
        }
        let mut alphabet = BTreeSet::new();
        for (loc, a) in &self.alphabet {
            if !alphabet.insert(a.clone()) {
                return Err(Error::Duplicate {
                    location: loc.clone(),
                    name: a.clone(),
                });
            }
        }
        let unknown_state = |loc: &str, s: &str| Error::UnknownState {
            location: loc.to_string(),
            state: s.to_string(),
        };

        let mut output = Vec::new();
        for (loc, s, k) in self.output {
            if !states.contains(s.as_str()) {
                return Err(unknown_state(&loc, &s));
            }
            output.push((s, k));
        }

        let mut columns: BTreeMap<String, BTreeMap<StateId, Vec<(StateId, K)>>> = alphabet
            .iter()
            .map(|a| (a.clone(), BTreeMap::new()))
            .collect();
        let mut seen = BTreeSet::new();
        for (loc, from, letter, to, k) in self.edges {
            if !states.contains(from.as_str()) {
                return Err(unknown_state(&format!("{loc}.from"), &from));
            }
            if !states.contains(to.as_str()) {
                return Err(unknown_state(&format!("{loc}.to"), &to));
            }
            let Some(per_letter) = columns.get_mut(&letter) else {
                return Err(Error::UnknownLetter {
                    location: format!("{loc}.letter"),
                    letter,
                });
            };
            if k.is_zero() {
                return Err(Error::ZeroWeight {
                    location: format!("{loc}.weight"),
                });
            }
            if !seen.insert((from.clone(), letter.clone(), to.clone())) {
                return Err(Error::DuplicateEdge {
                    location: loc,
                    from,
                    letter,
                    to,
                });
            }
            per_letter
                .entry(StateId::from(from))
                .or_default()
                .push((StateId::from(to), k));
        }

        let states: Vec<StateId> = states.into_iter().collect();
        let transitions = columns
            .into_iter()
            .map(|(a, cols)| {
                let cols = cols
                    .into_iter()
                    .map(|(x, entries)| (x, Vector::from_entries(entries)))
                    .collect();
                LinearMap::new(states.clone(), states.clone(), cols).map(|m| (a, m))
            })
            .collect::<Result<_>>()?;
        Ok(WeightedAutomaton {
            states,
            alphabet: alphabet.into_iter().collect(),
            output: Functional::from_entries(output),
            transitions,
        })
    }
}

impl<K: Semiring> Default for AutomatonBuilder<K> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonFile {
    semiring: String,
    alphabet: Vec<String>,
    states: Vec<String>,
    #[serde(default)]
    output: BTreeMap<String, String>,
    #[serde(default)]
    transitions: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    from: String,
    letter: String,
    to: String,
    weight: String,
}

fn read_header(json: &str) -> Result<(Descriptor, AutomatonFile)> {
    let file: AutomatonFile = serde_json::from_str(json)?;
    let descriptor = file.semiring.parse::<Descriptor>()?;
    Ok((descriptor, file))
}

fn from_file<K: Semiring>(file: AutomatonFile) -> Result<WeightedAutomaton<K>> {
    let mut b = AutomatonBuilder::new()
        .states(file.states.iter().map(String::as_str))
        .letters(file.alphabet.iter().map(String::as_str));
    for (s, w) in &file.output {
        let k = K::parse_weight(w).map_err(|e| weight_error::<K>(&format!("output.{s}"), w, e))?;
        b = b.output(s, k);
    }
    for (i, e) in file.transitions.iter().enumerate() {
        let k = K::parse_weight(&e.weight)
            .map_err(|err| weight_error::<K>(&format!("transitions[{i}].weight"), &e.weight, err))?;
        b = b.edge(&e.from, &e.letter, &e.to, k);
    }
    b.build()
}

impl<K: Semiring> WeightedAutomaton<K> {
    pub fn builder() -> AutomatonBuilder<K> {
        AutomatonBuilder::new()
    }

    /// Parses and validates the JSON file format. The file's `semiring` must
    /// name `K`.
    pub fn parse(json: &str) -> Result<Self> {
        let (descriptor, file) = read_header(json)?;
        if descriptor != K::DESCRIPTOR {
            return Err(Error::SemiringMismatch {
                expected: K::DESCRIPTOR,
                found: descriptor,
            });
        }
        from_file(file)
    }

    /// Canonical JSON: states, letters and edges in lexicographic order.
    pub fn serialize(&self) -> String {
        let file = AutomatonFile {
            semiring: K::DESCRIPTOR.name().to_string(),
            alphabet: self.alphabet.clone(),
            states: self.states.iter().map(|s| s.to_string()).collect(),
            output: self
                .output
                .row()
                .iter()
                .map(|(s, k)| (s.to_string(), k.to_string()))
                .collect(),
            transitions: self
                .edges()
                .map(|(from, letter, to, k)| EdgeRecord {
                    from: from.to_string(),
                    letter: letter.to_string(),
                    to: to.to_string(),
                    weight: k.to_string(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("plain data serializes");
        text.push('\n');
        text
    }

    pub fn descriptor(&self) -> Descriptor {
        K::DESCRIPTOR
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.states.binary_search_by(|s| s.as_str().cmp(state)).is_ok()
    }

    /// The output row `o`.
    pub fn output(&self) -> &Functional<K> {
        &self.output
    }

    pub fn output_of(&self, state: &str) -> K {
        self.output.get(state)
    }

    /// The matrix `t_a`, column per source state.
    pub fn transition(&self, letter: &str) -> Result<&LinearMap<K>> {
        self.transitions
            .get(letter)
            .ok_or_else(|| Error::Usage(format!("letter `{letter}` is not in the alphabet")))
    }

    /// `t(from)(letter)(to)`, zero when there is no edge.
    pub fn weight(&self, from: &str, letter: &str, to: &str) -> K {
        self.transitions
            .get(letter)
            .map_or_else(K::zero, |m| m.entry(from, to))
    }

    /// All edges ordered by (from, letter, to).
    pub fn edges(&self) -> impl Iterator<Item = (&StateId, &str, &StateId, &K)> {
        let mut edges: Vec<_> = self
            .transitions
            .iter()
            .flat_map(|(a, m)| {
                m.columns()
                    .flat_map(move |(x, col)| col.iter().map(move |(y, k)| (x, a.as_str(), y, k)))
            })
            .collect();
        edges.sort_by(|l, r| (l.0, l.1, l.2).cmp(&(r.0, r.1, r.2)));
        edges.into_iter()
    }

    /// One step of the linear automaton: `t♯(v)(letter)`.
    pub fn sigma_step(&self, v: &Vector<K>, letter: &str) -> Result<Vector<K>> {
        self.transition(letter)?.apply(v)
    }

    /// Quotient by a weighted bisimulation; block names are least members.
    ///
    /// The output of a block is the output of its representative and the
    /// weight from block `B` to block `C` on `a` is `Σ_{x'∈C} t(rep B)(a)(x')`.
    pub fn quotient(&self, partition: &Partition) -> Result<Self> {
        match is_weighted_bisimulation(self, partition)? {
            BisimVerdict::Bisimulation => {}
            BisimVerdict::Violation(w) => return Err(Error::NotABisimulation(w.to_string())),
        }
        let index = partition.block_index();
        let reps: Vec<&StateId> = (0..partition.len())
            .map(|i| partition.representative(i))
            .collect();
        let mut b = AutomatonBuilder::new()
            .states(reps.iter().map(|s| s.as_str()))
            .letters(self.alphabet.iter().map(String::as_str));
        for rep in &reps {
            let o = self.output_of(rep.as_str());
            if !o.is_zero() {
                b = b.output(rep.as_str(), o);
            }
        }
        for a in &self.alphabet {
            let m = &self.transitions[a];
            for rep in &reps {
                let mut sums: BTreeMap<usize, K> = BTreeMap::new();
                if let Some(col) = m.column(rep.as_str()) {
                    for (y, k) in col.iter() {
                        let block = index[y];
                        let prev = sums.remove(&block).unwrap_or_else(K::zero);
                        sums.insert(block, prev.plus(k));
                    }
                }
                for (block, k) in sums {
                    if !k.is_zero() {
                        b = b.edge(rep.as_str(), a, reps[block].as_str(), k);
                    }
                }
            }
        }
        b.build()
    }

    /// Coproduct of two automata over the same alphabet. States are renamed by
    /// prefixing; the prefixed names must not collide.
    pub fn disjoint_union(&self, other: &Self, left_prefix: &str, right_prefix: &str) -> Result<Self> {
        if self.alphabet != other.alphabet {
            return Err(Error::Usage(format!(
                "alphabets differ: {:?} vs {:?}",
                self.alphabet, other.alphabet
            )));
        }
        let mut b = AutomatonBuilder::new().letters(self.alphabet.iter().map(String::as_str));
        for (aut, prefix) in [(self, left_prefix), (other, right_prefix)] {
            let name = |s: &StateId| format!("{prefix}{s}");
            for s in &aut.states {
                b = b.state(&name(s));
            }
            for (s, k) in aut.output.row().iter() {
                b = b.output(&name(s), k.clone());
            }
            for (from, a, to, k) in aut.edges() {
                b = b.edge(&name(from), a, &name(to), k.clone());
            }
        }
        b.build().map_err(|e| match e {
            Error::Duplicate { name, .. } => Error::Usage(format!(
                "state `{name}` occurs in both automata; choose distinct prefixes"
            )),
            other => other,
        })
    }

    /// The image of the unit vector `η(x)` embedded under `prefix`, as a
    /// vector of a disjoint union.
    pub fn embed(v: &Vector<K>, prefix: &str) -> Vector<K> {
        v.rename(|s| StateId::from(format!("{prefix}{s}")))
    }
}

/// A weighted automaton whose semiring is only known at run time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyAutomaton {
    Bool(WeightedAutomaton<Boolean>),
    Nat(WeightedAutomaton<Natural>),
    Int(WeightedAutomaton<Integer>),
    Rational(WeightedAutomaton<Rational>),
    NonnegRational(WeightedAutomaton<NonnegRational>),
    Tropical(WeightedAutomaton<Tropical>),
    MaxTimes(WeightedAutomaton<MaxTimes>),
}

/// Runs `$body` with `$aut` bound to the typed automaton inside an [`AnyAutomaton`].
#[macro_export]
macro_rules! with_automaton {
    ($any:expr, $aut:ident => $body:expr) => {
        match $any {
            $crate::automata::AnyAutomaton::Bool($aut) => $body,
            $crate::automata::AnyAutomaton::Nat($aut) => $body,
            $crate::automata::AnyAutomaton::Int($aut) => $body,
            $crate::automata::AnyAutomaton::Rational($aut) => $body,
            $crate::automata::AnyAutomaton::NonnegRational($aut) => $body,
            $crate::automata::AnyAutomaton::Tropical($aut) => $body,
            $crate::automata::AnyAutomaton::MaxTimes($aut) => $body,
        }
    };
}

impl AnyAutomaton {
    /// Parses a file of any shipped semiring.
    pub fn parse(json: &str) -> Result<Self> {
        let (descriptor, file) = read_header(json)?;
        Ok(match descriptor {
            Descriptor::Bool => AnyAutomaton::Bool(from_file(file)?),
            Descriptor::Nat => AnyAutomaton::Nat(from_file(file)?),
            Descriptor::Int => AnyAutomaton::Int(from_file(file)?),
            Descriptor::Rational => AnyAutomaton::Rational(from_file(file)?),
            Descriptor::NonnegRational => AnyAutomaton::NonnegRational(from_file(file)?),
            Descriptor::Tropical => AnyAutomaton::Tropical(from_file(file)?),
            Descriptor::MaxTimes => AnyAutomaton::MaxTimes(from_file(file)?),
        })
    }

    pub fn descriptor(&self) -> Descriptor {
        with_automaton!(self, a => a.descriptor())
    }

    pub fn serialize(&self) -> String {
        with_automaton!(self, a => a.serialize())
    }

    pub fn states(&self) -> &[StateId] {
        with_automaton!(self, a => a.states())
    }
}
