//! The free semimodule `K(X)` over a finite state set.
//!
//! Vectors and functionals are sparse maps keyed by [`StateId`]; absent
//! entries are zero and zeros are never stored, so derived equality is
//! semantic equality. Relations on `K(X)` are never enumerated: a
//! [`CongruencePresentation`] describes one as the kernel of a finite tuple
//! of functionals.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::semiring::{Semiring, WeightSyntax};

/// Identifier of an automaton state; ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(String);

impl StateId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId(s.to_string())
    }
}

impl From<String> for StateId {
    fn from(s: String) -> Self {
        StateId(s)
    }
}

impl Borrow<str> for StateId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An element `Σ kₓ·x` of `K(X)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vector<K> {
    entries: BTreeMap<StateId, K>,
}

impl<K: Semiring> Default for Vector<K> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<K: Semiring> Vector<K> {
    pub fn zero() -> Self {
        Vector {
            entries: BTreeMap::new(),
        }
    }

    /// The unit vector `η(x) = δₓ`.
    pub fn unit(state: impl Into<StateId>) -> Self {
        Self::from_entries([(state.into(), K::one())])
    }

    /// Builds a vector, summing repeated states and dropping zeros.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, K)>,
        S: Into<StateId>,
    {
        let mut map: BTreeMap<StateId, K> = BTreeMap::new();
        for (s, k) in entries {
            let s = s.into();
            let next = match map.get(&s) {
                Some(prev) => prev.plus(&k),
                None => k,
            };
            map.insert(s, next);
        }
        map.retain(|_, k| !k.is_zero());
        Vector { entries: map }
    }

    pub fn get(&self, state: &str) -> K {
        self.entries.get(state).cloned().unwrap_or_else(K::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateId, &K)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &StateId> {
        self.entries.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        for (s, k) in &other.entries {
            let sum = match entries.get(s) {
                Some(prev) => prev.plus(k),
                None => k.clone(),
            };
            if sum.is_zero() {
                entries.remove(s);
            } else {
                entries.insert(s.clone(), sum);
            }
        }
        Vector { entries }
    }

    /// Left scalar action `k·u`.
    pub fn scale(&self, k: &K) -> Self {
        Self::from_entries(self.entries.iter().map(|(s, v)| (s.clone(), k.times(v))))
    }

    /// Renames every state; used when embedding into a disjoint union.
    pub fn rename(&self, mut f: impl FnMut(&StateId) -> StateId) -> Self {
        Self::from_entries(self.entries.iter().map(|(s, k)| (f(s), k.clone())))
    }

    /// Dense coordinates over `states` (states outside the support read as zero).
    pub fn to_dense(&self, states: &[StateId]) -> Vec<K> {
        states.iter().map(|s| self.get(s.as_str())).collect()
    }

    pub fn from_dense(states: &[StateId], values: &[K]) -> Self {
        Self::from_entries(states.iter().cloned().zip(values.iter().cloned()))
    }

    /// `{"x0": "2", "x1": "1/3"}`
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.entries
                .iter()
                .map(|(s, k)| (s.to_string(), serde_json::Value::String(k.to_string())))
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, String> = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(raw.len());
        for (s, w) in raw {
            let k = K::parse_weight(&w).map_err(|e| weight_error::<K>(&format!("vector[{s}]"), &w, e))?;
            entries.push((StateId::from(s), k));
        }
        Ok(Self::from_entries(entries))
    }
}

impl<K: Semiring> fmt::Display for Vector<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("0");
        }
        for (i, (s, k)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if *k == K::one() {
                write!(f, "{s}")?;
            } else {
                write!(f, "({k})·{s}")?;
            }
        }
        Ok(())
    }
}

pub(crate) fn weight_error<K: Semiring>(location: &str, weight: &str, e: WeightSyntax) -> Error {
    match e {
        WeightSyntax::Malformed(reason) => Error::WeightParse {
            location: location.to_string(),
            weight: weight.to_string(),
            semiring: K::DESCRIPTOR,
            reason,
        },
        WeightSyntax::OutOfRange => Error::WeightRange {
            location: location.to_string(),
            weight: weight.to_string(),
            semiring: K::DESCRIPTOR,
        },
    }
}

/// A linear functional `K(X) → K`, given by its row of values on unit vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Functional<K> {
    row: Vector<K>,
}

impl<K: Semiring> Functional<K> {
    pub fn zero() -> Self {
        Functional { row: Vector::zero() }
    }

    pub fn from_row(row: Vector<K>) -> Self {
        Functional { row }
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, K)>,
        S: Into<StateId>,
    {
        Functional {
            row: Vector::from_entries(entries),
        }
    }

    pub fn from_dense(states: &[StateId], values: &[K]) -> Self {
        Functional {
            row: Vector::from_dense(states, values),
        }
    }

    /// The 0/1 indicator row of a set of states (its class-sum functional).
    pub fn indicator<'a>(states: impl IntoIterator<Item = &'a StateId>) -> Self {
        Self::from_entries(states.into_iter().map(|s| (s.clone(), K::one())))
    }

    pub fn row(&self) -> &Vector<K> {
        &self.row
    }

    pub fn get(&self, state: &str) -> K {
        self.row.get(state)
    }

    pub fn is_zero(&self) -> bool {
        self.row.is_zero()
    }

    pub fn to_dense(&self, states: &[StateId]) -> Vec<K> {
        self.row.to_dense(states)
    }

    /// `g(u) = Σₓ u(x)·g(x)`.
    pub fn apply(&self, u: &Vector<K>) -> K {
        u.iter().fold(K::zero(), |acc, (s, k)| {
            acc.plus(&k.times(&self.row.get(s.as_str())))
        })
    }

    /// The composite `g ∘ t`, whose value on `x` is `g(t(x))`.
    pub fn compose(&self, map: &LinearMap<K>) -> Self {
        Self::from_entries(
            map.columns()
                .map(|(x, col)| (x.clone(), self.apply(col))),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Functional {
            row: self.row.add(&other.row),
        }
    }

    /// The pointwise scalar multiple `x ↦ g(x)·k`.
    pub fn scale_right(&self, k: &K) -> Self {
        Self::from_entries(self.row.iter().map(|(s, v)| (s.clone(), v.times(k))))
    }
}

impl<K: Semiring> fmt::Display for Functional<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.row)
    }
}

/// A linear map `K(X) → K(Y)` stored column by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap<K> {
    domain: Vec<StateId>,
    codomain: Vec<StateId>,
    columns: BTreeMap<StateId, Vector<K>>,
}

impl<K: Semiring> LinearMap<K> {
    /// Builds a map from its nonzero columns. Every column must be supported in
    /// `codomain` and every column key must be in `domain`.
    pub fn new(
        domain: Vec<StateId>,
        codomain: Vec<StateId>,
        columns: BTreeMap<StateId, Vector<K>>,
    ) -> Result<Self> {
        let dom: BTreeSet<&StateId> = domain.iter().collect();
        let cod: BTreeSet<&StateId> = codomain.iter().collect();
        for (x, col) in &columns {
            if !dom.contains(x) {
                return Err(Error::Usage(format!("column `{x}` outside the domain")));
            }
            if let Some(y) = col.support().find(|y| !cod.contains(y)) {
                return Err(Error::Usage(format!(
                    "column `{x}` has entry `{y}` outside the codomain"
                )));
            }
        }
        let mut columns = columns;
        for x in &domain {
            columns.entry(x.clone()).or_insert_with(Vector::zero);
        }
        Ok(LinearMap {
            domain,
            codomain,
            columns,
        })
    }

    pub fn zero(domain: Vec<StateId>, codomain: Vec<StateId>) -> Self {
        let columns = domain.iter().map(|x| (x.clone(), Vector::zero())).collect();
        LinearMap {
            domain,
            codomain,
            columns,
        }
    }

    pub fn domain(&self) -> &[StateId] {
        &self.domain
    }

    pub fn codomain(&self) -> &[StateId] {
        &self.codomain
    }

    /// Image of the unit vector of `x`; `None` outside the domain.
    pub fn column(&self, x: &str) -> Option<&Vector<K>> {
        self.columns.get(x)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&StateId, &Vector<K>)> {
        self.columns.iter()
    }

    pub fn entry(&self, from: &str, to: &str) -> K {
        self.column(from).map_or_else(K::zero, |c| c.get(to))
    }

    /// Applies the linear extension of the column map to `u`.
    pub fn apply(&self, u: &Vector<K>) -> Result<Vector<K>> {
        linear_extension(|x| self.column(x.as_str()).cloned(), u)
    }
}

/// The unique linear map extending `point_map`, applied to `u`:
/// `f♯(Σ kₓ·x) = Σ kₓ·f(x)`.
pub fn linear_extension<K, F>(mut point_map: F, u: &Vector<K>) -> Result<Vector<K>>
where
    K: Semiring,
    F: FnMut(&StateId) -> Option<Vector<K>>,
{
    let mut acc = Vector::zero();
    for (x, k) in u.iter() {
        let image = point_map(x)
            .ok_or_else(|| Error::Usage(format!("point map undefined on `{x}`")))?;
        acc = acc.add(&image.scale(k));
    }
    Ok(acc)
}

/// The relation `{(u, v) | g(u) = g(v) for every generator g}` on `K(X)`.
///
/// It is the kernel of `u ↦ (g₁(u), …, gₘ(u))`, hence a congruence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruencePresentation<K> {
    states: Vec<StateId>,
    generators: Vec<Functional<K>>,
}

impl<K: Semiring> CongruencePresentation<K> {
    pub fn new(states: Vec<StateId>, generators: Vec<Functional<K>>) -> Self {
        CongruencePresentation { states, generators }
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn generators(&self) -> &[Functional<K>] {
        &self.generators
    }

    /// Values of all generators on `u`.
    pub fn signature(&self, u: &Vector<K>) -> Vec<K> {
        self.generators.iter().map(|g| g.apply(u)).collect()
    }

    pub fn relates(&self, u: &Vector<K>, v: &Vector<K>) -> bool {
        self.generators.iter().all(|g| g.apply(u) == g.apply(v))
    }

    /// First generator separating `u` and `v`, if any.
    pub fn separating_generator(&self, u: &Vector<K>, v: &Vector<K>) -> Option<usize> {
        self.generators.iter().position(|g| g.apply(u) != g.apply(v))
    }
}

/// The smallest congruence `R^ℓ` containing a partition `R` of the states:
/// one class-sum (indicator) functional per block.
pub fn congruence_from_partition<K: Semiring>(partition: &Partition) -> CongruencePresentation<K> {
    let mut states: Vec<StateId> = partition.blocks().iter().flatten().cloned().collect();
    states.sort();
    let generators = partition
        .blocks()
        .iter()
        .map(|b| Functional::indicator(b.iter()))
        .collect();
    CongruencePresentation { states, generators }
}
