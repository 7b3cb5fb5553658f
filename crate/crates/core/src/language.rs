//! Weighted-language semantics and the bounded brute-force oracle.
//!
//! `σ_l(x)(w)` is evaluated two independent ways: [`sigma_wa`] follows the
//! inductive definition on states, [`sigma_lwa`] pushes a vector forward
//! through the letter matrices and reads the output row at the end. The
//! [`oracle_equiv`] search enumerates words breadth-first and is the ground
//! truth the refinement procedure is checked against.

use std::collections::HashSet;
use std::fmt;

use crate::automata::WeightedAutomaton;
use crate::error::{Error, Result};
use crate::linalg::{Functional, StateId, Vector};
use crate::semiring::Semiring;

/// A finite word over the alphabet; letters may be multi-character strings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<String>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters<S: Into<String>>(letters: impl IntoIterator<Item = S>) -> Self {
        Word(letters.into_iter().map(Into::into).collect())
    }

    /// Reads a word: empty or `ε` is the empty word, a comma-separated list is
    /// read letter by letter, anything else is split into characters.
    pub fn parse(text: &str, alphabet: &[String]) -> Result<Self> {
        let t = text.trim();
        let letters: Vec<String> = if t.is_empty() || t == "ε" {
            Vec::new()
        } else if t.contains(',') {
            t.split(',').map(|l| l.trim().to_string()).collect()
        } else {
            t.chars().map(String::from).collect()
        };
        if let Some(bad) = letters.iter().find(|l| !alphabet.contains(l)) {
            return Err(Error::UnknownLetter {
                location: format!("word `{t}`"),
                letter: bad.clone(),
            });
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `a·w`
    pub fn prepend(&self, letter: &str) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(letter.to_string());
        v.extend(self.0.iter().cloned());
        Word(v)
    }

    /// `w·a`
    pub fn append(&self, letter: &str) -> Self {
        let mut v = self.0.clone();
        v.push(letter.to_string());
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("ε")
        } else if self.0.iter().all(|l| l.chars().count() == 1) {
            f.write_str(&self.0.concat())
        } else {
            f.write_str(&self.0.join(","))
        }
    }
}

/// Whether a bound `n` counts words of length `< n` or `≤ n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundConvention {
    ShorterThan,
    AtMost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WordBound {
    pub n: usize,
    pub convention: BoundConvention,
}

impl WordBound {
    pub fn shorter_than(n: usize) -> Self {
        WordBound {
            n,
            convention: BoundConvention::ShorterThan,
        }
    }

    pub fn at_most(n: usize) -> Self {
        WordBound {
            n,
            convention: BoundConvention::AtMost,
        }
    }

    pub fn admits(&self, len: usize) -> bool {
        match self.convention {
            BoundConvention::ShorterThan => len < self.n,
            BoundConvention::AtMost => len <= self.n,
        }
    }
}

/// All words of length `≤ max_len` in length-lexicographic order.
pub fn words_up_to(alphabet: &[String], max_len: usize) -> Vec<Word> {
    let mut sorted = alphabet.to_vec();
    sorted.sort();
    let mut out = vec![Word::empty()];
    let mut level = vec![Word::empty()];
    for _ in 0..max_len {
        level = level
            .iter()
            .flat_map(|w| sorted.iter().map(move |a| w.append(a)))
            .collect();
        out.extend(level.iter().cloned());
    }
    out
}

fn check_word<K: Semiring>(aut: &WeightedAutomaton<K>, w: &Word) -> Result<()> {
    match w.letters().iter().find(|a| !aut.alphabet().contains(a)) {
        Some(a) => Err(Error::UnknownLetter {
            location: format!("word `{w}`"),
            letter: a.clone(),
        }),
        None => Ok(()),
    }
}

/// `σ_l(x)(w)` by the inductive definition on states:
/// `o(x)` for the empty word, `Σ_{x'} t(x)(a)(x')·σ_l(x')(w')` for `w = a·w'`.
///
/// Evaluated suffix by suffix, so each state's value for `w'` is computed once.
pub fn sigma_wa<K: Semiring>(aut: &WeightedAutomaton<K>, x: &str, w: &Word) -> Result<K> {
    check_word(aut, w)?;
    if !aut.has_state(x) {
        return Err(Error::UnknownState {
            location: "sigma".into(),
            state: x.to_string(),
        });
    }
    let states = aut.states();
    let mut values: Vec<K> = states.iter().map(|s| aut.output_of(s.as_str())).collect();
    for a in w.letters().iter().rev() {
        values = states
            .iter()
            .map(|s| {
                states
                    .iter()
                    .zip(&values)
                    .fold(K::zero(), |acc, (s2, v)| {
                        acc.plus(&aut.weight(s.as_str(), a, s2.as_str()).times(v))
                    })
            })
            .collect();
    }
    let i = states
        .iter()
        .position(|s| s.as_str() == x)
        .expect("state checked above");
    Ok(values.swap_remove(i))
}

/// `σ_l(v)(w)` for a vector `v ∈ K(X)`: apply `t♯` letter by letter, then `o♯`.
pub fn sigma_lwa<K: Semiring>(aut: &WeightedAutomaton<K>, v: &Vector<K>, w: &Word) -> Result<K> {
    check_word(aut, w)?;
    let mut cur = v.clone();
    for a in w.letters() {
        cur = aut.sigma_step(&cur, a)?;
    }
    Ok(aut.output().apply(&cur))
}

/// The functionals `σ_l(·)(w)` for every word admitted by a bound, in
/// length-lexicographic order. Realizes the cone map `!_n` pointwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalTable<K> {
    bound: WordBound,
    rows: Vec<(Word, Functional<K>)>,
}

impl<K: Semiring> FunctionalTable<K> {
    pub fn bound(&self) -> WordBound {
        self.bound
    }

    pub fn rows(&self) -> &[(Word, Functional<K>)] {
        &self.rows
    }

    pub fn get(&self, w: &Word) -> Option<&Functional<K>> {
        self.rows.iter().find(|(u, _)| u == w).map(|(_, f)| f)
    }

    /// `!_n(v)`: the value of every row on `v`.
    pub fn evaluate(&self, v: &Vector<K>) -> Vec<(Word, K)> {
        self.rows
            .iter()
            .map(|(w, f)| (w.clone(), f.apply(v)))
            .collect()
    }

    /// The table for a smaller bound (drops rows of length `≥ n`).
    pub fn restrict(&self, n: usize) -> Self {
        let bound = WordBound::shorter_than(n);
        FunctionalTable {
            bound,
            rows: self
                .rows
                .iter()
                .filter(|(w, _)| bound.admits(w.len()))
                .cloned()
                .collect(),
        }
    }

    /// CSV with a `word` column followed by one column per state.
    pub fn to_csv(&self, states: &[StateId]) -> String {
        let mut out = String::from("word");
        for s in states {
            out.push(',');
            out.push_str(s.as_str());
        }
        out.push('\n');
        for (w, f) in &self.rows {
            out.push_str(&csv_field(&w.to_string()));
            for s in states {
                out.push(',');
                out.push_str(&f.get(s.as_str()).to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rows `σ_l(·)(w)` for all `|w| < n`, built by `row_ε = o` and
/// `row_{a·w'} = row_{w'} ∘ t_a`.
pub fn build_functional_table<K: Semiring>(aut: &WeightedAutomaton<K>, n: usize) -> FunctionalTable<K> {
    let mut rows = Vec::new();
    if n > 0 {
        let mut level = vec![(Word::empty(), aut.output().clone())];
        for len in 0..n {
            rows.extend(level.iter().cloned());
            if len + 1 == n {
                break;
            }
            let mut next: Vec<(Word, Functional<K>)> = level
                .iter()
                .flat_map(|(w, row)| {
                    aut.alphabet().iter().map(move |a| {
                        let m = aut.transition(a).expect("alphabet letter");
                        (w.prepend(a), row.compose(m))
                    })
                })
                .collect();
            next.sort_by(|l, r| l.0.cmp(&r.0));
            level = next;
        }
    }
    FunctionalTable {
        bound: WordBound::shorter_than(n),
        rows,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict<K> {
    /// Shortest (then lexicographically least) word with different weights.
    DistinguishedBy { word: Word, left: K, right: K },
    /// No word of length `≤ n` tells the vectors apart.
    EquivalentUpTo(usize),
}

impl<K> OracleVerdict<K> {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, OracleVerdict::DistinguishedBy { .. })
    }
}

/// Searches all words of length `≤ max_len` in length-lexicographic order for
/// one on which `σ_l(u)` and `σ_l(v)` differ.
///
/// A pair of successor vectors already reached by an earlier word is not
/// expanded again: every continuation of it was already tried from a word
/// that is no longer and comes first.
pub fn oracle_equiv<K: Semiring>(
    aut: &WeightedAutomaton<K>,
    u: &Vector<K>,
    v: &Vector<K>,
    max_len: usize,
) -> Result<OracleVerdict<K>> {
    for s in u.support().chain(v.support()) {
        if !aut.has_state(s.as_str()) {
            return Err(Error::UnknownState {
                location: "oracle".into(),
                state: s.to_string(),
            });
        }
    }
    let o = aut.output();
    let mut seen: HashSet<(Vector<K>, Vector<K>)> = HashSet::new();
    seen.insert((u.clone(), v.clone()));
    let mut level = vec![(Word::empty(), u.clone(), v.clone())];
    for len in 0..=max_len {
        for (w, tu, tv) in &level {
            let (left, right) = (o.apply(tu), o.apply(tv));
            if left != right {
                return Ok(OracleVerdict::DistinguishedBy {
                    word: w.clone(),
                    left,
                    right,
                });
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for (w, tu, tv) in &level {
            for a in aut.alphabet() {
                let nu = aut.sigma_step(tu, a)?;
                let nv = aut.sigma_step(tv, a)?;
                if seen.insert((nu.clone(), nv.clone())) {
                    next.push((w.append(a), nu, nv));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    Ok(OracleVerdict::EquivalentUpTo(max_len))
}
