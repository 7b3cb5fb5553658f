//! Helpers shared by the integration tests. The oracles here deliberately
//! avoid the library's own algorithms.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::Rng;

use wabisim::language::Word;
use wabisim::semiring::{Rational, Semiring};
use wabisim::{StateId, Vector, WeightedAutomaton};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

pub const FIXTURES: [&str; 6] = [
    "fig1_plus.json",
    "fig1_maxtimes.json",
    "fig2_union.json",
    "ex43_int.json",
    "ex45_maxtimes.json",
    "tropical_hard.json",
];

pub fn word(s: &str) -> Word {
    Word::from_letters(s.chars().map(String::from))
}

/// `{0, ±1, ±2, 1/2, 1/3}`, zero with probability about one half.
pub fn small_rational(rng: &mut StdRng) -> Rational {
    const VALUES: [(i64, i64); 6] = [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (1, 3)];
    if rng.gen_bool(0.5) {
        Rational::zero()
    } else {
        let (n, d) = VALUES[rng.gen_range(0..VALUES.len())];
        Rational::new(n, d)
    }
}

/// A random automaton over ℚ with at most `max_states` states and `max_letters` letters.
pub fn random_rational_automaton(
    rng: &mut StdRng,
    max_states: usize,
    max_letters: usize,
) -> WeightedAutomaton<Rational> {
    let n = rng.gen_range(1..=max_states);
    let letters: Vec<String> = (0..rng.gen_range(1..=max_letters))
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect();
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut b = WeightedAutomaton::builder()
        .states(states.iter().map(String::as_str))
        .letters(letters.iter().map(String::as_str));
    // Copy a state's behaviour now and then so that bisimilar pairs occur.
    let twin = (n >= 2 && rng.gen_bool(0.5)).then(|| (0, n - 1));
    let mut out = Vec::new();
    for s in &states {
        out.push(small_rational(rng));
        b = b.output(s, out.last().unwrap().clone());
    }
    for a in &letters {
        for (i, s) in states.iter().enumerate() {
            for t in &states {
                let k = small_rational(rng);
                if !k.is_zero() && twin.map_or(true, |(_, copy)| i != copy) {
                    b = b.edge(s, a, t, k);
                }
            }
        }
    }
    let aut = b.build().expect("well formed");
    match twin {
        Some((orig, copy)) => duplicate_state(&aut, orig, copy),
        None => aut,
    }
}

/// Rewrites state `copy` to have the same output and outgoing edges as `orig`.
fn duplicate_state(
    aut: &WeightedAutomaton<Rational>,
    orig: usize,
    copy: usize,
) -> WeightedAutomaton<Rational> {
    let states = aut.states();
    let (o, c) = (states[orig].as_str(), states[copy].as_str());
    let mut b = WeightedAutomaton::builder()
        .states(states.iter().map(StateId::as_str))
        .letters(aut.alphabet().iter().map(String::as_str));
    for s in states {
        let src = if s.as_str() == c { o } else { s.as_str() };
        b = b.output(s.as_str(), aut.output_of(src));
    }
    for (from, a, to, k) in aut.edges() {
        if from.as_str() != c {
            b = b.edge(from.as_str(), a, to.as_str(), k.clone());
        }
        if from.as_str() == o {
            b = b.edge(c, a, to.as_str(), k.clone());
        }
    }
    b.build().expect("well formed")
}

pub fn random_vector<K: Semiring>(
    rng: &mut StdRng,
    states: &[StateId],
    mut weight: impl FnMut(&mut StdRng) -> K,
) -> Vector<K> {
    Vector::from_entries(states.iter().map(|s| (s.clone(), weight(rng))))
}

/// `σ(x)(w)` summed over explicit paths, straight from the edge list.
pub fn path_weight<K: Semiring>(aut: &WeightedAutomaton<K>, x: &str, w: &Word) -> K {
    match w.letters().split_first() {
        None => aut.output_of(x),
        Some((a, rest)) => {
            let rest = Word::from_letters(rest.iter().cloned());
            aut.edges()
                .filter(|(from, l, _, _)| from.as_str() == x && *l == a.as_str())
                .fold(K::zero(), |acc, (_, _, to, k)| {
                    acc.plus(&k.times(&path_weight(aut, to.as_str(), &rest)))
                })
        }
    }
}

/// `σ(v)(w)` by linearity over [`path_weight`].
pub fn path_weight_vec<K: Semiring>(aut: &WeightedAutomaton<K>, v: &Vector<K>, w: &Word) -> K {
    v.iter().fold(K::zero(), |acc, (s, c)| {
        acc.plus(&c.times(&path_weight(aut, s.as_str(), w)))
    })
}

/// All words of length `≤ n` over `alphabet`, shortest first.
pub fn all_words(alphabet: &[String], n: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Vec::<String>::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for a in alphabet {
                let mut w2 = w.clone();
                w2.push(a.clone());
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned().map(Word::from_letters));
        frontier = next;
    }
    out
}

/// Rank over ℚ by fraction-free elimination on integer rows.
pub fn rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let lcm = r.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            r.iter().map(|q| (q * BigRational::from(lcm.clone())).to_integer()).collect()
        })
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let (a, b) = (m[rank][c].clone(), m[i][c].clone());
            let pivot = m[rank].clone();
            for (x, y) in m[i].iter_mut().zip(&pivot) {
                *x = &a * &*x - &b * y;
            }
            let g = m[i].iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !g.is_zero() {
                for x in m[i].iter_mut() {
                    *x = &*x / &g;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Canonical Hermite basis of the lattice spanned by `rows`, built from 2×2
/// Bézout transformations. Zero rows are dropped.
pub fn lattice_hnf(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            if m[r][c].is_zero() {
                m.swap(r, i);
                continue;
            }
            let (a, b) = (m[r][c].clone(), m[i][c].clone());
            let e = a.extended_gcd(&b);
            let (g, x, y) = (e.gcd, e.x, e.y);
            let (ag, bg) = (&a / &g, &b / &g);
            let (top, bottom) = (m[r].clone(), m[i].clone());
            m[r] = top.iter().zip(&bottom).map(|(t, s)| &x * t + &y * s).collect();
            m[i] = top.iter().zip(&bottom).map(|(t, s)| &ag * s - &bg * t).collect();
        }
        if m[r][c].is_zero() {
            continue;
        }
        if m[r][c].is_negative() {
            m[r] = m[r].iter().map(|v| -v).collect();
        }
        for i in 0..r {
            let q = m[i][c].div_floor(&m[r][c]);
            let pivot = m[r].clone();
            for (v, p) in m[i].iter_mut().zip(&pivot) {
                *v -= &q * p;
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

/// Integer membership by comparing the Hermite bases with and without `t`.
pub fn in_lattice(basis: &[Vec<BigInt>], t: &[BigInt]) -> bool {
    let mut with = basis.to_vec();
    with.push(t.to_vec());
    lattice_hnf(basis) == lattice_hnf(&with)
}
