//! Span membership for functionals, one solver per semiring family.
//!
//! Every solver only proposes coefficients. [`in_span`] substitutes them back
//! and refuses to answer `Member` unless the combination reproduces the target
//! exactly.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linalg::{Functional, StateId};
use crate::semiring::{
    Boolean, Descriptor, Integer, MaxTimes, Natural, NonnegRational, Rational, Semiring, Tropical,
};

/// Fourier–Motzkin runs only on systems this small.
pub const FM_MAX_BASIS: usize = 8;
pub const FM_MAX_STATES: usize = 8;
/// Cap on the number of live inequalities during elimination.
pub const FM_MAX_INEQUALITIES: usize = 20_000;

/// Is `target` a linear combination of `basis`?
#[derive(Clone, Copy, Debug)]
pub struct SpanQuery<'a, K> {
    pub basis: &'a [Functional<K>],
    pub target: &'a Functional<K>,
}

impl<'a, K: Semiring> SpanQuery<'a, K> {
    pub fn new(basis: &'a [Functional<K>], target: &'a Functional<K>) -> Self {
        SpanQuery { basis, target }
    }

    pub fn descriptor(&self) -> Descriptor {
        K::DESCRIPTOR
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanAnswer<K> {
    /// `target = Σ coefficients[i]·basis[i]`, already checked by substitution.
    Member(Vec<K>),
    NotMember,
    Unsupported(String),
}

impl<K> SpanAnswer<K> {
    pub fn is_member(&self) -> bool {
        matches!(self, SpanAnswer::Member(_))
    }
}

/// Whether a candidate row can be dropped without changing the kernel of a
/// generator set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Redundancy {
    /// In the span. `rational_fallback` is set when only the span over ℚ
    /// was established (nonnegative rationals past the elimination guard).
    Redundant { rational_fallback: bool },
    Independent,
    Unavailable(String),
}

/// A semiring with a span-membership procedure.
pub trait SpanSolver: Semiring {
    /// Proposes an answer. `Member` answers are re-checked by [`in_span`].
    fn solve(basis: &[Functional<Self>], target: &Functional<Self>) -> SpanAnswer<Self>;

    /// Membership as used for pruning generator sets. Any certificate that
    /// makes `target` constant on the kernel of `basis` will do.
    fn kernel_redundant(basis: &[Functional<Self>], target: &Functional<Self>) -> Redundancy {
        match in_span(&SpanQuery::new(basis, target)) {
            SpanAnswer::Member(_) => Redundancy::Redundant {
                rational_fallback: false,
            },
            SpanAnswer::NotMember => Redundancy::Independent,
            SpanAnswer::Unsupported(why) => Redundancy::Unavailable(why),
        }
    }
}

/// Decides membership and verifies any certificate before returning it.
pub fn in_span<K: SpanSolver>(query: &SpanQuery<'_, K>) -> SpanAnswer<K> {
    if !K::DESCRIPTOR.span_solver_available() {
        return SpanAnswer::Unsupported(format!(
            "no span solver for semiring {}",
            K::DESCRIPTOR
        ));
    }
    match K::solve(query.basis, query.target) {
        SpanAnswer::Member(c) => {
            if verify_combination(query.basis, &c, query.target) {
                SpanAnswer::Member(c)
            } else {
                SpanAnswer::Unsupported(format!(
                    "{} solver produced coefficients that fail substitution",
                    K::DESCRIPTOR
                ))
            }
        }
        other => other,
    }
}

/// `Σ coefficients[i]·basis[i] == target`, evaluated exactly.
pub fn verify_combination<K: Semiring>(
    basis: &[Functional<K>],
    coefficients: &[K],
    target: &Functional<K>,
) -> bool {
    if basis.len() != coefficients.len() {
        return false;
    }
    let sum = basis
        .iter()
        .zip(coefficients)
        .fold(Functional::zero(), |acc, (b, c)| acc.add(&b.scale_right(c)));
    &sum == target
}

fn universe<K: Semiring>(basis: &[Functional<K>], target: &Functional<K>) -> Vec<StateId> {
    let set: BTreeSet<&StateId> = basis
        .iter()
        .chain(std::iter::once(target))
        .flat_map(|f| f.row().support())
        .collect();
    set.into_iter().cloned().collect()
}

/// The augmented system `Bᵀ c = t` over ℚ, one row per state.
fn augmented<K: Semiring>(
    basis: &[Functional<K>],
    target: &Functional<K>,
    lift: impl Fn(&K) -> BigRational,
) -> Vec<Vec<BigRational>> {
    universe(basis, target)
        .iter()
        .map(|s| {
            basis
                .iter()
                .map(|b| lift(&b.get(s.as_str())))
                .chain(std::iter::once(lift(&target.get(s.as_str()))))
                .collect()
        })
        .collect()
}

/// Reduced row echelon form of `m` restricted to its first `cols` columns.
/// Returns the pivot columns in order.
fn rref(m: &mut [Vec<BigRational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `Bᵀ c = t` over ℚ with free variables set to zero.
fn solve_rational(system: &mut [Vec<BigRational>], unknowns: usize) -> Option<Vec<BigRational>> {
    let pivots = rref(system, unknowns);
    if system[pivots.len()..].iter().any(|row| !row[unknowns].is_zero()) {
        return None;
    }
    let mut c = vec![BigRational::zero(); unknowns];
    for (r, &p) in pivots.iter().enumerate() {
        c[p] = system[r][unknowns].clone();
    }
    Some(c)
}

fn rational_span_member<K: Semiring>(
    basis: &[Functional<K>],
    target: &Functional<K>,
    lift: impl Fn(&K) -> BigRational,
) -> Option<Vec<BigRational>> {
    let mut system = augmented(basis, target, lift);
    solve_rational(&mut system, basis.len())
}

impl SpanSolver for Rational {
    fn solve(basis: &[Functional<Self>], target: &Functional<Self>) -> SpanAnswer<Self> {
        match rational_span_member(basis, target, |k| k.0.clone()) {
            Some(c) => SpanAnswer::Member(c.into_iter().map(Rational).collect()),
            None => SpanAnswer::NotMember,
        }
    }
}

/// Row-style Hermite normal form: returns `(H, U)` with `U·A = H`, `U`
/// unimodular, `H` in echelon form with positive pivots and entries above each
/// pivot reduced into `[0, pivot)`. Also returns the pivot columns.
pub(crate) fn hermite(a: &[Vec<BigInt>], cols: usize) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, Vec<usize>) {
    let m = a.len();
    let mut h = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let sub_row = |rows: &mut Vec<Vec<BigInt>>, i: usize, r: usize, q: &BigInt| {
        let src = rows[r].clone();
        for (v, s) in rows[i].iter_mut().zip(&src) {
            *v -= q * s;
        }
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m {
            break;
        }
        loop {
            let best = (r..m)
                .filter(|&i| !h[i][c].is_zero())
                .min_by(|&i, &j| h[i][c].abs().cmp(&h[j][c].abs()));
            let Some(best) = best else { break };
            h.swap(r, best);
            u.swap(r, best);
            let mut done = true;
            for i in r + 1..m {
                if !h[i][c].is_zero() {
                    let q = h[i][c].div_floor(&h[r][c]);
                    sub_row(&mut h, i, r, &q);
                    sub_row(&mut u, i, r, &q);
                    done &= h[i][c].is_zero();
                }
            }
            if done {
                break;
            }
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            for v in h[r].iter_mut().chain(u[r].iter_mut()) {
                *v = -v.clone();
            }
        }
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            if !q.is_zero() {
                sub_row(&mut h, i, r, &q);
                sub_row(&mut u, i, r, &q);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (h, u, pivots)
}

impl SpanSolver for Integer {
    fn solve(basis: &[Functional<Self>], target: &Functional<Self>) -> SpanAnswer<Self> {
        let states = universe(basis, target);
        let rows: Vec<Vec<BigInt>> = basis
            .iter()
            .map(|b| states.iter().map(|s| b.get(s.as_str()).0).collect())
            .collect();
        let (h, u, pivots) = hermite(&rows, states.len());
        let mut rest: Vec<BigInt> = states.iter().map(|s| target.get(s.as_str()).0).collect();
        let mut y = vec![BigInt::zero(); basis.len()];
        let mut k = 0;
        for c in 0..states.len() {
            if k < pivots.len() && pivots[k] == c {
                let (q, rem) = rest[c].div_rem(&h[k][c]);
                if !rem.is_zero() {
                    return SpanAnswer::NotMember;
                }
                for (v, hv) in rest.iter_mut().zip(&h[k]) {
                    *v -= &q * hv;
                }
                y[k] = q;
                k += 1;
            } else if !rest[c].is_zero() {
                return SpanAnswer::NotMember;
            }
        }
        let coefficients = (0..basis.len())
            .map(|j| Integer(y.iter().zip(&u).map(|(yk, uk)| yk * &uk[j]).sum()))
            .collect();
        SpanAnswer::Member(coefficients)
    }
}

/// Idempotent semirings in which `c ↦ c·b` has a right adjoint.
pub trait Residuated: Semiring {
    /// Greatest `c` (in the natural order) with `c·b ≤ t`.
    fn residual(t: &Self, b: &Self) -> Self;
    /// Greatest lower bound in the natural order.
    fn meet(&self, other: &Self) -> Self;
}

impl Residuated for Boolean {
    fn residual(t: &Self, b: &Self) -> Self {
        Boolean(!b.0 || t.0)
    }

    fn meet(&self, other: &Self) -> Self {
        Boolean(self.0 && other.0)
    }
}

impl Residuated for Tropical {
    fn residual(t: &Self, b: &Self) -> Self {
        match (t, b) {
            (_, Tropical::Infinity) => Tropical::one(),
            (Tropical::Infinity, _) => Tropical::Infinity,
            (Tropical::Finite(t), Tropical::Finite(b)) => {
                Tropical::Finite(if t > b { t - b } else { Zero::zero() })
            }
        }
    }

    fn meet(&self, other: &Self) -> Self {
        match (self, other) {
            (Tropical::Infinity, _) | (_, Tropical::Infinity) => Tropical::Infinity,
            (Tropical::Finite(a), Tropical::Finite(b)) => Tropical::Finite(a.max(b).clone()),
        }
    }
}

impl Residuated for MaxTimes {
    fn residual(t: &Self, b: &Self) -> Self {
        if b.is_zero() {
            return MaxTimes::one();
        }
        let q = t.value() / b.value();
        MaxTimes::from_ratio(q.min(BigRational::one())).expect("quotient in [0,1]")
    }

    fn meet(&self, other: &Self) -> Self {
        if self.value() <= other.value() {
            self.clone()
        } else {
            other.clone()
        }
    }
}

/// The principal solution `c_i = ⋀_s t(s) / b_i(s)`.
///
/// Any combination of the basis lies below the target iff each coefficient
/// lies below `c_i`, so the target is in the span iff this candidate hits it.
pub fn principal_solution<K: Residuated>(basis: &[Functional<K>], target: &Functional<K>) -> Vec<K> {
    basis
        .iter()
        .map(|b| {
            let mut it = b.row().iter();
            match it.next() {
                None => K::zero(),
                Some((s, w)) => it.fold(K::residual(&target.get(s.as_str()), w), |acc, (s, w)| {
                    acc.meet(&K::residual(&target.get(s.as_str()), w))
                }),
            }
        })
        .collect()
}

fn residuated_solve<K: Residuated>(basis: &[Functional<K>], target: &Functional<K>) -> SpanAnswer<K> {
    let c = principal_solution(basis, target);
    if verify_combination(basis, &c, target) {
        SpanAnswer::Member(c)
    } else {
        SpanAnswer::NotMember
    }
}

impl SpanSolver for Boolean {
    fn solve(basis: &[Functional<Self>], target: &Functional<Self>) -> SpanAnswer<Self> {
        residuated_solve(basis, target)
    }
}

impl SpanSolver for Tropical {
    fn solve(basis: &[Functional<Self>], target: &Functional<Self>) -> SpanAnswer<Self> {
        residuated_solve(basis, target)
    }
}

impl SpanSolver for MaxTimes {
    fn solve(basis: &[Functional<Self>], target: &Functional<Self>) -> SpanAnswer<Self> {
        residuated_solve(basis, target)
    }
}

impl SpanSolver for Natural {
    fn solve(_: &[Functional<Self>], _: &Functional<Self>) -> SpanAnswer<Self> {
        SpanAnswer::Unsupported("span membership over nat is integer programming".into())
    }
}

/// `Σ coeffs[j]·x_j ≤ bound`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Inequality {
    coeffs: Vec<BigRational>,
    bound: BigRational,
}

impl Inequality {
    /// Scales so the leading nonzero coefficient is ±1. `None` for a
    /// coefficient-free inequality.
    fn normalized(mut self) -> Option<Self> {
        let lead = self.coeffs.iter().find(|c| !c.is_zero())?.abs();
        for c in self.coeffs.iter_mut() {
            *c /= &lead;
        }
        self.bound /= &lead;
        Some(self)
    }
}

enum Elimination {
    Feasible(Vec<BigRational>),
    Infeasible,
    TooLarge,
}

/// Adds `ineq` to `system`, or settles it when no variable is left in it.
/// Returns false for a contradiction `0 ≤ negative`.
fn push_inequality(system: &mut Vec<Inequality>, seen: &mut HashSet<Inequality>, ineq: Inequality) -> bool {
    let bound_ok = !ineq.bound.is_negative();
    match ineq.normalized() {
        Some(n) => {
            if seen.insert(n.clone()) {
                system.push(n);
            }
            true
        }
        None => bound_ok,
    }
}

/// Fourier–Motzkin elimination for `{x ≥ 0, A x ≤ b}`, returning a witness.
fn fourier_motzkin(rows: Vec<Inequality>, vars: usize) -> Elimination {
    let mut stage = Vec::new();
    let mut seen = HashSet::new();
    for j in 0..vars {
        let mut coeffs = vec![BigRational::zero(); vars];
        coeffs[j] = -BigRational::one();
        push_inequality(&mut stage, &mut seen, Inequality { coeffs, bound: BigRational::zero() });
    }
    for r in rows {
        if !push_inequality(&mut stage, &mut seen, r) {
            return Elimination::Infeasible;
        }
    }
    let mut stages = Vec::with_capacity(vars);
    for k in 0..vars {
        let (mut upper, mut lower, mut next) = (Vec::new(), Vec::new(), Vec::new());
        for ineq in &stage {
            if ineq.coeffs[k].is_positive() {
                upper.push(ineq);
            } else if ineq.coeffs[k].is_negative() {
                lower.push(ineq);
            } else {
                next.push(ineq.clone());
            }
        }
        let mut seen: HashSet<Inequality> = next.iter().cloned().collect();
        for u in &upper {
            for l in &lower {
                // u_k > 0 > l_k: (-l_k)·u + u_k·l drops x_k.
                let (fu, fl) = (-l.coeffs[k].clone(), u.coeffs[k].clone());
                let combined = Inequality {
                    coeffs: u
                        .coeffs
                        .iter()
                        .zip(&l.coeffs)
                        .map(|(a, b)| &fu * a + &fl * b)
                        .collect(),
                    bound: &fu * &u.bound + &fl * &l.bound,
                };
                if !push_inequality(&mut next, &mut seen, combined) {
                    return Elimination::Infeasible;
                }
                if next.len() > FM_MAX_INEQUALITIES {
                    return Elimination::TooLarge;
                }
            }
        }
        stages.push(std::mem::replace(&mut stage, next));
    }
    let mut x = vec![BigRational::zero(); vars];
    for k in (0..vars).rev() {
        let mut value = BigRational::zero();
        for ineq in &stages[k] {
            let a = &ineq.coeffs[k];
            if a.is_negative() {
                let rest: BigRational = (k + 1..vars).map(|j| &ineq.coeffs[j] * &x[j]).sum();
                let bound = (&ineq.bound - rest) / a;
                if bound > value {
                    value = bound;
                }
            }
        }
        x[k] = value;
    }
    Elimination::Feasible(x)
}

impl SpanSolver for NonnegRational {
    fn solve(basis: &[Functional<Self>], target: &Functional<Self>) -> SpanAnswer<Self> {
        let states = universe(basis, target);
        if basis.len() > FM_MAX_BASIS || states.len() > FM_MAX_STATES {
            return SpanAnswer::Unsupported(format!(
                "nonnegative combination search limited to {FM_MAX_BASIS} rows over {FM_MAX_STATES} states \
                 (got {} rows over {} states)",
                basis.len(),
                states.len()
            ));
        }
        let m = basis.len();
        let mut system = augmented(basis, target, |k| k.value().clone());
        let pivots = rref(&mut system, m);
        if system[pivots.len()..].iter().any(|row| !row[m].is_zero()) {
            return SpanAnswer::NotMember;
        }
        let free: Vec<usize> = (0..m).filter(|j| !pivots.contains(j)).collect();
        // c_p = rhs - Σ a·c_f ≥ 0  becomes  Σ a·c_f ≤ rhs.
        let rows = (0..pivots.len())
            .map(|r| Inequality {
                coeffs: free.iter().map(|&f| system[r][f].clone()).collect(),
                bound: system[r][m].clone(),
            })
            .collect();
        let x = match fourier_motzkin(rows, free.len()) {
            Elimination::Feasible(x) => x,
            Elimination::Infeasible => return SpanAnswer::NotMember,
            Elimination::TooLarge => {
                return SpanAnswer::Unsupported(format!(
                    "elimination exceeded {FM_MAX_INEQUALITIES} inequalities"
                ))
            }
        };
        let mut c = vec![BigRational::zero(); m];
        for (&f, v) in free.iter().zip(&x) {
            c[f] = v.clone();
        }
        for (r, &p) in pivots.iter().enumerate() {
            let dot: BigRational = free.iter().zip(&x).map(|(&f, v)| &system[r][f] * v).sum();
            c[p] = &system[r][m] - dot;
        }
        match c.into_iter().map(NonnegRational::from_ratio).collect::<Option<Vec<_>>>() {
            Some(c) => SpanAnswer::Member(c),
            None => SpanAnswer::Unsupported("elimination produced a negative coefficient".into()),
        }
    }

    fn kernel_redundant(basis: &[Functional<Self>], target: &Functional<Self>) -> Redundancy {
        match in_span(&SpanQuery::new(basis, target)) {
            SpanAnswer::Member(_) => Redundancy::Redundant {
                rational_fallback: false,
            },
            SpanAnswer::NotMember => Redundancy::Independent,
            // Past the guard: a rational combination still forces `target`
            // to agree wherever every basis row agrees.
            SpanAnswer::Unsupported(_) => {
                let lifted: Vec<Functional<Rational>> = basis.iter().map(to_rational).collect();
                let t = to_rational(target);
                match in_span(&SpanQuery::new(&lifted, &t)) {
                    SpanAnswer::Member(_) => Redundancy::Redundant {
                        rational_fallback: true,
                    },
                    _ => Redundancy::Independent,
                }
            }
        }
    }
}

fn to_rational(f: &Functional<NonnegRational>) -> Functional<Rational> {
    Functional::from_entries(f.row().iter().map(|(s, v)| (s.clone(), Rational(v.value().clone()))))
}
