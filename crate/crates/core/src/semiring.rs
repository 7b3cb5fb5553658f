//! Semirings and the exact instances shipped with the crate.
//!
//! Every algorithm in the crate is generic over [`Semiring`]. A runtime
//! [`Descriptor`] names each instance so that automata files and the CLI can
//! select one by name; [`dispatch_semiring!`](crate::dispatch_semiring) turns a
//! descriptor back into a concrete type.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::Error;

/// Names one of the shipped semirings together with its capability flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Descriptor {
    Bool,
    Nat,
    Int,
    Rational,
    NonnegRational,
    /// `(ℕ ∪ {∞}, min, +, ∞, 0)`
    Tropical,
    /// `([0,1], max, ·, 0, 1)` restricted to rationals.
    MaxTimes,
}

impl Descriptor {
    pub const ALL: [Descriptor; 7] = [
        Descriptor::Bool,
        Descriptor::Nat,
        Descriptor::Int,
        Descriptor::Rational,
        Descriptor::NonnegRational,
        Descriptor::Tropical,
        Descriptor::MaxTimes,
    ];

    /// Name used in automaton files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Descriptor::Bool => "bool",
            Descriptor::Nat => "nat",
            Descriptor::Int => "int",
            Descriptor::Rational => "rational",
            Descriptor::NonnegRational => "nonneg_rational",
            Descriptor::Tropical => "tropical",
            Descriptor::MaxTimes => "maxtimes",
        }
    }

    pub fn has_subtraction(self) -> bool {
        matches!(self, Descriptor::Int | Descriptor::Rational)
    }

    pub fn is_field(self) -> bool {
        matches!(self, Descriptor::Rational)
    }

    pub fn is_idempotent_residuated(self) -> bool {
        matches!(
            self,
            Descriptor::Bool | Descriptor::Tropical | Descriptor::MaxTimes
        )
    }

    /// Whether [`in_span`](crate::linsolve::in_span) can decide membership.
    /// Only `nat` lacks a solver.
    pub fn span_solver_available(self) -> bool {
        !matches!(self, Descriptor::Nat)
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = match s {
            "tropical_minplus" => "tropical",
            "maxtimes_unit" => "maxtimes",
            s => s,
        };
        Descriptor::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownSemiring(s.to_string()))
    }
}

/// Why a weight string was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightSyntax {
    Malformed(String),
    OutOfRange,
}

/// A semiring `(K, +, ·, 0, 1)` with an exact, canonical carrier.
///
/// Implementations keep their values in canonical form so that derived
/// structural equality is semantic equality.
pub trait Semiring:
    Clone + PartialEq + Eq + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const DESCRIPTOR: Descriptor;

    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// Additive inverse, for the semirings that are rings.
    fn negate(&self) -> Option<Self> {
        None
    }

    /// Parses the textual weight format used in automaton files.
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax>;

    /// Draws a small random element; used by the axiom checks and tests.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Sum of an iterator of weights.
    fn sum<'a, I>(iter: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        iter.into_iter().fold(Self::zero(), |acc, x| acc.plus(x))
    }
}

fn parse_bigint(text: &str) -> Result<BigInt, WeightSyntax> {
    let t = text.trim();
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(WeightSyntax::Malformed(format!("`{t}` is not an integer")));
    }
    t.parse::<BigInt>()
        .map_err(|e| WeightSyntax::Malformed(e.to_string()))
}

/// Accepts `n`, `p/q` and finite decimals such as `0.1` (read exactly as 1/10).
pub(crate) fn parse_rational(text: &str) -> Result<BigRational, WeightSyntax> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num = parse_bigint(num)?;
        let den = parse_bigint(den)?;
        if den.is_zero() {
            return Err(WeightSyntax::Malformed("zero denominator".into()));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(WeightSyntax::Malformed(format!("`{t}` is not a number")));
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let int = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            parse_bigint(int_digits)?
        };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac: BigInt = frac_part.parse().expect("ascii digits");
        let mut value = BigRational::new(int * &scale + frac, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    Ok(BigRational::from_integer(parse_bigint(t)?))
}

fn write_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn sample_ratio<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> BigRational {
    let num = rng.gen_range(lo..=hi);
    let den = rng.gen_range(1..=6i64);
    BigRational::new(num.into(), den.into())
}

/// The Boolean semiring `({false, true}, ∨, ∧, false, true)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Boolean(pub bool);

impl fmt::Display for Boolean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Semiring for Boolean {
    const DESCRIPTOR: Descriptor = Descriptor::Bool;

    fn zero() -> Self {
        Boolean(false)
    }
    fn one() -> Self {
        Boolean(true)
    }
    fn plus(&self, rhs: &Self) -> Self {
        Boolean(self.0 || rhs.0)
    }
    fn times(&self, rhs: &Self) -> Self {
        Boolean(self.0 && rhs.0)
    }
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax> {
        match text.trim() {
            "true" | "1" => Ok(Boolean(true)),
            "false" | "0" => Ok(Boolean(false)),
            other => Err(WeightSyntax::Malformed(format!(
                "`{other}` is not true/false"
            ))),
        }
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Boolean(rng.gen())
    }
}

/// The natural numbers `(ℕ, +, ·, 0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Natural(pub BigUint);

impl From<u64> for Natural {
    fn from(n: u64) -> Self {
        Natural(n.into())
    }
}

impl fmt::Display for Natural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Semiring for Natural {
    const DESCRIPTOR: Descriptor = Descriptor::Nat;

    fn zero() -> Self {
        Natural(BigUint::zero())
    }
    fn one() -> Self {
        Natural(BigUint::one())
    }
    fn plus(&self, rhs: &Self) -> Self {
        Natural(&self.0 + &rhs.0)
    }
    fn times(&self, rhs: &Self) -> Self {
        Natural(&self.0 * &rhs.0)
    }
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax> {
        let n = parse_bigint(text)?;
        n.to_biguint().map(Natural).ok_or(WeightSyntax::OutOfRange)
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Natural::from(rng.gen_range(0..=20u64))
    }
}

/// The ring of integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Integer(pub BigInt);

impl From<i64> for Integer {
    fn from(n: i64) -> Self {
        Integer(n.into())
    }
}

impl fmt::Display for Integer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Semiring for Integer {
    const DESCRIPTOR: Descriptor = Descriptor::Int;

    fn zero() -> Self {
        Integer(BigInt::zero())
    }
    fn one() -> Self {
        Integer(BigInt::one())
    }
    fn plus(&self, rhs: &Self) -> Self {
        Integer(&self.0 + &rhs.0)
    }
    fn times(&self, rhs: &Self) -> Self {
        Integer(&self.0 * &rhs.0)
    }
    fn negate(&self) -> Option<Self> {
        Some(Integer(-&self.0))
    }
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax> {
        parse_bigint(text).map(Integer)
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Integer::from(rng.gen_range(-20..=20i64))
    }
}

/// The field of rational numbers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(num.into(), den.into()))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(&self.0, f)
    }
}

impl Semiring for Rational {
    const DESCRIPTOR: Descriptor = Descriptor::Rational;

    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn plus(&self, rhs: &Self) -> Self {
        Rational(&self.0 + &rhs.0)
    }
    fn times(&self, rhs: &Self) -> Self {
        Rational(&self.0 * &rhs.0)
    }
    fn negate(&self) -> Option<Self> {
        Some(Rational(-&self.0))
    }
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax> {
        parse_rational(text).map(Rational)
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Rational(sample_ratio(rng, -12, 12))
    }
}

/// Nonnegative rationals `(ℚ₊, +, ·, 0, 1)`; stands in for `ℝ₊` with exact constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonnegRational(BigRational);

impl NonnegRational {
    pub fn new(num: u64, den: u64) -> Self {
        NonnegRational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_ratio(r: BigRational) -> Option<Self> {
        (!r.is_negative()).then_some(NonnegRational(r))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for NonnegRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(&self.0, f)
    }
}

impl Semiring for NonnegRational {
    const DESCRIPTOR: Descriptor = Descriptor::NonnegRational;

    fn zero() -> Self {
        NonnegRational(BigRational::zero())
    }
    fn one() -> Self {
        NonnegRational(BigRational::one())
    }
    fn plus(&self, rhs: &Self) -> Self {
        NonnegRational(&self.0 + &rhs.0)
    }
    fn times(&self, rhs: &Self) -> Self {
        NonnegRational(&self.0 * &rhs.0)
    }
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax> {
        NonnegRational::from_ratio(parse_rational(text)?).ok_or(WeightSyntax::OutOfRange)
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        NonnegRational(sample_ratio(rng, 0, 12))
    }
}

/// The tropical semiring `(ℕ ∪ {∞}, min, +, ∞, 0)`.
///
/// The derived `Ord` is the numeric order with `∞` on top, which is the
/// reverse of the semiring's natural order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tropical {
    Finite(BigUint),
    Infinity,
}

impl Tropical {
    pub fn finite(n: u64) -> Self {
        Tropical::Finite(n.into())
    }
}

impl fmt::Display for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Finite(n) => write!(f, "{n}"),
            Tropical::Infinity => f.write_str("inf"),
        }
    }
}

impl Semiring for Tropical {
    const DESCRIPTOR: Descriptor = Descriptor::Tropical;

    fn zero() -> Self {
        Tropical::Infinity
    }
    fn one() -> Self {
        Tropical::Finite(BigUint::zero())
    }
    fn plus(&self, rhs: &Self) -> Self {
        std::cmp::min(self, rhs).clone()
    }
    fn times(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (Tropical::Finite(a), Tropical::Finite(b)) => Tropical::Finite(a + b),
            _ => Tropical::Infinity,
        }
    }
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax> {
        match text.trim() {
            "inf" | "∞" => Ok(Tropical::Infinity),
            other => {
                let n = parse_bigint(other)?;
                n.to_biguint()
                    .map(Tropical::Finite)
                    .ok_or(WeightSyntax::OutOfRange)
            }
        }
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.gen_ratio(1, 8) {
            Tropical::Infinity
        } else {
            Tropical::finite(rng.gen_range(0..=20))
        }
    }
}

/// `([0,1] ∩ ℚ, max, ·, 0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MaxTimes(BigRational);

impl MaxTimes {
    /// Returns `None` unless `0 ≤ num/den ≤ 1`.
    pub fn new(num: u64, den: u64) -> Option<Self> {
        Self::from_ratio(BigRational::new(num.into(), den.into()))
    }

    pub fn from_ratio(r: BigRational) -> Option<Self> {
        (!r.is_negative() && r <= BigRational::one()).then_some(MaxTimes(r))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Display for MaxTimes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(&self.0, f)
    }
}

impl Semiring for MaxTimes {
    const DESCRIPTOR: Descriptor = Descriptor::MaxTimes;

    fn zero() -> Self {
        MaxTimes(BigRational::zero())
    }
    fn one() -> Self {
        MaxTimes(BigRational::one())
    }
    fn plus(&self, rhs: &Self) -> Self {
        std::cmp::max(self, rhs).clone()
    }
    fn times(&self, rhs: &Self) -> Self {
        MaxTimes(&self.0 * &rhs.0)
    }
    fn parse_weight(text: &str) -> Result<Self, WeightSyntax> {
        MaxTimes::from_ratio(parse_rational(text)?).ok_or(WeightSyntax::OutOfRange)
    }
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let den = rng.gen_range(1..=10u64);
        let num = rng.gen_range(0..=den);
        MaxTimes::new(num, den).expect("num <= den")
    }
}

/// Runs `$body` with `$k` bound as a type alias for the semiring named by `$desc`.
#[macro_export]
macro_rules! dispatch_semiring {
    ($desc:expr, $k:ident => $body:expr) => {
        match $desc {
            $crate::semiring::Descriptor::Bool => {
                type $k = $crate::semiring::Boolean;
                $body
            }
            $crate::semiring::Descriptor::Nat => {
                type $k = $crate::semiring::Natural;
                $body
            }
            $crate::semiring::Descriptor::Int => {
                type $k = $crate::semiring::Integer;
                $body
            }
            $crate::semiring::Descriptor::Rational => {
                type $k = $crate::semiring::Rational;
                $body
            }
            $crate::semiring::Descriptor::NonnegRational => {
                type $k = $crate::semiring::NonnegRational;
                $body
            }
            $crate::semiring::Descriptor::Tropical => {
                type $k = $crate::semiring::Tropical;
                $body
            }
            $crate::semiring::Descriptor::MaxTimes => {
                type $k = $crate::semiring::MaxTimes;
                $body
            }
        }
    };
}

/// A sampled instance that broke one of the semiring laws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomFailure {
    pub law: &'static str,
    pub a: String,
    pub b: String,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub descriptor: Descriptor,
    pub samples: usize,
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the semiring laws on `samples` random triples drawn with a fixed seed.
pub fn axioms_suite(descriptor: Descriptor, samples: usize, seed: u64) -> AxiomReport {
    dispatch_semiring!(descriptor, K => check_axioms::<K>(samples, seed))
}

pub fn check_axioms<K: Semiring>(samples: usize, seed: u64) -> AxiomReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let zero = K::zero();
    let one = K::one();
    for _ in 0..samples {
        let a = K::sample(&mut rng);
        let b = K::sample(&mut rng);
        let c = K::sample(&mut rng);
        let laws: [(&'static str, bool); 11] = [
            (
                "associativity of +",
                a.plus(&b).plus(&c) == a.plus(&b.plus(&c)),
            ),
            ("commutativity of +", a.plus(&b) == b.plus(&a)),
            (
                "associativity of ·",
                a.times(&b).times(&c) == a.times(&b.times(&c)),
            ),
            (
                "left distributivity",
                a.times(&b.plus(&c)) == a.times(&b).plus(&a.times(&c)),
            ),
            (
                "right distributivity",
                b.plus(&c).times(&a) == b.times(&a).plus(&c.times(&a)),
            ),
            ("additive unit", a.plus(&zero) == a && zero.plus(&a) == a),
            ("multiplicative unit", a.times(&one) == a && one.times(&a) == a),
            (
                "annihilation",
                a.times(&zero) == zero && zero.times(&a) == zero,
            ),
            (
                "additive inverse",
                match (K::DESCRIPTOR.has_subtraction(), a.negate()) {
                    (true, Some(neg)) => a.plus(&neg) == zero,
                    (true, None) => false,
                    (false, _) => true,
                },
            ),
            ("canonical form", K::parse_weight(&a.to_string()).as_ref() == Ok(&a)),
            ("zero test", a.is_zero() == (a == zero)),
        ];
        for (law, ok) in laws {
            if !ok {
                failures.push(AxiomFailure {
                    law,
                    a: a.to_string(),
                    b: b.to_string(),
                    c: c.to_string(),
                });
            }
        }
    }
    AxiomReport {
        descriptor: K::DESCRIPTOR,
        samples,
        failures,
    }
}
