//! Empirical types, type classes and the combinatorial bounds around them.
//!
//! Types are produced in colexicographic order of their count vectors.
//! Class sizes are exact big integers; `log2_type_class_size` switches to
//! log-gamma above [`EXACT_FACTORIAL_LIMIT`].

use std::f64::consts::LN_2;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::shannon::{entropy, kl_raw};

/// Enumerations with more types than this are refused.
pub const MAX_TYPES: u64 = 10_000_000;

/// Largest block length for which class sizes are taken from exact factorials.
pub const EXACT_FACTORIAL_LIMIT: u64 = 60;

/// Relative tolerance of the product-form vs exponent-form comparison.
pub const EXACTNESS_TOLERANCE: f64 = 1e-12;

/// The type `counts / n` of a length-`n` sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawType", into = "RawType")]
pub struct EmpiricalType {
    counts: Vec<u64>,
    n: u64,
}

#[derive(Serialize, Deserialize)]
struct RawType {
    counts: Vec<u64>,
    n: u64,
}

impl TryFrom<RawType> for EmpiricalType {
    type Error = Error;

    fn try_from(raw: RawType) -> Result<Self> {
        let t = EmpiricalType::new(raw.counts)?;
        if t.n != raw.n {
            return Err(Error::DenominatorMismatch {
                expected: raw.n,
                found: t.n,
            });
        }
        Ok(t)
    }
}

impl From<EmpiricalType> for RawType {
    fn from(t: EmpiricalType) -> Self {
        RawType {
            counts: t.counts,
            n: t.n,
        }
    }
}

impl EmpiricalType {
    /// The type with the given counts; `n` is their sum and must be positive.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidParameter("a type needs at least one sample".into()));
        }
        Ok(EmpiricalType { counts, n })
    }

    /// The type of the given sequence.
    pub fn of_sequence(seq: &[usize], alphabet_size: usize) -> Result<Self> {
        let mut counts = vec![0u64; alphabet_size];
        for &x in seq {
            if x >= alphabet_size {
                return Err(Error::ShapeMismatch(format!(
                    "symbol {x} outside an alphabet of {alphabet_size}"
                )));
            }
            counts[x] += 1;
        }
        EmpiricalType::new(counts)
    }

    /// The all-zero type of the empty sequence.
    pub(crate) fn empty(alphabet_size: usize) -> Self {
        EmpiricalType {
            counts: vec![0; alphabet_size],
            n: 0,
        }
    }

    pub(crate) fn from_counts_unchecked(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        EmpiricalType { counts, n }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// `counts / n` as probabilities; all zero for the empty type.
    pub fn probs(&self) -> Vec<f64> {
        if self.n == 0 {
            return vec![0.0; self.counts.len()];
        }
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn to_distribution(&self) -> Result<Distribution> {
        Distribution::from_probs(&self.probs())
    }

    fn ensure_alphabet(&self, p: &Distribution) -> Result<()> {
        if self.counts.len() != p.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                left: p.alphabet_size(),
                right: self.counts.len(),
            });
        }
        Ok(())
    }
}

/// `C(n, k)` as a big integer.
fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k.min(n));
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `|P^n(X)| = C(n + |X| - 1, |X| - 1)`.
pub fn num_types(n: u64, alphabet_size: usize) -> BigUint {
    if alphabet_size == 0 {
        return BigUint::zero();
    }
    let k = alphabet_size as u64;
    binomial(n + k - 1, k - 1)
}

fn check_enumeration(n: u64, alphabet_size: usize) -> Result<u64> {
    if alphabet_size == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let count = num_types(n, alphabet_size);
    match count.to_u64() {
        Some(c) if c <= MAX_TYPES => Ok(c),
        _ => Err(Error::TooLarge(format!(
            "{count} types of length {n} over {alphabet_size} symbols exceed {MAX_TYPES}"
        ))),
    }
}

/// Lazy colexicographic stream of all types with denominator `n`.
#[derive(Debug, Clone)]
pub struct TypeIter {
    next: Option<Vec<u64>>,
}

impl TypeIter {
    /// Streams types of length `n`; `n = 0` yields the single empty type.
    pub(crate) fn unchecked(n: u64, alphabet_size: usize) -> Self {
        let mut first = vec![0; alphabet_size];
        if alphabet_size > 0 {
            first[0] = n;
        }
        TypeIter {
            next: (alphabet_size > 0).then_some(first),
        }
    }
}

impl Iterator for TypeIter {
    type Item = EmpiricalType;

    fn next(&mut self) -> Option<EmpiricalType> {
        let cur = self.next.take()?;
        let k = cur.len();
        // colex successor: move one unit from the lowest occupied slot up one
        // position and gather what remains below into slot 0
        if let Some(i) = cur.iter().position(|&c| c > 0).filter(|&i| i + 1 < k) {
            let mut succ = cur.clone();
            let rest = succ[..=i].iter().sum::<u64>() - 1;
            succ[..=i].iter_mut().for_each(|c| *c = 0);
            succ[0] = rest;
            succ[i + 1] += 1;
            self.next = Some(succ);
        }
        Some(EmpiricalType::from_counts_unchecked(cur))
    }
}

/// Streams every type of length `n` over `alphabet_size` symbols.
pub fn stream_types(n: u64, alphabet_size: usize) -> Result<TypeIter> {
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    check_enumeration(n, alphabet_size)?;
    Ok(TypeIter::unchecked(n, alphabet_size))
}

/// Every type of length `n` over `alphabet_size` symbols, in colex order.
pub fn enumerate_types(n: u64, alphabet_size: usize) -> Result<Vec<EmpiricalType>> {
    Ok(stream_types(n, alphabet_size)?.collect())
}

/// `|T_Q| = n! / ∏ counts!`, exactly.
pub fn type_class_size(t: &EmpiricalType) -> BigUint {
    // product of binomials avoids building n! itself
    let mut acc = BigUint::one();
    let mut seen = 0u64;
    for &c in &t.counts {
        seen += c;
        acc *= binomial(seen, c);
    }
    acc
}

fn log2_big(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    (v >> shift).to_f64().expect("fits in f64").log2() + shift as f64
}

/// `log2 |T_Q|`: exact factorials up to `n = 60`, log-gamma beyond.
pub fn log2_type_class_size(t: &EmpiricalType) -> f64 {
    if t.n <= EXACT_FACTORIAL_LIMIT {
        return log2_big(&type_class_size(t));
    }
    let lg = |m: u64| libm::lgamma(m as f64 + 1.0);
    (lg(t.n) - t.counts.iter().map(|&c| lg(c)).sum::<f64>()) / LN_2
}

/// `D(Q||P) + H(Q)` for `Q = t/n`, so that `P^n(x^n) = 2^{-n (D + H)}` for
/// every `x^n` of type `Q`.
pub fn sequence_probability_exponent(p: &Distribution, t: &EmpiricalType) -> Result<ExtendedReal> {
    t.ensure_alphabet(p)?;
    let q = t.probs();
    Ok(match kl_raw(&q, p.probs()) {
        None => ExtendedReal::PosInfinity,
        Some(d) => ExtendedReal::Finite(d + entropy_of(&q)),
    })
}

fn entropy_of(q: &[f64]) -> f64 {
    -q.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

/// `log2 ∏ P(x)^{counts(x)}`, the log-probability of one sequence of type `t`.
pub fn sequence_log2_probability(p: &Distribution, t: &EmpiricalType) -> Result<f64> {
    t.ensure_alphabet(p)?;
    Ok(log2_sequence_raw(p.probs(), &t.counts))
}

fn log2_sequence_raw(p: &[f64], counts: &[u64]) -> f64 {
    let mut s = 0.0;
    for (&px, &c) in p.iter().zip(counts) {
        if c > 0 {
            if px == 0.0 {
                return f64::NEG_INFINITY;
            }
            s += c as f64 * px.log2();
        }
    }
    s
}

/// `log2 P^n(T_Q)`; `-inf` when the class has probability 0.
pub fn log2_type_class_probability(p: &Distribution, t: &EmpiricalType) -> Result<f64> {
    t.ensure_alphabet(p)?;
    Ok(log2_class_probability_raw(p.probs(), t))
}

pub(crate) fn log2_class_probability_raw(p: &[f64], t: &EmpiricalType) -> f64 {
    let s = log2_sequence_raw(p, &t.counts);
    if s == f64::NEG_INFINITY {
        return s;
    }
    s + log2_type_class_size(t)
}

/// `P^n(T_Q) = |T_Q| ∏ P(x)^{counts(x)}`.
pub fn type_class_probability(p: &Distribution, t: &EmpiricalType) -> Result<f64> {
    Ok(log2_type_class_probability(p, t)?.exp2())
}

/// Exact check of `|P^n|^{-1} 2^{nH(Q)} ≤ |T_Q| ≤ 2^{nH(Q)}`.
///
/// `2^{nH(Q)} = n^n / ∏ c^c` is rational, so both sides are compared after
/// clearing denominators.
pub fn class_size_bounds_hold(t: &EmpiricalType) -> (bool, bool) {
    let size = type_class_size(t);
    let mut denom = BigUint::one();
    for &c in &t.counts {
        denom *= BigUint::from(c).pow(c as u32);
    }
    let nn = BigUint::from(t.n).pow(t.n as u32);
    let scaled = &size * &denom;
    let upper = scaled <= nn;
    let lower = nn <= num_types(t.n, t.alphabet_size()) * scaled;
    (lower, upper)
}

/// Relative gap between `2^{-n(D(Q||P)+H(Q))}` and the direct product
/// `∏ P(x)^{counts(x)}`; zero when both vanish.
pub fn exactness_error(p: &Distribution, t: &EmpiricalType) -> Result<f64> {
    let direct = sequence_log2_probability(p, t)?;
    let exponent = sequence_probability_exponent(p, t)?;
    Ok(match exponent {
        ExtendedReal::PosInfinity => {
            if direct == f64::NEG_INFINITY {
                0.0
            } else {
                1.0
            }
        }
        ExtendedReal::Finite(e) => {
            if direct == f64::NEG_INFINITY {
                1.0
            } else {
                ((-(t.n as f64) * e - direct).exp2() - 1.0).abs()
            }
        }
    })
}

/// Exact tail `P^n{D(π‖P) ≥ δ}` against `|P^n| 2^{-nδ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationCheck {
    pub n: u64,
    pub delta: f64,
    pub exact_tail: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn deviation_bound_check(p: &Distribution, n: u64, delta: f64) -> Result<DeviationCheck> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    let count = check_enumeration(n, p.alphabet_size())?;
    let mut tail = 0.0;
    for t in stream_types(n, p.alphabet_size())? {
        let d = kl_raw(&t.probs(), p.probs()).unwrap_or(f64::INFINITY);
        if d >= delta {
            tail += log2_class_probability_raw(p.probs(), &t).exp2();
        }
    }
    let bound = count as f64 * (-(n as f64) * delta).exp2();
    Ok(DeviationCheck {
        n,
        delta,
        exact_tail: tail,
        bound,
        holds: tail <= bound,
    })
}

/// One row of the type table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeRow {
    pub counts: Vec<u64>,
    /// Decimal string of the exact `|T_Q|`.
    pub class_size: String,
    pub size_lower_bound_holds: bool,
    pub size_upper_bound_holds: bool,
    pub probability: Option<f64>,
    pub exponent: Option<ExtendedReal>,
    pub exactness_error: Option<f64>,
}

/// All four type-counting facts for one `(n, |X|)` and optional `P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeReport {
    pub n: u64,
    pub alphabet_size: usize,
    pub num_types: u64,
    pub enumerated: u64,
    pub count_matches: bool,
    /// `|P^n| ≤ (n+1)^{|X|}`.
    pub count_within_polynomial: bool,
    /// `Σ_Q |T_Q| = |X|^n`.
    pub sizes_sum_to_total: bool,
    /// Both class-size bounds on every type (only checked for `n ≤ 60`).
    pub size_bounds_hold: Option<bool>,
    pub probability_mass: Option<f64>,
    pub max_exactness_error: Option<f64>,
    pub exactness_holds: Option<bool>,
    pub deviation: Option<DeviationCheck>,
    pub types: Vec<TypeRow>,
}

pub fn type_report(n: u64, alphabet_size: usize, p: Option<&Distribution>, delta: Option<f64>) -> Result<TypeReport> {
    if let Some(p) = p {
        if p.alphabet_size() != alphabet_size {
            return Err(Error::AlphabetMismatch {
                left: alphabet_size,
                right: p.alphabet_size(),
            });
        }
    }
    let count = check_enumeration(n, alphabet_size)?;
    let exact = n <= EXACT_FACTORIAL_LIMIT;
    let mut rows = Vec::new();
    let mut total = BigUint::zero();
    let mut bounds_ok = true;
    let mut mass = 0.0;
    let mut max_err: f64 = 0.0;
    for t in stream_types(n, alphabet_size)? {
        let size = type_class_size(&t);
        total += &size;
        let (lo, hi) = if exact {
            class_size_bounds_hold(&t)
        } else {
            (true, true)
        };
        bounds_ok &= lo && hi;
        let (probability, exponent, err) = match p {
            Some(p) => {
                let pr = type_class_probability(p, &t)?;
                mass += pr;
                let e = exactness_error(p, &t)?;
                max_err = max_err.max(e);
                (Some(pr), Some(sequence_probability_exponent(p, &t)?), Some(e))
            }
            None => (None, None, None),
        };
        rows.push(TypeRow {
            counts: t.counts.clone(),
            class_size: size.to_string(),
            size_lower_bound_holds: lo,
            size_upper_bound_holds: hi,
            probability,
            exponent,
            exactness_error: err,
        });
    }
    let deviation = match (p, delta) {
        (Some(p), Some(d)) => Some(deviation_bound_check(p, n, d)?),
        _ => None,
    };
    Ok(TypeReport {
        n,
        alphabet_size,
        num_types: count,
        enumerated: rows.len() as u64,
        count_matches: rows.len() as u64 == count,
        count_within_polynomial: BigUint::from(count) <= BigUint::from(n + 1).pow(alphabet_size as u32),
        sizes_sum_to_total: total == BigUint::from(alphabet_size).pow(n as u32),
        size_bounds_hold: exact.then_some(bounds_ok),
        probability_mass: p.map(|_| mass),
        max_exactness_error: p.map(|_| max_err),
        exactness_holds: p.map(|_| max_err <= EXACTNESS_TOLERANCE),
        deviation,
        types: rows,
    })
}

/// `H(Q)` of a type, in bits.
pub fn type_entropy(t: &EmpiricalType) -> f64 {
    match t.to_distribution() {
        Ok(d) => entropy(&d),
        Err(_) => 0.0,
    }
}
