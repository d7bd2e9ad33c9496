//! Exponentially weighted codelengths `L_λ(P,ℓ) = (1/λ) log Σ P(x) 2^{λℓ(x)}`.
//!
//! Kraft sums are compared exactly: every finite length vector has a dyadic
//! Kraft sum, which is tracked as an integer numerator over `2^max(ℓ)`.

use std::f64::consts::LN_2;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::numeric::log_sum_exp;
use crate::order::{Alpha, Order};
use crate::renyi::renyi_entropy;
use crate::variational::optimal_q_entropy;

/// Largest alphabet accepted by [`brute_force_min_codelength`].
pub const BRUTE_FORCE_MAX_ALPHABET: usize = 6;
/// Largest `max_len` accepted by [`brute_force_min_codelength`].
pub const BRUTE_FORCE_MAX_LEN: u32 = 12;

/// Slack for comparisons of floating-point codelengths against entropies.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Positive integer codeword lengths satisfying Kraft's inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct CodelengthAssignment {
    lengths: Vec<u32>,
}

/// `Σ 2^{-ℓ}` as a numerator over `2^max(ℓ)`.
fn kraft_numerator(lengths: &[u32]) -> (BigUint, u32) {
    let top = lengths.iter().copied().max().unwrap_or(0);
    let mut num = BigUint::zero();
    for &l in lengths {
        num += BigUint::one() << (top - l);
    }
    (num, top)
}

/// Whether `Σ 2^{-ℓ} ≤ 1`, decided exactly.
pub fn kraft_feasible(lengths: &[u32]) -> bool {
    let (num, top) = kraft_numerator(lengths);
    num <= BigUint::one() << top
}

/// `Σ 2^{-ℓ}` rounded to `f64`.
pub fn kraft_sum(lengths: &[u32]) -> f64 {
    lengths.iter().map(|&l| (-(l as f64)).exp2()).sum()
}

impl CodelengthAssignment {
    pub fn new(lengths: Vec<u32>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if let Some(i) = lengths.iter().position(|&l| l == 0) {
            return Err(Error::InvalidParameter(format!("codeword length of symbol {i} is 0")));
        }
        if !kraft_feasible(&lengths) {
            return Err(Error::KraftViolation {
                kraft: kraft_sum(&lengths),
            });
        }
        Ok(CodelengthAssignment { lengths })
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn kraft_sum(&self) -> f64 {
        kraft_sum(&self.lengths)
    }
}

impl TryFrom<Vec<u32>> for CodelengthAssignment {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        CodelengthAssignment::new(v)
    }
}

impl From<CodelengthAssignment> for Vec<u32> {
    fn from(c: CodelengthAssignment) -> Self {
        c.lengths
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )))
    }
}

/// `L_λ(P,ℓ)` for arbitrary lengths, Kraft-feasible or not.
pub fn weighted_codelength_raw(p: &Distribution, lengths: &[u32], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lengths.len() != p.alphabet_size() {
        return Err(Error::ShapeMismatch(format!(
            "{} lengths for an alphabet of {} symbols",
            lengths.len(),
            p.alphabet_size()
        )));
    }
    let l = log_sum_exp(
        p.probs()
            .iter()
            .zip(lengths)
            .filter(|(q, _)| **q > 0.0)
            .map(|(q, &len)| q.ln() + lambda * len as f64 * LN_2),
    );
    Ok(l / (lambda * LN_2))
}

/// `L_λ(P,ℓ) = (1/λ) log Σ P(x) 2^{λℓ(x)}`.
pub fn weighted_codelength(p: &Distribution, l: &CodelengthAssignment, lambda: f64) -> Result<f64> {
    weighted_codelength_raw(p, l.lengths(), lambda)
}

/// The ideal (real-valued) functional `(1/λ) log Σ_{x∈S(P)} P(x) R(x)^{-λ}`.
pub fn ideal_codelength(p: &Distribution, r: &Distribution, lambda: f64) -> Result<ExtendedReal> {
    check_lambda(lambda)?;
    p.ensure_same_alphabet(r)?;
    let mut terms = Vec::new();
    for (&px, &rx) in p.probs().iter().zip(r.probs()) {
        if px > 0.0 {
            if rx == 0.0 {
                return Ok(ExtendedReal::PosInfinity);
            }
            terms.push(px.ln() - lambda * rx.ln());
        }
    }
    Ok(ExtendedReal::Finite(log_sum_exp(terms) / (lambda * LN_2)))
}

/// The order `1/(1+λ)` attached to parameter `λ`.
pub fn campbell_order(lambda: f64) -> Result<Alpha> {
    check_lambda(lambda)?;
    Alpha::new(1.0 / (1.0 + lambda))
}

/// `H_{1/(1+λ)}(P)`, the lower end of the optimal-codelength sandwich.
pub fn campbell_entropy(p: &Distribution, lambda: f64) -> Result<f64> {
    Ok(renyi_entropy(p, Order::Finite(campbell_order(lambda)?)))
}

/// Lengths `max(1, ⌈-log Q*(x)⌉)` on `S(P)` for the tilting `Q*` of order
/// `1/(1+λ)`.
///
/// Symbols outside `S(P)` share the Kraft budget left over by the support:
/// each gets the shortest length that keeps the total within 1. When the
/// support already exhausts the budget, the support symbol whose
/// lengthening costs least is lengthened by one first.
pub fn campbell_code(p: &Distribution, lambda: f64) -> Result<CodelengthAssignment> {
    let q = optimal_q_entropy(p, campbell_order(lambda)?);
    let mut lengths: Vec<u32> = q
        .probs()
        .iter()
        .map(|&v| if v > 0.0 { ((-v.log2()).ceil() as u32).max(1) } else { 0 })
        .collect();
    let outside: Vec<usize> = (0..lengths.len()).filter(|&x| lengths[x] == 0).collect();
    if !outside.is_empty() {
        let support: Vec<u32> = lengths.iter().copied().filter(|&l| l > 0).collect();
        let (num, top) = kraft_numerator(&support);
        if num == BigUint::one() << top {
            let x = (0..lengths.len())
                .filter(|&x| lengths[x] > 0)
                .min_by(|&a, &b| {
                    let ca = p.prob(a).ln() + lambda * lengths[a] as f64 * LN_2;
                    let cb = p.prob(b).ln() + lambda * lengths[b] as f64 * LN_2;
                    ca.total_cmp(&cb)
                })
                .expect("non-empty support");
            lengths[x] += 1;
        }
        let support: Vec<u32> = lengths.iter().copied().filter(|&l| l > 0).collect();
        let (num, top) = kraft_numerator(&support);
        // free budget (2^top - num) / 2^top must hold k * 2^{-m}
        let free = (BigUint::one() << top) - num;
        let k = BigUint::from(outside.len());
        let mut m = 1u32;
        while (&k << top) > (&free << m) {
            m += 1;
        }
        for x in outside {
            lengths[x] = m;
        }
    }
    CodelengthAssignment::new(lengths)
}

/// Exhaustive minimum of `L_λ(P,ℓ)` over Kraft-feasible lengths in
/// `[1, max_len]`.
pub fn brute_force_min_codelength(p: &Distribution, lambda: f64, max_len: u32) -> Result<(CodelengthAssignment, f64)> {
    check_lambda(lambda)?;
    let n = p.alphabet_size();
    if n > BRUTE_FORCE_MAX_ALPHABET || max_len > BRUTE_FORCE_MAX_LEN {
        return Err(Error::TooLarge(format!(
            "exhaustive search limited to {BRUTE_FORCE_MAX_ALPHABET} symbols and lengths up to {BRUTE_FORCE_MAX_LEN}"
        )));
    }
    if max_len == 0 {
        return Err(Error::InvalidParameter("max_len must be at least 1".into()));
    }
    let support = p.support();
    let zeros = (n - support.len()) as u64;
    // budget in units of 2^{-max_len}; symbols outside S(P) take max_len
    let total = 1u64 << max_len;
    if zeros + support.len() as u64 > total {
        return Err(Error::InvalidParameter(format!(
            "no Kraft-feasible assignment of {n} lengths up to {max_len}"
        )));
    }
    let weights: Vec<f64> = support.iter().map(|&x| p.prob(x)).collect();
    let mut search = Search {
        weights: &weights,
        lambda,
        max_len,
        current: vec![0; support.len()],
        best: None,
    };
    search.descend(0, total - zeros, 0.0);
    let (best_sum, best) = search.best.expect("a feasible assignment exists");
    let mut lengths = vec![max_len; n];
    for (i, &x) in support.iter().enumerate() {
        lengths[x] = best[i];
    }
    Ok((CodelengthAssignment::new(lengths)?, best_sum.log2() / lambda))
}

struct Search<'a> {
    weights: &'a [f64],
    lambda: f64,
    max_len: u32,
    current: Vec<u32>,
    best: Option<(f64, Vec<u32>)>,
}

impl Search<'_> {
    /// `budget` counts free units of `2^{-max_len}`; `sum` is the partial
    /// `Σ P(x) 2^{λℓ(x)}`.
    fn descend(&mut self, i: usize, budget: u64, sum: f64) {
        let remaining = (self.weights.len() - i) as u64;
        if i == self.weights.len() {
            if self.best.as_ref().is_none_or(|(b, _)| sum < *b) {
                self.best = Some((sum, self.current.clone()));
            }
            return;
        }
        if let Some((b, _)) = &self.best {
            if sum >= *b {
                return;
            }
        }
        for l in 1..=self.max_len {
            let cost = 1u64 << (self.max_len - l);
            // every later symbol needs at least one unit
            if cost + (remaining - 1) > budget {
                continue;
            }
            self.current[i] = l;
            let term = self.weights[i] * (self.lambda * l as f64).exp2();
            self.descend(i + 1, budget - cost, sum + term);
        }
    }
}

/// The optimal-codelength sandwich for one `(P, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodelengthReport {
    pub lambda: f64,
    /// `H_{1/(1+λ)}(P)`.
    pub lower_bound: f64,
    /// `H_{1/(1+λ)}(P) + 1`.
    pub upper_bound: f64,
    pub campbell_code: CodelengthAssignment,
    pub campbell_value: f64,
    pub optimal_code: Option<CodelengthAssignment>,
    pub optimal_value: Option<f64>,
    /// `H ≤ min L ≤ H + 1` (only when the exhaustive search ran).
    pub sandwich_holds: Option<bool>,
    /// `L(campbell code) ≤ H + 1`.
    pub campbell_within_bound: bool,
}

/// Evaluates the tilted code and, for small alphabets, the exhaustive
/// optimum against `H_{1/(1+λ)}(P)`.
pub fn codelength_report(p: &Distribution, lambda: f64, max_len: u32) -> Result<CodelengthReport> {
    let h = campbell_entropy(p, lambda)?;
    let code = campbell_code(p, lambda)?;
    let campbell_value = weighted_codelength(p, &code, lambda)?;
    let brute = if p.alphabet_size() <= BRUTE_FORCE_MAX_ALPHABET {
        Some(brute_force_min_codelength(p, lambda, max_len)?)
    } else {
        None
    };
    let sandwich_holds = brute
        .as_ref()
        .map(|(_, v)| h <= v + ROUNDING_SLACK && *v <= h + 1.0 + ROUNDING_SLACK);
    let (optimal_code, optimal_value) = match brute {
        Some((c, v)) => (Some(c), Some(v)),
        None => (None, None),
    };
    Ok(CodelengthReport {
        lambda,
        lower_bound: h,
        upper_bound: h + 1.0,
        campbell_within_bound: campbell_value <= h + 1.0 + ROUNDING_SLACK,
        campbell_code: code,
        campbell_value,
        optimal_code,
        optimal_value,
        sandwich_holds,
    })
}
