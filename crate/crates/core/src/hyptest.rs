//! Two-sensor composite hypothesis testing.
//!
//! Sensor 1 contributes `n1` samples and sensor 2 contributes
//! `n2 = round(λ n1)`. Under "phenomena", the samples are drawn from
//! `P1^{n1} × P2^{n2}` with `P1 ∈ 𝐏₁` and `P2 ∈ 𝐏₂`. Under "noise", all
//! `n1 + n2` samples are drawn i.i.d. from some `Q ∈ 𝐐`. Every rule here
//! depends on the samples only through the pair of empirical types, so exact
//! error probabilities are sums over type pairs.
//!
//! Exponent formulas use the realized ratio `n2/n1`, not the nominal λ.

use num_traits::ToPrimitive;
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::method_of_types::{log2_class_probability_raw, num_types, EmpiricalType, TypeIter, MAX_TYPES};
use crate::order::{Alpha, Order};
use crate::random::instance_rng;
use crate::renyi::{family_divergence, generalized_renyi_divergence, AlphaVector};
use crate::shannon::kl_raw;
use crate::variational::optimal_q_divergence;

/// Environment variable capping the worker count of exact summation
/// (`0` means sequential).
pub const THREADS_ENV: &str = "RENYI_LAB_THREADS";

/// Type-pair indices handled per work unit.
const BLOCK: usize = 32;

/// Slack used when comparing exponents that are mathematically ordered.
pub const EXPONENT_SLACK: f64 = 1e-12;

/// `δ_n = |X| log n / n` (`n ≥ 1`).
pub fn delta_n(n: u64, alphabet_size: usize) -> f64 {
    debug_assert!(n >= 1);
    alphabet_size as f64 * (n as f64).log2() / n as f64
}

/// The false-alarm bound of the modified rule:
/// `C(n1+|X|-1, |X|-1) n1^{-|X|} + C(n2+|X|-1, |X|-1) n2^{-|X|}`.
/// A sensor with no samples contributes nothing.
pub fn pi_n_bound(n1: u64, n2: u64, alphabet_size: usize) -> f64 {
    let term = |m: u64| {
        if m == 0 {
            0.0
        } else {
            let c = num_types(m, alphabet_size).to_f64().unwrap_or(f64::INFINITY);
            c * (m as f64).powi(-(alphabet_size as i32))
        }
    };
    term(n1) + term(n2)
}

/// Families, sampling ratio and block length of one testing problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario {
    p1: Vec<Distribution>,
    p2: Vec<Distribution>,
    q: Vec<Distribution>,
    lambda: f64,
    n1: u64,
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    p1: Vec<Distribution>,
    p2: Vec<Distribution>,
    q: Vec<Distribution>,
    lambda: f64,
    n1: u64,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(r: RawScenario) -> Result<Self> {
        Scenario::new(r.p1, r.p2, r.q, r.lambda, r.n1)
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> Self {
        RawScenario {
            p1: s.p1,
            p2: s.p2,
            q: s.q,
            lambda: s.lambda,
            n1: s.n1,
        }
    }
}

impl Scenario {
    pub fn new(
        p1: Vec<Distribution>,
        p2: Vec<Distribution>,
        q: Vec<Distribution>,
        lambda: f64,
        n1: u64,
    ) -> Result<Self> {
        for (name, f) in [("p1", &p1), ("p2", &p2), ("q", &q)] {
            if f.is_empty() {
                return Err(Error::InvalidParameter(format!("family {name} is empty")));
            }
        }
        let first = &p1[0];
        for d in p1.iter().chain(&p2).chain(&q) {
            first.ensure_same_alphabet(d)?;
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        if n1 == 0 {
            return Err(Error::InvalidParameter("n1 must be at least 1".into()));
        }
        Ok(Scenario { p1, p2, q, lambda, n1 })
    }

    pub fn family_p1(&self) -> &[Distribution] {
        &self.p1
    }

    pub fn family_p2(&self) -> &[Distribution] {
        &self.p2
    }

    pub fn family_q(&self) -> &[Distribution] {
        &self.q
    }

    /// The nominal sampling ratio.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    /// `round(λ n1)`.
    pub fn n2(&self) -> u64 {
        (self.lambda * self.n1 as f64).round() as u64
    }

    pub fn n(&self) -> u64 {
        self.n1 + self.n2()
    }

    /// `n2 / n1`, the ratio used by every exponent formula.
    pub fn realized_lambda(&self) -> f64 {
        self.n2() as f64 / self.n1 as f64
    }

    pub fn alphabet_size(&self) -> usize {
        self.p1[0].alphabet_size()
    }

    pub fn with_n1(&self, n1: u64) -> Result<Scenario> {
        Scenario::new(self.p1.clone(), self.p2.clone(), self.q.clone(), self.lambda, n1)
    }

    /// The same problem with about `n` samples in total:
    /// `n1 = round(n / (1+λ))`.
    pub fn with_total(&self, n: u64) -> Result<Scenario> {
        let n1 = ((n as f64) / (1.0 + self.lambda)).round().max(1.0) as u64;
        self.with_n1(n1)
    }
}

/// How the threshold of a rule depends on the block length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdPolicy {
    /// `δ_n = |X| log n / n`.
    Standard,
    /// `c · δ_n`.
    Scaled(f64),
    /// A constant threshold.
    Fixed(f64),
}

impl ThresholdPolicy {
    pub fn threshold(self, n: u64, alphabet_size: usize) -> f64 {
        match self {
            ThresholdPolicy::Standard => delta_n(n, alphabet_size),
            ThresholdPolicy::Scaled(c) => c * delta_n(n, alphabet_size),
            ThresholdPolicy::Fixed(d) => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// `inf_Q D(π_x‖Q) ≥ δ_{n1}` on sensor 1 alone.
    SingleSensor,
    /// Per-sensor tests with their own thresholds, combined by "or".
    Union,
    /// `inf_Q max{D(π_x‖Q), D(π_y‖Q)} ≥ max(δ_{n1}, δ_{n2})`.
    Modified,
    /// Declares phenomena when the two empirical supports are disjoint.
    DisjointSupport,
}

/// A rule declaring "phenomena" on a set of type pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub kind: RuleKind,
    pub threshold: ThresholdPolicy,
}

impl DecisionRule {
    pub fn new(kind: RuleKind) -> Self {
        DecisionRule {
            kind,
            threshold: ThresholdPolicy::Standard,
        }
    }

    pub fn modified() -> Self {
        DecisionRule::new(RuleKind::Modified)
    }

    pub fn union() -> Self {
        DecisionRule::new(RuleKind::Union)
    }

    pub fn single_sensor() -> Self {
        DecisionRule::new(RuleKind::SingleSensor)
    }

    pub fn disjoint_support() -> Self {
        DecisionRule::new(RuleKind::DisjointSupport)
    }

    pub fn with_threshold(mut self, threshold: ThresholdPolicy) -> Self {
        self.threshold = threshold;
        self
    }
}

/// Divergences `D(t‖Q)` for every `Q` in the noise family, `+inf` off
/// absolute continuity.
fn noise_divergences(q: &[Distribution], t: &EmpiricalType) -> Vec<f64> {
    let probs = t.probs();
    q.iter()
        .map(|q| kl_raw(&probs, q.probs()).unwrap_or(f64::INFINITY))
        .collect()
}

/// A rule bound to a scenario's thresholds.
#[derive(Debug, Clone, Copy)]
struct BoundRule {
    kind: RuleKind,
    delta1: f64,
    delta2: f64,
    has_sensor2: bool,
}

impl BoundRule {
    fn new(rule: DecisionRule, s: &Scenario) -> Self {
        let k = s.alphabet_size();
        let n2 = s.n2();
        BoundRule {
            kind: rule.kind,
            delta1: rule.threshold.threshold(s.n1(), k),
            delta2: if n2 > 0 { rule.threshold.threshold(n2, k) } else { 0.0 },
            has_sensor2: n2 > 0,
        }
    }

    fn min(v: &[f64]) -> f64 {
        v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `d1`, `d2` are the noise divergences of the two types.
    fn includes(&self, t1: &EmpiricalType, d1: &[f64], t2: &EmpiricalType, d2: &[f64]) -> bool {
        match self.kind {
            RuleKind::SingleSensor => Self::min(d1) >= self.delta1,
            RuleKind::Union => Self::min(d1) >= self.delta1 || (self.has_sensor2 && Self::min(d2) >= self.delta2),
            RuleKind::Modified => {
                if !self.has_sensor2 {
                    return Self::min(d1) >= self.delta1;
                }
                let delta = self.delta1.max(self.delta2);
                d1.iter().zip(d2).map(|(a, b)| a.max(*b)).fold(f64::INFINITY, f64::min) >= delta
            }
            RuleKind::DisjointSupport => t1.counts().iter().zip(t2.counts()).all(|(a, b)| *a == 0 || *b == 0),
        }
    }
}

/// Whether `rule` declares "phenomena" on the type pair `(t1, t2)`.
pub fn rule_contains(rule: DecisionRule, s: &Scenario, t1: &EmpiricalType, t2: &EmpiricalType) -> Result<bool> {
    for (t, expected) in [(t1, s.n1()), (t2, s.n2())] {
        if t.n() != expected {
            return Err(Error::DenominatorMismatch { expected, found: t.n() });
        }
        if t.alphabet_size() != s.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                left: s.alphabet_size(),
                right: t.alphabet_size(),
            });
        }
    }
    let b = BoundRule::new(rule, s);
    Ok(b.includes(t1, &noise_divergences(&s.q, t1), t2, &noise_divergences(&s.q, t2)))
}

/// How error probabilities were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// Miss-detection probability under one `(P1, P2)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairError {
    pub p1: usize,
    pub p2: usize,
    pub value: f64,
    /// Binomial standard error (Monte Carlo only).
    pub std_error: Option<f64>,
    /// `min (n1 D(t1‖P1) + n2 D(t2‖P2)) / n` over excluded type pairs
    /// (exact only; `+inf` when nothing is excluded).
    pub excluded_rate: Option<ExtendedReal>,
}

/// False-alarm probability under one `Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseError {
    pub q: usize,
    pub value: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub method: Method,
    pub n1: u64,
    pub n2: u64,
    pub lambda: f64,
    pub realized_lambda: f64,
    pub p_md: Vec<PairError>,
    pub p_fa: Vec<NoiseError>,
    /// `max |p_md + P(included) - 1|` over pairs (exact only).
    pub mass_defect: Option<f64>,
}

impl ErrorReport {
    /// The pair with the largest miss-detection probability (first on ties).
    pub fn worst_pair(&self) -> &PairError {
        self.p_md
            .iter()
            .fold(&self.p_md[0], |best, e| if e.value > best.value { e } else { best })
    }

    pub fn worst_p_fa(&self) -> f64 {
        self.p_fa.iter().map(|e| e.value).fold(0.0, f64::max)
    }
}

/// Worker count from [`THREADS_ENV`]; all available cores when unset.
pub fn worker_count() -> usize {
    match std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        Some(0) => 1,
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

fn types_for(n: u64, k: usize) -> Vec<EmpiricalType> {
    if n == 0 {
        vec![EmpiricalType::empty(k)]
    } else {
        TypeIter::unchecked(n, k).collect()
    }
}

fn class_probs(family: &[Distribution], types: &[EmpiricalType]) -> Vec<Vec<f64>> {
    family
        .iter()
        .map(|d| {
            types
                .iter()
                .map(|t| log2_class_probability_raw(d.probs(), t).exp2())
                .collect()
        })
        .collect()
}

/// `n_i D(t‖P)` for every member of a family (`+inf` off support).
fn scaled_divergences(family: &[Distribution], types: &[EmpiricalType]) -> Vec<Vec<f64>> {
    family
        .iter()
        .map(|d| {
            types
                .iter()
                .map(|t| {
                    if t.n() == 0 {
                        0.0
                    } else {
                        t.n() as f64 * kl_raw(&t.probs(), d.probs()).unwrap_or(f64::INFINITY)
                    }
                })
                .collect()
        })
        .collect()
}

/// Partial sums for a block of sensor-1 types; indexed `[i * f2 + j]` or `[q]`.
struct Partial {
    md: Vec<f64>,
    included: Vec<f64>,
    rate: Vec<f64>,
    fa: Vec<f64>,
}

struct ExactTables {
    types1: Vec<EmpiricalType>,
    types2: Vec<EmpiricalType>,
    div1: Vec<Vec<f64>>,
    div2: Vec<Vec<f64>>,
    pr1: Vec<Vec<f64>>,
    pr2: Vec<Vec<f64>>,
    qr1: Vec<Vec<f64>>,
    qr2: Vec<Vec<f64>>,
    sd1: Vec<Vec<f64>>,
    sd2: Vec<Vec<f64>>,
}

impl ExactTables {
    fn block(&self, rule: &BoundRule, range: std::ops::Range<usize>) -> Partial {
        let (f1, f2, fq) = (self.pr1.len(), self.pr2.len(), self.qr1.len());
        let mut out = Partial {
            md: vec![0.0; f1 * f2],
            included: vec![0.0; f1 * f2],
            rate: vec![f64::INFINITY; f1 * f2],
            fa: vec![0.0; fq],
        };
        let mut excl2 = vec![0.0; f2];
        let mut incl2 = vec![0.0; f2];
        let mut rate2 = vec![f64::INFINITY; f2];
        let mut qincl2 = vec![0.0; fq];
        for a in range {
            excl2.fill(0.0);
            incl2.fill(0.0);
            rate2.fill(f64::INFINITY);
            qincl2.fill(0.0);
            let t1 = &self.types1[a];
            for (b, t2) in self.types2.iter().enumerate() {
                if rule.includes(t1, &self.div1[a], t2, &self.div2[b]) {
                    for j in 0..f2 {
                        incl2[j] += self.pr2[j][b];
                    }
                    for q in 0..fq {
                        qincl2[q] += self.qr2[q][b];
                    }
                } else {
                    for j in 0..f2 {
                        excl2[j] += self.pr2[j][b];
                        rate2[j] = rate2[j].min(self.sd2[j][b]);
                    }
                }
            }
            for i in 0..f1 {
                let p = self.pr1[i][a];
                for j in 0..f2 {
                    out.md[i * f2 + j] += p * excl2[j];
                    out.included[i * f2 + j] += p * incl2[j];
                    let r = self.sd1[i][a] + rate2[j];
                    if r < out.rate[i * f2 + j] {
                        out.rate[i * f2 + j] = r;
                    }
                }
            }
            for q in 0..fq {
                out.fa[q] += self.qr1[q][a] * qincl2[q];
            }
        }
        out
    }
}

/// Exact error probabilities by summation over all type pairs.
///
/// The sensor-1 types are cut into fixed blocks whose partial sums are
/// combined in block order, so the result does not depend on the worker
/// count.
pub fn exact_errors(s: &Scenario, rule: DecisionRule) -> Result<ErrorReport> {
    let k = s.alphabet_size();
    let (n1, n2) = (s.n1(), s.n2());
    let c1 = num_types(n1, k);
    let c2 = if n2 == 0 { 1u32.into() } else { num_types(n2, k) };
    let pairs = &c1 * &c2;
    if pairs > MAX_TYPES.into() {
        return Err(Error::TooLarge(format!("{pairs} type pairs exceed {MAX_TYPES}")));
    }
    let types1 = types_for(n1, k);
    let types2 = types_for(n2, k);
    let tables = ExactTables {
        div1: types1.iter().map(|t| noise_divergences(&s.q, t)).collect(),
        div2: types2.iter().map(|t| noise_divergences(&s.q, t)).collect(),
        pr1: class_probs(&s.p1, &types1),
        pr2: class_probs(&s.p2, &types2),
        qr1: class_probs(&s.q, &types1),
        qr2: class_probs(&s.q, &types2),
        sd1: scaled_divergences(&s.p1, &types1),
        sd2: scaled_divergences(&s.p2, &types2),
        types1,
        types2,
    };
    let bound = BoundRule::new(rule, s);
    let blocks: Vec<std::ops::Range<usize>> = (0..tables.types1.len())
        .step_by(BLOCK)
        .map(|a| a..(a + BLOCK).min(tables.types1.len()))
        .collect();
    let workers = worker_count().min(blocks.len()).max(1);
    let partials: Vec<Partial> = if workers == 1 {
        blocks.iter().map(|r| tables.block(&bound, r.clone())).collect()
    } else {
        let mut slots: Vec<Option<Partial>> = (0..blocks.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let tables = &tables;
                    let blocks = &blocks;
                    scope.spawn(move || {
                        (w..blocks.len())
                            .step_by(workers)
                            .map(|b| (b, tables.block(&bound, blocks[b].clone())))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (b, p) in h.join().expect("worker panicked") {
                    slots[b] = Some(p);
                }
            }
        });
        slots.into_iter().map(|p| p.expect("every block computed")).collect()
    };
    let (f1, f2, fq) = (s.p1.len(), s.p2.len(), s.q.len());
    let mut md = vec![0.0; f1 * f2];
    let mut included = vec![0.0; f1 * f2];
    let mut rate = vec![f64::INFINITY; f1 * f2];
    let mut fa = vec![0.0; fq];
    for p in &partials {
        for (idx, v) in p.md.iter().enumerate() {
            md[idx] += v;
            included[idx] += p.included[idx];
            rate[idx] = rate[idx].min(p.rate[idx]);
        }
        for (q, v) in p.fa.iter().enumerate() {
            fa[q] += v;
        }
    }
    let n = s.n() as f64;
    let mut defect: f64 = 0.0;
    let mut p_md = Vec::with_capacity(f1 * f2);
    for i in 0..f1 {
        for j in 0..f2 {
            let idx = i * f2 + j;
            defect = defect.max((md[idx] + included[idx] - 1.0).abs());
            p_md.push(PairError {
                p1: i,
                p2: j,
                value: md[idx].clamp(0.0, 1.0),
                std_error: None,
                excluded_rate: Some(ExtendedReal::from_f64(rate[idx] / n)),
            });
        }
    }
    Ok(ErrorReport {
        method: Method::Exact,
        n1,
        n2,
        lambda: s.lambda,
        realized_lambda: s.realized_lambda(),
        p_md,
        p_fa: fa
            .into_iter()
            .enumerate()
            .map(|(q, v)| NoiseError {
                q,
                value: v.clamp(0.0, 1.0),
                std_error: None,
            })
            .collect(),
        mass_defect: Some(defect),
    })
}

const MD_STREAM: u64 = 0x4D44 << 32;
const FA_STREAM: u64 = 0x4641 << 32;

fn sample_type<R: Rng>(rng: &mut R, sampler: &WeightedIndex<f64>, n: u64, k: usize) -> EmpiricalType {
    let mut counts = vec![0u64; k];
    for _ in 0..n {
        counts[rng.sample(sampler)] += 1;
    }
    EmpiricalType::from_counts_unchecked(counts)
}

fn sampler(d: &Distribution) -> WeightedIndex<f64> {
    WeightedIndex::new(d.probs()).expect("a distribution has positive mass")
}

fn binomial_se(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Frequency estimates of the same probabilities as [`exact_errors`].
///
/// Trial `r` of error event `e` uses the generator
/// `instance_rng(seed, e, r)`, so an estimate depends only on
/// `(seed, trials)`.
pub fn monte_carlo_errors(s: &Scenario, rule: DecisionRule, trials: u64, seed: u64) -> Result<ErrorReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let k = s.alphabet_size();
    let (n1, n2) = (s.n1(), s.n2());
    let bound = BoundRule::new(rule, s);
    let included = |rng: &mut rand_chacha::ChaCha8Rng, a: &WeightedIndex<f64>, b: &WeightedIndex<f64>| {
        let t1 = sample_type(rng, a, n1, k);
        let t2 = sample_type(rng, b, n2, k);
        bound.includes(&t1, &noise_divergences(&s.q, &t1), &t2, &noise_divergences(&s.q, &t2))
    };
    let mut p_md = Vec::new();
    let f2 = s.p2.len();
    for (i, p1) in s.p1.iter().enumerate() {
        let a = sampler(p1);
        for (j, p2) in s.p2.iter().enumerate() {
            let b = sampler(p2);
            let stream = MD_STREAM | (i * f2 + j) as u64;
            let misses = (0..trials)
                .filter(|&r| !included(&mut instance_rng(seed, stream, r), &a, &b))
                .count() as u64;
            let v = misses as f64 / trials as f64;
            p_md.push(PairError {
                p1: i,
                p2: j,
                value: v,
                std_error: Some(binomial_se(v, trials)),
                excluded_rate: None,
            });
        }
    }
    let mut p_fa = Vec::new();
    for (q, dq) in s.q.iter().enumerate() {
        let a = sampler(dq);
        let stream = FA_STREAM | q as u64;
        let alarms = (0..trials)
            .filter(|&r| included(&mut instance_rng(seed, stream, r), &a, &a))
            .count() as u64;
        let v = alarms as f64 / trials as f64;
        p_fa.push(NoiseError {
            q,
            value: v,
            std_error: Some(binomial_se(v, trials)),
        });
    }
    Ok(ErrorReport {
        method: Method::MonteCarlo { trials, seed },
        n1,
        n2,
        lambda: s.lambda,
        realized_lambda: s.realized_lambda(),
        p_md,
        p_fa,
        mass_defect: None,
    })
}

fn family_min_kl(q: &Distribution, family: &[Distribution]) -> ExtendedReal {
    family.iter().fold(ExtendedReal::PosInfinity, |m, p| {
        m.min(kl_raw(q.probs(), p.probs()).map_or(ExtendedReal::PosInfinity, ExtendedReal::Finite))
    })
}

/// `(1+λ)^{-1} min_{Q∈𝐐} (D(Q‖𝐏₁) + λ D(Q‖𝐏₂))` with the realized λ.
pub fn achievable_exponent(s: &Scenario) -> ExtendedReal {
    let lambda = s.realized_lambda();
    s.q.iter().fold(ExtendedReal::PosInfinity, |best, q| {
        let a = family_min_kl(q, &s.p1);
        let b = family_min_kl(q, &s.p2).scale(lambda).expect("lambda is non-negative");
        best.min((a + b).scale(1.0 / (1.0 + lambda)).expect("positive factor"))
    })
}

fn tilt_order(s: &Scenario) -> Result<Alpha> {
    let lambda = s.realized_lambda();
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter(
            "the bound needs a positive (realized) lambda".into(),
        ));
    }
    Alpha::new(1.0 / (1.0 + lambda))
}

/// `λ (1+λ)^{-1} D_{1/(1+λ)}(𝐏₁‖𝐏₂)`.
pub fn renyi_lower_bound(s: &Scenario) -> Result<ExtendedReal> {
    let a = tilt_order(s)?;
    let lambda = s.realized_lambda();
    family_divergence(&s.p1, &s.p2, Order::Finite(a))?.scale(lambda / (1.0 + lambda))
}

/// One tilted distribution `Q* ∝ P1^{1/(1+λ)} P2^{λ/(1+λ)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstNoiseMember {
    pub p1: usize,
    pub p2: usize,
    pub q: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstNoiseFamily {
    pub members: Vec<WorstNoiseMember>,
    /// Pairs whose tilting normalizer vanishes.
    pub omitted: Vec<(usize, usize)>,
}

pub fn worst_noise_family(s: &Scenario) -> Result<WorstNoiseFamily> {
    let a = tilt_order(s)?;
    let mut members = Vec::new();
    let mut omitted = Vec::new();
    for (i, p1) in s.p1.iter().enumerate() {
        for (j, p2) in s.p2.iter().enumerate() {
            match optimal_q_divergence(p1, p2, a) {
                Ok(q) => members.push(WorstNoiseMember { p1: i, p2: j, q }),
                Err(Error::DegenerateTilting) => omitted.push((i, j)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(WorstNoiseFamily { members, omitted })
}

/// Whether the noise family meets the worst-noise family, decided by
/// max-norm distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityCheck {
    pub holds: bool,
    pub tol: f64,
    /// `min` max-norm distance between `𝐐` and the tilted family.
    pub min_distance: f64,
    /// `achievable_exponent - renyi_lower_bound`.
    pub exponent_gap: ExtendedReal,
    pub gap_within_tol: bool,
    /// The distance test and the exponent-gap test disagree.
    pub condition_mismatch: bool,
}

pub fn equality_condition(s: &Scenario, tol: f64) -> Result<EqualityCheck> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let family = worst_noise_family(s)?;
    let mut min_distance = f64::INFINITY;
    for q in &s.q {
        for m in &family.members {
            min_distance = min_distance.min(q.max_norm_distance(&m.q)?);
        }
    }
    let exponent_gap = match (achievable_exponent(s), renyi_lower_bound(s)?) {
        (ExtendedReal::Finite(e), ExtendedReal::Finite(b)) => ExtendedReal::Finite(e - b),
        (ExtendedReal::PosInfinity, ExtendedReal::Finite(_)) => ExtendedReal::PosInfinity,
        (_, ExtendedReal::PosInfinity) => ExtendedReal::ZERO,
    };
    let holds = min_distance <= tol;
    let gap_within_tol = exponent_gap <= ExtendedReal::Finite(tol);
    Ok(EqualityCheck {
        holds,
        tol,
        min_distance,
        exponent_gap,
        gap_within_tol,
        condition_mismatch: holds != gap_within_tol,
    })
}

/// `(1+λ)^{-1} α^{-1} min D_{(α, λα)}(P1, P2, Q)` over the three families,
/// for `0 < α ≤ (1+λ)^{-1}`.
pub fn exponent_alpha(s: &Scenario, alpha: f64) -> Result<ExtendedReal> {
    let lambda = s.realized_lambda();
    let max = 1.0 / (1.0 + lambda);
    if !(alpha > 0.0 && alpha <= max) {
        return Err(Error::AlphaOutOfRange { alpha, max });
    }
    let weights = AlphaVector::new(vec![alpha, lambda * alpha, (1.0 - alpha - lambda * alpha).max(0.0)])?;
    let mut best = ExtendedReal::PosInfinity;
    for p1 in &s.p1 {
        for p2 in &s.p2 {
            for q in &s.q {
                let d = generalized_renyi_divergence(&[p1.clone(), p2.clone(), q.clone()], &weights)?;
                best = best.min(d);
            }
        }
    }
    best.scale(1.0 / ((1.0 + lambda) * alpha))
}

/// `points` equally spaced orders `(1+λ)^{-1} i / points`, `i = 1..=points`.
pub fn alpha_grid(s: &Scenario, points: usize) -> Vec<f64> {
    let max = 1.0 / (1.0 + s.realized_lambda());
    (1..=points)
        .map(|i| {
            if i == points {
                max
            } else {
                max * i as f64 / points as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub exponent: ExtendedReal,
}

pub fn exponent_alpha_curve(s: &Scenario, grid: &[f64]) -> Result<Vec<AlphaPoint>> {
    grid.iter()
        .map(|&alpha| {
            Ok(AlphaPoint {
                alpha,
                exponent: exponent_alpha(s, alpha)?,
            })
        })
        .collect()
}

/// Whether a curve is non-increasing up to `slack`.
pub fn non_increasing(curve: &[AlphaPoint], slack: f64) -> bool {
    curve.windows(2).all(|w| match (w[0].exponent, w[1].exponent) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => b <= a + slack,
        (ExtendedReal::PosInfinity, _) => true,
        (ExtendedReal::Finite(_), ExtendedReal::PosInfinity) => false,
    })
}

/// The finite-n exponent of the worst pair at one total block length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    pub n: u64,
    pub n1: u64,
    pub n2: u64,
    pub worst_pair: (usize, usize),
    pub p_md: f64,
    /// `-(1/n) log p_md`; `+inf` when `p_md = 0`.
    pub exponent: ExtendedReal,
    pub achievable: ExtendedReal,
    /// `E* - 2|X| log(n+1) / n`.
    pub envelope_lower: ExtendedReal,
    pub within_envelope: bool,
    /// `min_excluded (n1 D(t1‖P1) + n2 D(t2‖P2)) / n - 2|X| log(n+1) / n`.
    pub chain_lower: ExtendedReal,
    pub chain_holds: bool,
    pub p_fa: f64,
    pub p_fa_bound: f64,
    pub p_fa_within_bound: bool,
}

fn exponent_of(p: f64, n: u64) -> ExtendedReal {
    if p <= 0.0 {
        ExtendedReal::PosInfinity
    } else {
        ExtendedReal::Finite(-p.log2() / n as f64)
    }
}

fn minus(e: ExtendedReal, c: f64) -> ExtendedReal {
    match e {
        ExtendedReal::Finite(v) => ExtendedReal::Finite(v - c),
        ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
    }
}

fn at_least(a: ExtendedReal, b: ExtendedReal) -> bool {
    match (a, b) {
        (ExtendedReal::PosInfinity, _) => true,
        (ExtendedReal::Finite(_), ExtendedReal::PosInfinity) => false,
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => x >= y - EXPONENT_SLACK,
    }
}

/// Exact exponents for each total block length in `n_list`.
pub fn exponent_trend(s: &Scenario, rule: DecisionRule, n_list: &[u64]) -> Result<Vec<TrendPoint>> {
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let sc = s.with_total(n)?;
        let report = exact_errors(&sc, rule)?;
        let worst = report.worst_pair();
        let total = sc.n();
        let poly = polynomial_slack(total, s.alphabet_size());
        let exponent = exponent_of(worst.value, total);
        let achievable = achievable_exponent(&sc);
        let envelope_lower = minus(achievable, poly);
        let chain_lower = minus(worst.excluded_rate.unwrap_or(ExtendedReal::PosInfinity), poly);
        let p_fa = report.worst_p_fa();
        let p_fa_bound = pi_n_bound(sc.n1(), sc.n2(), s.alphabet_size());
        out.push(TrendPoint {
            n: total,
            n1: sc.n1(),
            n2: sc.n2(),
            worst_pair: (worst.p1, worst.p2),
            p_md: worst.value,
            exponent,
            achievable,
            within_envelope: at_least(exponent, envelope_lower),
            envelope_lower,
            chain_holds: at_least(exponent, chain_lower),
            chain_lower,
            p_fa,
            p_fa_within_bound: p_fa <= p_fa_bound,
            p_fa_bound,
        });
    }
    Ok(out)
}

/// Whether a trend's exponents are non-decreasing in `n`.
pub fn trend_non_decreasing(trend: &[TrendPoint]) -> bool {
    trend.windows(2).all(|w| at_least(w[1].exponent, w[0].exponent))
}

/// `2|X| log(n+1) / n`.
pub fn polynomial_slack(n: u64, alphabet_size: usize) -> f64 {
    2.0 * alphabet_size as f64 * ((n + 1) as f64).log2() / n as f64
}
