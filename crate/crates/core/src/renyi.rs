//! Rényi entropy and divergence of every order, the order-α mutual
//! informations `I_α` and `K_α`, order-α capacity and the generalized
//! divergence of several distributions.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::distribution::{Channel, Distribution};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::numeric::{log_sum_exp, softmax};
use crate::order::Order;
use crate::shannon::{capacity, entropy, kl_divergence, kl_raw, mutual_information};
use crate::solver::{minimize, minimize_with_restarts, EntropicLinear, Layout, Objective, Solution, SolverConfig};

/// A certified optimum over distributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub value: f64,
    /// The optimizing distribution.
    pub argopt: Distribution,
    /// Certified bound on the distance between `value` and the true optimum.
    pub gap: f64,
    pub iterations: usize,
}

/// `H_α(P)` in bits.
pub fn renyi_entropy(p: &Distribution, order: Order) -> f64 {
    match order {
        Order::Zero => (p.support_size() as f64).log2(),
        Order::One => entropy(p),
        Order::Infinity => (-p.max_prob().log2()).max(0.0),
        Order::Finite(a) => {
            let a = a.get();
            let l = log_sum_exp(p.probs().iter().filter(|&&q| q > 0.0).map(|&q| a * q.ln()));
            (l / ((1.0 - a) * LN_2)).max(0.0)
        }
    }
}

pub(crate) fn divergence_raw(p1: &[f64], p2: &[f64], order: Order) -> ExtendedReal {
    if p1 == p2 {
        return ExtendedReal::ZERO;
    }
    match order {
        Order::One => kl_raw(p1, p2).map_or(ExtendedReal::PosInfinity, |v| ExtendedReal::Finite(v.max(0.0))),
        Order::Zero => {
            let mass: f64 = p1.iter().zip(p2).filter(|(a, _)| **a > 0.0).map(|(_, b)| b).sum();
            if mass > 0.0 {
                ExtendedReal::Finite((-mass.log2()).max(0.0))
            } else {
                ExtendedReal::PosInfinity
            }
        }
        Order::Infinity => {
            let mut m = f64::NEG_INFINITY;
            for (&a, &b) in p1.iter().zip(p2) {
                if a > 0.0 {
                    if b == 0.0 {
                        return ExtendedReal::PosInfinity;
                    }
                    m = m.max(a.ln() - b.ln());
                }
            }
            ExtendedReal::Finite((m / LN_2).max(0.0))
        }
        Order::Finite(a) => {
            let a = a.get();
            let mut terms = Vec::with_capacity(p1.len());
            for (&x, &y) in p1.iter().zip(p2) {
                if x > 0.0 {
                    if y > 0.0 {
                        terms.push(a * x.ln() + (1.0 - a) * y.ln());
                    } else if a > 1.0 {
                        return ExtendedReal::PosInfinity;
                    }
                }
            }
            if terms.is_empty() {
                return ExtendedReal::PosInfinity;
            }
            ExtendedReal::Finite((log_sum_exp(terms) / ((a - 1.0) * LN_2)).max(0.0))
        }
    }
}

/// `D_α(P1||P2)` in bits.
pub fn renyi_divergence(p1: &Distribution, p2: &Distribution, order: Order) -> Result<ExtendedReal> {
    p1.ensure_same_alphabet(p2)?;
    Ok(divergence_raw(p1.probs(), p2.probs(), order))
}

/// Minimum of `D_α(P||P')` over all pairs of two finite families.
pub fn family_divergence(f1: &[Distribution], f2: &[Distribution], order: Order) -> Result<ExtendedReal> {
    if f1.is_empty() || f2.is_empty() {
        return Err(Error::InvalidParameter("families must be non-empty".into()));
    }
    let mut best = ExtendedReal::PosInfinity;
    for p in f1 {
        for q in f2 {
            best = best.min(renyi_divergence(p, q, order)?);
        }
    }
    Ok(best)
}

/// A probability vector of weights `(α_1, …, α_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AlphaVector {
    weights: Vec<f64>,
}

impl AlphaVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::WeightMismatch("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::WeightMismatch(format!("weight {w} is not a non-negative real")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightMismatch(format!("weights sum to {sum}")));
        }
        Ok(AlphaVector { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl TryFrom<Vec<f64>> for AlphaVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        AlphaVector::new(v)
    }
}

impl From<AlphaVector> for Vec<f64> {
    fn from(a: AlphaVector) -> Self {
        a.weights
    }
}

fn check_family(dists: &[Distribution], alpha: &AlphaVector) -> Result<()> {
    if dists.len() < 2 {
        return Err(Error::InvalidParameter("need at least two distributions".into()));
    }
    if dists.len() != alpha.len() {
        return Err(Error::WeightMismatch(format!(
            "{} weights for {} distributions",
            alpha.len(),
            dists.len()
        )));
    }
    for d in &dists[1..] {
        dists[0].ensure_same_alphabet(d)?;
    }
    Ok(())
}

/// `ln ∏_i P_i(x)^{α_i}` with `0^0 = 1`.
fn log_geometric_mean(dists: &[Distribution], alpha: &AlphaVector, x: usize) -> f64 {
    let mut t = 0.0;
    for (d, &a) in dists.iter().zip(alpha.weights()) {
        if a == 0.0 {
            continue;
        }
        let p = d.prob(x);
        if p == 0.0 {
            return f64::NEG_INFINITY;
        }
        t += a * p.ln();
    }
    t
}

/// `D_ᾱ(P_1, …, P_{k+1}) = -log Σ_x ∏_i P_i(x)^{α_i}`.
pub fn generalized_renyi_divergence(dists: &[Distribution], alpha: &AlphaVector) -> Result<ExtendedReal> {
    check_family(dists, alpha)?;
    let n = dists[0].alphabet_size();
    let l = log_sum_exp((0..n).map(|x| log_geometric_mean(dists, alpha, x)));
    if l == f64::NEG_INFINITY {
        return Ok(ExtendedReal::PosInfinity);
    }
    Ok(ExtendedReal::Finite((-l / LN_2).max(0.0)))
}

/// Result of minimizing `Σ_j α_j D(Q||P_j)` over `Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedVariational {
    /// Numerical minimum.
    pub value: f64,
    /// Objective evaluated at the closed-form minimizer.
    pub substituted_value: f64,
    /// Normalized weighted geometric mean `∏ P_i^{α_i}`.
    pub argmin: Distribution,
    pub numerical_argmin: Distribution,
    pub gap: f64,
    pub iterations: usize,
}

/// `min_Q Σ_j α_j D(Q||P_j)`, solved numerically and in closed form.
pub fn generalized_divergence_variational(
    dists: &[Distribution],
    alpha: &AlphaVector,
    cfg: &SolverConfig,
) -> Result<GeneralizedVariational> {
    check_family(dists, alpha)?;
    let n = dists[0].alphabet_size();
    let logs: Vec<f64> = (0..n).map(|x| log_geometric_mean(dists, alpha, x)).collect();
    let face: Vec<usize> = (0..n).filter(|&x| logs[x] > f64::NEG_INFINITY).collect();
    if face.is_empty() {
        return Err(Error::InfiniteValue("weighted divergence sum is +inf for every Q"));
    }
    let obj = EntropicLinear {
        sign: 1.0,
        a: alpha.weights().iter().sum(),
        c: logs.iter().map(|t| t / LN_2).collect(),
        face: face.clone(),
    };
    let layout = Layout::simplex(n, face);
    let sol = minimize_with_restarts(&obj, &layout, &vec![0.0; n], vec![], cfg, "generalized divergence")?;
    let argmin = Distribution::from_weights(&softmax(&logs))?;
    let mut substituted = 0.0;
    for (d, &a) in dists.iter().zip(alpha.weights()) {
        if a > 0.0 {
            substituted += a * kl_divergence(&argmin, d)?.to_f64();
        }
    }
    Ok(GeneralizedVariational {
        value: sol.value.max(0.0),
        substituted_value: substituted,
        argmin,
        numerical_argmin: Distribution::from_weights(&sol.x)?,
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

/// Rows `x ∈ S(P)` as `(P(x), [(y, ln W(y|x))])`.
fn active_rows(p: &[f64], w: &Channel) -> Vec<(f64, Vec<(usize, f64)>)> {
    p.iter()
        .zip(w.rows())
        .filter(|(px, _)| **px > 0.0)
        .map(|(&px, row)| {
            let terms = row
                .probs()
                .iter()
                .enumerate()
                .filter(|(_, v)| **v > 0.0)
                .map(|(y, v)| (y, v.ln()))
                .collect();
            (px, terms)
        })
        .collect()
}

/// `∪_{x∈S(P)} S(W(.|x))`, the outputs any optimal `Q` must cover.
fn output_face(p: &[f64], w: &Channel) -> Vec<usize> {
    let mut used = vec![false; w.output_size()];
    for (px, row) in p.iter().zip(w.rows()) {
        if *px > 0.0 {
            for y in row.support() {
                used[y] = true;
            }
        }
    }
    (0..used.len()).filter(|&y| used[y]).collect()
}

/// `ln Σ_y W(y|x)^α Q(y)^{1-α}` over the row terms.
fn row_log_sum(a: f64, terms: &[(usize, f64)], q: &[f64]) -> f64 {
    log_sum_exp(terms.iter().map(|&(y, lw)| a * lw + (1.0 - a) * q[y].ln()))
}

/// `Σ_x P(x) D_α(W(.|x)||Q)`.
struct IAlphaObjective {
    a: f64,
    rows: Vec<(f64, Vec<(usize, f64)>)>,
}

impl Objective for IAlphaObjective {
    fn value_and_gradient(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut s = 0.0;
        for (px, terms) in &self.rows {
            let l = row_log_sum(self.a, terms, q);
            s += px * l;
            for &(y, lw) in terms {
                let share = (self.a * lw + (1.0 - self.a) * q[y].ln() - l).exp();
                grad[y] -= px * share / q[y] / LN_2;
            }
        }
        s / ((self.a - 1.0) * LN_2)
    }
}

/// `D_α(P∘W || P×Q)`.
struct KAlphaObjective {
    a: f64,
    /// `(y, ln P(x) + α ln W(y|x))` over the joint support.
    terms: Vec<(usize, f64)>,
}

impl KAlphaObjective {
    fn new(p: &[f64], w: &Channel, a: f64) -> Self {
        let terms = active_rows(p, w)
            .into_iter()
            .flat_map(|(px, t)| t.into_iter().map(move |(y, lw)| (y, px.ln() + a * lw)))
            .collect();
        KAlphaObjective { a, terms }
    }

    fn log_sum(&self, q: &[f64]) -> f64 {
        log_sum_exp(self.terms.iter().map(|&(y, c)| c + (1.0 - self.a) * q[y].ln()))
    }
}

impl Objective for KAlphaObjective {
    fn value_and_gradient(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let l = self.log_sum(q);
        for &(y, c) in &self.terms {
            let share = (c + (1.0 - self.a) * q[y].ln() - l).exp();
            grad[y] -= share / q[y] / LN_2;
        }
        l / ((self.a - 1.0) * LN_2)
    }
}

fn start_points(p: &[f64], w: &Channel, warm: Option<&[f64]>) -> Vec<Vec<f64>> {
    match warm {
        Some(q) => vec![q.to_vec()],
        None => {
            // PW is positive exactly on the output face
            let mut pw = vec![0.0; w.output_size()];
            for (px, row) in p.iter().zip(w.rows()) {
                for (o, v) in pw.iter_mut().zip(row.probs()) {
                    *o += px * v;
                }
            }
            vec![pw]
        }
    }
}

pub(crate) fn i_alpha_solve(
    p: &[f64],
    w: &Channel,
    a: f64,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<Solution> {
    let obj = IAlphaObjective {
        a,
        rows: active_rows(p, w),
    };
    let ny = w.output_size();
    let layout = Layout::simplex(ny, output_face(p, w));
    minimize_with_restarts(&obj, &layout, &vec![0.0; ny], start_points(p, w, warm), cfg, "I_alpha")
}

pub(crate) fn k_alpha_solve(
    p: &[f64],
    w: &Channel,
    a: f64,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<Solution> {
    let obj = KAlphaObjective::new(p, w, a);
    let ny = w.output_size();
    let layout = Layout::simplex(ny, output_face(p, w));
    minimize_with_restarts(&obj, &layout, &vec![0.0; ny], start_points(p, w, warm), cfg, "K_alpha")
}

fn to_optimum(sol: Solution) -> Result<Optimum> {
    Ok(Optimum {
        value: sol.value.max(0.0),
        argopt: Distribution::from_weights(&sol.x)?,
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

fn shannon_optimum(p: &Distribution, w: &Channel) -> Result<Optimum> {
    Ok(Optimum {
        value: mutual_information(p, w)?,
        argopt: w.output_marginal(p)?,
        gap: 0.0,
        iterations: 0,
    })
}

/// `I_α(P,W) = min_Q Σ_x P(x) D_α(W(.|x)||Q)`.
///
/// The minimizing `Q` is supported on the outputs reachable from `S(P)`;
/// order `1` gives the mutual information with `Q = PW`.
pub fn i_alpha(p: &Distribution, w: &Channel, order: Order, cfg: &SolverConfig) -> Result<Optimum> {
    w.ensure_input(p)?;
    cfg.validate()?;
    match order {
        Order::One => shannon_optimum(p, w),
        Order::Zero | Order::Infinity => Err(Error::UnsupportedOrder(format!("I_alpha at order {order}"))),
        Order::Finite(a) => to_optimum(i_alpha_solve(p.probs(), w, a.get(), cfg, None)?),
    }
}

/// `K_α(P,W) = min_Q D_α(P∘W || P×Q)`.
pub fn k_alpha(p: &Distribution, w: &Channel, order: Order, cfg: &SolverConfig) -> Result<Optimum> {
    w.ensure_input(p)?;
    cfg.validate()?;
    match order {
        Order::One => shannon_optimum(p, w),
        Order::Zero | Order::Infinity => Err(Error::UnsupportedOrder(format!("K_alpha at order {order}"))),
        Order::Finite(a) => to_optimum(k_alpha_solve(p.probs(), w, a.get(), cfg, None)?),
    }
}

/// `D_α(W(.|x)||Q)` for every input `x`.
pub(crate) fn row_divergences(w: &Channel, order: Order, q: &[f64]) -> Vec<f64> {
    w.rows()
        .iter()
        .map(|row| divergence_raw(row.probs(), q, order).to_f64())
        .collect()
}

/// Order-α capacity computed along both routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCapacity {
    /// `max_P I_α(P,W)`.
    pub value: f64,
    /// `max_x D_α(W(.|x)||Q*)`, an upper bound on the capacity.
    pub upper_bound: f64,
    pub argmax: Distribution,
    /// `max_P K_α(P,W)`.
    pub k_value: f64,
    pub k_argmax: Distribution,
    pub iterations: usize,
}

/// Outer objective `-I_α(P,W)` with the inner solve warm-started.
struct NegIAlpha<'a> {
    w: &'a Channel,
    a: f64,
    order: Order,
    inner: SolverConfig,
    warm: RefCell<Vec<f64>>,
}

impl NegIAlpha<'_> {
    fn solve(&self, p: &[f64]) -> Option<Solution> {
        let warm = self.warm.borrow().clone();
        let sol = i_alpha_solve(p, self.w, self.a, &self.inner, Some(&warm)).ok()?;
        self.warm.borrow_mut().clone_from(&sol.x);
        Some(sol)
    }
}

impl Objective for NegIAlpha<'_> {
    fn value_and_gradient(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        let Some(s) = self.solve(p) else {
            return f64::NAN;
        };
        for (g, d) in grad.iter_mut().zip(row_divergences(self.w, self.order, &s.x)) {
            *g = -d;
        }
        -s.value
    }
}

/// Outer objective `∓ (Σ_x P(x) Σ_y W^α Q*^{1-α})^{1/α}`, a monotone transform
/// of `K_α(P,W)` that is convex in `P` in both regimes.
struct KPower<'a> {
    w: &'a Channel,
    a: f64,
    sign: f64,
    inner: SolverConfig,
    warm: RefCell<Vec<f64>>,
}

impl KPower<'_> {
    /// Returns `(φ, A)` with `A_x = Σ_y W(y|x)^α Q*(y)^{1-α}`.
    fn evaluate(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        let warm = self.warm.borrow().clone();
        let sol = k_alpha_solve(p, self.w, self.a, &self.inner, Some(&warm)).ok()?;
        self.warm.borrow_mut().clone_from(&sol.x);
        let rows = active_rows(&vec![1.0; p.len()], self.w);
        let big_a: Vec<f64> = rows.iter().map(|(_, t)| row_log_sum(self.a, t, &sol.x).exp()).collect();
        let s: f64 = p.iter().zip(&big_a).map(|(px, ax)| px * ax).sum();
        Some((s.powf(1.0 / self.a), big_a))
    }
}

impl Objective for KPower<'_> {
    fn value_and_gradient(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        let Some((phi, big_a)) = self.evaluate(p) else {
            return f64::NAN;
        };
        let s: f64 = p.iter().zip(&big_a).map(|(px, ax)| px * ax).sum();
        for (g, ax) in grad.iter_mut().zip(&big_a) {
            *g = self.sign * phi * ax / (self.a * s);
        }
        self.sign * phi
    }
}

/// `C_α(W) = max_P I_α(P,W)`, cross-checked against `max_P K_α(P,W)`.
///
/// Fails with [`Error::RouteMismatch`] when the two routes differ by more
/// than `10·tol` (floored at a few ulps of the value).
pub fn c_alpha(w: &Channel, order: Order, cfg: &SolverConfig) -> Result<AlphaCapacity> {
    cfg.validate()?;
    let a = match order {
        Order::One => {
            let c = capacity(w, cfg.tol)?;
            return Ok(AlphaCapacity {
                value: c.value,
                upper_bound: c.upper_bound,
                argmax: c.argmax.clone(),
                k_value: c.value,
                k_argmax: c.argmax,
                iterations: c.iterations,
            });
        }
        Order::Zero | Order::Infinity => {
            return Err(Error::UnsupportedOrder(format!("C_alpha at order {order}")));
        }
        Order::Finite(a) => a.get(),
    };
    let m = w.input_size();
    let uniform = vec![1.0 / m as f64; m];
    let layout = Layout::simplex(m, (0..m).collect());
    let inner = cfg.inner();
    let warm0 = start_points(&uniform, w, None).pop().expect("one start");

    let neg_i = NegIAlpha {
        w,
        a,
        order,
        inner,
        warm: RefCell::new(warm0.clone()),
    };
    let outer = minimize(&neg_i, &layout, uniform.clone(), cfg.tol, cfg.max_iter, "C_alpha")?;
    let argmax = Distribution::from_weights(&outer.x)?;
    let fin = i_alpha_solve(argmax.probs(), w, a, &inner, Some(&neg_i.warm.borrow()))?;
    let value = fin.value.max(0.0);
    let upper = row_divergences(w, order, &fin.x).into_iter().fold(value, f64::max);

    let c = (a - 1.0) / a;
    let k_power = KPower {
        w,
        a,
        sign: if a > 1.0 { -1.0 } else { 1.0 },
        inner,
        warm: RefCell::new(warm0),
    };
    let tol_phi = cfg.tol * c.abs() * LN_2 * (m as f64).powf(c).min(1.0);
    let k_outer = minimize(&k_power, &layout, uniform, tol_phi, cfg.max_iter, "C_alpha (K route)")?;
    let k_argmax = Distribution::from_weights(&k_outer.x)?;
    let k_value = k_alpha_solve(k_argmax.probs(), w, a, &inner, Some(&k_power.warm.borrow()))?
        .value
        .max(0.0);
    let agreement = (10.0 * cfg.tol).max(64.0 * f64::EPSILON * (1.0 + value.abs()));
    if (value - k_value).abs() > agreement {
        return Err(Error::RouteMismatch(format!(
            "max I_alpha = {value} but max K_alpha = {k_value}"
        )));
    }
    Ok(AlphaCapacity {
        value,
        upper_bound: upper,
        argmax,
        k_value,
        k_argmax,
        iterations: outer.iterations + k_outer.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::make_distribution;
    use crate::random::{instance_rng, random_channel, random_distribution, random_distribution_floor};
    use proptest::prelude::*;

    fn d(w: &[f64]) -> Distribution {
        make_distribution(w).unwrap()
    }

    fn fin(a: f64) -> Order {
        Order::finite(a).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::with_tol(1e-10)
    }

    /// Direct power-sum evaluation without log-domain tricks.
    fn naive_divergence(p1: &[f64], p2: &[f64], a: f64) -> f64 {
        let s: f64 = p1
            .iter()
            .zip(p2)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| x.powf(a) * y.powf(1.0 - a))
            .sum();
        s.log2() / (a - 1.0)
    }

    fn i_objective(p: &[f64], w: &Channel, q: &[f64], a: f64) -> f64 {
        p.iter()
            .zip(w.rows())
            .map(|(px, row)| px * naive_divergence(row.probs(), q, a))
            .sum()
    }

    fn k_objective(p: &[f64], w: &Channel, q: &[f64], a: f64) -> f64 {
        let mut s = 0.0;
        for (px, row) in p.iter().zip(w.rows()) {
            for (wy, qy) in row.probs().iter().zip(q) {
                if *px > 0.0 && *wy > 0.0 {
                    s += px * wy.powf(a) * qy.powf(1.0 - a);
                }
            }
        }
        s.log2() / (a - 1.0)
    }

    /// Grid minimum over the binary output simplex.
    fn grid_min(f: impl Fn(&[f64]) -> f64, step: f64) -> f64 {
        let n = (1.0 / step).round() as usize;
        (1..n)
            .map(|i| {
                let t = i as f64 * step;
                f(&[t, 1.0 - t])
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn entropy_examples() {
        for order in [Order::Zero, Order::One, Order::Infinity, fin(0.5), fin(3.0)] {
            assert!((renyi_entropy(&Distribution::uniform(5).unwrap(), order) - 5f64.log2()).abs() < 1e-12);
        }
        assert_eq!(renyi_entropy(&d(&[0.5, 0.25, 0.25]), Order::Infinity), 1.0);
        assert_eq!(renyi_entropy(&d(&[0.5, 0.5, 0.0]), Order::Zero), 1.0);
        // collision entropy of (0.5, 0.25, 0.25): -log2(0.375)
        let h2 = renyi_entropy(&d(&[0.5, 0.25, 0.25]), fin(2.0));
        assert!((h2 + 0.375f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn divergence_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        for order in [Order::Zero, Order::One, Order::Infinity, fin(0.5), fin(2.0)] {
            assert_eq!(renyi_divergence(&p, &p, order).unwrap().finite().unwrap().abs(), 0.0);
        }
        assert_eq!(
            renyi_divergence(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), fin(0.5)).unwrap(),
            ExtendedReal::PosInfinity
        );
        let v = renyi_divergence(&d(&[0.5, 0.5]), &d(&[0.75, 0.25]), fin(2.0)).unwrap();
        assert!((v.to_f64() - (4.0f64 / 3.0).log2()).abs() < 1e-14);
        assert!((v.to_f64() - 0.415_037_499_278_843_8).abs() < 1e-12);
        assert!(renyi_divergence(&p, &d(&[0.5, 0.5]), fin(2.0)).is_err());
    }

    #[test]
    fn divergence_finiteness_conditions() {
        let p1 = d(&[0.5, 0.5, 0.0]);
        let p2 = d(&[0.0, 0.5, 0.5]);
        // overlapping supports but P1 not << P2
        assert!(renyi_divergence(&p1, &p2, fin(0.5)).unwrap().is_finite());
        assert!(renyi_divergence(&p1, &p2, Order::Zero).unwrap().is_finite());
        assert!(renyi_divergence(&p1, &p2, fin(2.0)).unwrap().is_infinite());
        assert!(renyi_divergence(&p1, &p2, Order::One).unwrap().is_infinite());
        assert!(renyi_divergence(&p1, &p2, Order::Infinity).unwrap().is_infinite());
        // D_0 = -log P2(S(P1)) = 1
        assert!((renyi_divergence(&p1, &p2, Order::Zero).unwrap().to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_order_is_stable() {
        let p1 = d(&[0.6, 0.3, 0.1]);
        let p2 = d(&[0.2, 0.4, 0.4]);
        let dinf = renyi_divergence(&p1, &p2, Order::Infinity).unwrap().to_f64();
        let big = renyi_divergence(&p1, &p2, fin(1e4)).unwrap().to_f64();
        assert!(big.is_finite());
        assert!(big <= dinf + 1e-12);
        assert!(dinf - big < 1e-3);
        let hinf = renyi_entropy(&p1, Order::Infinity);
        assert!((renyi_entropy(&p1, fin(1e5)) - hinf).abs() < 1e-3);
        let old = naive_divergence(p1.probs(), p2.probs(), 40.0);
        assert!((renyi_divergence(&p1, &p2, fin(40.0)).unwrap().to_f64() - old).abs() < 1e-12);
    }

    #[test]
    fn limit_continuity() {
        let p1 = d(&[0.6, 0.3, 0.1]);
        let p2 = d(&[0.2, 0.4, 0.4]);
        for a in [1.0 - 1e-5, 1.0 + 1e-5] {
            assert!((renyi_entropy(&p1, fin(a)) - entropy(&p1)).abs() <= 1e-3);
            let dv = renyi_divergence(&p1, &p2, fin(a)).unwrap().to_f64();
            let kl = renyi_divergence(&p1, &p2, Order::One).unwrap().to_f64();
            assert!((dv - kl).abs() <= 1e-3);
        }
        let d0 = renyi_divergence(&p1, &p2, Order::Zero).unwrap().to_f64();
        assert!((renyi_divergence(&p1, &p2, fin(1e-5)).unwrap().to_f64() - d0).abs() <= 1e-3);
        assert!((renyi_entropy(&p1, fin(1e-5)) - 3f64.log2()).abs() <= 1e-3);
    }

    #[test]
    fn family_examples() {
        let a = d(&[0.9, 0.1]);
        let b = d(&[0.1, 0.9]);
        let c = d(&[0.5, 0.5]);
        let direct = [
            renyi_divergence(&a, &b, fin(0.5)).unwrap(),
            renyi_divergence(&a, &c, fin(0.5)).unwrap(),
        ];
        let fam = family_divergence(std::slice::from_ref(&a), &[b.clone(), c.clone()], fin(0.5)).unwrap();
        assert_eq!(fam, direct[0].min(direct[1]));
        assert_eq!(fam, direct[1]);
        assert_eq!(
            family_divergence(&[a.clone(), c.clone()], std::slice::from_ref(&c), fin(2.0)).unwrap(),
            ExtendedReal::ZERO
        );
        assert_eq!(
            family_divergence(std::slice::from_ref(&a), std::slice::from_ref(&b), Order::One).unwrap(),
            renyi_divergence(&a, &b, Order::One).unwrap()
        );
        assert!(family_divergence(&[], &[b], Order::One).is_err());
    }

    #[test]
    fn alpha_vector_validation() {
        assert!(AlphaVector::new(vec![0.5, 0.5]).is_ok());
        assert!(matches!(
            AlphaVector::new(vec![0.5, 0.6]),
            Err(Error::WeightMismatch(_))
        ));
        assert!(matches!(
            AlphaVector::new(vec![1.5, -0.5]),
            Err(Error::WeightMismatch(_))
        ));
        let v: AlphaVector = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(v.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn generalized_divergence_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        let w3 = AlphaVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let v = generalized_renyi_divergence(&[p.clone(), p.clone(), p.clone()], &w3).unwrap();
        assert!(v.to_f64().abs() < 1e-15);
        let q = d(&[0.6, 0.1, 0.3]);
        for a in [0.1, 0.5, 0.8] {
            let w = AlphaVector::new(vec![a, 1.0 - a]).unwrap();
            let g = generalized_renyi_divergence(&[p.clone(), q.clone()], &w)
                .unwrap()
                .to_f64();
            let r = renyi_divergence(&p, &q, fin(a)).unwrap().to_f64();
            assert!((g - (1.0 - a) * r).abs() < 1e-12);
        }
        let disjoint = [d(&[1.0, 0.0, 0.0]), d(&[0.0, 1.0, 0.0]), d(&[0.0, 0.0, 1.0])];
        assert_eq!(
            generalized_renyi_divergence(&disjoint, &w3).unwrap(),
            ExtendedReal::PosInfinity
        );
        assert!(matches!(
            generalized_renyi_divergence(&[p.clone(), q.clone()], &w3),
            Err(Error::WeightMismatch(_))
        ));
    }

    #[test]
    fn generalized_divergence_is_additive() {
        let mut rng = instance_rng(3, 1, 0);
        let w = AlphaVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        for _ in 0..20 {
            let a: Vec<_> = (0..3).map(|_| random_distribution(&mut rng, 3)).collect();
            let b: Vec<_> = (0..3).map(|_| random_distribution(&mut rng, 2)).collect();
            let prod: Vec<_> = a.iter().zip(&b).map(|(x, y)| x.product(y)).collect();
            let lhs = generalized_renyi_divergence(&prod, &w).unwrap().to_f64();
            let rhs = generalized_renyi_divergence(&a, &w).unwrap().to_f64()
                + generalized_renyi_divergence(&b, &w).unwrap().to_f64();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn generalized_variational_matches_direct_and_grid() {
        let mut rng = instance_rng(11, 1, 0);
        let dists: Vec<_> = (0..3).map(|_| random_distribution(&mut rng, 3)).collect();
        let w = AlphaVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let direct = generalized_renyi_divergence(&dists, &w).unwrap().to_f64();
        let r = generalized_divergence_variational(&dists, &w, &SolverConfig::with_tol(1e-12)).unwrap();
        assert!((r.value - direct).abs() < 1e-9);
        assert!((r.substituted_value - direct).abs() < 1e-12);
        assert!(r.argmin.max_norm_distance(&r.numerical_argmin).unwrap() < 1e-5);
        // grid over the 2-simplex brackets the minimum from above
        let obj = |q: &[f64]| -> f64 {
            (0..3)
                .map(|j| {
                    w.weights()[j]
                        * q.iter()
                            .zip(dists[j].probs())
                            .filter(|(a, _)| **a > 0.0)
                            .map(|(a, b)| a * (a / b).log2())
                            .sum::<f64>()
                })
                .sum()
        };
        let mut best = f64::INFINITY;
        let n = 1000;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let q = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
                best = best.min(obj(&q));
            }
        }
        assert!(direct <= best + 1e-12);
        assert!(best - direct < 1e-4);
        // all distributions equal
        let p = d(&[0.1, 0.2, 0.7]);
        let eq = generalized_divergence_variational(
            &[p.clone(), p.clone()],
            &AlphaVector::new(vec![0.4, 0.6]).unwrap(),
            &cfg(),
        )
        .unwrap();
        assert!(eq.value.abs() < 1e-9);
        assert!(eq.argmin.max_norm_distance(&p).unwrap() < 1e-12);
        let disjoint = [d(&[1.0, 0.0]), d(&[0.0, 1.0])];
        assert!(matches!(
            generalized_divergence_variational(&disjoint, &AlphaVector::new(vec![0.5, 0.5]).unwrap(), &cfg()),
            Err(Error::InfiniteValue(_))
        ));
    }

    #[test]
    fn i_alpha_identical_rows_and_shannon_order() {
        let row = d(&[0.3, 0.7]);
        let w = Channel::constant(3, &row).unwrap();
        let p = d(&[0.2, 0.3, 0.5]);
        for a in [0.5, 2.0] {
            let r = i_alpha(&p, &w, fin(a), &cfg()).unwrap();
            assert!(r.value.abs() < 1e-9);
            assert!(r.argopt.max_norm_distance(&row).unwrap() < 1e-4);
            assert!(k_alpha(&p, &w, fin(a), &cfg()).unwrap().value.abs() < 1e-9);
        }
        let w = Channel::binary_symmetric(0.1).unwrap();
        let p = d(&[0.4, 0.6]);
        let mi = mutual_information(&p, &w).unwrap();
        assert_eq!(i_alpha(&p, &w, Order::One, &cfg()).unwrap().value, mi);
        assert!(matches!(
            i_alpha(&p, &w, Order::Zero, &cfg()),
            Err(Error::UnsupportedOrder(_))
        ));
        assert!(matches!(
            k_alpha(&p, &w, Order::Infinity, &cfg()),
            Err(Error::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn near_one_probes_recover_mutual_information() {
        let mut rng = instance_rng(21, 1, 0);
        let p = random_distribution(&mut rng, 3);
        let w = random_channel(&mut rng, 3, 3);
        let mi = mutual_information(&p, &w).unwrap();
        let lo = i_alpha(&p, &w, fin(1.0 - 1e-4), &cfg()).unwrap().value;
        let hi = i_alpha(&p, &w, fin(1.0 + 1e-4), &cfg()).unwrap().value;
        // the first-order terms cancel in the symmetric mean
        assert!(((lo + hi) / 2.0 - mi).abs() < 1e-6);
        assert!((lo - mi).abs() < 1e-3 && (hi - mi).abs() < 1e-3);
        let lo = k_alpha(&p, &w, fin(1.0 - 1e-4), &cfg()).unwrap().value;
        let hi = k_alpha(&p, &w, fin(1.0 + 1e-4), &cfg()).unwrap().value;
        assert!((lo - mi).abs() < 1e-4 && (hi - mi).abs() < 1e-4);
    }

    #[test]
    fn i_alpha_matches_grid_oracle() {
        for seed in 0..5 {
            let mut rng = instance_rng(seed, 2, 0);
            let p = random_distribution(&mut rng, 2);
            let w = random_channel(&mut rng, 2, 2);
            let r = i_alpha(&p, &w, fin(2.0), &cfg()).unwrap();
            let g = grid_min(|q| i_objective(p.probs(), &w, q, 2.0), 1e-4);
            assert!(r.value <= g + 1e-12);
            assert!((r.value - g).abs() < 1e-6, "{} vs {}", r.value, g);
            assert!(r.gap <= 1e-10);
        }
    }

    #[test]
    fn k_alpha_matches_grid_and_closed_form() {
        for seed in 0..5 {
            let mut rng = instance_rng(seed, 3, 0);
            let p = random_distribution(&mut rng, 2);
            let w = random_channel(&mut rng, 2, 2);
            let r = k_alpha(&p, &w, fin(0.5), &cfg()).unwrap();
            let g = grid_min(|q| k_objective(p.probs(), &w, q, 0.5), 1e-4);
            assert!(r.value <= g + 1e-12);
            assert!((r.value - g).abs() < 1e-6);
        }
        // the minimizer of the joint form is proportional to (Σ_x P W^α)^{1/α}
        let mut rng = instance_rng(8, 3, 0);
        for a in [0.3, 0.7, 2.0, 5.0] {
            let p = random_distribution(&mut rng, 4);
            let w = random_channel(&mut rng, 4, 3);
            let num = k_alpha(&p, &w, fin(a), &cfg()).unwrap();
            let s: Vec<f64> = (0..3)
                .map(|y| {
                    (0..4)
                        .map(|x| p.prob(x) * w.get(x, y).powf(a))
                        .sum::<f64>()
                        .powf(1.0 / a)
                })
                .collect();
            let closed = a / (a - 1.0) * s.iter().sum::<f64>().log2();
            assert!((num.value - closed).abs() < 1e-9, "{a}: {} vs {closed}", num.value);
            let z: f64 = s.iter().sum();
            let q = d(&s.iter().map(|v| v / z).collect::<Vec<_>>());
            assert!(num.argopt.max_norm_distance(&q).unwrap() < 1e-4);
        }
    }

    #[test]
    fn sparse_rows_use_reachable_outputs() {
        let w = Channel::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5], vec![0.0, 0.0, 1.0]]).unwrap();
        let p = d(&[0.5, 0.5, 0.0]);
        for a in [0.5, 3.0] {
            let r = i_alpha(&p, &w, fin(a), &cfg()).unwrap();
            assert!(r.value.is_finite() && r.value > 0.0);
            let q = r.argopt.probs();
            assert!((i_objective(p.probs(), &w, q, a) - r.value).abs() < 1e-9);
        }
    }

    #[test]
    fn variant_ordering_and_bounds() {
        let mut rng = instance_rng(4, 4, 0);
        for _ in 0..10 {
            let p = random_distribution(&mut rng, 3);
            let w = random_channel(&mut rng, 3, 3);
            for a in [0.5, 2.0] {
                let i = i_alpha(&p, &w, fin(a), &cfg()).unwrap().value;
                let k = k_alpha(&p, &w, fin(a), &cfg()).unwrap().value;
                if a > 1.0 {
                    assert!(k >= i - 1e-9);
                } else {
                    assert!(k <= i + 1e-9);
                }
                assert!(i <= entropy(&p) + 1e-9);
                assert!(k <= renyi_entropy(&p, fin(1.0 / a)) + 1e-9);
            }
        }
    }

    #[test]
    fn capacity_examples() {
        let noiseless = Channel::identity(2).unwrap();
        let constant = Channel::constant(2, &d(&[0.4, 0.6])).unwrap();
        let c = SolverConfig::with_tol(1e-8);
        for a in [0.5, 2.0, 4.0] {
            let r = c_alpha(&noiseless, fin(a), &c).unwrap();
            assert!((r.value - 1.0).abs() < 1e-7);
            assert!((r.k_value - 1.0).abs() < 1e-7);
            let r = c_alpha(&constant, fin(a), &c).unwrap();
            assert!(r.value.abs() < 1e-8);
        }
        let bsc = Channel::binary_symmetric(0.11).unwrap();
        let r = c_alpha(&bsc, Order::One, &c).unwrap();
        assert!((r.value - 0.500_084_041_835_472).abs() < 1e-8);
    }

    #[test]
    fn capacity_matches_nested_grid_oracle() {
        let mut rng = instance_rng(6, 5, 0);
        let w = random_channel(&mut rng, 2, 2);
        let r = c_alpha(&w, fin(2.0), &SolverConfig::with_tol(1e-9)).unwrap();
        let mut best = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let inner = grid_min(|q| i_objective(&[t, 1.0 - t], &w, q, 2.0), 1e-4);
            best = best.max(inner);
        }
        assert!((r.value - best).abs() < 1e-4, "{} vs {best}", r.value);
        assert!(r.upper_bound - r.value < 1e-8);
        assert!((r.value - r.k_value).abs() < 1e-8);
    }

    #[test]
    fn capacity_routes_agree_below_one() {
        let mut rng = instance_rng(7, 5, 0);
        for _ in 0..3 {
            let w = random_channel(&mut rng, 3, 3);
            for a in [0.3, 0.7] {
                let r = c_alpha(&w, fin(a), &SolverConfig::with_tol(1e-8)).unwrap();
                assert!((r.value - r.k_value).abs() <= 1e-7);
                assert!(r.upper_bound - r.value < 1e-7);
            }
        }
    }

    #[test]
    fn data_processing() {
        let mut rng = instance_rng(9, 6, 0);
        for _ in 0..10 {
            let p1 = random_distribution(&mut rng, 4);
            let p2 = random_distribution(&mut rng, 4);
            let w = random_channel(&mut rng, 4, 3);
            let v = random_channel(&mut rng, 3, 3);
            for order in [Order::Zero, fin(0.5), Order::One, fin(2.0), Order::Infinity] {
                let before = renyi_divergence(&p1, &p2, order).unwrap().to_f64();
                let o1 = w.output_marginal(&p1).unwrap();
                let o2 = w.output_marginal(&p2).unwrap();
                assert!(renyi_divergence(&o1, &o2, order).unwrap().to_f64() <= before + 1e-12);
            }
            let wv = w.compose(&v).unwrap();
            for a in [0.5, 2.0] {
                let i1 = i_alpha(&p1, &w, fin(a), &cfg()).unwrap().value;
                let i2 = i_alpha(&p1, &wv, fin(a), &cfg()).unwrap().value;
                assert!(i2 <= i1 + 1e-9);
                let k1 = k_alpha(&p1, &w, fin(a), &cfg()).unwrap().value;
                let k2 = k_alpha(&p1, &wv, fin(a), &cfg()).unwrap().value;
                assert!(k2 <= k1 + 1e-9);
            }
        }
    }

    fn grid_orders() -> Vec<Order> {
        let mut v = vec![Order::Zero];
        v.extend([0.25, 0.5, 0.75, 1.0 - 1e-4].map(fin));
        v.push(Order::One);
        v.extend([1.0 + 1e-4, 1.5, 2.0, 4.0].map(fin));
        v.push(Order::Infinity);
        v
    }

    proptest! {
        #[test]
        fn entropy_non_increasing_in_order(seed in any::<u64>()) {
            let mut rng = instance_rng(seed, 7, 0);
            let p = random_distribution(&mut rng, 5);
            let hs: Vec<f64> = grid_orders().into_iter().map(|o| renyi_entropy(&p, o)).collect();
            for pair in hs.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-10);
            }
        }

        #[test]
        fn divergence_non_decreasing_in_order(seed in any::<u64>()) {
            let mut rng = instance_rng(seed, 8, 0);
            let p1 = random_distribution(&mut rng, 4);
            let p2 = random_distribution_floor(&mut rng, 4, 0.01);
            let ds: Vec<f64> = grid_orders()
                .into_iter()
                .map(|o| renyi_divergence(&p1, &p2, o).unwrap().to_f64())
                .collect();
            for pair in ds.windows(2) {
                prop_assert!(pair[1] >= pair[0] - 1e-10);
            }
        }

        #[test]
        fn divergence_positive_off_diagonal(seed in any::<u64>()) {
            let mut rng = instance_rng(seed, 9, 0);
            let p1 = random_distribution(&mut rng, 3);
            let p2 = random_distribution(&mut rng, 3);
            for o in grid_orders().into_iter().skip(1) {
                let v = renyi_divergence(&p1, &p2, o).unwrap().to_f64();
                prop_assert!(v > 0.0);
                prop_assert_eq!(renyi_divergence(&p1, &p1, o).unwrap().to_f64(), 0.0);
            }
        }

        #[test]
        fn entropy_concave_below_one(seed in any::<u64>()) {
            let mut rng = instance_rng(seed, 10, 0);
            let u = random_distribution(&mut rng, 4);
            let v = random_distribution(&mut rng, 4);
            let mid = u.mix(&v, 0.5).unwrap();
            for a in [0.25, 0.5, 0.75] {
                let o = fin(a);
                prop_assert!(renyi_entropy(&mid, o) >= (renyi_entropy(&u, o) + renyi_entropy(&v, o)) / 2.0 - 1e-10);
            }
        }

        #[test]
        fn divergence_jointly_convex_below_one(seed in any::<u64>()) {
            let mut rng = instance_rng(seed, 11, 0);
            let (a1, a2, b1, b2) = (
                random_distribution(&mut rng, 3),
                random_distribution(&mut rng, 3),
                random_distribution(&mut rng, 3),
                random_distribution(&mut rng, 3),
            );
            let m1 = a1.mix(&b1, 0.5).unwrap();
            let m2 = a2.mix(&b2, 0.5).unwrap();
            for a in [0.25, 0.5, 0.75, 1.0 - 1e-4] {
                let o = fin(a);
                let lhs = renyi_divergence(&m1, &m2, o).unwrap().to_f64();
                let rhs = (renyi_divergence(&a1, &a2, o).unwrap().to_f64()
                    + renyi_divergence(&b1, &b2, o).unwrap().to_f64())
                    / 2.0;
                prop_assert!(lhs <= rhs + 1e-10);
            }
        }
    }
}
