//! Seeded property suite.
//!
//! Every row draws `instances` problem instances from
//! `instance_rng(seed, row, i)` and evaluates a margin: the amount by which
//! the claimed relation is violated beyond its allowed slack. A row passes
//! when every margin is `≤ 0` and no instance raised an error. Instance 0 of
//! several rows is a fixed built-in case (uniform, noiseless, symmetric).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codelength::{brute_force_min_codelength, campbell_code, campbell_entropy, weighted_codelength};
use crate::distribution::{Channel, Distribution};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::hyptest::{
    achievable_exponent, alpha_grid, exponent_alpha, exponent_alpha_curve, non_increasing, renyi_lower_bound,
    worst_noise_family, Scenario,
};
use crate::method_of_types::{
    class_size_bounds_hold, deviation_bound_check, enumerate_types, exactness_error, num_types, stream_types,
};
use crate::order::{Alpha, Order};
use crate::random::{
    instance_rng, random_channel, random_distribution, random_distribution_floor, random_face_point,
    random_sparse_distribution,
};
use crate::renyi::{c_alpha, i_alpha, k_alpha, renyi_divergence, renyi_entropy};
use crate::shannon::{entropy, kl_divergence};
use crate::solver::SolverConfig;
use crate::variational::{
    g_divergence, g_entropy, j_functional, j_variational, optimal_q_divergence, optimal_q_entropy, recursivity_bounds,
    variational_divergence, variational_entropy, variational_i_alpha, variational_k_alpha,
};

/// Slack for relations between closed-form quantities.
pub const CLOSED_FORM_SLACK: f64 = 1e-10;
/// Tolerance of the limit probes at orders `1e-5`, `1 ± 1e-5` and `1e4`.
pub const LIMIT_TOLERANCE: f64 = 1e-3;
/// Allowed `|direct - variational|` for the channel-space form of `I_α`.
pub const CHANNEL_FORM_TOLERANCE: f64 = 1e-4;
/// Allowed `|direct - variational|` for the input-space form of `K_α`.
pub const INPUT_FORM_TOLERANCE: f64 = 1e-3;
/// Allowed max-norm distance between numerical and closed-form optimizers.
pub const OPTIMIZER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub instances: usize,
    /// Solver tolerance; relations between optimized quantities get
    /// `10 · tol` slack.
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            instances: 1000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRow {
    pub id: &'static str,
    pub statement: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub errors: usize,
    /// Largest margin seen; `≤ 0` on success.
    pub worst_margin: f64,
    pub first_problem: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: usize,
    pub tol: f64,
    pub rows: Vec<PropertyRow>,
    pub passed: bool,
}

struct Ctx {
    rng: ChaCha8Rng,
    index: usize,
    cfg: SolverConfig,
    tol: f64,
}

impl Ctx {
    fn fixed(&self) -> bool {
        self.index == 0
    }

    fn size(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    fn dist(&mut self, k: usize) -> Distribution {
        if self.fixed() {
            return Distribution::uniform(k).expect("k ≥ 1");
        }
        random_distribution(&mut self.rng, k)
    }

    fn floored(&mut self, k: usize) -> Distribution {
        random_distribution_floor(&mut self.rng, k, 0.05)
    }

    fn sparse(&mut self, k: usize) -> Distribution {
        random_sparse_distribution(&mut self.rng, k, 0.35)
    }

    fn channel(&mut self, k: usize, m: usize) -> Channel {
        random_channel(&mut self.rng, k, m)
    }

    /// A finite order away from 1.
    fn order(&mut self) -> Alpha {
        const ORDERS: [f64; 6] = [0.3, 0.5, 0.9, 1.1, 2.0, 5.0];
        let a = if self.rng.random::<bool>() {
            ORDERS[self.rng.random_range(0..ORDERS.len())]
        } else if self.rng.random::<bool>() {
            self.rng.random_range(0.05..0.95)
        } else {
            self.rng.random_range(1.05..6.0)
        };
        Alpha::new(a).expect("valid order")
    }

    fn channel_order(&mut self) -> Alpha {
        Alpha::new(if self.index.is_multiple_of(2) { 0.5 } else { 2.0 }).expect("valid order")
    }

    fn opt_slack(&self) -> f64 {
        10.0 * self.tol
    }

    /// A random tangent direction on `face` with Euclidean norm `scale`.
    fn direction(&mut self, n: usize, face: &[usize], scale: f64) -> Vec<f64> {
        let mut d = vec![0.0; n];
        for &i in face {
            d[i] = self.rng.random::<f64>() - 0.5;
        }
        let mean = face.iter().map(|&i| d[i]).sum::<f64>() / face.len() as f64;
        for &i in face {
            d[i] -= mean;
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        d.iter().map(|v| v * scale / norm).collect()
    }
}

/// Margin of `a ≤ b + slack`.
fn le(a: f64, b: f64, slack: f64) -> f64 {
    if b == f64::INFINITY || a == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    a - b - slack
}

/// Margin of `|a - b| ≤ tol`.
fn close(a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return -tol;
    }
    (a - b).abs() - tol
}

/// Margin `-1` when `ok`, `+1` otherwise.
fn holds(ok: bool) -> f64 {
    if ok {
        -1.0
    } else {
        1.0
    }
}

fn val(e: ExtendedReal) -> f64 {
    e.to_f64()
}

fn mid(a: &Distribution, b: &Distribution) -> Result<Distribution> {
    a.mix(b, 0.5)
}

type Check = fn(&mut Ctx) -> Result<f64>;

struct Property {
    id: &'static str,
    statement: &'static str,
    check: Check,
}

fn entropy_grid() -> Vec<Order> {
    let mut g: Vec<Order> = [0.25, 0.5, 0.75, 1.0 - 1e-4].into_iter().map(finite).collect();
    g.push(Order::One);
    g.extend([1.0 + 1e-4, 1.5, 2.0, 4.0].into_iter().map(finite));
    g.push(Order::Infinity);
    g
}

fn finite(a: f64) -> Order {
    Order::finite(a).expect("valid probe order")
}

fn entropy_monotone(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p = c.dist(k);
    let h: Vec<f64> = entropy_grid().into_iter().map(|o| renyi_entropy(&p, o)).collect();
    Ok(h.windows(2)
        .map(|w| le(w[1], w[0], CLOSED_FORM_SLACK))
        .fold(f64::NEG_INFINITY, f64::max))
}

fn entropy_concave(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p, q) = (c.dist(k), random_distribution(&mut c.rng, k));
    let a = Order::Finite(Alpha::new(c.rng.random_range(0.05..0.95))?);
    let avg = 0.5 * (renyi_entropy(&p, a) + renyi_entropy(&q, a));
    Ok(le(avg, renyi_entropy(&mid(&p, &q)?, a), CLOSED_FORM_SLACK))
}

fn entropy_order_zero(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p = c.sparse(k);
    let target = (p.support_size() as f64).log2();
    Ok(
        close(renyi_entropy(&p, Order::Zero), target, CLOSED_FORM_SLACK).max(close(
            renyi_entropy(&p, finite(1e-5)),
            target,
            LIMIT_TOLERANCE,
        )),
    )
}

fn entropy_order_infinity(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p = c.floored(k);
    let target = -p.max_prob().log2();
    Ok(
        close(renyi_entropy(&p, Order::Infinity), target, CLOSED_FORM_SLACK).max(close(
            renyi_entropy(&p, finite(1e4)),
            target,
            LIMIT_TOLERANCE,
        )),
    )
}

fn entropy_order_one(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p = c.floored(k);
    let h = entropy(&p);
    Ok(close(renyi_entropy(&p, Order::One), h, CLOSED_FORM_SLACK)
        .max(close(renyi_entropy(&p, finite(1.0 - 1e-5)), h, LIMIT_TOLERANCE))
        .max(close(renyi_entropy(&p, finite(1.0 + 1e-5)), h, LIMIT_TOLERANCE)))
}

fn entropy_log_sum(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p = c.sparse(k);
    let q = Distribution::from_weights(&random_face_point(&mut c.rng, k, &p.support()))?;
    let a = c.order();
    let h = renyi_entropy(&p, Order::Finite(a));
    let g = val(g_entropy(&p, &q, a)?);
    let slack = CLOSED_FORM_SLACK * (1.0 + h.abs());
    Ok(if a.get() > 1.0 {
        le(h, g, slack)
    } else {
        le(g, h, slack)
    })
}

fn entropy_campbell(c: &mut Ctx) -> Result<f64> {
    let k = c.size(1, 5);
    let p = c.dist(k);
    let lambda = [0.25, 1.0, 4.0][c.index % 3];
    let h = campbell_entropy(&p, lambda)?;
    let (_, best) = brute_force_min_codelength(&p, lambda, 12)?;
    let code = weighted_codelength(&p, &campbell_code(&p, lambda)?, lambda)?;
    let s = crate::codelength::ROUNDING_SLACK;
    Ok(le(h, best, s).max(le(best, h + 1.0, s)).max(le(code, h + 1.0, s)))
}

fn perturbed(q: &Distribution, d: &[f64]) -> Option<Distribution> {
    let v: Vec<f64> = q.probs().iter().zip(d).map(|(a, b)| a + b).collect();
    if v.iter().any(|&x| x < 0.0) {
        return None;
    }
    Distribution::from_weights(&v).ok()
}

fn entropy_unique_optimizer(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p = c.floored(k);
    let a = c.order();
    let q = optimal_q_entropy(&p, a);
    let h = renyi_entropy(&p, Order::Finite(a));
    let mut m = close(val(g_entropy(&p, &q, a)?), h, 1e-12 * (1.0 + h.abs()));
    let d = c.direction(k, &p.support(), 1e-3);
    if let Some(q2) = perturbed(&q, &d) {
        let g2 = val(g_entropy(&p, &q2, a)?);
        // the optimum is a strict min for α > 1 and a strict max for α < 1
        m = m.max(holds(if a.get() > 1.0 { g2 > h } else { g2 < h }));
    }
    Ok(m)
}

fn entropy_recursivity(c: &mut Ctx) -> Result<f64> {
    let k = c.size(3, 5);
    let p = c.floored(k);
    let a = c.order();
    let b = match recursivity_bounds(&p, 0, 1, a) {
        Err(Error::DegenerateSplit) => return Ok(-1.0),
        r => r?,
    };
    let slack = CLOSED_FORM_SLACK * (1.0 + b.c_actual.abs());
    Ok(le(b.c_lower, b.c_actual, slack).max(le(b.c_actual, b.c_upper, slack)))
}

fn divergence_grid() -> Vec<Order> {
    let mut g = vec![Order::Zero];
    g.extend(entropy_grid());
    g
}

fn divergence_monotone(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p1, p2) = (c.dist(k), random_distribution(&mut c.rng, k));
    let mut d = Vec::new();
    for o in divergence_grid() {
        d.push(val(renyi_divergence(&p1, &p2, o)?));
    }
    Ok(d.windows(2)
        .map(|w| le(w[0], w[1], CLOSED_FORM_SLACK))
        .fold(f64::NEG_INFINITY, f64::max))
}

fn divergence_identity(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p1, p2) = (c.sparse(k), random_distribution(&mut c.rng, k));
    let mut m = f64::NEG_INFINITY;
    for o in divergence_grid() {
        let d = val(renyi_divergence(&p1, &p2, o)?);
        m = m.max(le(0.0, d, 0.0));
        m = m.max(holds(renyi_divergence(&p1, &p1, o)? == ExtendedReal::ZERO));
        if o != Order::Zero {
            // D_0 only sees supports
            m = m.max(holds(d > 0.0));
        }
    }
    Ok(m)
}

fn divergence_convexity(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p1 = c.dist(k);
    let (q1, q2) = (random_distribution(&mut c.rng, k), random_distribution(&mut c.rng, k));
    let a = c.order();
    let o = Order::Finite(a);
    if a.get() > 1.0 {
        let avg = 0.5 * (val(renyi_divergence(&p1, &q1, o)?) + val(renyi_divergence(&p1, &q2, o)?));
        Ok(le(
            val(renyi_divergence(&p1, &mid(&q1, &q2)?, o)?),
            avg,
            CLOSED_FORM_SLACK,
        ))
    } else {
        let r1 = random_distribution(&mut c.rng, k);
        let avg = 0.5 * (val(renyi_divergence(&p1, &q1, o)?) + val(renyi_divergence(&r1, &q2, o)?));
        Ok(le(
            val(renyi_divergence(&mid(&p1, &r1)?, &mid(&q1, &q2)?, o)?),
            avg,
            CLOSED_FORM_SLACK,
        ))
    }
}

fn divergence_order_zero(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p1, p2) = (c.sparse(k), c.floored(k));
    let target = -p2.mass_of(&p1.support()).log2();
    Ok(
        close(val(renyi_divergence(&p1, &p2, Order::Zero)?), target, CLOSED_FORM_SLACK).max(close(
            val(renyi_divergence(&p1, &p2, finite(1e-5))?),
            target,
            LIMIT_TOLERANCE,
        )),
    )
}

fn divergence_order_infinity(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p1, p2) = (c.floored(k), c.floored(k));
    let target = (0..k).map(|x| p1.prob(x) / p2.prob(x)).fold(0.0, f64::max).log2();
    Ok(close(
        val(renyi_divergence(&p1, &p2, Order::Infinity)?),
        target,
        CLOSED_FORM_SLACK,
    )
    .max(close(
        val(renyi_divergence(&p1, &p2, finite(1e4))?),
        target,
        LIMIT_TOLERANCE,
    )))
}

fn divergence_order_one(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p1, p2) = (c.floored(k), c.floored(k));
    let d = val(kl_divergence(&p1, &p2)?);
    let mut m = close(val(renyi_divergence(&p1, &p2, Order::One)?), d, CLOSED_FORM_SLACK);
    for a in [1.0 - 1e-5, 1.0 + 1e-5] {
        m = m.max(close(val(renyi_divergence(&p1, &p2, finite(a))?), d, LIMIT_TOLERANCE));
    }
    Ok(m)
}

fn divergence_data_processing(c: &mut Ctx) -> Result<f64> {
    let (k, m) = (c.size(2, 5), c.size(2, 5));
    let (p1, p2) = (c.dist(k), random_distribution(&mut c.rng, k));
    let w = c.channel(k, m);
    let (o1, o2) = (w.output_marginal(&p1)?, w.output_marginal(&p2)?);
    let mut worst = f64::NEG_INFINITY;
    for o in divergence_grid() {
        let before = val(renyi_divergence(&p1, &p2, o)?);
        let after = val(renyi_divergence(&o1, &o2, o)?);
        worst = worst.max(le(after, before, CLOSED_FORM_SLACK));
    }
    Ok(worst)
}

fn divergence_unique_optimizer(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p1, p2) = (c.floored(k), c.floored(k));
    let a = c.order();
    let q = optimal_q_divergence(&p1, &p2, a)?;
    let d = val(renyi_divergence(&p1, &p2, Order::Finite(a))?);
    let mut m = close(val(g_divergence(&p1, &p2, &q, a)?), d, 1e-12 * (1.0 + d));
    let dir = c.direction(k, &p1.support(), 1e-3);
    if let Some(q2) = perturbed(&q, &dir) {
        let g2 = val(g_divergence(&p1, &p2, &q2, a)?);
        m = m.max(holds(if a.get() > 1.0 { g2 < d } else { g2 > d }));
    }
    Ok(m)
}

fn channel_instance(c: &mut Ctx) -> (Distribution, Channel) {
    let (k, m) = (c.size(2, 3), c.size(2, 3));
    let p = c.dist(k);
    (p, c.channel(k, m))
}

fn channel_ordering(c: &mut Ctx) -> Result<f64> {
    let (p, w) = channel_instance(c);
    let a = c.channel_order();
    let o = Order::Finite(a);
    let i = i_alpha(&p, &w, o, &c.cfg)?.value;
    let k = k_alpha(&p, &w, o, &c.cfg)?.value;
    let s = c.opt_slack();
    Ok(if a.get() > 1.0 { le(i, k, s) } else { le(k, i, s) })
}

fn channel_bounds(c: &mut Ctx) -> Result<f64> {
    let a = c.channel_order();
    let o = Order::Finite(a);
    let s = c.opt_slack();
    let dual = Order::finite(1.0 / a.get())?;
    if c.fixed() {
        // a noiseless channel attains both bounds
        let p = random_distribution(&mut c.rng, 3);
        let w = Channel::identity(3)?;
        let i = i_alpha(&p, &w, o, &c.cfg)?.value;
        let k = k_alpha(&p, &w, o, &c.cfg)?.value;
        return Ok(close(i, entropy(&p), s).max(close(k, renyi_entropy(&p, dual), s)));
    }
    let (p, w) = channel_instance(c);
    let i = i_alpha(&p, &w, o, &c.cfg)?.value;
    let k = k_alpha(&p, &w, o, &c.cfg)?.value;
    Ok(le(i, entropy(&p), s).max(le(k, renyi_entropy(&p, dual), s)))
}

fn channel_i_shape(c: &mut Ctx) -> Result<f64> {
    let (p, w) = channel_instance(c);
    let (k, m) = (w.input_size(), w.output_size());
    let p2 = random_distribution(&mut c.rng, k);
    let a = c.channel_order();
    let o = Order::Finite(a);
    let s = c.opt_slack();
    let f = |p: &Distribution, w: &Channel| i_alpha(p, w, o, &c.cfg).map(|r| r.value);
    let avg = 0.5 * (f(&p, &w)? + f(&p2, &w)?);
    let mut margin = le(avg, f(&mid(&p, &p2)?, &w)?, s);
    if a.below_one() {
        let w2 = random_channel(&mut c.rng, k, m);
        let avg = 0.5 * (f(&p, &w)? + f(&p, &w2)?);
        margin = margin.max(le(f(&p, &w.mix(&w2, 0.5)?)?, avg, s));
    }
    Ok(margin)
}

fn channel_k_concave(c: &mut Ctx) -> Result<f64> {
    let (p, w) = channel_instance(c);
    let p2 = random_distribution(&mut c.rng, w.input_size());
    let o = Order::Finite(Alpha::new(c.rng.random_range(1.1..4.0))?);
    let f = |p: &Distribution| k_alpha(p, &w, o, &c.cfg).map(|r| r.value);
    let avg = 0.5 * (f(&p)? + f(&p2)?);
    Ok(le(avg, f(&mid(&p, &p2)?)?, c.opt_slack()))
}

fn channel_k_convex(c: &mut Ctx) -> Result<f64> {
    let (p, w) = channel_instance(c);
    let w2 = random_channel(&mut c.rng, w.input_size(), w.output_size());
    let o = Order::Finite(Alpha::new(c.rng.random_range(1.1..4.0))?);
    let f = |w: &Channel| k_alpha(&p, w, o, &c.cfg).map(|r| r.value);
    let avg = 0.5 * (f(&w)? + f(&w2)?);
    Ok(le(f(&w.mix(&w2, 0.5)?)?, avg, c.opt_slack()))
}

fn channel_capacity(c: &mut Ctx) -> Result<f64> {
    let (p, w) = channel_instance(c);
    let o = Order::Finite(c.channel_order());
    let s = c.opt_slack();
    let cap = c_alpha(&w, o, &c.cfg)?;
    let k = k_alpha(&p, &w, o, &c.cfg)?.value;
    let i = i_alpha(&p, &w, o, &c.cfg)?.value;
    let at_argmax = k_alpha(&cap.k_argmax, &w, o, &c.cfg)?.value;
    Ok(close(cap.value, cap.k_value, s)
        .max(close(at_argmax, cap.k_value, s))
        .max(le(k, cap.k_value, s))
        .max(le(i, cap.value, s))
        .max(le(cap.value, cap.upper_bound, s)))
}

fn channel_data_processing(c: &mut Ctx) -> Result<f64> {
    let (p, w1) = channel_instance(c);
    let r = c.size(2, 3);
    let w2 = random_channel(&mut c.rng, w1.output_size(), r);
    let w12 = w1.compose(&w2)?;
    let o = Order::Finite(c.channel_order());
    let s = c.opt_slack();
    let i = |w: &Channel| i_alpha(&p, w, o, &c.cfg).map(|r| r.value);
    let k = |w: &Channel| k_alpha(&p, w, o, &c.cfg).map(|r| r.value);
    Ok(le(i(&w12)?, i(&w1)?, s).max(le(k(&w12)?, k(&w1)?, s)))
}

fn type_instance(c: &mut Ctx) -> (u64, usize) {
    (c.rng.random_range(1..=40), c.size(1, 3))
}

fn types_sequence_probability(c: &mut Ctx) -> Result<f64> {
    let (n, k) = type_instance(c);
    let k = k.max(2);
    let p = if c.index.is_multiple_of(3) {
        c.sparse(k)
    } else {
        c.dist(k)
    };
    let mut worst: f64 = 0.0;
    for t in stream_types(n, k)? {
        worst = worst.max(exactness_error(&p, &t)?);
    }
    Ok(worst - crate::method_of_types::EXACTNESS_TOLERANCE)
}

fn types_class_sizes(c: &mut Ctx) -> Result<f64> {
    let (n, k) = type_instance(c);
    let ok = stream_types(n, k)?.all(|t| class_size_bounds_hold(&t) == (true, true));
    Ok(holds(ok))
}

fn types_count(c: &mut Ctx) -> Result<f64> {
    let n = c.rng.random_range(1..=60);
    let k = c.size(1, 4);
    let count = num_types(n, k);
    let listed = enumerate_types(n, k)?.len();
    let poly = num_bigint::BigUint::from(n + 1).pow(k as u32);
    Ok(holds(count == listed.into() && count <= poly))
}

fn types_deviation(c: &mut Ctx) -> Result<f64> {
    let (n, k) = type_instance(c);
    let p = c.dist(k.max(2));
    let delta = c.rng.random_range(0.0..1.5);
    let r = deviation_bound_check(&p, n, delta)?;
    Ok(le(r.exact_tail, r.bound, 0.0))
}

fn variational_entropy_row(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p = c.dist(k);
    let a = c.order();
    let r = variational_entropy(&p, a, &c.cfg)?;
    Ok((r.gap - c.opt_slack()).max(r.closed_form_deviation.unwrap_or(0.0) - OPTIMIZER_TOLERANCE))
}

fn variational_divergence_row(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let (p1, p2) = (c.dist(k), random_distribution(&mut c.rng, k));
    let a = c.order();
    let r = variational_divergence(&p1, &p2, a, &c.cfg)?;
    Ok((r.gap - c.opt_slack()).max(r.closed_form_deviation.unwrap_or(0.0) - OPTIMIZER_TOLERANCE))
}

fn variational_channel_form(c: &mut Ctx) -> Result<f64> {
    let (p, w) = channel_instance(c);
    let a = c.channel_order();
    Ok(variational_i_alpha(&p, &w, a, &c.cfg)?.gap - CHANNEL_FORM_TOLERANCE)
}

fn variational_input_form(c: &mut Ctx) -> Result<f64> {
    let (p, w) = channel_instance(c);
    let a = c.channel_order();
    Ok(variational_k_alpha(&p, &w, a, &c.cfg)?.gap - INPUT_FORM_TOLERANCE)
}

fn variational_j(c: &mut Ctx) -> Result<f64> {
    let k = c.size(2, 5);
    let p1 = c.sparse(k);
    let alpha = c.rng.random_range(0.2..3.0);
    let beta = c.rng.random_range(-1.5..2.0);
    // negative β needs S(P1) ⊆ S(P2) for a finite value
    let p2 = if beta < 0.0 { c.dist(k) } else { c.sparse(k) };
    let direct = j_functional(&p1, &p2, alpha, beta)?;
    let r = j_variational(&p1, &p2, alpha, beta, &c.cfg)?;
    if !direct.is_finite() {
        return Ok(holds(!r.variational_value.is_finite()));
    }
    Ok((r.gap - c.opt_slack()).max(r.closed_form_deviation.unwrap_or(0.0) - OPTIMIZER_TOLERANCE))
}

fn scenario(c: &mut Ctx) -> Result<Scenario> {
    let k = c.size(2, 3);
    let lambda = [0.5, 1.0, 2.0][c.index % 3];
    if c.fixed() {
        return Scenario::new(
            vec![Distribution::from_probs(&[0.9, 0.1])?],
            vec![Distribution::from_probs(&[0.1, 0.9])?],
            vec![Distribution::uniform(2)?],
            1.0,
            8,
        );
    }
    let family = |c: &mut Ctx| {
        let m = c.size(1, 3);
        (0..m).map(|_| random_distribution(&mut c.rng, k)).collect::<Vec<_>>()
    };
    let (p1, p2, q) = (family(c), family(c), family(c));
    Scenario::new(p1, p2, q, lambda, 8)
}

fn testing_lower_bound(c: &mut Ctx) -> Result<f64> {
    let s = scenario(c)?;
    let e = val(achievable_exponent(&s));
    let b = val(renyi_lower_bound(&s)?);
    let mut q = s.family_q().to_vec();
    q.extend(worst_noise_family(&s)?.members.into_iter().map(|m| m.q));
    let closed = Scenario::new(s.family_p1().to_vec(), s.family_p2().to_vec(), q, s.lambda(), s.n1())?;
    Ok(le(b, e, 1e-12).max(close(val(achievable_exponent(&closed)), b, 1e-9)))
}

fn testing_exponent_alpha(c: &mut Ctx) -> Result<f64> {
    let s = scenario(c)?;
    let e = val(achievable_exponent(&s));
    let curve = exponent_alpha_curve(&s, &alpha_grid(&s, 10))?;
    let mut m = holds(non_increasing(&curve, 1e-12));
    for p in &curve {
        m = m.max(le(val(p.exponent), e, 1e-12));
    }
    let end = val(curve.last().expect("non-empty grid").exponent);
    m = m.max(close(end, val(renyi_lower_bound(&s)?), 1e-12));
    if e.is_finite() {
        m = m.max(close(val(exponent_alpha(&s, 1e-3)?), e, 0.05));
    }
    Ok(m)
}

const PROPERTIES: &[Property] = &[
    Property {
        id: "entropy.non_increasing_in_order",
        statement: "H_α(P) is non-increasing in α",
        check: entropy_monotone,
    },
    Property {
        id: "entropy.concave_below_one",
        statement: "H_α(P) is concave in P for α < 1",
        check: entropy_concave,
    },
    Property {
        id: "entropy.order_zero",
        statement: "H_0(P) = log |S(P)|",
        check: entropy_order_zero,
    },
    Property {
        id: "entropy.order_infinity",
        statement: "H_∞(P) = -log max P",
        check: entropy_order_infinity,
    },
    Property {
        id: "entropy.order_one",
        statement: "H_1(P) = H(P)",
        check: entropy_order_one,
    },
    Property {
        id: "entropy.log_sum_inequality",
        statement: "H_α(P) ≤ α/(α-1) D(Q‖P) + H(Q) for α > 1, reversed for α < 1",
        check: entropy_log_sum,
    },
    Property {
        id: "entropy.exponential_codelength",
        statement: "H_{1/(1+λ)}(P) ≤ min_ℓ L_λ(P,ℓ) ≤ H_{1/(1+λ)}(P) + 1",
        check: entropy_campbell,
    },
    Property {
        id: "entropy.unique_tilted_optimizer",
        statement: "Q* ∝ P^α is the unique optimizer of G_α(P;Q)",
        check: entropy_unique_optimizer,
    },
    Property {
        id: "entropy.approximate_recursivity",
        statement: "the merge coefficient lies between its two closed-form bounds",
        check: entropy_recursivity,
    },
    Property {
        id: "divergence.non_decreasing_in_order",
        statement: "D_α(P1‖P2) is non-decreasing in α",
        check: divergence_monotone,
    },
    Property {
        id: "divergence.nonnegative_with_identity",
        statement: "D_α(P1‖P2) ≥ 0 with equality iff P1 = P2",
        check: divergence_identity,
    },
    Property {
        id: "divergence.convexity",
        statement: "D_α convex in P2 for α > 1, jointly convex for α < 1",
        check: divergence_convexity,
    },
    Property {
        id: "divergence.order_zero",
        statement: "D_0(P1‖P2) = -log P2(S(P1))",
        check: divergence_order_zero,
    },
    Property {
        id: "divergence.order_infinity",
        statement: "D_∞(P1‖P2) = log max P1/P2",
        check: divergence_order_infinity,
    },
    Property {
        id: "divergence.order_one",
        statement: "D_1(P1‖P2) = D(P1‖P2)",
        check: divergence_order_one,
    },
    Property {
        id: "divergence.data_processing",
        statement: "D_α(P1W‖P2W) ≤ D_α(P1‖P2)",
        check: divergence_data_processing,
    },
    Property {
        id: "divergence.unique_tilted_optimizer",
        statement: "Q* ∝ P1^α P2^{1-α} is the unique optimizer of G_α(P1,P2;Q)",
        check: divergence_unique_optimizer,
    },
    Property {
        id: "channel.k_versus_i",
        statement: "K_α ≥ I_α for α > 1 and K_α ≤ I_α for α < 1",
        check: channel_ordering,
    },
    Property {
        id: "channel.entropy_bounds",
        statement: "I_α(P,W) ≤ H(P) and K_α(P,W) ≤ H_{1/α}(P), tight for noiseless W",
        check: channel_bounds,
    },
    Property {
        id: "channel.i_alpha_shape",
        statement: "I_α concave in P, convex in W for α < 1",
        check: channel_i_shape,
    },
    Property {
        id: "channel.k_alpha_concave_in_input",
        statement: "K_α(P,W) is concave in P for α > 1",
        check: channel_k_concave,
    },
    Property {
        id: "channel.k_alpha_convex_in_channel",
        statement: "K_α(P,W) is convex in W for α > 1",
        check: channel_k_convex,
    },
    Property {
        id: "channel.capacity_is_max_k",
        statement: "C_α(W) = max_P I_α(P,W) = max_P K_α(P,W)",
        check: channel_capacity,
    },
    Property {
        id: "channel.data_processing",
        statement: "I_α and K_α do not increase under channel concatenation",
        check: channel_data_processing,
    },
    Property {
        id: "types.sequence_probability",
        statement: "P^n(x^n) = 2^{-n(D(Q‖P)+H(Q))} for x^n of type Q",
        check: types_sequence_probability,
    },
    Property {
        id: "types.class_size_bounds",
        statement: "|P^n|^{-1} 2^{nH(Q)} ≤ |T_Q| ≤ 2^{nH(Q)}",
        check: types_class_sizes,
    },
    Property {
        id: "types.type_count",
        statement: "|P^n| = C(n+|X|-1, |X|-1) ≤ (n+1)^{|X|}",
        check: types_count,
    },
    Property {
        id: "types.deviation_bound",
        statement: "P^n{D(π‖P) ≥ δ} ≤ |P^n| 2^{-nδ}",
        check: types_deviation,
    },
    Property {
        id: "variational.entropy",
        statement: "H_α(P) as the optimum of α/(α-1) D(Q‖P) + H(Q)",
        check: variational_entropy_row,
    },
    Property {
        id: "variational.divergence",
        statement: "D_α(P1‖P2) as the optimum of α/(1-α) D(Q‖P1) + D(Q‖P2)",
        check: variational_divergence_row,
    },
    Property {
        id: "variational.channel_form",
        statement: "I_α(P,W) as an optimum over channels V",
        check: variational_channel_form,
    },
    Property {
        id: "variational.input_form",
        statement: "K_α(P,W) as an optimum over inputs Q",
        check: variational_input_form,
    },
    Property {
        id: "variational.j_functional",
        statement: "J_{α,β} as min over Q of α D(Q‖P1) + β D(Q‖P2) + (α+β-1) H(Q)",
        check: variational_j,
    },
    Property {
        id: "testing.renyi_lower_bound",
        statement: "E* ≥ λ/(1+λ) D_{1/(1+λ)}(𝐏₁‖𝐏₂), tight when 𝐐 meets 𝐐*",
        check: testing_lower_bound,
    },
    Property {
        id: "testing.exponent_alpha",
        statement: "E*(α) ≤ E*, non-increasing in α, tight as α → 0",
        check: testing_exponent_alpha,
    },
];

/// Identifiers of every row, in report order.
pub fn property_ids() -> Vec<&'static str> {
    PROPERTIES.iter().map(|p| p.id).collect()
}

fn run_row(stream: usize, prop: &Property, cfg: &VerifyConfig) -> PropertyRow {
    let solver = SolverConfig::with_tol(cfg.tol).seed(cfg.seed);
    let mut failures = 0;
    let mut errors = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut first_problem = None;
    for i in 0..cfg.instances {
        let mut ctx = Ctx {
            rng: instance_rng(cfg.seed, stream as u64, i as u64),
            index: i,
            cfg: solver,
            tol: cfg.tol,
        };
        match (prop.check)(&mut ctx) {
            Ok(m) => {
                worst = worst.max(m);
                if !(m <= 0.0) {
                    failures += 1;
                    first_problem.get_or_insert_with(|| format!("instance {i}: margin {m:e}"));
                }
            }
            Err(e) => {
                errors += 1;
                first_problem.get_or_insert_with(|| format!("instance {i}: {e}"));
            }
        }
    }
    PropertyRow {
        id: prop.id,
        statement: prop.statement,
        instances: cfg.instances,
        failures,
        errors,
        worst_margin: worst,
        first_problem,
        passed: failures == 0 && errors == 0,
    }
}

fn check_config(cfg: &VerifyConfig) -> Result<()> {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            cfg.tol
        )));
    }
    if cfg.instances == 0 {
        return Err(Error::InvalidParameter("instances must be at least 1".into()));
    }
    Ok(())
}

/// Runs the rows whose id starts with `prefix` (all rows for `""`).
pub fn run_verify_filtered(cfg: &VerifyConfig, prefix: &str) -> Result<VerifyReport> {
    check_config(cfg)?;
    let rows: Vec<PropertyRow> = PROPERTIES
        .iter()
        .enumerate()
        .filter(|(_, p)| p.id.starts_with(prefix))
        .map(|(s, p)| run_row(s, p, cfg))
        .collect();
    if rows.is_empty() {
        return Err(Error::InvalidParameter(format!("no property matches {prefix:?}")));
    }
    Ok(VerifyReport {
        seed: cfg.seed,
        instances: cfg.instances,
        tol: cfg.tol,
        passed: rows.iter().all(|r| r.passed),
        rows,
    })
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    run_verify_filtered(cfg, "")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_pass_on_a_small_sweep() {
        let cfg = VerifyConfig {
            seed: 3,
            instances: 25,
            tol: 1e-8,
        };
        let r = run_verify(&cfg).unwrap();
        for row in r.rows.iter().filter(|r| r.id != "channel.k_alpha_convex_in_channel") {
            assert!(row.passed, "{row:?}");
        }
        assert_eq!(r.rows.len(), property_ids().len());
    }

    /// `K_α` in closed form: `α/(α-1) log Σ_y (Σ_x P(x) W(y|x)^α)^{1/α}`.
    fn k_closed(p: &[f64], w: &Channel, a: f64) -> f64 {
        let s: f64 = (0..w.output_size())
            .map(|y| {
                (0..p.len())
                    .map(|x| p[x] * w.get(x, y).powf(a))
                    .sum::<f64>()
                    .powf(1.0 / a)
            })
            .sum();
        a / (a - 1.0) * s.log2()
    }

    #[test]
    fn k_alpha_is_not_convex_in_the_channel() {
        let p = Distribution::from_probs(&[0.4540083148483604, 0.5459916851516396]).unwrap();
        let w1 = Channel::from_rows(&[
            vec![0.36597692049068925, 0.6340230795093108],
            vec![0.895262684465181, 0.10473731553481898],
        ])
        .unwrap();
        let w2 = Channel::from_rows(&[
            vec![0.06824811374351325, 0.9317518862564867],
            vec![0.8727086146371511, 0.1272913853628489],
        ])
        .unwrap();
        let a = 3.565540603523982;
        let wm = w1.mix(&w2, 0.5).unwrap();
        let cfg = SolverConfig::with_tol(1e-10);
        let o = Order::finite(a).unwrap();
        let k = |w: &Channel| k_alpha(&p, w, o, &cfg).unwrap().value;
        for w in [&w1, &w2, &wm] {
            assert!((k(w) - k_closed(p.probs(), w, a)).abs() < 1e-9);
        }
        let avg = 0.5 * (k_closed(p.probs(), &w1, a) + k_closed(p.probs(), &w2, a));
        assert!(k_closed(p.probs(), &wm, a) > avg + 2e-3);
    }

    #[test]
    fn k_alpha_convexity_row_fails_on_the_default_sweep() {
        let cfg = VerifyConfig::default();
        let r = run_verify_filtered(&cfg, "channel.k_alpha_convex_in_channel").unwrap();
        assert!(!r.passed);
        assert_eq!(r.rows[0].errors, 0);
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = VerifyConfig {
            tol: 0.0,
            ..VerifyConfig::default()
        };
        assert!(run_verify(&cfg).is_err());
        let cfg = VerifyConfig {
            instances: 1,
            ..VerifyConfig::default()
        };
        assert!(run_verify_filtered(&cfg, "nothing.").is_err());
    }

    #[test]
    fn margins_handle_infinities() {
        assert!(le(f64::INFINITY, f64::INFINITY, 0.0) <= 0.0);
        assert!(le(1.0, f64::INFINITY, 0.0) <= 0.0);
        assert!(le(f64::INFINITY, 1.0, 0.0) > 0.0);
        assert!(close(f64::INFINITY, f64::INFINITY, 1e-3) <= 0.0);
    }
}
