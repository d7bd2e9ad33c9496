//! Shannon entropy, Kullback-Leibler divergence, mutual information and
//! channel capacity, all in bits.

use serde::Serialize;

use crate::distribution::{Channel, Distribution};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::solver::{minimize, Layout, Objective};

/// Iteration cap of the capacity iteration.
pub const CAPACITY_MAX_ITER: usize = 10_000;
/// Default certificate tolerance for [`capacity`].
pub const CAPACITY_DEFAULT_TOL: f64 = 1e-9;

/// `H(P) = -Σ P(x) log P(x)` with `0 log 0 = 0`.
pub fn entropy(p: &Distribution) -> f64 {
    let h: f64 = p.probs().iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum();
    h.max(0.0)
}

/// Finite part of `D(P1||P2)` over `S(P1)`, or `None` when some `x` has
/// `P1(x) > 0 = P2(x)`.
pub(crate) fn kl_raw(p1: &[f64], p2: &[f64]) -> Option<f64> {
    let mut d = 0.0;
    for (&a, &b) in p1.iter().zip(p2) {
        if a > 0.0 {
            if b == 0.0 {
                return None;
            }
            d += a * (a / b).log2();
        }
    }
    Some(d.max(0.0))
}

/// `D(P1||P2)`; `+inf` exactly when `P1` is not absolutely continuous
/// with respect to `P2`.
pub fn kl_divergence(p1: &Distribution, p2: &Distribution) -> Result<ExtendedReal> {
    p1.ensure_same_alphabet(p2)?;
    Ok(kl_raw(p1.probs(), p2.probs()).map_or(ExtendedReal::PosInfinity, ExtendedReal::Finite))
}

/// `D(V||W|P) = Σ_x P(x) D(V(.|x)||W(.|x))`, summed over `S(P)` only.
pub fn conditional_divergence(v: &Channel, w: &Channel, p: &Distribution) -> Result<ExtendedReal> {
    v.ensure_same_shape(w)?;
    v.ensure_input(p)?;
    let mut total = ExtendedReal::ZERO;
    for x in p.support() {
        let d = kl_divergence(v.row(x), w.row(x))?;
        total = total + d.scale_nonneg(p.prob(x));
    }
    Ok(total)
}

/// `I(P,W) = H(PW) - Σ_x P(x) H(W(.|x))`.
pub fn mutual_information(p: &Distribution, w: &Channel) -> Result<f64> {
    let out = w.output_marginal(p)?;
    let cond: f64 = p.support().into_iter().map(|x| p.prob(x) * entropy(w.row(x))).sum();
    Ok((entropy(&out) - cond).max(0.0))
}

/// Both minimization forms of the mutual information at their common
/// minimizer, the output marginal `PW`.
#[derive(Debug, Clone, Serialize)]
pub struct MutualInformationForms {
    /// `min_Q Σ_x P(x) D(W(.|x)||Q)`.
    pub value: f64,
    /// `min_Q D(P∘W || P×Q)`.
    pub joint_form_value: f64,
    pub argmin: Distribution,
}

/// Objective `Σ_x P(x) D(W(.|x)||Q)` of the first minimization form.
pub fn mutual_information_objective(p: &Distribution, w: &Channel, q: &Distribution) -> Result<ExtendedReal> {
    w.ensure_input(p)?;
    if q.alphabet_size() != w.output_size() {
        return Err(Error::ShapeMismatch(
            "Q must live on the channel output alphabet".into(),
        ));
    }
    let mut total = ExtendedReal::ZERO;
    for x in p.support() {
        total = total + kl_divergence(w.row(x), q)?.scale_nonneg(p.prob(x));
    }
    Ok(total)
}

/// Objective `D(P∘W || P×Q)` of the joint minimization form.
pub fn mutual_information_joint_objective(p: &Distribution, w: &Channel, q: &Distribution) -> Result<ExtendedReal> {
    w.ensure_input(p)?;
    if q.alphabet_size() != w.output_size() {
        return Err(Error::ShapeMismatch(
            "Q must live on the channel output alphabet".into(),
        ));
    }
    let joint = w.joint(p)?.flatten();
    let prod = p.product(q);
    kl_divergence(&joint, &prod)
}

/// Evaluates both variational forms of `I(P,W)` at `Q = PW`.
pub fn mutual_information_variational(p: &Distribution, w: &Channel) -> Result<MutualInformationForms> {
    let argmin = w.output_marginal(p)?;
    let value = mutual_information_objective(p, w, &argmin)?
        .finite()
        .ok_or(Error::InfiniteValue("output marginal dominates every used row"))?;
    let joint_form_value = mutual_information_joint_objective(p, w, &argmin)?
        .finite()
        .ok_or(Error::InfiniteValue("output marginal dominates every used row"))?;
    Ok(MutualInformationForms {
        value,
        joint_form_value,
        argmin,
    })
}

/// Certified estimate of the Shannon capacity.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    /// `I(P,W)` at the returned input distribution (a lower bound).
    pub value: f64,
    /// `max_x D(W(.|x)||PW)` (an upper bound).
    pub upper_bound: f64,
    pub argmax: Distribution,
    pub iterations: usize,
}

struct NegativeInformation<'a> {
    w: &'a Channel,
}

impl NegativeInformation<'_> {
    /// `PW` and the row divergences `D(W(.|x)||PW)` for an interior `P`.
    fn row_divergences(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut out = vec![0.0; self.w.output_size()];
        for (px, row) in p.iter().zip(self.w.rows()) {
            for (o, r) in out.iter_mut().zip(row.probs()) {
                *o += px * r;
            }
        }
        let d = self
            .w
            .rows()
            .iter()
            .map(|row| kl_raw(row.probs(), &out).unwrap_or(f64::INFINITY))
            .collect();
        (out, d)
    }
}

impl Objective for NegativeInformation<'_> {
    fn value_and_gradient(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        let (_, d) = self.row_divergences(p);
        for (g, dx) in grad.iter_mut().zip(&d) {
            *g = -(dx - std::f64::consts::LOG2_E);
        }
        -p.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// `C(W) = max_P I(P,W)`, stopped once the standard upper bound
/// `max_x D(W(.|x)||PW)` is within `tol` of `I(P,W)`.
///
/// The iteration is the entropic ascent `P(x) ← P(x) 2^{η D(W(.|x)||PW)}`
/// (the fixed-point iteration at `η = 1`) with adaptive `η`.
pub fn capacity(w: &Channel, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let m = w.input_size();
    let layout = Layout::simplex(m, (0..m).collect());
    let obj = NegativeInformation { w };
    let sol = minimize(
        &obj,
        &layout,
        vec![1.0 / m as f64; m],
        tol,
        CAPACITY_MAX_ITER,
        "capacity",
    )?;
    let input = Distribution::from_weights(&sol.x)?;
    let (_, d) = obj.row_divergences(input.probs());
    let lower = input.probs().iter().zip(&d).map(|(a, b)| a * b).sum::<f64>().max(0.0);
    let upper = d.iter().copied().fold(0.0, f64::max);
    Ok(CapacityResult {
        value: lower,
        upper_bound: upper.max(lower),
        argmax: input,
        iterations: sol.iterations,
    })
}
