//! Entropic mirror descent over products of simplex faces.
//!
//! The feasible set is a product of blocks; block `b` is the probability
//! simplex on a subset of coordinates (a face) and carries a weight `w_b`.
//! The mirror map is `Σ_b w_b Σ_{i∈b} x_i ln x_i`, so a step on block `b` reads
//! `x_i ← x_i exp(-(η / w_b) g_i)` followed by renormalization. Coordinates
//! outside every block are held fixed.
//!
//! Step sizes are chosen by backtracking: a step is accepted when the
//! gradient change along the step is at most `(KL_w(x'||x) + KL_w(x||x')) / (2η)`,
//! a gradient-only form of relative smoothness that guarantees descent and,
//! unlike comparisons of objective values, stays accurate near the optimum. The step grows again after
//! each accepted step. For a convex objective the Frank-Wolfe gap
//! `Σ_b (<g_b, x_b> - min_{i∈b} g_i)` bounds `f(x) - min f`; iteration stops
//! once it falls below the requested tolerance, so every returned optimum is
//! certified rather than merely stalled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::{instance_rng, random_face_point};

/// Tuning shared by all iterative optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Certificate tolerance on the optimality gap, in bits.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of random interior starting points.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 50_000,
            restarts: 5,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        SolverConfig {
            tol,
            ..SolverConfig::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    /// Single warm-started run with a tighter tolerance, for nested solves.
    pub(crate) fn inner(&self) -> Self {
        SolverConfig {
            tol: (self.tol * 1e-2).max(1e-15),
            restarts: 0,
            ..*self
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub indices: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub dim: usize,
    pub blocks: Vec<Block>,
}

impl Layout {
    pub fn simplex(dim: usize, face: Vec<usize>) -> Self {
        Layout {
            dim,
            blocks: vec![Block {
                indices: face,
                weight: 1.0,
            }],
        }
    }

    /// Uniform point on every face; `fixed` supplies the held coordinates.
    pub fn uniform_start(&self, fixed: &[f64]) -> Vec<f64> {
        let mut x = fixed.to_vec();
        for b in &self.blocks {
            let v = 1.0 / b.indices.len() as f64;
            for &i in &b.indices {
                x[i] = v;
            }
        }
        x
    }

    pub fn random_start<R: Rng>(&self, rng: &mut R, fixed: &[f64]) -> Vec<f64> {
        let mut x = fixed.to_vec();
        for b in &self.blocks {
            let p = random_face_point(rng, self.dim, &b.indices);
            for &i in &b.indices {
                x[i] = p[i];
            }
        }
        x
    }

    fn frank_wolfe_gap(&self, x: &[f64], g: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let inner: f64 = b.indices.iter().map(|&i| x[i] * g[i]).sum();
                let min = b.indices.iter().map(|&i| g[i]).fold(f64::INFINITY, f64::min);
                (inner - min).max(0.0)
            })
            .sum()
    }

    fn step(&self, x: &[f64], g: &[f64], eta: f64, out: &mut [f64]) {
        out.copy_from_slice(x);
        for b in &self.blocks {
            if b.indices.len() == 1 {
                out[b.indices[0]] = 1.0;
                continue;
            }
            let scale = eta / b.weight;
            let mut umax = f64::NEG_INFINITY;
            for &i in &b.indices {
                let u = x[i].ln() - scale * g[i];
                out[i] = u;
                umax = umax.max(u);
            }
            let mut total = 0.0;
            for &i in &b.indices {
                let e = (out[i] - umax).exp();
                out[i] = e;
                total += e;
            }
            for &i in &b.indices {
                // keep iterates strictly inside the face
                out[i] = (out[i] / total).max(1e-300);
            }
        }
    }

    /// `Σ_b w_b (KL(new||old) + KL(old||new))`, summed from non-negative terms.
    fn symmetric_kl(&self, new: &[f64], old: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let s: f64 = b
                    .indices
                    .iter()
                    .map(|&i| (new[i] - old[i]) * (new[i].ln() - old[i].ln()))
                    .sum();
                b.weight * s
            })
            .sum()
    }
}

/// A convex objective on the product of faces described by a [`Layout`].
pub(crate) trait Objective {
    /// Writes the gradient into `grad` and returns the value (NaN when undefined).
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Frank-Wolfe certificate at `x`.
    pub gap: f64,
    pub iterations: usize,
}

const LINE_SEARCH_TRIES: usize = 80;

/// Minimizes `obj` from `start`, which must lie strictly inside every face.
pub(crate) fn minimize<O: Objective>(
    obj: &O,
    layout: &Layout,
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<Solution> {
    let mut x = start;
    let mut g = vec![0.0; layout.dim];
    let mut trial = vec![0.0; layout.dim];
    let mut gt = vec![0.0; layout.dim];
    let mut f = obj.value_and_gradient(&x, &mut g);
    let mut eta = 1.0;
    let mut gap = layout.frank_wolfe_gap(&x, &g);
    for it in 0..max_iter {
        if gap <= tol {
            return Ok(Solution {
                x,
                value: f,
                gap,
                iterations: it,
            });
        }
        let mut accepted = None;
        for _ in 0..LINE_SEARCH_TRIES {
            layout.step(&x, &g, eta, &mut trial);
            let ft = obj.value_and_gradient(&trial, &mut gt);
            // Curvature along the step, measured with gradients so that
            // nothing cancels near the optimum. A mirror step has
            // <g, x'-x> = -symKL/η, so for convex f the test below implies
            // f(x') ≤ f(x) - symKL/(2η).
            if ft.is_finite() {
                let curvature: f64 = trial
                    .iter()
                    .zip(&x)
                    .zip(gt.iter().zip(&g))
                    .map(|((a, b), (ga, gb))| (a - b) * (ga - gb))
                    .sum();
                if curvature <= 0.5 * layout.symmetric_kl(&trial, &x) / eta {
                    accepted = Some(ft);
                    break;
                }
            }
            eta *= 0.5;
        }
        let Some(ft) = accepted else {
            return Err(Error::NonConvergence {
                what,
                iterations: it,
                gap,
            });
        };
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut gt);
        f = ft;
        gap = layout.frank_wolfe_gap(&x, &g);
        eta = (eta * 2.0).min(1e12);
    }
    if gap <= tol {
        return Ok(Solution {
            x,
            value: f,
            gap,
            iterations: max_iter,
        });
    }
    Err(Error::NonConvergence {
        what,
        iterations: max_iter,
        gap,
    })
}

/// Runs [`minimize`] from `extra` starting points plus `cfg.restarts`
/// seeded random interior points and keeps the lowest objective.
pub(crate) fn minimize_with_restarts<O: Objective>(
    obj: &O,
    layout: &Layout,
    fixed: &[f64],
    extra: Vec<Vec<f64>>,
    cfg: &SolverConfig,
    what: &'static str,
) -> Result<Solution> {
    cfg.validate()?;
    let mut starts = extra;
    let mut rng = instance_rng(cfg.seed, 0x5EED, 0);
    for _ in 0..cfg.restarts {
        starts.push(layout.random_start(&mut rng, fixed));
    }
    if starts.is_empty() {
        starts.push(layout.uniform_start(fixed));
    }
    let mut best: Option<Solution> = None;
    let mut last_err = None;
    for s in starts {
        match minimize(obj, layout, s, cfg.tol, cfg.max_iter, what) {
            Ok(sol) => {
                if best.as_ref().is_none_or(|b| sol.value < b.value) {
                    best = Some(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one start"))
}

/// Objective `s · (a Σ_{i∈face} x_i log x_i - <c, x>)` in bits, where the
/// logarithm is base 2; used for all closed-form tilting problems. `s·a > 0`
/// makes it strictly convex.
pub(crate) struct EntropicLinear {
    pub sign: f64,
    pub a: f64,
    /// Linear coefficients (bits); only face entries are read.
    pub c: Vec<f64>,
    pub face: Vec<usize>,
}

impl EntropicLinear {
    fn raw(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for &i in &self.face {
            let xi = x[i];
            if xi > 0.0 {
                v += self.a * xi * xi.log2();
            }
            v -= self.c[i] * xi;
        }
        self.sign * v
    }
}

impl Objective for EntropicLinear {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for &i in &self.face {
            grad[i] = self.sign * (self.a * (x[i].log2() + std::f64::consts::LOG2_E) - self.c[i]);
        }
        self.raw(x)
    }
}
