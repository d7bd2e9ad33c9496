//! Probability vectors, channels and joint distributions over finite alphabets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of externally supplied probability vectors.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-9;

/// A probability vector over a finite alphabet `{0, .., len-1}`.
///
/// Entries are non-negative and sum to 1 up to rounding. A weight that is
/// positive on input stays positive after normalization, so the support seen
/// by downstream code is exactly the support of the input weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct Distribution {
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        Distribution::from_probs(&raw.probs)
    }
}

impl From<Distribution> for RawDistribution {
    fn from(d: Distribution) -> Self {
        RawDistribution { probs: d.probs }
    }
}

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteWeight { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeWeight { index, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(sum)
}

impl Distribution {
    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum = check_weights(weights)?;
        let probs = weights
            .iter()
            .map(|&w| {
                let p = w / sum;
                if w > 0.0 && p == 0.0 {
                    f64::MIN_POSITIVE
                } else {
                    p
                }
            })
            .collect();
        Ok(Distribution { probs })
    }

    /// Accepts a vector that already sums to 1 within [`INPUT_SUM_TOLERANCE`],
    /// then renormalizes it.
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        let sum = check_weights(probs)?;
        if (sum - 1.0).abs() > INPUT_SUM_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Distribution::from_weights(probs)
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Distribution::from_weights(&vec![1.0; size])
    }

    /// Uniform over the given symbols of an alphabet of `size` symbols.
    pub fn uniform_on(size: usize, symbols: &[usize]) -> Result<Self> {
        let mut w = vec![0.0; size];
        for &s in symbols {
            if s >= size {
                return Err(Error::ShapeMismatch(format!(
                    "symbol {s} outside alphabet of size {size}"
                )));
            }
            w[s] = 1.0;
        }
        Distribution::from_weights(&w)
    }

    pub fn point_mass(size: usize, symbol: usize) -> Result<Self> {
        Distribution::uniform_on(size, &[symbol])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    /// Symbols with strictly positive probability, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(x, _)| x)
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn in_support(&self, x: usize) -> bool {
        self.probs[x] > 0.0
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// Total probability of a set of symbols.
    pub fn mass_of(&self, symbols: &[usize]) -> f64 {
        symbols.iter().map(|&x| self.probs[x]).sum()
    }

    pub fn ensure_same_alphabet(&self, other: &Distribution) -> Result<()> {
        if self.alphabet_size() != other.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                left: self.alphabet_size(),
                right: other.alphabet_size(),
            });
        }
        Ok(())
    }

    /// `S(self) ⊆ S(other)`.
    pub fn absolutely_continuous(&self, other: &Distribution) -> Result<bool> {
        self.ensure_same_alphabet(other)?;
        Ok(self.probs.iter().zip(&other.probs).all(|(&p, &q)| p == 0.0 || q > 0.0))
    }

    pub fn max_norm_distance(&self, other: &Distribution) -> Result<f64> {
        self.ensure_same_alphabet(other)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Product distribution on the alphabet `self × other`, indexed
    /// `x * other.len() + y`.
    pub fn product(&self, other: &Distribution) -> Distribution {
        let probs = self
            .probs
            .iter()
            .flat_map(|&p| other.probs.iter().map(move |&q| p * q))
            .collect();
        Distribution { probs }
    }

    /// Convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Distribution, t: f64) -> Result<Distribution> {
        self.ensure_same_alphabet(other)?;
        let w: Vec<f64> = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(&a, &b)| t * a + (1.0 - t) * b)
            .collect();
        Distribution::from_weights(&w)
    }

    /// `P'` obtained by moving the mass of `x2` onto `x1`.
    pub fn merge_symbols(&self, x1: usize, x2: usize) -> Result<Distribution> {
        let n = self.alphabet_size();
        if x1 >= n || x2 >= n || x1 == x2 {
            return Err(Error::InvalidParameter(format!(
                "cannot merge symbols {x1} and {x2} of {n}"
            )));
        }
        let mut w = self.probs.clone();
        w[x1] += w[x2];
        w[x2] = 0.0;
        Distribution::from_weights(&w)
    }

    pub(crate) fn from_normalized_unchecked(probs: Vec<f64>) -> Distribution {
        Distribution { probs }
    }
}

/// `make_distribution`: normalize non-negative weights.
pub fn make_distribution(weights: &[f64]) -> Result<Distribution> {
    Distribution::from_weights(weights)
}

/// `S(P)`.
pub fn support(p: &Distribution) -> Vec<usize> {
    p.support()
}

/// `P1 ≪ P2`.
pub fn absolutely_continuous(p1: &Distribution, p2: &Distribution) -> Result<bool> {
    p1.absolutely_continuous(p2)
}

/// A row-stochastic matrix `W(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct Channel {
    rows: Vec<Distribution>,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RawChannel> for Channel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        Channel::from_rows(&raw.rows)
    }
}

impl From<Channel> for RawChannel {
    fn from(c: Channel) -> Self {
        RawChannel {
            rows: c.rows.into_iter().map(|r| r.probs).collect(),
        }
    }
}

impl Channel {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyAlphabet)?;
        let out = first.alphabet_size();
        if let Some(bad) = rows.iter().find(|r| r.alphabet_size() != out) {
            return Err(Error::ShapeMismatch(format!(
                "channel rows have {} and {} outputs",
                out,
                bad.alphabet_size()
            )));
        }
        Ok(Channel { rows })
    }

    /// Rows must each sum to 1 within [`INPUT_SUM_TOLERANCE`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| Distribution::from_probs(r))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(rows)
    }

    /// Rows are normalized independently.
    pub fn from_weight_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| Distribution::from_weights(r))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(rows)
    }

    pub fn identity(size: usize) -> Result<Self> {
        Channel::new(
            (0..size)
                .map(|x| Distribution::point_mass(size, x))
                .collect::<Result<_>>()?,
        )
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        Channel::from_weight_rows(&[vec![1.0 - crossover, crossover], vec![crossover, 1.0 - crossover]])
    }

    /// Every input mapped to the same output distribution.
    pub fn constant(inputs: usize, row: &Distribution) -> Result<Self> {
        Channel::new(vec![row.clone(); inputs])
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].alphabet_size()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x].prob(y)
    }

    pub fn ensure_input(&self, p: &Distribution) -> Result<()> {
        if p.alphabet_size() != self.input_size() {
            return Err(Error::ShapeMismatch(format!(
                "input distribution has {} symbols, channel has {} inputs",
                p.alphabet_size(),
                self.input_size()
            )));
        }
        Ok(())
    }

    pub fn ensure_same_shape(&self, other: &Channel) -> Result<()> {
        if self.input_size() != other.input_size() || self.output_size() != other.output_size() {
            return Err(Error::ShapeMismatch(format!(
                "channels are {}x{} and {}x{}",
                self.input_size(),
                self.output_size(),
                other.input_size(),
                other.output_size()
            )));
        }
        Ok(())
    }

    /// Output marginal `PW(y) = Σ_x P(x) W(y|x)`.
    pub fn output_marginal(&self, p: &Distribution) -> Result<Distribution> {
        self.ensure_input(p)?;
        let mut out = vec![0.0; self.output_size()];
        for (px, row) in p.probs().iter().zip(&self.rows) {
            for (o, w) in out.iter_mut().zip(row.probs()) {
                *o += px * w;
            }
        }
        Distribution::from_weights(&out)
    }

    /// Joint distribution `(P∘W)(x, y) = P(x) W(y|x)`.
    pub fn joint(&self, p: &Distribution) -> Result<JointDistribution> {
        self.ensure_input(p)?;
        let table = p
            .probs()
            .iter()
            .zip(&self.rows)
            .map(|(&px, row)| row.probs().iter().map(|&w| px * w).collect())
            .collect();
        Ok(JointDistribution { table })
    }

    /// Concatenation `(W1 W2)(z|x) = Σ_y W2(z|y) W1(y|x)`.
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if self.output_size() != next.input_size() {
            return Err(Error::ShapeMismatch(format!(
                "cannot concatenate {}-output channel with {}-input channel",
                self.output_size(),
                next.input_size()
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| next.output_marginal(row))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(rows)
    }

    /// Row-wise convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Channel, t: f64) -> Result<Channel> {
        self.ensure_same_shape(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.mix(b, t))
            .collect::<Result<Vec<_>>>()?;
        Channel::new(rows)
    }
}

/// A probability table over `X × Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    table: Vec<Vec<f64>>,
}

impl JointDistribution {
    /// `(P × Q)(x, y) = P(x) Q(y)`.
    pub fn product(p: &Distribution, q: &Distribution) -> Self {
        let table = p
            .probs()
            .iter()
            .map(|&a| q.probs().iter().map(|&b| a * b).collect())
            .collect();
        JointDistribution { table }
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x][y]
    }

    /// The table flattened row-major into a distribution over `|X|·|Y|` symbols.
    pub fn flatten(&self) -> Distribution {
        Distribution::from_normalized_unchecked(self.table.iter().flatten().copied().collect())
    }
}
