//! Integration against the Haar measure on pure states of `C^d`.
//!
//! Qubits get an exact product rule on the Bloch sphere (Gauss–Legendre in
//! `u = cos ϑ`, uniform in the azimuth). A rule of degree `t` integrates every
//! polynomial of degree `≤ t` in the entries of `|θ⟩⟨θ|` exactly. Other
//! dimensions use seeded Monte Carlo.
//!
//! Integrands are evaluated in parallel, but reductions always run in node
//! order so that results do not depend on the thread count.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Operator, PureState};

/// Extra degree used when estimating the error of an exact rule applied to
/// a non-polynomial integrand.
pub const ESCALATION_DEGREES: usize = 4;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Exact { degree: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Exact { degree } => write!(f, "exact:{degree}"),
            RuleKind::MonteCarlo { samples, seed } => write!(f, "mc:{samples}:{seed}"),
        }
    }
}

/// Weighted set of single-site pure states.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    d: usize,
    nodes: Vec<PureState>,
    weights: Vec<f64>,
    kind: RuleKind,
}

impl QuadratureRule {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nodes(&self) -> &[PureState] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomial degree integrated exactly; 0 for Monte Carlo.
    pub fn exact_degree(&self) -> usize {
        match self.kind {
            RuleKind::Exact { degree } => degree,
            RuleKind::MonteCarlo { .. } => 0,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.kind {
            RuleKind::Exact { .. } => None,
            RuleKind::MonteCarlo { seed, .. } => Some(seed),
        }
    }

    /// Compensated sum of the weights.
    pub fn weight_sum(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PureState, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }
}

pub(crate) fn neumaier_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (weights sum to 2).
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let np = points as f64;
    for i in 0..points.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (np + 0.5)).cos();
        let mut deriv = 1.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(points, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(points, x);
        if dp != 0.0 {
            deriv = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[points - 1 - i] = x;
        weights[i] = w;
        weights[points - 1 - i] = w;
    }
    if points % 2 == 1 {
        nodes[points / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Qubit state with Bloch coordinates `u = cos ϑ` and azimuth `φ`.
pub fn bloch_state(u: f64, phi: f64) -> PureState {
    let a = Complex64::new(((1.0 + u) / 2.0).max(0.0).sqrt(), 0.0);
    let b = Complex64::from_polar(((1.0 - u) / 2.0).max(0.0).sqrt(), phi);
    PureState::normalized(2, 1, vec![a, b]).expect("Bloch parametrization is normalized")
}

/// Product rule with `t + 1` Gauss–Legendre nodes in `u` and `2t + 2`
/// uniform azimuths, exact up to degree `t`.
pub fn exact_qubit_rule(degree: usize) -> QuadratureRule {
    let (us, uw) = gauss_legendre(degree + 1);
    let angles = 2 * degree + 2;
    let mut nodes = Vec::with_capacity(us.len() * angles);
    let mut weights = Vec::with_capacity(us.len() * angles);
    for (&u, &w) in us.iter().zip(&uw) {
        for j in 0..angles {
            let phi = 2.0 * PI * j as f64 / angles as f64;
            nodes.push(bloch_state(u, phi));
            weights.push(w);
        }
    }
    let total = neumaier_sum(weights.iter().copied());
    for w in &mut weights {
        *w /= total;
    }
    QuadratureRule { d: 2, nodes, weights, kind: RuleKind::Exact { degree } }
}

/// Normalized complex Gaussian vectors with equal weights.
pub fn monte_carlo_rule(d: usize, samples: usize, seed: u64) -> Result<QuadratureRule> {
    if samples == 0 {
        return Err(Error::Domain("Monte Carlo rule needs at least one sample".into()));
    }
    if d < 2 {
        return Err(Error::Domain(format!("site dimension must be at least 2, got {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(samples);
    while nodes.len() < samples {
        let amps: Vec<Complex64> = (0..d)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        if let Ok(s) = PureState::normalized(d, 1, amps) {
            nodes.push(s);
        }
    }
    let weights = vec![1.0 / samples as f64; samples];
    Ok(QuadratureRule { d, nodes, weights, kind: RuleKind::MonteCarlo { samples, seed } })
}

/// Values that can be integrated: closed under weighted sums.
pub trait Integrand: Clone + Send {
    fn zeroed(&self) -> Self;
    fn add_scaled(&mut self, other: &Self, w: f64);
    /// Flattened entries, used for error estimates.
    fn entries(&self) -> Vec<Complex64>;
}

impl Integrand for f64 {
    fn zeroed(&self) -> Self {
        0.0
    }

    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }

    fn entries(&self) -> Vec<Complex64> {
        vec![Complex64::new(*self, 0.0)]
    }
}

impl Integrand for Operator {
    fn zeroed(&self) -> Self {
        self.scale(0.0)
    }

    fn add_scaled(&mut self, other: &Self, w: f64) {
        self.add_scaled_assign(other, w).expect("integrand values must share a shape");
    }

    fn entries(&self) -> Vec<Complex64> {
        self.matrix().iter().copied().collect()
    }
}

/// What is known about an integrand's smoothness in `|θ⟩⟨θ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Polynomial of the given degree in the entries of `|θ⟩⟨θ|` (and its conjugate).
    Polynomial(usize),
    General,
}

/// `Σ_j w_j f(θ_j)`, accumulated in node order.
pub fn try_integrate<T, F>(rule: &QuadratureRule, f: F) -> Result<T>
where
    T: Integrand,
    F: Fn(&PureState) -> Result<T> + Sync,
{
    let mut acc: Option<T> = None;
    for (nodes, weights) in rule.nodes.chunks(CHUNK).zip(rule.weights.chunks(CHUNK)) {
        let values: Vec<T> = nodes.par_iter().map(&f).collect::<Result<_>>()?;
        for (v, &w) in values.iter().zip(weights) {
            acc.get_or_insert_with(|| v.zeroed()).add_scaled(v, w);
        }
    }
    acc.ok_or_else(|| Error::Domain("empty quadrature rule".into()))
}

pub fn integrate<T, F>(rule: &QuadratureRule, f: F) -> T
where
    T: Integrand,
    F: Fn(&PureState) -> T + Sync,
{
    try_integrate(rule, |theta| Ok(f(theta))).expect("infallible integrand over a nonempty rule")
}

/// Entrywise standard error of the Monte Carlo mean (sample variance with
/// the `N − 1` denominator, accumulated on data shifted by the first sample so
/// that constant integrands give exactly zero). A single-sample rule has no
/// variance estimate; the modulus of the sample itself is returned as the
/// error scale.
pub fn standard_errors<T, F>(rule: &QuadratureRule, f: F) -> Result<Vec<f64>>
where
    T: Integrand,
    F: Fn(&PureState) -> Result<T> + Sync,
{
    let n = rule.len();
    let mut shift: Option<Vec<Complex64>> = None;
    let mut sum: Vec<Complex64> = Vec::new();
    let mut sq: Vec<f64> = Vec::new();
    for nodes in rule.nodes.chunks(CHUNK) {
        let values: Vec<Vec<Complex64>> =
            nodes.par_iter().map(|t| f(t).map(|v| v.entries())).collect::<Result<_>>()?;
        for v in values {
            let k = shift.get_or_insert_with(|| v.clone());
            if sum.is_empty() {
                sum = vec![Complex64::new(0.0, 0.0); v.len()];
                sq = vec![0.0; v.len()];
            }
            for (((s, q), x), k) in sum.iter_mut().zip(sq.iter_mut()).zip(&v).zip(k.iter()) {
                let dev = x - k;
                *s += dev;
                *q += dev.norm_sqr();
            }
        }
    }
    let Some(first) = shift else {
        return Err(Error::Domain("empty quadrature rule".into()));
    };
    if n == 1 {
        return Ok(first.iter().map(|x| x.norm()).collect());
    }
    let nf = n as f64;
    Ok(sum
        .iter()
        .zip(&sq)
        .map(|(s, q)| {
            let var = ((q - s.norm_sqr() / nf) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        })
        .collect())
}

/// Error estimate for `integrate(rule, f)`:
/// * exact rule, polynomial integrand within the rule's degree: 0;
/// * exact rule otherwise: largest entrywise change when the degree is
///   raised by [`ESCALATION_DEGREES`];
/// * Monte Carlo: largest entrywise standard error.
pub fn integration_error_estimate<T, F>(rule: &QuadratureRule, f: F, smoothness: Smoothness) -> Result<f64>
where
    T: Integrand,
    F: Fn(&PureState) -> Result<T> + Sync,
{
    match rule.kind {
        RuleKind::Exact { degree } => {
            if let Smoothness::Polynomial(p) = smoothness {
                if p <= degree {
                    return Ok(0.0);
                }
            }
            let coarse = try_integrate(rule, &f)?.entries();
            let fine = try_integrate(&exact_qubit_rule(degree + ESCALATION_DEGREES), &f)?.entries();
            Ok(coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        }
        RuleKind::MonteCarlo { .. } => Ok(standard_errors(rule, f)?.into_iter().fold(0.0, f64::max)),
    }
}
