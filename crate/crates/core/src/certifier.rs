//! End-to-end certification of the exponential de Finetti bound for one
//! instance `(ρ, n, k, r)`.
//!
//! For each single-site `ψ` the pipeline forms
//! * `ρ_ψ = (I ⊗ ⟨ψ|^{⊗k}) ρ (I ⊗ |ψ⟩^{⊗k})`,
//! * `σ_ψ = P_ψ^{<r} ρ_ψ P_ψ^{<r}` and `τ_ψ = σ_ψ / Tr σ_ψ`,
//!
//! then compares `Tr_k ρ` with `c_{k,d} ∫ Tr(ρ_ψ) τ_ψ dψ` in trace norm and
//! checks the result against the chain bound
//! `3 c_{k,d} (∫ Tr(P_ψ^{≥r} ρ_ψ) dψ)^{1/2}` and the explicit bound
//! `3 c_{k,d} √c_{n+k,d} · exp(−(r/6) min(k/n, 1))`.
//!
//! ρ is pure, so it is carried as its state vector; `ρ_ψ` is then the rank-one
//! operator of the contracted vector `(I ⊗ ⟨ψ|^{⊗k})|v⟩`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{self, exact_qubit_rule, Integrand, QuadratureRule, RuleKind, ESCALATION_DEGREES};
use crate::hamming::{self, distance_from_masses, WeightFrame, SUPPORT_TOL};
use crate::linalg::{self, contract_bra_last, outer, reduced_density_last, Operator, PureState};
use crate::symmetric::{dicke_isometry, sym_dim};

/// Default relative threshold on `Tr σ_ψ / Tr ρ_ψ` below which `τ_ψ` falls
/// back to `|ψ⟩⟨ψ|^{⊗n}`.
pub const DEFAULT_FALLBACK_TOL: f64 = 1e-12;
/// Slack allowed in the report inequalities.
pub const REPORT_SLACK: f64 = 1e-9;
/// Integration error, relative to the chain bound, above which a report is
/// inconclusive.
pub const INCONCLUSIVE_FRACTION: f64 = 0.05;
/// Largest allowed `‖Π^sym ρ Π^sym − ρ‖₁` for an instance.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Largest allowed second eigenvalue of an instance's ρ.
pub const RANK_ONE_TOL: f64 = 1e-10;

/// A pure symmetric state on `n + k` sites with the parameters `(n, k, r)` of one
/// certification run.
#[derive(Debug, Clone)]
pub struct Instance {
    d: usize,
    n: usize,
    k: usize,
    r: usize,
    state: PureState,
    label: String,
}

impl Instance {
    pub fn new(state: PureState, n: usize, k: usize, r: usize, label: impl Into<String>) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        if n < 1 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        if r > n {
            return Err(Error::InvalidInstance(format!("r = {r} outside [0, {n}]")));
        }
        if state.sites() != n + k {
            return Err(Error::InvalidInstance(format!(
                "state has {} sites, expected n + k = {}",
                state.sites(),
                n + k
            )));
        }
        let asym = symmetric_defect(&state)?;
        if asym > SYMMETRY_TOL {
            return Err(Error::InvalidInstance(format!(
                "state is not in the symmetric subspace (‖ΠρΠ − ρ‖₁ = {asym:.3e})"
            )));
        }
        Ok(Self { d: state.site_dim(), n, k, r, state, label: label.into() })
    }

    /// Validates a density operator as pure and symmetric and extracts its
    /// state vector (up to a global phase).
    pub fn from_operator(rho: &Operator, n: usize, k: usize, r: usize, label: impl Into<String>) -> Result<Self> {
        let dev = rho.hermitian_deviation();
        if dev > linalg::HERMITIAN_TOL {
            return Err(Error::InvalidInstance(format!("ρ is not hermitian (deviation {dev:.3e})")));
        }
        if !rho.is_trace_one() {
            return Err(Error::InvalidInstance(format!("ρ has trace {}", rho.trace())));
        }
        let eig = rho.matrix().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        if let Some(&last) = order.last() {
            if eig.eigenvalues[last] < -linalg::PSD_TOL {
                return Err(Error::InvalidInstance(format!("ρ is not PSD (eigenvalue {:.3e})", eig.eigenvalues[last])));
            }
        }
        if order.len() > 1 && eig.eigenvalues[order[1]] > RANK_ONE_TOL {
            return Err(Error::InvalidInstance(format!(
                "ρ is not rank one (second eigenvalue {:.3e})",
                eig.eigenvalues[order[1]]
            )));
        }
        let top = eig.eigenvectors.column(order[0]).iter().copied().collect();
        let state = PureState::normalized(rho.site_dim(), rho.sites(), top)?;
        Self::new(state, n, k, r, label)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    /// The same state with a different threshold `r`.
    pub fn with_r(&self, r: usize) -> Result<Self> {
        if r > self.n {
            return Err(Error::InvalidInstance(format!("r = {r} outside [0, {}]", self.n)));
        }
        Ok(Self { r, ..self.clone() })
    }

    /// Dense `ρ = |v⟩⟨v|`.
    pub fn rho(&self) -> Operator {
        self.state.density()
    }

    /// `Tr_k ρ`.
    pub fn reduced(&self) -> Result<Operator> {
        reduced_density_last(&self.state, self.k)
    }

    fn c_k(&self) -> Result<f64> {
        Ok(sym_dim(self.k, self.d)? as f64)
    }
}

/// `‖Π^sym |v⟩⟨v| Π^sym − |v⟩⟨v|‖₁`, exact for rank-one operators.
fn symmetric_defect(state: &PureState) -> Result<f64> {
    let iso = dicke_isometry(state.sites(), state.site_dim())?;
    let v = state.amplitudes();
    let w = iso.project(v.as_slice())?;
    // v = w + u with u ⊥ w; in the basis (ŵ, û) the difference
    // |w⟩⟨w| − |v⟩⟨v| is [[0, −‖w‖‖u‖], [−‖w‖‖u‖, −‖u‖²]]
    let s = (v - &w).norm();
    Ok(s * (s * s + 4.0 * w.norm_squared()).sqrt())
}

fn require_reference(inst: &Instance, psi: &PureState) -> Result<()> {
    if psi.sites() != 1 || psi.site_dim() != inst.d {
        return Err(Error::DimensionMismatch(format!(
            "reference state must be a single site of dimension {}",
            inst.d
        )));
    }
    Ok(())
}

fn require_rule(inst: &Instance, rule: &QuadratureRule) -> Result<()> {
    if rule.d() != inst.d {
        return Err(Error::DimensionMismatch(format!(
            "quadrature rule is for d = {}, instance has d = {}",
            rule.d(),
            inst.d
        )));
    }
    Ok(())
}

fn require_exact_degree(inst: &Instance, rule: &QuadratureRule) -> Result<()> {
    if let RuleKind::Exact { degree } = rule.kind() {
        if degree < inst.n + inst.k {
            return Err(Error::Domain(format!(
                "exact rule of degree {degree} cannot integrate a degree-{} integrand",
                inst.n + inst.k
            )));
        }
    }
    Ok(())
}

/// `ρ_ψ` as an operator on the first `n` sites.
pub fn rho_psi(inst: &Instance, psi: &PureState) -> Result<Operator> {
    require_reference(inst, psi)?;
    outer(inst.d, inst.n, &contract_bra_last(&inst.state, psi, inst.k)?)
}

/// `c_{k,d} ∫ Tr(ρ_ψ) dψ`, the total mass of ν before normalization.
pub fn nu_weight_normalization(inst: &Instance, rule: &QuadratureRule) -> Result<f64> {
    require_rule(inst, rule)?;
    let mass: f64 = haar::try_integrate(rule, |psi| Ok(contract_bra_last(&inst.state, psi, inst.k)?.norm_squared()))?;
    Ok(inst.c_k()? * mass)
}

/// `c_{k,d} ∫ ρ_ψ dψ`, which equals `Tr_k ρ` for rules exact to degree `n + k`.
pub fn reconstruct_reduced(inst: &Instance, rule: &QuadratureRule) -> Result<Operator> {
    require_rule(inst, rule)?;
    let c_k = inst.c_k()?;
    haar::try_integrate(rule, |psi| Ok(rho_psi(inst, psi)?.scale(c_k)))
}

/// `τ_ψ` together with `Tr σ_ψ`.
#[derive(Debug, Clone)]
pub struct TauPsi {
    pub sigma_trace: f64,
    pub tau: Operator,
    pub used_fallback: bool,
}

/// Per-node quantities, all derived from the contracted vector.
struct NodeSample {
    rho_trace: f64,
    sigma_trace: f64,
    geq_mass: f64,
    used_fallback: bool,
    /// Unit vector with `τ_ψ = |tau⟩⟨tau|`.
    tau: DVector<Complex64>,
}

fn sample_node(inst: &Instance, psi: &PureState, fallback_tol: f64) -> Result<NodeSample> {
    require_reference(inst, psi)?;
    let phi = contract_bra_last(&inst.state, psi, inst.k)?;
    let frame = WeightFrame::new(psi, inst.n)?;
    let masses = frame.weight_masses(&phi)?;
    let rho_trace = phi.norm_squared();
    let geq_mass: f64 = masses[inst.r..].iter().sum();
    let (sigma_trace, tau, used_fallback) = if inst.r == 0 {
        (0.0, None, true)
    } else {
        let below = frame.project_below(&phi, inst.r)?;
        let sigma_trace = below.norm_squared();
        if sigma_trace > fallback_tol * rho_trace.max(f64::MIN_POSITIVE) {
            let norm = sigma_trace.sqrt();
            (sigma_trace, Some(below.unscale(norm)), false)
        } else {
            (sigma_trace, None, true)
        }
    };
    let tau = match tau {
        Some(t) => t,
        None => psi.power(inst.n)?.amplitudes().clone(),
    };
    Ok(NodeSample { rho_trace, sigma_trace, geq_mass, used_fallback, tau })
}

/// `σ_ψ = P^{<r} ρ_ψ P^{<r}` normalized to `τ_ψ`. When `Tr σ_ψ` is at most
/// `fallback_tol · Tr ρ_ψ` (always, for `r = 0`), `τ_ψ` is `|ψ⟩⟨ψ|^{⊗n}`.
pub fn tau_psi(inst: &Instance, psi: &PureState, fallback_tol: f64) -> Result<TauPsi> {
    let s = sample_node(inst, psi, fallback_tol)?;
    Ok(TauPsi { sigma_trace: s.sigma_trace, tau: outer(inst.d, inst.n, &s.tau)?, used_fallback: s.used_fallback })
}

/// Accumulates `c_{k,d} Tr(ρ_ψ) τ_ψ` and counts fallback nodes.
#[derive(Clone)]
struct Weighted {
    op: Operator,
    fallback_nodes: usize,
    fallback_weight: f64,
}

impl Integrand for Weighted {
    fn zeroed(&self) -> Self {
        Weighted { op: self.op.zeroed(), fallback_nodes: 0, fallback_weight: 0.0 }
    }

    fn add_scaled(&mut self, other: &Self, w: f64) {
        self.op.add_scaled(&other.op, w);
        self.fallback_nodes += other.fallback_nodes;
        self.fallback_weight += w * other.fallback_weight;
    }

    fn entries(&self) -> Vec<Complex64> {
        self.op.entries()
    }
}

/// The approximating state `∫ τ_ψ dν(ψ)` evaluated on a rule.
#[derive(Debug, Clone)]
pub struct Approximant {
    pub operator: Operator,
    pub fallback_nodes: usize,
    /// ν-mass carried by fallback nodes.
    pub fallback_mass: f64,
}

fn approximant_integrand(inst: &Instance, fallback_tol: f64) -> Result<impl Fn(&PureState) -> Result<Weighted> + Sync + '_> {
    let c_k = inst.c_k()?;
    Ok(move |psi: &PureState| {
        let s = sample_node(inst, psi, fallback_tol)?;
        let scale = c_k * s.rho_trace;
        let op = outer(inst.d, inst.n, &s.tau)?.scale(scale);
        Ok(Weighted {
            op,
            fallback_nodes: s.used_fallback as usize,
            fallback_weight: if s.used_fallback { scale } else { 0.0 },
        })
    })
}

/// `c_{k,d} Σ_j w_j Tr(ρ_{ψ_j}) τ_{ψ_j}`.
pub fn approximant(inst: &Instance, rule: &QuadratureRule, fallback_tol: f64) -> Result<Approximant> {
    require_rule(inst, rule)?;
    let acc = haar::try_integrate(rule, approximant_integrand(inst, fallback_tol)?)?;
    Ok(Approximant { operator: acc.op, fallback_nodes: acc.fallback_nodes, fallback_mass: acc.fallback_weight })
}

/// `‖Tr_k ρ − ∫ τ_ψ dν(ψ)‖₁` and an estimate of its integration error.
///
/// Exact rules report `‖A_t − A_{t+4}‖₁` (the integrand is a ratio, so no
/// finite degree integrates it exactly). Monte Carlo rules report
/// `√dim · ‖SE‖_F`, with `SE` the entrywise standard errors of the
/// approximant, which bounds the trace-norm perturbation at one sigma.
pub fn lhs_distance(inst: &Instance, rule: &QuadratureRule, fallback_tol: f64) -> Result<(f64, f64)> {
    let reduced = inst.reduced()?;
    let a = approximant(inst, rule, fallback_tol)?;
    let value = linalg::trace_norm(&reduced.try_sub(&a.operator)?)?;
    let err = match rule.kind() {
        RuleKind::Exact { degree } => {
            let finer = approximant(inst, &exact_qubit_rule(degree + ESCALATION_DEGREES), fallback_tol)?;
            linalg::trace_norm(&a.operator.try_sub(&finer.operator)?)?
        }
        RuleKind::MonteCarlo { .. } => {
            let se = haar::standard_errors(rule, approximant_integrand(inst, fallback_tol)?)?;
            let frob = se.iter().map(|s| s * s).sum::<f64>().sqrt();
            (a.operator.dim() as f64).sqrt() * frob
        }
    };
    Ok((value, err))
}

/// `∫ Tr(P_ψ^{≥r} ρ_ψ) dψ`.
pub fn chain_integral(inst: &Instance, rule: &QuadratureRule) -> Result<f64> {
    require_rule(inst, rule)?;
    require_exact_degree(inst, rule)?;
    haar::try_integrate(rule, |psi| Ok(sample_node(inst, psi, DEFAULT_FALLBACK_TOL)?.geq_mass))
}

/// `3 c_{k,d} (∫ Tr(P_ψ^{≥r} ρ_ψ) dψ)^{1/2}`.
pub fn chain_bound(inst: &Instance, rule: &QuadratureRule) -> Result<f64> {
    Ok(3.0 * inst.c_k()? * chain_integral(inst, rule)?.max(0.0).sqrt())
}

/// `3 c_{k,d} √c_{n+k,d} · exp(−(r/6) min(k/n, 1))`.
pub fn explicit_bound(n: usize, k: usize, d: usize, r: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let c_k = sym_dim(k, d)? as f64;
    let c_nk = sym_dim(n + k, d)? as f64;
    Ok(3.0 * c_k * c_nk.sqrt() * (-(r as f64) / 6.0 * exponent_rate(n, k)).exp())
}

/// `min(k/n, 1)`.
pub fn exponent_rate(n: usize, k: usize) -> f64 {
    (k as f64 / n as f64).min(1.0)
}

const G_GRID: usize = 10_000;

/// `max_{x∈[0,1]} x^k · tail(n, r, x)` by a uniform grid followed by
/// golden-section refinement around the best grid point.
pub fn g_max(n: usize, k: usize, r: usize) -> Result<f64> {
    if r > n + 1 {
        return Err(Error::Domain(format!("r = {r} outside [0, {}]", n + 1)));
    }
    let g = |x: f64| -> f64 { x.powi(k as i32) * hamming::tail_function(n, r, x).expect("x in [0, 1], r checked") };
    let step = 1.0 / (G_GRID - 1) as f64;
    let (mut best_i, mut best) = (0, g(0.0));
    for i in 1..G_GRID {
        let v = g(i as f64 * step);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (best_i as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_i + 1) as f64 * step).min(1.0);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut ga, mut gb) = (g(a), g(b));
    for _ in 0..80 {
        if ga < gb {
            lo = a;
            a = b;
            ga = gb;
            b = lo + inv_phi * (hi - lo);
            gb = g(b);
        } else {
            hi = b;
            b = a;
            gb = ga;
            a = hi - inv_phi * (hi - lo);
            ga = g(a);
        }
    }
    Ok(best.max(ga).max(gb))
}

/// `min_eig(c_{n+k,d} ∫ |θ⟩⟨θ|^{⊗n} |⟨θ|ψ⟩|^{2k} dθ − ρ_ψ)`.
pub fn check_operator_inequality(inst: &Instance, psi: &PureState, rule: &QuadratureRule) -> Result<f64> {
    require_rule(inst, rule)?;
    require_reference(inst, psi)?;
    match rule.kind() {
        RuleKind::Exact { .. } => require_exact_degree(inst, rule)?,
        RuleKind::MonteCarlo { .. } => {
            return Err(Error::Domain("operator inequality needs an exact rule".into()));
        }
    }
    let c_nk = sym_dim(inst.n + inst.k, inst.d)? as f64;
    let rhs: Operator = haar::try_integrate(rule, |theta| {
        let overlap = theta.inner(psi)?.norm_sqr().powi(inst.k as i32);
        Ok(theta.power(inst.n)?.density().scale(c_nk * overlap))
    })?;
    linalg::min_eigenvalue(&rhs.try_sub(&rho_psi(inst, psi)?)?)
}

/// Both sides of the gentle-measurement inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GentleCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl GentleCheck {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `(‖ρ − √X ρ √X‖₁, 2 √Tr ρ · √Tr(ρ(I − X)))` for PSD `ρ` and `0 ≤ X ≤ I`.
pub fn check_gentle(rho: &Operator, x: &Operator) -> Result<GentleCheck> {
    let lo = linalg::min_eigenvalue(rho)?;
    if lo < -linalg::PSD_TOL {
        return Err(Error::NotPsd(lo));
    }
    let ev = linalg::hermitian_eigenvalues(x)?;
    if ev.first().is_some_and(|&l| l < -linalg::PSD_TOL) || ev.last().is_some_and(|&l| l > 1.0 + linalg::PSD_TOL) {
        return Err(Error::Domain("measurement operator must satisfy 0 <= X <= I".into()));
    }
    let sx = linalg::psd_sqrt(x)?;
    let disturbed = &(&sx * rho) * &sx;
    let diff = rho.try_sub(&disturbed)?;
    // √X ρ √X is hermitian only up to rounding
    let diff = diff.try_add(&diff.adjoint())?.scale(0.5);
    let lhs = linalg::trace_norm(&diff)?;
    let id = Operator::identity(rho.site_dim(), rho.sites())?;
    let miss = rho.trace_product(&id.try_sub(x)?)?.re.max(0.0);
    let rhs = 2.0 * rho.trace().re.max(0.0).sqrt() * miss.sqrt();
    Ok(GentleCheck { lhs, rhs })
}

/// Smallest gentle-measurement slack over `pairs` seeded random `(ρ, X)`,
/// with dimensions cycling through `1..=max_dim`. `ρ` is a normalized
/// Wishart matrix and `X` has a Haar-like eigenbasis with spectrum in `[0, 1]`.
pub fn gentle_suite(pairs: usize, max_dim: usize, seed: u64) -> Result<f64> {
    if max_dim == 0 {
        return Err(Error::Domain("max_dim must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = |dim: usize| {
        DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
    };
    let mut worst = f64::INFINITY;
    for trial in 0..pairs {
        let dim = 1 + trial % max_dim;
        let g = gaussian(dim);
        let w = &g * g.adjoint();
        let rho = Operator::new(dim, 1, &w / w.trace())?;
        let basis = gaussian(dim).qr().q();
        let spectrum = gaussian(dim).column(0).map(|z| Complex64::new(z.re.abs().min(1.0), 0.0));
        let x = &basis * DMatrix::from_diagonal(&spectrum) * basis.adjoint();
        let x = Operator::new(dim, 1, (&x + x.adjoint()) * Complex64::new(0.5, 0.0))?;
        worst = worst.min(check_gentle(&rho, &x)?.slack());
    }
    Ok(worst)
}

/// `D(x‖y) = x ln(x/y) + (1 − x) ln((1 − x)/(1 − y))` with `0 ln 0 = 0`.
pub fn relative_entropy(x: f64, y: f64) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(x, y) + term(1.0 - x, 1.0 - y)
}

/// Minimum slacks of the large-overlap tail claim on its grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffCheck {
    /// `min (e^{−r/3} − tail(n, r, x))`.
    pub tail_slack: f64,
    /// `min (n · D(r/n ‖ 1 − x) − r/3)`.
    pub entropy_slack: f64,
}

pub const CHERNOFF_GRID: usize = 1_000;

/// Checks, on a grid of `x ∈ [1 − r/(3n), 1)`, that the binomial tail is at
/// most `e^{−r/3}` and that the relative-entropy exponent is at least `r/3`.
/// The Bernoulli mean is `μ = 1 − x` and `(1 + α)μ = r/n`.
pub fn check_chernoff_claim(n: usize, r: usize) -> Result<ChernoffCheck> {
    if r < 1 || r > n {
        return Err(Error::Domain(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
    }
    let (nf, rf) = (n as f64, r as f64);
    let start = 1.0 - rf / (3.0 * nf);
    let bound = (-rf / 3.0).exp();
    let mut tail_slack = f64::INFINITY;
    let mut entropy_slack = f64::INFINITY;
    for j in 0..CHERNOFF_GRID {
        let x = start + (1.0 - start) * j as f64 / CHERNOFF_GRID as f64;
        tail_slack = tail_slack.min(bound - hamming::tail_function(n, r, x)?);
        entropy_slack = entropy_slack.min(nf * relative_entropy(rf / nf, 1.0 - x) - rf / 3.0);
    }
    Ok(ChernoffCheck { tail_slack, entropy_slack })
}

/// `min(k/n, 1) ≤ 2k/(n + k) ≤ 2 min(k/n, 1)` for every pair, in exact
/// integer arithmetic. Returns the first failing pair, if any.
pub fn exponent_sandwich_failure(pairs: impl IntoIterator<Item = (u64, u64)>) -> Option<(u64, u64)> {
    // p/q ≤ s/t  ⇔  p·t ≤ s·q for positive denominators
    let le = |(p, q): (u128, u128), (s, t): (u128, u128)| p * t <= s * q;
    pairs.into_iter().find(|&(n, k)| {
        let (n, k) = (n as u128, k as u128);
        if n == 0 || k == 0 {
            return true;
        }
        let rate = if k <= n { (k, n) } else { (1, 1) };
        let mid = (2 * k, n + k);
        !(le(rate, mid) && le(mid, (2 * rate.0, rate.1)))
    })
}

pub fn check_exponent_sandwich(pairs: impl IntoIterator<Item = (u64, u64)>) -> bool {
    exponent_sandwich_failure(pairs).is_none()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Violation,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Violation => "VIOLATION",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Everything computed for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub label: String,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub lhs: f64,
    pub lhs_integration_error: f64,
    pub chain_bound: f64,
    pub explicit_bound: f64,
    pub g_max_value: f64,
    pub nu_normalization: f64,
    pub fallback_node_count: usize,
    pub node_count: usize,
    pub rule: String,
    /// Largest Hamming distance of `τ_ψ` over nodes that kept `σ_ψ`.
    pub max_distance_regular: Option<usize>,
    /// Largest Hamming distance of `τ_ψ` over fallback nodes.
    pub max_distance_fallback: Option<usize>,
    pub status: Status,
}

impl VerificationReport {
    /// Classification used for [`VerificationReport::status`].
    pub fn classify(lhs: f64, err: f64, chain: f64, explicit: f64) -> Status {
        if err > INCONCLUSIVE_FRACTION * chain.max(1e-6) {
            Status::Inconclusive
        } else if lhs - err <= chain + REPORT_SLACK && chain <= explicit + REPORT_SLACK {
            Status::Pass
        } else {
            Status::Violation
        }
    }
}

/// Runs the full pipeline for one instance.
pub fn verify(inst: &Instance, rule: &QuadratureRule, fallback_tol: f64) -> Result<VerificationReport> {
    require_rule(inst, rule)?;
    require_exact_degree(inst, rule)?;
    let (lhs, err) = lhs_distance(inst, rule, fallback_tol)?;
    let chain = chain_bound(inst, rule)?;
    let explicit = explicit_bound(inst.n, inst.k, inst.d, inst.r)?;
    let approx = approximant(inst, rule, fallback_tol)?;

    let supports: Vec<(bool, usize)> = rule
        .nodes()
        .iter()
        .map(|psi| {
            let s = sample_node(inst, psi, fallback_tol)?;
            let masses = WeightFrame::new(psi, inst.n)?.weight_masses(&s.tau)?;
            Ok((s.used_fallback, distance_from_masses(&masses, SUPPORT_TOL)))
        })
        .collect::<Result<_>>()?;
    let max_of = |fallback: bool| supports.iter().filter(|s| s.0 == fallback).map(|s| s.1).max();

    Ok(VerificationReport {
        label: inst.label.clone(),
        d: inst.d,
        n: inst.n,
        k: inst.k,
        r: inst.r,
        lhs,
        lhs_integration_error: err,
        chain_bound: chain,
        explicit_bound: explicit,
        g_max_value: g_max(inst.n, inst.k, inst.r)?,
        nu_normalization: nu_weight_normalization(inst, rule)?,
        fallback_node_count: approx.fallback_nodes,
        node_count: rule.len(),
        rule: rule.kind().to_string(),
        max_distance_regular: max_of(false),
        max_distance_fallback: max_of(true),
        status: VerificationReport::classify(lhs, err, chain, explicit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::monte_carlo_rule;
    use crate::symmetric::{ghz_state, product_state, random_symmetric_pure, symmetrizer};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> Instance {
        Instance::new(ghz_state(2, 2).unwrap(), 1, 1, 1, "bell").unwrap()
    }

    fn qubit(a: Complex64, b: Complex64) -> PureState {
        PureState::normalized(2, 1, vec![a, b]).unwrap()
    }

    #[test]
    fn instance_validation() {
        let ghz = ghz_state(3, 2).unwrap();
        assert!(Instance::new(ghz.clone(), 2, 1, 2, "ok").is_ok());
        assert!(matches!(Instance::new(ghz.clone(), 2, 0, 0, "k"), Err(Error::InvalidInstance(_))));
        assert!(matches!(Instance::new(ghz.clone(), 2, 1, 3, "r"), Err(Error::InvalidInstance(_))));
        assert!(matches!(Instance::new(ghz.clone(), 1, 1, 0, "sites"), Err(Error::InvalidInstance(_))));
        // |01⟩ is not symmetric
        let asym = PureState::basis(2, 2, 1).unwrap();
        assert!(matches!(Instance::new(asym, 1, 1, 0, "asym"), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn instance_from_operator() {
        let v = random_symmetric_pure(3, 2, 4).unwrap();
        let inst = Instance::from_operator(&v.density(), 2, 1, 1, "op").unwrap();
        assert_abs_diff_eq!(inst.state().inner(&v).unwrap().norm(), 1.0, epsilon = 1e-12);

        let mixed = symmetrizer(2, 2).unwrap().scale(1.0 / 3.0);
        assert!(matches!(Instance::from_operator(&mixed, 1, 1, 0, "mixed"), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn rho_psi_examples() {
        let prod = Instance::new(product_state(4, 2).unwrap(), 2, 2, 1, "prod").unwrap();
        let zero = PureState::basis(2, 1, 0).unwrap();
        let one = PureState::basis(2, 1, 1).unwrap();
        let out = rho_psi(&prod, &zero).unwrap();
        assert!(out.max_abs_diff(&zero.power(2).unwrap().density()).unwrap() < 1e-15);
        let out = rho_psi(&prod, &one).unwrap();
        assert!(out.max_abs_diff(&Operator::zeros(2, 2).unwrap()).unwrap() < 1e-15);

        // GHZ on n + k sites: ρ_ψ = |v⟩⟨v| with v = (ᾱ^k |0…0⟩ + β̄^k |1…1⟩)/√2
        let (n, k) = (2, 3);
        let inst = Instance::new(ghz_state(n + k, 2).unwrap(), n, k, 1, "ghz").unwrap();
        let (alpha, beta) = (c(0.6, 0.2), c(-0.3, 0.7));
        let psi = qubit(alpha, beta);
        let (alpha, beta) = (psi.as_slice()[0], psi.as_slice()[1]);
        let out = rho_psi(&inst, &psi).unwrap();
        let expected_trace = (alpha.norm_sqr().powi(k as i32) + beta.norm_sqr().powi(k as i32)) / 2.0;
        assert_abs_diff_eq!(out.trace().re, expected_trace, epsilon = 1e-15);
        let eig = linalg::hermitian_eigenvalues(&out).unwrap();
        assert!(eig[..3].iter().all(|l| l.abs() < 1e-14));

        // operator route agrees with the vector route
        let dense = linalg::sandwich_bra_last(&inst.rho(), &psi, k).unwrap();
        assert!(dense.max_abs_diff(&out).unwrap() < 1e-14);
    }

    #[test]
    fn nu_normalization_examples() {
        for seed in 0..3 {
            let inst = Instance::new(random_symmetric_pure(5, 2, seed).unwrap(), 2, 3, 1, "rs").unwrap();
            assert_abs_diff_eq!(nu_weight_normalization(&inst, &exact_qubit_rule(3)).unwrap(), 1.0, epsilon = 1e-10);
        }
        let prod = Instance::new(product_state(6, 2).unwrap(), 2, 4, 0, "prod").unwrap();
        assert_abs_diff_eq!(nu_weight_normalization(&prod, &exact_qubit_rule(4)).unwrap(), 1.0, epsilon = 1e-10);

        let inst = Instance::new(random_symmetric_pure(4, 3, 2).unwrap(), 2, 2, 1, "q").unwrap();
        let rule = monte_carlo_rule(3, 100_000, 5).unwrap();
        let c_k = sym_dim(2, 3).unwrap() as f64;
        let value = nu_weight_normalization(&inst, &rule).unwrap();
        let se = haar::standard_errors(&rule, |psi| {
            Ok(c_k * contract_bra_last(inst.state(), psi, 2)?.norm_squared())
        })
        .unwrap()[0];
        assert!((value - 1.0).abs() <= 3.0 * se, "value {value}, se {se}");
    }

    #[test]
    fn tau_examples() {
        let zero = PureState::basis(2, 1, 0).unwrap();
        let prod = Instance::new(product_state(4, 2).unwrap(), 2, 2, 1, "prod").unwrap();
        let t = tau_psi(&prod, &zero, DEFAULT_FALLBACK_TOL).unwrap();
        assert!(!t.used_fallback);
        assert_abs_diff_eq!(t.sigma_trace, 1.0, epsilon = 1e-15);
        assert!(t.tau.max_abs_diff(&zero.power(2).unwrap().density()).unwrap() < 1e-15);

        let psi = qubit(c(0.3, 0.1), c(0.2, -0.9));
        let t = tau_psi(&prod.with_r(0).unwrap(), &psi, DEFAULT_FALLBACK_TOL).unwrap();
        assert!(t.used_fallback);
        assert!(t.tau.max_abs_diff(&psi.power(2).unwrap().density()).unwrap() < 1e-15);

        // Bell, n = k = r = 1: ρ_ψ = |v⟩⟨v| with v = (ᾱ, β̄)/√2 and P^{<1} = |ψ⟩⟨ψ|,
        // so σ_ψ = |⟨ψ|v⟩|² |ψ⟩⟨ψ| with ⟨ψ|v⟩ = (ᾱ² + β̄²)/√2.
        let (a, b) = (psi.as_slice()[0], psi.as_slice()[1]);
        let overlap = (a.conj() * a.conj() + b.conj() * b.conj()) / 2.0_f64.sqrt();
        let t = tau_psi(&bell(), &psi, DEFAULT_FALLBACK_TOL).unwrap();
        assert!(!t.used_fallback);
        assert_abs_diff_eq!(t.sigma_trace, overlap.norm_sqr(), epsilon = 1e-15);
        assert!(t.tau.max_abs_diff(&psi.density()).unwrap() < 1e-14);

        // α² + β² = 0 kills σ_ψ entirely
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let null = qubit(c(h, 0.0), c(0.0, h));
        let t = tau_psi(&bell(), &null, DEFAULT_FALLBACK_TOL).unwrap();
        assert!(t.used_fallback);
        assert!(t.tau.max_abs_diff(&null.density()).unwrap() < 1e-15);
    }

    #[test]
    fn approximant_examples() {
        let rule = exact_qubit_rule(4);
        let half = Operator::identity(2, 1).unwrap().scale(0.5);
        let a = approximant(&bell(), &rule, DEFAULT_FALLBACK_TOL).unwrap();
        assert!(a.operator.max_abs_diff(&half).unwrap() < 1e-12);
        let (lhs, _) = lhs_distance(&bell(), &rule, DEFAULT_FALLBACK_TOL).unwrap();
        assert!(lhs < 1e-10);

        let a0 = approximant(&bell().with_r(0).unwrap(), &rule, DEFAULT_FALLBACK_TOL).unwrap();
        assert_eq!(a0.fallback_nodes, rule.len());
        assert!(a0.operator.max_abs_diff(&half).unwrap() < 1e-12);

        let prod = Instance::new(product_state(4, 2).unwrap(), 2, 2, 1, "prod").unwrap();
        let a = approximant(&prod, &exact_qubit_rule(6), DEFAULT_FALLBACK_TOL).unwrap();
        assert_abs_diff_eq!(a.operator.trace().re, 1.0, epsilon = 1e-10);
        assert!(linalg::min_eigenvalue(&a.operator).unwrap() >= -1e-12);
    }

    #[test]
    fn approximant_trace_matches_nu_mass() {
        let inst = Instance::new(random_symmetric_pure(6, 2, 3).unwrap(), 3, 3, 2, "rs").unwrap();
        let rule = exact_qubit_rule(6);
        let a = approximant(&inst, &rule, DEFAULT_FALLBACK_TOL).unwrap();
        assert_eq!(a.fallback_nodes, 0);
        assert_abs_diff_eq!(a.operator.trace().re, nu_weight_normalization(&inst, &rule).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn reduced_state_reconstruction() {
        for (seed, (n, k)) in [(1u64, (2usize, 2usize)), (2, (3, 1)), (3, (1, 4))] {
            let inst = Instance::new(random_symmetric_pure(n + k, 2, seed).unwrap(), n, k, 0, "rs").unwrap();
            let rec = reconstruct_reduced(&inst, &exact_qubit_rule(n + k)).unwrap();
            let diff = inst.reduced().unwrap().try_sub(&rec).unwrap();
            assert!(linalg::trace_norm(&diff).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn chain_bound_examples() {
        let rule = exact_qubit_rule(2);
        assert_abs_diff_eq!(chain_bound(&bell(), &rule).unwrap(), 6.0_f64.sqrt(), epsilon = 1e-12);

        for (n, k) in [(2usize, 2usize), (3, 1)] {
            let inst = Instance::new(random_symmetric_pure(n + k, 2, 9).unwrap(), n, k, 0, "rs").unwrap();
            let c_k = sym_dim(k, 2).unwrap() as f64;
            assert_abs_diff_eq!(chain_bound(&inst, &exact_qubit_rule(n + k)).unwrap(), 3.0 * c_k.sqrt(), epsilon = 1e-10);
        }

        // product state: ∫ Tr(P^{≥r} ρ_ψ) dψ = ∫_0^1 x^k tail(n, r, x) dx, done by
        // composite Simpson on the scalar integrand
        let (n, k) = (3, 2);
        let psi0 = qubit(c(0.8, 0.0), c(0.0, 0.6));
        let state = psi0.power(n + k).unwrap();
        for r in 0..=n {
            let inst = Instance::new(state.clone(), n, k, r, "prod").unwrap();
            let steps = 2000;
            let h = 1.0 / steps as f64;
            let f = |x: f64| x.powi(k as i32) * hamming::tail_function(n, r, x).unwrap();
            let mut simpson = f(0.0) + f(1.0);
            for i in 1..steps {
                simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            simpson *= h / 3.0;
            let got = chain_integral(&inst, &exact_qubit_rule(n + k)).unwrap();
            assert_abs_diff_eq!(got, simpson, epsilon = 1e-12);
        }

        assert!(chain_bound(&bell(), &exact_qubit_rule(1)).is_err());
    }

    #[test]
    fn chain_integral_below_g_max_bound() {
        for (n, k) in [(1usize, 1usize), (2, 3), (3, 2), (4, 4)] {
            let c_nk = sym_dim(n + k, 2).unwrap() as f64;
            let rule = exact_qubit_rule(n + k);
            for seed in 0..3 {
                let inst = Instance::new(random_symmetric_pure(n + k, 2, seed).unwrap(), n, k, 0, "rs").unwrap();
                for r in 0..=n {
                    let inst = inst.with_r(r).unwrap();
                    let integral = chain_integral(&inst, &rule).unwrap();
                    assert!(integral <= c_nk * g_max(n, k, r).unwrap() + 1e-9, "n={n} k={k} r={r} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn explicit_bound_examples() {
        assert_abs_diff_eq!(explicit_bound(4, 4, 2, 0).unwrap(), 45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(explicit_bound(4, 4, 2, 3).unwrap(), 45.0 * (-0.5_f64).exp(), epsilon = 1e-12);
        for (n, k) in [(4usize, 4usize), (10, 3), (2, 7)] {
            for r in 0..n {
                let ratio = explicit_bound(n, k, 2, r + 1).unwrap() / explicit_bound(n, k, 2, r).unwrap();
                assert_abs_diff_eq!(ratio, (-exponent_rate(n, k) / 6.0).exp(), epsilon = 1e-14);
            }
        }
        assert!(explicit_bound(0, 1, 2, 0).is_err());
    }

    #[test]
    fn g_max_examples() {
        assert_abs_diff_eq!(g_max(1, 1, 1).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(g_max(3, 2, 0).unwrap(), 1.0, epsilon = 1e-15);
        let v = g_max(10, 5, 6).unwrap();
        assert!(v <= (-1.0_f64).exp());
        // independent brute-force grid with a different resolution
        let brute = (0..=200_000)
            .map(|i| {
                let x = i as f64 / 200_000.0;
                x.powi(5) * hamming::tail_function(10, 6, x).unwrap()
            })
            .fold(0.0, f64::max);
        assert!(v >= brute - 1e-12 && v <= brute + 1e-9);
    }

    #[test]
    fn g_max_below_exponential() {
        for n in 1..=12usize {
            for k in 1..=12usize {
                for r in 0..=n {
                    let bound = (-(r as f64) / 3.0 * exponent_rate(n, k)).exp();
                    assert!(g_max(n, k, r).unwrap() <= bound + 1e-12, "n={n} k={k} r={r}");
                }
            }
        }
    }

    #[test]
    fn operator_inequality_examples() {
        let zero = PureState::basis(2, 1, 0).unwrap();
        // RHS = 3·⟨0|₂ Π^sym_2 |0⟩₂ / 3 = (I + |0⟩⟨0|)/2, LHS = |0⟩⟨0|/2
        let m = check_operator_inequality(&bell(), &zero, &exact_qubit_rule(2)).unwrap();
        assert_abs_diff_eq!(m, 0.5, epsilon = 1e-12);

        let psi = qubit(c(0.4, -0.3), c(0.1, 0.8));
        let inst = Instance::new(psi.power(5).unwrap(), 3, 2, 1, "aligned").unwrap();
        assert_abs_diff_eq!(rho_psi(&inst, &psi).unwrap().trace().re, 1.0, epsilon = 1e-14);
        assert!(check_operator_inequality(&inst, &psi, &exact_qubit_rule(5)).unwrap() >= -1e-9);

        let prod = Instance::new(product_state(4, 2).unwrap(), 2, 2, 1, "prod").unwrap();
        let one = PureState::basis(2, 1, 1).unwrap();
        assert!(check_operator_inequality(&prod, &one, &exact_qubit_rule(4)).unwrap() >= 0.0 - 1e-12);

        assert!(check_operator_inequality(&prod, &one, &exact_qubit_rule(3)).is_err());
        assert!(check_operator_inequality(&prod, &one, &monte_carlo_rule(2, 10, 1).unwrap()).is_err());
    }

    #[test]
    fn gentle_examples() {
        let rho = PureState::basis(2, 1, 0).unwrap().density();
        let g = check_gentle(&rho, &Operator::identity(2, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(g.lhs, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.rhs, 0.0, epsilon = 1e-15);

        let x = PureState::basis(2, 1, 1).unwrap().density();
        let g = check_gentle(&rho, &x).unwrap();
        assert_abs_diff_eq!(g.lhs, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.rhs, 2.0, epsilon = 1e-15);

        let g = check_gentle(&Operator::identity(2, 1).unwrap().scale(0.5), &Operator::diagonal(2, 1, &[1.0, 0.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(g.lhs, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.rhs, 2.0_f64.sqrt(), epsilon = 1e-15);

        assert!(check_gentle(&rho, &Operator::diagonal(2, 1, &[1.5, 0.0]).unwrap()).is_err());
        assert!(check_gentle(&Operator::diagonal(2, 1, &[1.0, -0.5]).unwrap(), &x).is_err());
    }

    #[test]
    fn gentle_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..200 {
            let dim = 2 + trial % 15;
            let g = nalgebra::DMatrix::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let rho = Operator::new(dim, 1, &g * g.adjoint()).unwrap();
            let h = nalgebra::DMatrix::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let eig = (&h + h.adjoint()).symmetric_eigen();
            let vals = nalgebra::DVector::from_fn(dim, |_, _| c(rng.random::<f64>(), 0.0));
            let x = &eig.eigenvectors * nalgebra::DMatrix::from_diagonal(&vals) * eig.eigenvectors.adjoint();
            let x = Operator::new(dim, 1, (&x + x.adjoint()) * c(0.5, 0.0)).unwrap();
            let check = check_gentle(&rho, &x).unwrap();
            assert!(check.slack() >= -1e-10, "trial {trial}: {check:?}");
        }
    }

    #[test]
    fn gentle_suite_holds() {
        assert!(gentle_suite(200, 16, 0).unwrap() >= -1e-10);
        assert_eq!(gentle_suite(20, 4, 3).unwrap(), gentle_suite(20, 4, 3).unwrap());
        assert!(gentle_suite(1, 0, 0).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        for x in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(relative_entropy(x, x), 0.0, epsilon = 1e-15);
        }
        let direct = 0.5 * (0.5_f64 / 0.25).ln() + 0.5 * (0.5_f64 / 0.75).ln();
        assert_abs_diff_eq!(relative_entropy(0.5, 0.25), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(relative_entropy(0.5, 0.25), 0.143841036, epsilon = 1e-9);
    }

    #[test]
    fn chernoff_examples() {
        let check = check_chernoff_claim(20, 6).unwrap();
        assert!(check.tail_slack >= 0.0);
        assert!(check.entropy_slack >= 0.0);
        assert!(check_chernoff_claim(5, 0).is_err());
        assert!(check_chernoff_claim(5, 6).is_err());
    }

    #[test]
    fn exponent_sandwich_examples() {
        assert!(check_exponent_sandwich([(7, 7)]));
        // n = 10, k = 1: 1/10 ≤ 2/11 ≤ 2/10; n = 1, k = 10: 1 ≤ 20/11 ≤ 2
        assert!(check_exponent_sandwich([(10, 1), (1, 10)]));
        assert!(check_exponent_sandwich((1..=50).flat_map(|n| (1..=50).map(move |k| (n, k)))));
        assert_eq!(exponent_sandwich_failure([(3, 4), (0, 2)]), Some((0, 2)));
    }

    #[test]
    fn classify_precedence() {
        assert_eq!(VerificationReport::classify(0.1, 0.0, 1.0, 2.0), Status::Pass);
        assert_eq!(VerificationReport::classify(1.5, 0.01, 1.0, 2.0), Status::Violation);
        assert_eq!(VerificationReport::classify(0.1, 0.01, 3.0, 2.0), Status::Violation);
        assert_eq!(VerificationReport::classify(0.1, 0.2, 1.0, 2.0), Status::Inconclusive);
    }

    #[test]
    fn verify_bell() {
        let report = verify(&bell(), &exact_qubit_rule(6), DEFAULT_FALLBACK_TOL).unwrap();
        assert!(report.lhs <= 1e-8);
        assert_abs_diff_eq!(report.chain_bound, 6.0_f64.sqrt(), epsilon = 1e-9);
        let explicit = 6.0 * 3.0_f64.sqrt() * (-1.0_f64 / 6.0).exp();
        assert_abs_diff_eq!(report.explicit_bound, explicit, epsilon = 1e-9);
        assert_eq!(report.status, Status::Pass);
        assert_eq!(report.node_count, 7 * 14);
        assert_eq!(report.rule, "exact:6");
        assert_eq!(report.max_distance_regular, Some(0));
    }

    #[test]
    fn verify_rejects_mismatched_rule() {
        let inst = Instance::new(random_symmetric_pure(4, 3, 1).unwrap(), 2, 2, 1, "q").unwrap();
        assert!(verify(&inst, &exact_qubit_rule(4), DEFAULT_FALLBACK_TOL).is_err());
        assert!(verify(&bell(), &exact_qubit_rule(1), DEFAULT_FALLBACK_TOL).is_err());
    }

    #[test]
    fn verify_qutrit_monte_carlo() {
        let inst = Instance::new(random_symmetric_pure(4, 3, 7).unwrap(), 2, 2, 1, "q").unwrap();
        let rule = monte_carlo_rule(3, 20_000, 7).unwrap();
        let report = verify(&inst, &rule, DEFAULT_FALLBACK_TOL).unwrap();
        assert!(report.lhs.is_finite() && report.lhs_integration_error > 0.0);
        assert!((0.0..=2.0 + 1e-9).contains(&report.lhs));
        assert_ne!(report.status, Status::Violation);

        let tiny = monte_carlo_rule(3, 2, 7).unwrap();
        assert_eq!(verify(&inst, &tiny, DEFAULT_FALLBACK_TOL).unwrap().status, Status::Inconclusive);
    }
}
