use std::fmt;
use std::str::FromStr;

use definetti::haar::{exact_qubit_rule, monte_carlo_rule, QuadratureRule};
use definetti::linalg::PureState;
use definetti::symmetric::{dicke_state, ghz_state, product_state, random_symmetric_pure, OccupationVector};

use crate::error::CliError;

/// Largest `d^{n+k}` accepted without `--allow-large`.
pub const DESK_SCALE_LIMIT: u128 = 1 << 20;
/// Degree of the default exact rule when none is given.
pub const DEFAULT_EXACT_DEGREE: usize = 16;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateSpec {
    Product,
    Ghz,
    Dicke(Vec<usize>),
    RandomSym(u64),
}

impl StateSpec {
    pub fn build(&self, sites: usize, d: usize) -> Result<PureState, CliError> {
        Ok(match self {
            StateSpec::Product => product_state(sites, d)?,
            StateSpec::Ghz => ghz_state(sites, d)?,
            StateSpec::Dicke(counts) => {
                if counts.len() != d || counts.iter().sum::<usize>() != sites {
                    return Err(CliError::Usage(format!(
                        "dicke occupation {counts:?} must have {d} entries summing to n + k = {sites}"
                    )));
                }
                dicke_state(sites, d, &OccupationVector::new(counts.clone()))?
            }
            StateSpec::RandomSym(seed) => random_symmetric_pure(sites, d, *seed)?,
        })
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Product => f.write_str("product"),
            StateSpec::Ghz => f.write_str("ghz"),
            StateSpec::Dicke(counts) => {
                let list: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
                write!(f, "dicke:{}", list.join(","))
            }
            StateSpec::RandomSym(seed) => write!(f, "random-sym:{seed}"),
        }
    }
}

/// Splits `name:args` or `name(args)`.
fn split_call(s: &str) -> (&str, Option<&str>) {
    if let Some((name, rest)) = s.split_once('(') {
        return (name, Some(rest.strip_suffix(')').unwrap_or(rest)));
    }
    match s.split_once(':') {
        Some((name, rest)) => (name, Some(rest)),
        None => (s, None),
    }
}

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match split_call(s) {
            ("product", None) => Ok(StateSpec::Product),
            ("ghz", None) => Ok(StateSpec::Ghz),
            ("dicke", Some(args)) => args
                .split(',')
                .map(|c| c.trim().parse::<usize>().map_err(|e| format!("bad occupation {c:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(StateSpec::Dicke),
            ("random-sym", Some(seed)) => {
                seed.trim().parse().map(StateSpec::RandomSym).map_err(|e| format!("bad seed {seed:?}: {e}"))
            }
            _ => Err(format!("unknown state {s:?}; expected product, ghz, dicke:a,b,... or random-sym:SEED")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleSpec {
    Exact(usize),
    MonteCarlo { samples: usize, seed: u64 },
}

impl RuleSpec {
    pub fn default_for(d: usize, n: usize, k: usize) -> Self {
        if d == 2 {
            RuleSpec::Exact(DEFAULT_EXACT_DEGREE.max(n + k))
        } else {
            RuleSpec::MonteCarlo { samples: DEFAULT_MC_SAMPLES, seed: 0 }
        }
    }

    pub fn build(&self, d: usize) -> Result<QuadratureRule, CliError> {
        Ok(match *self {
            RuleSpec::Exact(degree) => exact_qubit_rule(degree),
            RuleSpec::MonteCarlo { samples, seed } => monte_carlo_rule(d, samples, seed)?,
        })
    }

    /// Seed reported in output rows: the Monte Carlo seed, 0 for exact rules.
    pub fn seed(&self) -> u64 {
        match *self {
            RuleSpec::Exact(_) => 0,
            RuleSpec::MonteCarlo { seed, .. } => seed,
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::Exact(t) => write!(f, "exact:{t}"),
            RuleSpec::MonteCarlo { samples, seed } => write!(f, "mc:{samples}:{seed}"),
        }
    }
}

impl FromStr for RuleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<u64>().map_err(|e| format!("bad number {p:?} in rule {s:?}: {e}"));
        match parts.as_slice() {
            ["exact", t] => Ok(RuleSpec::Exact(num(t)? as usize)),
            ["mc", n] => Ok(RuleSpec::MonteCarlo { samples: num(n)? as usize, seed: 0 }),
            ["mc", n, seed] => Ok(RuleSpec::MonteCarlo { samples: num(n)? as usize, seed: num(seed)? }),
            _ => Err(format!("unknown rule {s:?}; expected exact:T, mc:N or mc:N:SEED")),
        }
    }
}

/// One fully validated run: a fixed state family over a grid of `k` and `r`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub d: usize,
    pub n: usize,
    pub k_list: Vec<usize>,
    pub r_list: Vec<usize>,
    pub state: StateSpec,
    pub rule: Option<RuleSpec>,
    pub fallback_tol: f64,
    pub allow_large: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.d < 2 {
            return usage(format!("--d must be at least 2, got {}", self.d));
        }
        if self.n < 1 {
            return usage("--n must be at least 1".into());
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return usage("--k needs values of at least 1".into());
        }
        if let Some(&r) = self.r_list.iter().find(|&&r| r > self.n) {
            return usage(format!("r = {r} outside [0, {}]", self.n));
        }
        if !(self.fallback_tol >= 0.0 && self.fallback_tol.is_finite()) {
            return usage(format!("--fallback-tol must be a finite nonnegative number, got {}", self.fallback_tol));
        }
        for &k in &self.k_list {
            let sites = self.n + k;
            let size = (self.d as u128).checked_pow(sites as u32).unwrap_or(u128::MAX);
            if size > DESK_SCALE_LIMIT && !self.allow_large {
                return usage(format!(
                    "d^(n+k) = {}^{sites} exceeds the desk-scale limit 2^20; pass --allow-large to override",
                    self.d
                ));
            }
            match self.rule_for(k) {
                RuleSpec::Exact(_) if self.d != 2 => {
                    return usage("exact rules exist only for d = 2; use mc:N[:SEED]".into());
                }
                RuleSpec::Exact(t) if t < sites => {
                    return usage(format!("exact rule degree {t} is below n + k = {sites}"));
                }
                RuleSpec::MonteCarlo { samples: 0, .. } => {
                    return usage("mc rule needs at least one sample".into());
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn rule_for(&self, k: usize) -> RuleSpec {
        self.rule.unwrap_or_else(|| RuleSpec::default_for(self.d, self.n, k))
    }

    /// Every `(k, r)` cell, sorted.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut ks = self.k_list.clone();
        ks.sort_unstable();
        ks.dedup();
        let mut rs = self.r_list.clone();
        if rs.is_empty() {
            rs = (0..=self.n).collect();
        }
        rs.sort_unstable();
        rs.dedup();
        ks.iter().flat_map(|&k| rs.iter().map(move |&r| (k, r))).collect()
    }
}
