//! Symmetric subspace of `(C^d)^{⊗n}`: dimension counts, the Dicke basis,
//! the symmetrizer and generators of symmetric test states.
//!
//! The Dicke isometry is stored compactly. Every computational basis string
//! belongs to exactly one Dicke column (the one labelled by its occupation
//! vector), so `V` is fully described by a column index per basis string and
//! one amplitude per column. This keeps `V·c`, `V†·v` and `V·V†·v` linear in
//! `d^n` and lets the symmetrizer be assembled without summing over `n!`
//! permutations.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hilbert_dim, Operator, PureState, ZERO};

/// Largest vector length the symmetric machinery will materialize.
pub const MAX_VECTOR_LEN: usize = 1 << 24;
/// Largest side of a dense operator built by this module.
pub const MAX_DENSE_SIDE: usize = 1 << 12;

/// `C(n + d − 1, n)`, exactly.
pub fn sym_dim(n: usize, d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::Domain("site dimension must be at least 1".into()));
    }
    let mut acc: u128 = 1;
    for i in 1..d as u128 {
        // acc == C(n + i − 1, i − 1) on entry, so the division is exact
        acc = acc
            .checked_mul(n as u128 + i)
            .ok_or_else(|| Error::Overflow(format!("sym_dim({n}, {d})")))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow(format!("sym_dim({n}, {d})")))
}

/// Occupation numbers `(m_1, …, m_d)`: how many sites hold each basis level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccupationVector(Vec<usize>);

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Occupation of the basis string at `index` in `(C^d)^{⊗n}`.
    pub fn of_index(d: usize, n: usize, mut index: usize) -> Self {
        let mut counts = vec![0; d];
        for _ in 0..n {
            counts[index % d] += 1;
            index /= d;
        }
        Self(counts)
    }

    fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.0.len() != d || self.total() != n {
            return Err(Error::InvalidOccupation { counts: self.0.clone(), n, d });
        }
        Ok(())
    }

    /// Number of basis strings with this occupation, `n! / Π m_i!`, in floating point.
    fn multinomial(&self) -> f64 {
        let mut remaining = self.total();
        let mut acc = 1.0;
        for &m in &self.0 {
            acc *= binomial_f64(remaining, m);
            remaining -= m;
        }
        acc
    }
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All occupation vectors of `n` over `d` levels, in descending
/// lexicographic order, so the first entry is `(n, 0, …, 0)` (the state
/// `|0…0⟩`).
pub fn occupations(n: usize, d: usize) -> Vec<OccupationVector> {
    fn fill(remaining: usize, slot: usize, cur: &mut Vec<usize>, out: &mut Vec<OccupationVector>) {
        if slot + 1 == cur.len() {
            cur[slot] = remaining;
            out.push(OccupationVector(cur.clone()));
            return;
        }
        for m in (0..=remaining).rev() {
            cur[slot] = m;
            fill(remaining - m, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    fill(n, 0, &mut vec![0; d], &mut out);
    out
}

/// Isometry `V: C^{c_{n,d}} → (C^d)^{⊗n}` whose columns are the Dicke states.
#[derive(Debug, Clone)]
pub struct DickeIsometry {
    n: usize,
    d: usize,
    occupations: Vec<OccupationVector>,
    column_of: Vec<u32>,
    amplitude: Vec<f64>,
}

impl DickeIsometry {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of columns, `c_{n,d}`.
    pub fn columns(&self) -> usize {
        self.occupations.len()
    }

    /// Ambient dimension `d^n`.
    pub fn ambient_dim(&self) -> usize {
        self.column_of.len()
    }

    pub fn occupations(&self) -> &[OccupationVector] {
        &self.occupations
    }

    pub fn column_index(&self, occ: &OccupationVector) -> Option<usize> {
        self.occupations.iter().position(|o| o == occ)
    }

    /// Column `j` as a normalized state.
    pub fn column_state(&self, j: usize) -> Result<PureState> {
        if j >= self.columns() {
            return Err(Error::Domain(format!("column {j} >= {}", self.columns())));
        }
        let mut coeffs = vec![ZERO; self.columns()];
        coeffs[j] = Complex64::new(1.0, 0.0);
        PureState::new(self.d, self.n, self.apply(&coeffs)?.data.into())
    }

    /// `V · c`.
    pub fn apply(&self, coeffs: &[Complex64]) -> Result<DVector<Complex64>> {
        if coeffs.len() != self.columns() {
            return Err(Error::DimensionMismatch(format!(
                "{} Dicke coefficients, expected {}",
                coeffs.len(),
                self.columns()
            )));
        }
        Ok(DVector::from_iterator(
            self.ambient_dim(),
            self.column_of.iter().map(|&j| coeffs[j as usize] * self.amplitude[j as usize]),
        ))
    }

    /// `V† · v`.
    pub fn adjoint_apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {}, expected {}",
                v.len(),
                self.ambient_dim()
            )));
        }
        let mut out = vec![ZERO; self.columns()];
        for (x, &j) in v.iter().zip(&self.column_of) {
            out[j as usize] += x;
        }
        for (o, a) in out.iter_mut().zip(&self.amplitude) {
            *o *= *a;
        }
        Ok(out)
    }

    /// `V · V† · v`, the symmetrizer applied to `v`.
    pub fn project(&self, v: &[Complex64]) -> Result<DVector<Complex64>> {
        self.apply(&self.adjoint_apply(v)?)
    }

    /// Dense `d^n × c_{n,d}` matrix.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.ambient_dim() > MAX_DENSE_SIDE {
            return Err(Error::TooLarge { size: self.ambient_dim() as u128, limit: MAX_DENSE_SIDE as u128 });
        }
        let mut m = DMatrix::zeros(self.ambient_dim(), self.columns());
        for (i, &j) in self.column_of.iter().enumerate() {
            m[(i, j as usize)] = Complex64::new(self.amplitude[j as usize], 0.0);
        }
        Ok(m)
    }

    /// Dense `V · V†`.
    pub fn projector(&self) -> Result<Operator> {
        let dim = self.ambient_dim();
        if dim > MAX_DENSE_SIDE {
            return Err(Error::TooLarge { size: dim as u128, limit: MAX_DENSE_SIDE as u128 });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            let ja = self.column_of[a];
            let w = self.amplitude[ja as usize];
            for b in 0..dim {
                if self.column_of[b] == ja {
                    m[(a, b)] = Complex64::new(w * w, 0.0);
                }
            }
        }
        Operator::new(self.d, self.n, m)
    }
}

/// Builds the Dicke isometry with columns in descending lexicographic
/// occupation order.
pub fn dicke_isometry(n: usize, d: usize) -> Result<DickeIsometry> {
    if d < 1 {
        return Err(Error::Domain("site dimension must be at least 1".into()));
    }
    let dim = hilbert_dim(d, n)?;
    if dim > MAX_VECTOR_LEN {
        return Err(Error::TooLarge { size: dim as u128, limit: MAX_VECTOR_LEN as u128 });
    }
    let occupations = occupations(n, d);
    debug_assert_eq!(occupations.len() as u64, sym_dim(n, d)?);
    let rank: HashMap<&OccupationVector, u32> =
        occupations.iter().enumerate().map(|(j, o)| (o, j as u32)).collect();
    let column_of = (0..dim).map(|i| rank[&OccupationVector::of_index(d, n, i)]).collect();
    let amplitude = occupations.iter().map(|o| o.multinomial().sqrt().recip()).collect();
    Ok(DickeIsometry { n, d, occupations, column_of, amplitude })
}

/// Orthogonal projector onto the symmetric subspace of `(C^d)^{⊗n}`.
pub fn symmetrizer(n: usize, d: usize) -> Result<Operator> {
    let dim = hilbert_dim(d, n)?;
    if dim > MAX_DENSE_SIDE {
        return Err(Error::TooLarge { size: dim as u128, limit: MAX_DENSE_SIDE as u128 });
    }
    dicke_isometry(n, d)?.projector()
}

/// Normalized equal-amplitude superposition of all strings with occupation `occ`.
pub fn dicke_state(n: usize, d: usize, occ: &OccupationVector) -> Result<PureState> {
    occ.validate(n, d)?;
    if d < 2 || n < 1 {
        return Err(Error::Domain(format!("Dicke state needs d >= 2 and n >= 1, got d = {d}, n = {n}")));
    }
    let dim = hilbert_dim(d, n)?;
    let amp = Complex64::new(occ.multinomial().sqrt().recip(), 0.0);
    let amps = (0..dim)
        .map(|i| if OccupationVector::of_index(d, n, i) == *occ { amp } else { ZERO })
        .collect();
    PureState::normalized(d, n, amps)
}

/// Uniformly random unit vector of the symmetric subspace of `(C^d)^{⊗m}`:
/// i.i.d. complex Gaussian coefficients in the Dicke basis, normalized.
pub fn random_symmetric_pure(m: usize, d: usize, seed: u64) -> Result<PureState> {
    let iso = dicke_isometry(m, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Complex64> = (0..iso.columns())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let coeffs: Vec<Complex64> = coeffs.into_iter().map(|c| c / norm).collect();
    PureState::normalized(d, m, iso.apply(&coeffs)?.data.into())
}

/// `(|0…0⟩ + |1…1⟩ + … + |(d−1)…(d−1)⟩)/√d`.
pub fn ghz_state(m: usize, d: usize) -> Result<PureState> {
    let dim = hilbert_dim(d, m)?;
    if dim > MAX_VECTOR_LEN {
        return Err(Error::TooLarge { size: dim as u128, limit: MAX_VECTOR_LEN as u128 });
    }
    let mut amps = vec![ZERO; dim];
    let stride = (dim - 1) / (d - 1).max(1);
    let amp = Complex64::new((d as f64).sqrt().recip(), 0.0);
    for level in 0..d {
        amps[level * stride] = amp;
    }
    PureState::normalized(d, m, amps)
}

/// `|0⟩^{⊗m}`.
pub fn product_state(m: usize, d: usize) -> Result<PureState> {
    PureState::basis(d, m, 0)
}

/// Operator permuting the sites of `(C^d)^{⊗n}`: the tensor factor at
/// position `i` moves to position `perm[i]`.
pub fn permutation_operator(d: usize, perm: &[usize]) -> Result<Operator> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Domain(format!("{perm:?} is not a permutation")));
        }
    }
    let dim = hilbert_dim(d, n)?;
    if dim > MAX_DENSE_SIDE {
        return Err(Error::TooLarge { size: dim as u128, limit: MAX_DENSE_SIDE as u128 });
    }
    let mut m = DMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    let mut moved = vec![0usize; n];
    for i in 0..dim {
        let mut x = i;
        for s in (0..n).rev() {
            digits[s] = x % d;
            x /= d;
        }
        for s in 0..n {
            moved[perm[s]] = digits[s];
        }
        let j = moved.iter().fold(0, |acc, &v| acc * d + v);
        m[(j, i)] = Complex64::new(1.0, 0.0);
    }
    Operator::new(d, n, m)
}
