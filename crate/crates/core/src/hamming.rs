//! Quantum Hamming weight around a product reference `|ψ⟩^{⊗n}`.
//!
//! `P_{ψ,S}` puts `|ψ⟩⟨ψ|` on sites outside `S` and `I − |ψ⟩⟨ψ|` on sites in
//! `S`. Only the weight aggregates `Q_i = Σ_{|S|=i} P_{ψ,S}` are ever built.
//! In a single-site orthonormal basis whose first vector is `ψ`, every `Q_i`
//! is diagonal: it keeps exactly the basis strings with `i` non-zero digits.
//! [`WeightFrame`] works in that basis and never materializes an operator;
//! [`WeightProjectorFamily`] builds the dense `Q_i` by expanding
//! `⊗_i (|ψ⟩⟨ψ| + (I − |ψ⟩⟨ψ|))` grouped by weight.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, hilbert_dim, Operator, PureState, ZERO};
use crate::symmetric::{binomial_f64, MAX_DENSE_SIDE};

/// Default absolute trace mass below which an operator is considered to
/// have no support on a subspace.
pub const SUPPORT_TOL: f64 = 1e-10;

fn require_reference(psi: &PureState) -> Result<()> {
    if psi.sites() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "reference state must be single-site, got {} sites",
            psi.sites()
        )));
    }
    Ok(())
}

/// Unitary whose first column is `ψ`, completed by Gram–Schmidt against the
/// computational basis.
fn completing_unitary(psi: &PureState) -> DMatrix<Complex64> {
    let d = psi.site_dim();
    let mut cols: Vec<DVector<Complex64>> = vec![psi.amplitudes().clone()];
    for e in 0..d {
        if cols.len() == d {
            break;
        }
        let mut v = DVector::from_element(d, ZERO);
        v[e] = Complex64::new(1.0, 0.0);
        // two passes keep the columns orthonormal to machine precision
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}

/// Applies the same `d × d` matrix to every site of a vector on `(C^d)^{⊗n}`.
fn apply_each_site(v: &mut [Complex64], mat: &DMatrix<Complex64>, d: usize, n: usize) {
    let mut buf = vec![ZERO; d];
    let mut stride = v.len() / d;
    for _ in 0..n {
        let block = stride * d;
        for start in (0..v.len()).step_by(block) {
            for off in 0..stride {
                for (a, b) in buf.iter_mut().enumerate() {
                    *b = v[start + off + a * stride];
                }
                for a in 0..d {
                    let mut acc = ZERO;
                    for (b, x) in buf.iter().enumerate() {
                        acc += mat[(a, b)] * x;
                    }
                    v[start + off + a * stride] = acc;
                }
            }
        }
        stride /= d;
    }
}

/// Number of non-zero base-`d` digits of `index`.
fn weight_of(mut index: usize, d: usize, n: usize) -> usize {
    let mut w = 0;
    for _ in 0..n {
        if !index.is_multiple_of(d) {
            w += 1;
        }
        index /= d;
    }
    w
}

/// Weight decomposition of `(C^d)^{⊗n}` relative to `ψ`, applied through
/// a local change of basis.
#[derive(Debug, Clone)]
pub struct WeightFrame {
    psi: PureState,
    n: usize,
    unitary: DMatrix<Complex64>,
    unitary_adj: DMatrix<Complex64>,
    weights: Vec<u16>,
}

impl WeightFrame {
    pub fn new(psi: &PureState, n: usize) -> Result<Self> {
        require_reference(psi)?;
        let d = psi.site_dim();
        let dim = hilbert_dim(d, n)?;
        let unitary = completing_unitary(psi);
        let unitary_adj = unitary.adjoint();
        let weights = (0..dim).map(|i| weight_of(i, d, n) as u16).collect();
        Ok(Self { psi: psi.clone(), n, unitary, unitary_adj, weights })
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.psi.site_dim()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {len}, expected {}",
                self.weights.len()
            )));
        }
        Ok(())
    }

    /// Coordinates of `v` in the ψ-adapted product basis.
    fn to_frame(&self, v: &DVector<Complex64>) -> Vec<Complex64> {
        let mut c = v.as_slice().to_vec();
        apply_each_site(&mut c, &self.unitary_adj, self.d(), self.n);
        c
    }

    /// `‖Q_i v‖²` for `i = 0..=n`.
    pub fn weight_masses(&self, v: &DVector<Complex64>) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let mut masses = vec![0.0; self.n + 1];
        for (c, &w) in self.to_frame(v).iter().zip(&self.weights) {
            masses[w as usize] += c.norm_sqr();
        }
        Ok(masses)
    }

    /// `P^{<r} v = Σ_{i<r} Q_i v`.
    pub fn project_below(&self, v: &DVector<Complex64>, r: usize) -> Result<DVector<Complex64>> {
        self.check_len(v.len())?;
        let mut c = self.to_frame(v);
        for (x, &w) in c.iter_mut().zip(&self.weights) {
            if w as usize >= r {
                *x = ZERO;
            }
        }
        apply_each_site(&mut c, &self.unitary, self.d(), self.n);
        Ok(DVector::from_vec(c))
    }

    /// `Tr(Q_i τ)` for `i = 0..=n`.
    pub fn operator_weight_masses(&self, tau: &Operator) -> Result<Vec<f64>> {
        self.check_len(tau.dim())?;
        let dim = tau.dim();
        // Columns of τ·W where W = U^{⊗n}; then diag(W†·τ·W).
        let mut rotated = tau.matrix().clone();
        for mut row in rotated.row_iter_mut() {
            let mut r: Vec<Complex64> = row.iter().copied().collect();
            apply_each_site_transposed(&mut r, &self.unitary, self.d(), self.n);
            for (dst, src) in row.iter_mut().zip(r) {
                *dst = src;
            }
        }
        let mut masses = vec![0.0; self.n + 1];
        for s in 0..dim {
            let mut col: Vec<Complex64> = rotated.column(s).iter().copied().collect();
            apply_each_site(&mut col, &self.unitary_adj, self.d(), self.n);
            masses[self.weights[s] as usize] += col[s].re;
        }
        Ok(masses)
    }
}

/// Row vector times `U^{⊗n}`: `r ↦ r·U^{⊗n}`, i.e. `U^{⊗n T}` applied to `r`.
fn apply_each_site_transposed(v: &mut [Complex64], mat: &DMatrix<Complex64>, d: usize, n: usize) {
    let t = mat.transpose();
    apply_each_site(v, &t, d, n);
}

/// The dense weight projectors `Q_0, …, Q_n` for a reference `ψ`.
#[derive(Debug, Clone)]
pub struct WeightProjectorFamily {
    psi: PureState,
    n: usize,
    q: Vec<Operator>,
}

impl WeightProjectorFamily {
    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.q
    }

    pub fn q(&self, i: usize) -> Option<&Operator> {
        self.q.get(i)
    }
}

pub fn weight_family(psi: &PureState, n: usize) -> Result<WeightProjectorFamily> {
    require_reference(psi)?;
    let d = psi.site_dim();
    let dim = hilbert_dim(d, n)?;
    if dim > MAX_DENSE_SIDE {
        return Err(Error::TooLarge { size: dim as u128, limit: MAX_DENSE_SIDE as u128 });
    }
    // Single-site pair built in the ψ-adapted basis so that P + P⊥ = I exactly
    // up to one change of basis.
    let u = completing_unitary(psi);
    let mut diag_p = DMatrix::zeros(d, d);
    diag_p[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut diag_perp = DMatrix::identity(d, d);
    diag_perp[(0, 0)] = ZERO;
    let on = Operator::new(d, 1, &u * diag_p * u.adjoint())?;
    let off = Operator::new(d, 1, &u * diag_perp * u.adjoint())?;

    let mut q = vec![Operator::identity(d, 0)?];
    for _ in 0..n {
        let mut next = Vec::with_capacity(q.len() + 1);
        for i in 0..=q.len() {
            let mut acc: Option<Operator> = None;
            if i < q.len() {
                acc = Some(linalg::tensor(&q[i], &on)?);
            }
            if i > 0 {
                let term = linalg::tensor(&q[i - 1], &off)?;
                acc = Some(match acc {
                    Some(a) => a.try_add(&term)?,
                    None => term,
                });
            }
            next.push(acc.expect("each weight receives at least one term"));
        }
        q = next;
    }
    Ok(WeightProjectorFamily { psi: psi.clone(), n, q })
}

/// `(P^{<r}, P^{≥r})` with `P^{<r} = Σ_{i<r} Q_i` and `P^{≥r} = I − P^{<r}`.
pub fn threshold_projectors(fam: &WeightProjectorFamily, r: usize) -> Result<(Operator, Operator)> {
    if r > fam.n + 1 {
        return Err(Error::Domain(format!("threshold r = {r} outside [0, {}]", fam.n + 1)));
    }
    let d = fam.psi.site_dim();
    let mut below = Operator::zeros(d, fam.n)?;
    for qi in &fam.q[..r.min(fam.n + 1)] {
        below = below.try_add(qi)?;
    }
    let above = Operator::identity(d, fam.n)?.try_sub(&below)?;
    Ok((below, above))
}

/// Smallest `r` such that `Tr(P^{≥ r+1} τ) ≤ tol`: the quantum Hamming
/// distance of `τ` from `|ψ⟩^{⊗n}`, with "supported on" read up to `tol`.
pub fn hamming_distance(tau: &Operator, psi: &PureState, tol: f64) -> Result<usize> {
    require_reference(psi)?;
    if tau.site_dim() != psi.site_dim() {
        return Err(Error::SiteDimMismatch { left: tau.site_dim(), right: psi.site_dim() });
    }
    let lo = linalg::min_eigenvalue(tau)?;
    if lo < -linalg::PSD_TOL {
        return Err(Error::NotPsd(lo));
    }
    let tr = tau.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::Domain(format!("state must have unit trace, got {tr}")));
    }
    let masses = WeightFrame::new(psi, tau.sites())?.operator_weight_masses(tau)?;
    Ok(distance_from_masses(&masses, tol))
}

/// Smallest `r` with `Σ_{i>r} masses[i] ≤ tol`.
pub fn distance_from_masses(masses: &[f64], tol: f64) -> usize {
    let mut above = 0.0;
    for r in (0..masses.len()).rev() {
        if above > tol {
            return r + 1;
        }
        above += masses[r].max(0.0);
    }
    0
}

/// `Σ_{i ≥ r} C(n, i) x^{n−i} (1 − x)^i`: the probability of at least `r`
/// failures in `n` trials that each succeed with probability `x`.
pub fn tail_function(n: usize, r: usize, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    if r > n + 1 {
        return Err(Error::Domain(format!("r = {r} outside [0, {}]", n + 1)));
    }
    if r == 0 {
        return Ok(1.0);
    }
    let y = 1.0 - x;
    let total = (r..=n)
        .map(|i| binomial_f64(n, i) * x.powi((n - i) as i32) * y.powi(i as i32))
        .sum::<f64>();
    Ok(total.min(1.0))
}
