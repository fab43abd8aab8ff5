//! Dense complex operator algebra on `(C^d)^{⊗m}`.
//!
//! Site 1 is the most significant tensor index: a basis string
//! `(s_1, …, s_m)` lives at index `Σ s_i d^{m-i}`. Partial traces and
//! contractions always act on the trailing sites.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entrywise tolerance for hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Minimum eigenvalue tolerated for a "positive semidefinite" operator.
pub const PSD_TOL: f64 = 1e-10;
/// Trace deviation tolerated for a "trace one" operator.
pub const TRACE_ONE_TOL: f64 = 1e-10;
/// Norm deviation tolerated for a pure state.
pub const NORM_TOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `d^m` with overflow detection.
pub fn hilbert_dim(site_dim: usize, sites: usize) -> Result<usize> {
    u32::try_from(sites)
        .ok()
        .and_then(|s| site_dim.checked_pow(s))
        .ok_or_else(|| Error::Overflow(format!("{site_dim}^{sites}")))
}

/// Unit vector in `(C^d)^{⊗m}`.
#[derive(Clone, PartialEq)]
pub struct PureState {
    site_dim: usize,
    sites: usize,
    amps: DVector<Complex64>,
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PureState")
            .field("site_dim", &self.site_dim)
            .field("sites", &self.sites)
            .field("amps", &self.amps.as_slice())
            .finish()
    }
}

impl PureState {
    /// Validating constructor: length must be `d^m` and the norm 1 within 1e-12.
    pub fn new(site_dim: usize, sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(site_dim, sites, amps)?;
        let norm = state.amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Rescales `amps` to unit norm. Fails on the zero vector.
    pub fn normalized(site_dim: usize, sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::unchecked(site_dim, sites, amps)?;
        let norm = state.amps.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotNormalized(norm));
        }
        state.amps.unscale_mut(norm);
        Ok(state)
    }

    fn unchecked(site_dim: usize, sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        if site_dim < 2 || sites < 1 {
            return Err(Error::Domain(format!(
                "pure state needs d >= 2 and m >= 1, got d = {site_dim}, m = {sites}"
            )));
        }
        let dim = hilbert_dim(site_dim, sites)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector has length {}, expected {dim}",
                amps.len()
            )));
        }
        Ok(Self { site_dim, sites, amps: DVector::from_vec(amps) })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(site_dim: usize, sites: usize, index: usize) -> Result<Self> {
        let dim = hilbert_dim(site_dim, sites)?;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(site_dim, sites, amps)
    }

    /// Single-site state from real/imaginary pairs.
    pub fn qudit(amps: &[Complex64]) -> Result<Self> {
        Self::new(amps.len(), 1, amps.to_vec())
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of vectors of length {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.site_dim != other.site_dim {
            return Err(Error::SiteDimMismatch { left: self.site_dim, right: other.site_dim });
        }
        let amps = self.amps.kronecker(&other.amps);
        Ok(PureState {
            site_dim: self.site_dim,
            sites: self.sites + other.sites,
            amps,
        })
    }

    /// `|self⟩^{⊗copies}`.
    pub fn power(&self, copies: usize) -> Result<PureState> {
        if copies == 0 {
            return Err(Error::Domain("tensor power needs at least one copy".into()));
        }
        let dim = hilbert_dim(self.dim(), copies)?;
        let amps = tensor_power_vec(self.amps.as_slice(), copies);
        debug_assert_eq!(amps.len(), dim);
        Ok(PureState {
            site_dim: self.site_dim,
            sites: self.sites * copies,
            amps: DVector::from_vec(amps),
        })
    }

    /// `|self⟩⟨self|`.
    pub fn density(&self) -> Operator {
        Operator {
            site_dim: self.site_dim,
            sites: self.sites,
            mat: &self.amps * self.amps.adjoint(),
        }
    }
}

/// Tensor power of a plain amplitude vector; `copies = 0` gives `[1]`.
pub(crate) fn tensor_power_vec(v: &[Complex64], copies: usize) -> Vec<Complex64> {
    let mut out = vec![ONE];
    for _ in 0..copies {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for a in &out {
            for b in v {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// Dense square operator on `(C^d)^{⊗m}`.
#[derive(Clone, PartialEq)]
pub struct Operator {
    site_dim: usize,
    sites: usize,
    mat: DMatrix<Complex64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator(d = {}, m = {}) {}", self.site_dim, self.sites, self.mat)
    }
}

impl Operator {
    pub fn new(site_dim: usize, sites: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        if site_dim < 1 {
            return Err(Error::Domain("site dimension must be positive".into()));
        }
        let dim = hilbert_dim(site_dim, sites)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected {dim}x{dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { site_dim, sites, mat })
    }

    pub fn zeros(site_dim: usize, sites: usize) -> Result<Self> {
        let dim = hilbert_dim(site_dim, sites)?;
        Self::new(site_dim, sites, DMatrix::zeros(dim, dim))
    }

    pub fn identity(site_dim: usize, sites: usize) -> Result<Self> {
        let dim = hilbert_dim(site_dim, sites)?;
        Self::new(site_dim, sites, DMatrix::identity(dim, dim))
    }

    /// Real diagonal operator.
    pub fn diagonal(site_dim: usize, sites: usize, diag: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        let dim = diag.len();
        let op = Self::new(site_dim, sites, DMatrix::from_diagonal(&v))?;
        debug_assert_eq!(op.dim(), dim);
        Ok(op)
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator { mat: &self.mat * Complex64::new(s, 0.0), ..self.clone() }
    }

    pub fn adjoint(&self) -> Operator {
        Operator { mat: self.mat.adjoint(), ..self.clone() }
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL
    }

    pub fn is_psd(&self) -> bool {
        matches!(min_eigenvalue(self), Ok(l) if l >= -PSD_TOL)
    }

    pub fn is_trace_one(&self) -> bool {
        (self.trace() - ONE).norm() <= TRACE_ONE_TOL
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_shape(other)?;
        Ok(Operator { mat: &self.mat + &other.mat, ..self.clone() })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_shape(other)?;
        Ok(Operator { mat: &self.mat - &other.mat, ..self.clone() })
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_shape(other)?;
        Ok(Operator { mat: &self.mat * &other.mat, ..self.clone() })
    }

    /// `self += w · other`, in place.
    pub fn add_scaled_assign(&mut self, other: &Operator, w: f64) -> Result<()> {
        self.check_same_shape(other)?;
        let w = Complex64::new(w, 0.0);
        self.mat.zip_apply(&other.mat, |a, b| *a += w * b);
        Ok(())
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Operator) -> Result<Complex64> {
        self.check_same_shape(other)?;
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Expectation `⟨v|self|v⟩` for a raw vector of matching length.
    pub fn expectation(&self, v: &DVector<Complex64>) -> Result<Complex64> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against operator of side {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(v.dotc(&(&self.mat * v)))
    }

    fn check_same_shape(&self, other: &Operator) -> Result<()> {
        if self.site_dim != other.site_dim {
            return Err(Error::SiteDimMismatch { left: self.site_dim, right: other.site_dim });
        }
        if self.sites != other.sites {
            return Err(Error::DimensionMismatch(format!(
                "operators on {} and {} sites",
                self.sites, other.sites
            )));
        }
        Ok(())
    }

    fn require_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator shapes must agree")
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator shapes must agree")
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operator shapes must agree")
    }
}

/// Kronecker product; the left factor occupies the leading sites.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.site_dim != b.site_dim {
        return Err(Error::SiteDimMismatch { left: a.site_dim, right: b.site_dim });
    }
    Ok(Operator {
        site_dim: a.site_dim,
        sites: a.sites + b.sites,
        mat: a.mat.kronecker(&b.mat),
    })
}

/// Traces out the last `k` sites.
pub fn partial_trace_last(rho: &Operator, k: usize) -> Result<Operator> {
    if k > rho.sites {
        return Err(Error::SitesOutOfRange { requested: k, available: rho.sites });
    }
    let traced = hilbert_dim(rho.site_dim, k)?;
    let kept = rho.dim() / traced;
    let mut out = DMatrix::zeros(kept, kept);
    for i in 0..kept {
        for j in 0..kept {
            let mut acc = ZERO;
            for a in 0..traced {
                acc += rho.mat[(i * traced + a, j * traced + a)];
            }
            out[(i, j)] = acc;
        }
    }
    Operator::new(rho.site_dim, rho.sites - k, out)
}

/// Eigenvalues of a hermitian operator, ascending.
pub fn hermitian_eigenvalues(a: &Operator) -> Result<Vec<f64>> {
    a.require_hermitian()?;
    let mut vals: Vec<f64> = a.mat.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Schatten-1 norm of a hermitian operator.
pub fn trace_norm(a: &Operator) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.iter().map(|l| l.abs()).sum())
}

pub fn min_eigenvalue(a: &Operator) -> Result<f64> {
    let vals = hermitian_eigenvalues(a)?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

/// Principal square root of a PSD operator. Eigenvalues within
/// `PSD_TOL` below zero are clamped to zero.
pub fn psd_sqrt(a: &Operator) -> Result<Operator> {
    a.require_hermitian()?;
    let eig = a.mat.clone().symmetric_eigen();
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lo < -PSD_TOL {
        return Err(Error::NotPsd(lo));
    }
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
    );
    let v = &eig.eigenvectors;
    let mat = v * DMatrix::from_diagonal(&roots) * v.adjoint();
    Operator::new(a.site_dim, a.sites, mat)
}

/// `(I ⊗ ⟨ψ|^{⊗k}) ρ (I ⊗ |ψ⟩^{⊗k})` for a single-site `ψ`.
pub fn sandwich_bra_last(rho: &Operator, psi: &PureState, k: usize) -> Result<Operator> {
    if psi.sites() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "reference state must be single-site, got {} sites",
            psi.sites()
        )));
    }
    if psi.site_dim() != rho.site_dim {
        return Err(Error::SiteDimMismatch { left: rho.site_dim, right: psi.site_dim() });
    }
    if k > rho.sites {
        return Err(Error::SitesOutOfRange { requested: k, available: rho.sites });
    }
    let w = tensor_power_vec(psi.as_slice(), k);
    let traced = w.len();
    let kept = rho.dim() / traced;
    // half[(i, j)] = Σ_b ρ[i, j·traced + b] w_b, with i ranging over the full space
    let mut half = DMatrix::zeros(rho.dim(), kept);
    for i in 0..rho.dim() {
        for j in 0..kept {
            let mut acc = ZERO;
            for (b, wb) in w.iter().enumerate() {
                acc += rho.mat[(i, j * traced + b)] * wb;
            }
            half[(i, j)] = acc;
        }
    }
    let mut out = DMatrix::zeros(kept, kept);
    for i in 0..kept {
        for j in 0..kept {
            let mut acc = ZERO;
            for (a, wa) in w.iter().enumerate() {
                acc += wa.conj() * half[(i * traced + a, j)];
            }
            out[(i, j)] = acc;
        }
    }
    Operator::new(rho.site_dim, rho.sites - k, out)
}

/// `(I ⊗ ⟨ψ|^{⊗k}) |v⟩` for a state on `m ≥ k` sites; the result lives on
/// `m − k` sites and is generally not normalized.
pub fn contract_bra_last(state: &PureState, psi: &PureState, k: usize) -> Result<DVector<Complex64>> {
    if psi.sites() != 1 || psi.site_dim() != state.site_dim() {
        return Err(Error::DimensionMismatch(
            "contraction needs a single-site reference of matching dimension".into(),
        ));
    }
    if k > state.sites() {
        return Err(Error::SitesOutOfRange { requested: k, available: state.sites() });
    }
    let w = tensor_power_vec(psi.as_slice(), k);
    let traced = w.len();
    let kept = state.dim() / traced;
    let amps = state.as_slice();
    Ok(DVector::from_iterator(
        kept,
        (0..kept).map(|i| {
            amps[i * traced..(i + 1) * traced]
                .iter()
                .zip(&w)
                .map(|(a, wb)| wb.conj() * a)
                .sum()
        }),
    ))
}

/// Reduced operator `Tr_k |v⟩⟨v|` computed directly from the amplitudes.
pub fn reduced_density_last(state: &PureState, k: usize) -> Result<Operator> {
    if k > state.sites() {
        return Err(Error::SitesOutOfRange { requested: k, available: state.sites() });
    }
    let traced = hilbert_dim(state.site_dim(), k)?;
    let kept = state.dim() / traced;
    let m = DMatrix::from_row_slice(kept, traced, state.as_slice());
    Operator::new(state.site_dim(), state.sites() - k, &m * m.adjoint())
}

/// `|v⟩⟨v|` for a raw amplitude vector on `(C^d)^{⊗m}`.
pub fn outer(site_dim: usize, sites: usize, v: &DVector<Complex64>) -> Result<Operator> {
    Operator::new(site_dim, sites, v * v.adjoint())
}
