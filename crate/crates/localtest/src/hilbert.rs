//! Dense complex linear algebra over multi-factor Hilbert spaces.
//!
//! Conventions pinned here and used everywhere else:
//! * tensor factors are ordered left-to-right, index arithmetic is row-major
//!   (leftmost factor is the most significant digit);
//! * vectorization is row-major: `|X⟩⟩ = Σ_ij X_ij |i⟩|j⟩`, so
//!   `|I_d⟩⟩ = Σ_i |i⟩|i⟩` and `(X⊗Z*)|Y⟩⟩ = |XYZ†⟩⟩`;
//! * Hermitian eigensolves symmetrize their input as `(M+M†)/2` first to
//!   absorb floating-point drift from repeated twirls.

use nalgebra::SymmetricEigen;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{c, CMatrix, CVector, Scalar};
use crate::{Error, Result};

/// Tolerance for PSD checks after Hermitian symmetrization.
pub const PSD_TOL: f64 = 1e-10;
/// State vectors must be normalized within this unless flagged subnormalized.
pub const NORM_TOL: f64 = 1e-12;

/// Which party holds a tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    Untagged,
}

/// Ordered list of tensor factors (local dimension, party tag).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemLayout {
    factors: Vec<(usize, Party)>,
}

impl SystemLayout {
    pub fn new(factors: Vec<(usize, Party)>) -> Result<Self> {
        if factors.iter().any(|&(d, _)| d == 0) {
            return Err(Error::Shape("factor dimensions must be positive".into()));
        }
        Ok(Self { factors })
    }

    /// All factors untagged.
    pub fn untagged(dims: &[usize]) -> Self {
        Self {
            factors: dims.iter().map(|&d| (d, Party::Untagged)).collect(),
        }
    }

    /// A single untagged factor of dimension `dim`.
    pub fn single(dim: usize) -> Self {
        Self::untagged(&[dim])
    }

    /// `N` copies of `C^d`, all untagged (the space `(C^d)^{⊗N}`).
    pub fn copies(n: usize, d: usize) -> Self {
        Self::untagged(&vec![d; n])
    }

    /// `N` copies of a bipartite pair, interleaved as `A₁B₁A₂B₂…A_N B_N`.
    pub fn bipartite_copies(n: usize, d: usize) -> Self {
        let mut factors = Vec::with_capacity(2 * n);
        for _ in 0..n {
            factors.push((d, Party::A));
            factors.push((d, Party::B));
        }
        Self { factors }
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|&(d, _)| d).collect()
    }

    pub fn factor(&self, k: usize) -> (usize, Party) {
        self.factors[k]
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|&(d, _)| d).product()
    }

    /// Indices of factors carrying the given party tag.
    pub fn party_indices(&self, party: Party) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, &(_, p))| p == party)
            .map(|(k, _)| k)
            .collect()
    }

    /// Concatenation (layout of a Kronecker product).
    pub fn concat(&self, other: &SystemLayout) -> SystemLayout {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        SystemLayout { factors }
    }

    /// Row-major strides: `stride[k]` = product of dims right of factor `k`.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.dims();
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        strides
    }

    /// Decompose a flat index into per-factor digits.
    pub fn to_multi(&self, mut idx: usize) -> Vec<usize> {
        let strides = self.strides();
        strides
            .iter()
            .map(|&s| {
                let digit = idx / s;
                idx %= s;
                digit
            })
            .collect()
    }

    /// Flatten per-factor digits into a flat index.
    pub fn from_multi(&self, multi: &[usize]) -> usize {
        self.strides()
            .iter()
            .zip(multi)
            .map(|(&s, &i)| s * i)
            .sum()
    }
}

/// Dense operator on a multi-factor space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Scalar> {
    pub mat: CMatrix<T>,
    pub layout: SystemLayout,
}

impl<T: Scalar> Operator<T> {
    pub fn new(mat: CMatrix<T>, layout: SystemLayout) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Shape(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() != layout.total_dim() {
            return Err(Error::Shape(format!(
                "matrix dimension {} does not match layout dimension {}",
                mat.nrows(),
                layout.total_dim()
            )));
        }
        Ok(Self { mat, layout })
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        Self {
            mat: CMatrix::identity(n, n),
            layout,
        }
    }

    pub fn zeros(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        Self {
            mat: CMatrix::zeros(n, n),
            layout,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            layout: self.layout.clone(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        self.mat.trace()
    }

    /// Hermitian part `(M+M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let herm = (&self.mat + self.mat.adjoint()) * c(T::of(0.5));
        Self {
            mat: herm,
            layout: self.layout.clone(),
        }
    }

    /// Distance from Hermiticity, `‖M−M†‖_F`.
    pub fn hermiticity_defect(&self) -> T {
        (&self.mat - self.mat.adjoint()).norm()
    }
}

/// Dense state vector with layout metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Scalar> {
    pub vec: CVector<T>,
    pub layout: SystemLayout,
    pub subnormalized: bool,
}

impl<T: Scalar> StateVector<T> {
    /// A normalized state; errors if the norm is off by more than 1e-12.
    pub fn normalized(vec: CVector<T>, layout: SystemLayout) -> Result<Self> {
        if vec.len() != layout.total_dim() {
            return Err(Error::Shape(format!(
                "vector length {} does not match layout dimension {}",
                vec.len(),
                layout.total_dim()
            )));
        }
        let norm = vec.norm();
        if (norm - T::one()).abs() > T::of(NORM_TOL) {
            return Err(Error::Validation(format!(
                "state norm {} deviates from 1 beyond 1e-12",
                norm.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self {
            vec,
            layout,
            subnormalized: false,
        })
    }

    /// A possibly non-normalized vector (e.g. `|I_V⟩⟩`).
    pub fn subnormalized(vec: CVector<T>, layout: SystemLayout) -> Result<Self> {
        if vec.len() != layout.total_dim() {
            return Err(Error::Shape(format!(
                "vector length {} does not match layout dimension {}",
                vec.len(),
                layout.total_dim()
            )));
        }
        Ok(Self {
            vec,
            layout,
            subnormalized: true,
        })
    }

    /// Computational basis vector `|i⟩`.
    pub fn basis(layout: SystemLayout, i: usize) -> Self {
        let n = layout.total_dim();
        let mut vec = CVector::zeros(n);
        vec[i] = Complex::one();
        Self {
            vec,
            layout,
            subnormalized: false,
        }
    }

    /// Density operator `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> Operator<T> {
        Operator {
            mat: &self.vec * self.vec.adjoint(),
            layout: self.layout.clone(),
        }
    }

    /// Tensor power `|ψ⟩^{⊗N}` (layout repeated).
    pub fn tensor_power(&self, n: usize) -> StateVector<T> {
        assert!(n >= 1, "tensor power requires n >= 1");
        let mut vec = self.vec.clone();
        let mut layout = self.layout.clone();
        for _ in 1..n {
            vec = vec.kronecker(&self.vec);
            layout = layout.concat(&self.layout);
        }
        StateVector {
            vec,
            layout,
            subnormalized: self.subnormalized,
        }
    }
}

/// Kronecker product in list order; layouts concatenate.
pub fn tensor_product<T: Scalar>(xs: &[&Operator<T>]) -> Result<Operator<T>> {
    let first = xs
        .first()
        .ok_or_else(|| Error::InvalidArgument("tensor_product of empty list".into()))?;
    let mut mat = first.mat.clone();
    let mut layout = first.layout.clone();
    for x in &xs[1..] {
        mat = mat.kronecker(&x.mat);
        layout = layout.concat(&x.layout);
    }
    Ok(Operator { mat, layout })
}

/// Tensor power `X^{⊗N}`.
pub fn tensor_power<T: Scalar>(x: &Operator<T>, n: usize) -> Result<Operator<T>> {
    let xs: Vec<&Operator<T>> = std::iter::repeat(x).take(n).collect();
    tensor_product(&xs)
}

/// Partial trace keeping the listed factors (result keeps their original
/// relative order). Trace-preserving by construction.
pub fn partial_trace<T: Scalar>(rho: &Operator<T>, keep: &[usize]) -> Result<Operator<T>> {
    let n_factors = rho.layout.n_factors();
    let mut seen = vec![false; n_factors];
    for &k in keep {
        if k >= n_factors {
            return Err(Error::InvalidArgument(format!(
                "keep index {k} out of range (n_factors = {n_factors})"
            )));
        }
        if seen[k] {
            return Err(Error::InvalidArgument(format!("duplicate keep index {k}")));
        }
        seen[k] = true;
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..n_factors).filter(|k| !seen[*k]).collect();

    let dims = rho.layout.dims();
    let strides = rho.layout.strides();
    let kept_layout = SystemLayout {
        factors: keep_sorted.iter().map(|&k| rho.layout.factor(k)).collect(),
    };
    let kept_dim = kept_layout.total_dim();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Flat offsets of every kept / traced multi-index in the original space.
    let enumerate_offsets = |subset: &[usize]| -> Vec<usize> {
        let sub_dims: Vec<usize> = subset.iter().map(|&k| dims[k]).collect();
        let count: usize = sub_dims.iter().product();
        let mut offsets = Vec::with_capacity(count);
        for mut flat in 0..count {
            let mut offset = 0;
            for j in (0..subset.len()).rev() {
                offset += (flat % sub_dims[j]) * strides[subset[j]];
                flat /= sub_dims[j];
            }
            offsets.push(offset);
        }
        offsets
    };
    let kept_offsets = enumerate_offsets(&keep_sorted);
    let traced_offsets = enumerate_offsets(&traced);
    debug_assert_eq!(kept_offsets.len(), kept_dim);
    debug_assert_eq!(traced_offsets.len(), traced_dim);

    let mut out = CMatrix::<T>::zeros(kept_dim, kept_dim);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (cidx, &co) in kept_offsets.iter().enumerate() {
            let mut acc = Complex::<T>::zero();
            for &to in &traced_offsets {
                acc += rho.mat[(ro + to, co + to)];
            }
            out[(r, cidx)] = acc;
        }
    }
    Ok(Operator {
        mat: out,
        layout: kept_layout,
    })
}

/// The permutation matrix `P(π)` acting on the layout's factors:
/// `P(π)|ψ_1 … ψ_n⟩ = |ψ_{π⁻¹(1)} … ψ_{π⁻¹(n)}⟩`
/// (`π` in one-line notation, 0-based: factor `k` moves to slot `π[k]`).
pub fn factor_permutation_matrix<T: Scalar>(
    layout: &SystemLayout,
    pi: &[usize],
) -> Result<Operator<T>> {
    let n = layout.n_factors();
    if pi.len() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation arity {} does not match {} factors",
            pi.len(),
            n
        )));
    }
    let mut inv = vec![usize::MAX; n];
    for (k, &img) in pi.iter().enumerate() {
        if img >= n || inv[img] != usize::MAX {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        inv[img] = k;
    }
    let dims = layout.dims();
    let new_factors: Vec<(usize, Party)> = (0..n).map(|j| layout.factor(inv[j])).collect();
    let new_layout = SystemLayout {
        factors: new_factors,
    };
    if new_layout.dims() != dims && new_layout.total_dim() != layout.total_dim() {
        return Err(Error::Shape("permutation changes total dimension".into()));
    }
    let total = layout.total_dim();
    let new_strides = new_layout.strides();
    let mut mat = CMatrix::<T>::zeros(total, total);
    for col in 0..total {
        let multi = layout.to_multi(col);
        let mut row = 0;
        for k in 0..n {
            row += multi[k] * new_strides[pi[k]];
        }
        mat[(row, col)] = Complex::one();
    }
    Operator::new(mat, new_layout)
}

/// Conjugate `x` by the factor permutation `π`: `P(π) x P(π)†`.
pub fn permute_factors<T: Scalar>(x: &Operator<T>, pi: &[usize]) -> Result<Operator<T>> {
    let p = factor_permutation_matrix::<T>(&x.layout, pi)?;
    Ok(Operator {
        mat: &p.mat * &x.mat * p.mat.adjoint(),
        layout: p.layout,
    })
}

/// Apply the factor permutation to a state vector: `P(π)|ψ⟩`.
pub fn permute_state<T: Scalar>(psi: &StateVector<T>, pi: &[usize]) -> Result<StateVector<T>> {
    let p = factor_permutation_matrix::<T>(&psi.layout, pi)?;
    Ok(StateVector {
        vec: &p.mat * &psi.vec,
        layout: p.layout,
        subnormalized: psi.subnormalized,
    })
}

/// Eigendecomposition of a Hermitian operator; input symmetrized as
/// `(M+M†)/2`. Returns (eigenvalues ascending, unitary of eigenvectors).
///
/// The QR-based solver can silently mis-converge on clustered spectra, so the
/// result is verified by reconstruction (`‖VΛV† − H‖`); on failure a cyclic
/// Jacobi sweep — slower but unconditionally robust — recomputes it.
pub fn hermitian_eigen<T: Scalar>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let herm = (m + m.adjoint()) * c(T::of(0.5));
    let n = herm.nrows();
    let scale = herm.norm();
    let eig = SymmetricEigen::new(herm.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let values: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::<T>::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        vectors.set_column(new_col, &eig.eigenvectors.column(old_col));
    }
    // Reconstruction check.
    let mut rebuilt = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        let col = vectors.column(k);
        rebuilt += &col * col.adjoint() * c(values[k]);
    }
    let tol = T::of(1e-12) * T::of(n as f64) * if scale > T::one() { scale } else { T::one() };
    if (&rebuilt - &herm).norm() <= tol {
        return (values, vectors);
    }
    jacobi_hermitian_eigen(&herm)
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix: each rotation zeroes one
/// off-diagonal pair exactly; sweeps repeat until the off-diagonal mass is at
/// roundoff. `O(n³)` per sweep but free of the QR shift pathologies.
fn jacobi_hermitian_eigen<T: Scalar>(h: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = CMatrix::<T>::identity(n, n);
    let scale = {
        let s = a.norm();
        if s > T::zero() {
            s
        } else {
            T::one()
        }
    };
    let stop = T::of(1e-15) * scale;
    for _sweep in 0..60 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm_sqr().sqrt();
                if r <= T::of(1e-300) {
                    continue;
                }
                // Phase e^{iφ} of the pivot, then a real Jacobi rotation.
                let phase = apq / c(r);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (T::of(2.0) * r);
                let t = {
                    let denom = theta.abs() + (theta * theta + T::one()).sqrt();
                    let magnitude = T::one() / denom;
                    if theta < T::zero() {
                        -magnitude
                    } else {
                        magnitude
                    }
                };
                let cos = T::one() / (t * t + T::one()).sqrt();
                let sin = t * cos;
                // Column update A ← A·G with G = [[c, s],[−s e^{−iφ}, c e^{−iφ}]]
                // acting on columns (p, q).
                let gs = c(sin);
                let gc = c(cos);
                let ph_conj = phase.conj();
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = gc * aip - gs * ph_conj * aiq;
                    a[(i, q)] = gs * aip + gc * ph_conj * aiq;
                }
                // Row update A ← G†·A.
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = gc * api - gs * phase * aqi;
                    a[(q, i)] = gs * api + gc * phase * aqi;
                }
                // Accumulate V ← V·G.
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = gc * vip - gs * ph_conj * viq;
                    v[(i, q)] = gs * vip + gc * ph_conj * viq;
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.partial_cmp(&a[(y, y)].re).expect("finite"));
    let values: Vec<T> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = CMatrix::<T>::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        vectors.set_column(new_col, &v.column(old_col));
    }
    (values, vectors)
}

/// Principal square root of a PSD matrix; negative eigenvalues within the
/// PSD tolerance are clamped to zero, larger ones are an error.
pub fn sqrt_psd<T: Scalar>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let (values, vectors) = hermitian_eigen(m);
    let scale = values
        .iter()
        .fold(T::one(), |acc, &v| if v.abs() > acc { v.abs() } else { acc });
    let tol = T::of(PSD_TOL) * scale;
    let n = m.nrows();
    let mut out = CMatrix::<T>::zeros(n, n);
    for (k, &v) in values.iter().enumerate() {
        if v < -tol {
            return Err(Error::Validation(format!(
                "matrix is not PSD: eigenvalue {}",
                v.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let s = if v > T::zero() { v.sqrt() } else { T::zero() };
        let col = vectors.column(k);
        out += &col * col.adjoint() * c(s);
    }
    Ok(out)
}

/// Trace distance `½‖ρ−σ‖₁` via Hermitian eigenvalues.
pub fn trace_distance<T: Scalar>(rho: &Operator<T>, sigma: &Operator<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape("trace_distance: dimension mismatch".into()));
    }
    let diff = &rho.mat - &sigma.mat;
    let (values, _) = hermitian_eigen(&diff);
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v.abs());
    Ok(sum * T::of(0.5))
}

/// Fidelity `F(ρ,σ) = tr√(√σ ρ √σ)`, computed as the sum of singular values
/// of `√ρ·√σ` (avoids nested square roots of near-singular products).
pub fn fidelity<T: Scalar>(rho: &Operator<T>, sigma: &Operator<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape("fidelity: dimension mismatch".into()));
    }
    let a = sqrt_psd(&rho.mat)?;
    let b = sqrt_psd(&sigma.mat)?;
    let prod = a * b;
    let svd = prod.svd(false, false);
    Ok(svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc + s))
}

/// Row-major vectorization `|X⟩⟩ = Σ_ij X_ij |i⟩|j⟩`.
pub fn vectorize<T: Scalar>(x: &Operator<T>) -> StateVector<T> {
    let n = x.dim();
    let mut vec = CVector::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            vec[i * n + j] = x.mat[(i, j)];
        }
    }
    StateVector {
        vec,
        layout: SystemLayout::untagged(&[n, n]),
        subnormalized: true,
    }
}

/// Inverse of [`vectorize`]; the layout of the result is a single factor.
pub fn devectorize<T: Scalar>(v: &StateVector<T>) -> Result<Operator<T>> {
    let len = v.vec.len();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::Shape(format!(
            "devectorize: length {len} is not a perfect square"
        )));
    }
    let mut mat = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat[(i, j)] = v.vec[i * n + j];
        }
    }
    Operator::new(mat, SystemLayout::single(n))
}

/// Spectral range of a POVM-element candidate. Errors if the input is not
/// Hermitian within 1e-10; the caller asserts the range is within
/// `[−1e-9, 1+1e-9]`.
pub fn validate_povm_element<T: Scalar>(t: &Operator<T>) -> Result<(T, T)> {
    let defect = t.hermiticity_defect();
    if defect > T::of(PSD_TOL) * T::of(2.0) * T::of(t.dim() as f64).sqrt().max(T::one()) {
        return Err(Error::Validation(format!(
            "operator is not Hermitian: ‖M−M†‖ = {}",
            defect.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let (values, _) = hermitian_eigen(&t.mat);
    Ok((values[0], values[values.len() - 1]))
}

// ---------------------------------------------------------------------------
// Serialization: JSON arrays of [re, im] pairs, row-major, with layout.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    layout: Vec<(usize, Party)>,
    /// Row-major rows of [re, im] pairs.
    entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    layout: Vec<(usize, Party)>,
    subnormalized: bool,
    amplitudes: Vec<[f64; 2]>,
}

impl<T: Scalar> Operator<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let entries = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.mat[(i, j)];
                        [z.re.to_f64().unwrap(), z.im.to_f64().unwrap()]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_value(OperatorJson {
            layout: self.layout.factors.clone(),
            entries,
        })
        .expect("operator JSON serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: OperatorJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Config(format!("operator JSON: {e}")))?;
        let layout = SystemLayout::new(raw.layout)?;
        let n = layout.total_dim();
        if raw.entries.len() != n || raw.entries.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("operator JSON: entry grid mismatch".into()));
        }
        let mut mat = CMatrix::zeros(n, n);
        for (i, row) in raw.entries.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                mat[(i, j)] = Complex::new(T::of(re), T::of(im));
            }
        }
        Operator::new(mat, layout)
    }
}

impl<T: Scalar> StateVector<T> {
    pub fn to_json(&self) -> serde_json::Value {
        let amplitudes = self
            .vec
            .iter()
            .map(|z| [z.re.to_f64().unwrap(), z.im.to_f64().unwrap()])
            .collect();
        serde_json::to_value(StateJson {
            layout: self.layout.factors.clone(),
            subnormalized: self.subnormalized,
            amplitudes,
        })
        .expect("state JSON serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: StateJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Config(format!("state JSON: {e}")))?;
        let layout = SystemLayout::new(raw.layout)?;
        if raw.amplitudes.len() != layout.total_dim() {
            return Err(Error::Shape("state JSON: amplitude count mismatch".into()));
        }
        let vec = CVector::from_iterator(
            raw.amplitudes.len(),
            raw.amplitudes
                .iter()
                .map(|&[re, im]| Complex::new(T::of(re), T::of(im))),
        );
        if raw.subnormalized {
            StateVector::subnormalized(vec, layout)
        } else {
            StateVector::normalized(vec, layout)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit_op(entries: [[Complex64; 2]; 2]) -> Operator<f64> {
        let mat = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[
                entries[0][0],
                entries[0][1],
                entries[1][0],
                entries[1][1],
            ],
        );
        Operator::new(mat, SystemLayout::single(2)).unwrap()
    }

    fn pauli_x() -> Operator<f64> {
        qubit_op([
            [cx(0.0, 0.0), cx(1.0, 0.0)],
            [cx(1.0, 0.0), cx(0.0, 0.0)],
        ])
    }

    fn pauli_z() -> Operator<f64> {
        qubit_op([
            [cx(1.0, 0.0), cx(0.0, 0.0)],
            [cx(0.0, 0.0), cx(-1.0, 0.0)],
        ])
    }

    fn bell() -> StateVector<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let vec = CVector::<f64>::from_vec(vec![cx(s, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(s, 0.0)]);
        StateVector::normalized(vec, SystemLayout::untagged(&[2, 2])).unwrap()
    }

    #[test]
    fn tensor_product_singleton_and_identity() {
        let i2 = Operator::<f64>::identity(SystemLayout::single(2));
        let single = tensor_product(&[&i2]).unwrap();
        assert_eq!(single.mat, i2.mat);
        let i4 = tensor_product(&[&i2, &i2]).unwrap();
        assert_eq!(i4.mat, CMatrix::<f64>::identity(4, 4));
        assert_eq!(i4.layout.dims(), vec![2, 2]);
        assert!(tensor_product::<f64>(&[]).is_err());
    }

    #[test]
    fn tensor_product_x_z_sign() {
        let xz = tensor_product(&[&pauli_x(), &pauli_z()]).unwrap();
        // (X⊗Z)|01⟩ = −|11⟩.
        let mut v = CVector::<f64>::zeros(4);
        v[1] = Complex64::ONE;
        let out = &xz.mat * v;
        assert_eq!(out[3], cx(-1.0, 0.0));
        assert!(out[0].norm() + out[1].norm() + out[2].norm() < 1e-15);
    }

    #[test]
    fn partial_trace_product_and_bell() {
        // tr_B(|00⟩⟨00|) = |0⟩⟨0|.
        let zero = StateVector::<f64>::basis(SystemLayout::untagged(&[2, 2]), 0);
        let red = partial_trace(&zero.density(), &[0]).unwrap();
        assert!((red.mat[(0, 0)] - cx(1.0, 0.0)).norm() < 1e-15);
        assert!(red.mat[(1, 1)].norm() < 1e-15);

        // tr_B(Bell) = I/2.
        let red = partial_trace(&bell().density(), &[0]).unwrap();
        assert!((red.mat[(0, 0)] - cx(0.5, 0.0)).norm() < 1e-14);
        assert!((red.mat[(1, 1)] - cx(0.5, 0.0)).norm() < 1e-14);
        assert!(red.mat[(0, 1)].norm() < 1e-14);

        // Schmidt coefficients read off a non-uniform superposition.
        let vec = CVector::<f64>::from_vec(vec![
            cx(0.6, 0.0),
            cx(0.0, 0.0),
            cx(0.0, 0.0),
            cx(0.8, 0.0),
        ]);
        let psi = StateVector::normalized(vec, SystemLayout::untagged(&[2, 2])).unwrap();
        let red = partial_trace(&psi.density(), &[0]).unwrap();
        assert!((red.mat[(0, 0)].re - 0.36).abs() < 1e-14);
        assert!((red.mat[(1, 1)].re - 0.64).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let rho = bell().density();
        let red = partial_trace(&rho, &[1]).unwrap();
        assert!((red.trace() - rho.trace()).norm() < 1e-14);
    }

    #[test]
    fn permute_factors_swap_and_homomorphism() {
        // Identity permutation leaves the operator unchanged.
        let rho = bell().density();
        let same = permute_factors(&rho, &[0, 1]).unwrap();
        assert!((&same.mat - &rho.mat).norm() < 1e-15);

        // Swap maps |01⟩⟨01| to |10⟩⟨10|.
        let e01 = StateVector::<f64>::basis(SystemLayout::untagged(&[2, 2]), 1).density();
        let swapped = permute_factors(&e01, &[1, 0]).unwrap();
        assert!((swapped.mat[(2, 2)] - cx(1.0, 0.0)).norm() < 1e-15);

        // Homomorphism on a random-ish 3-factor operator.
        let layout = SystemLayout::untagged(&[2, 3, 2]);
        let n = layout.total_dim();
        let mat = CMatrix::<f64>::from_fn(n, n, |i, j| {
            cx((i as f64 * 1.3 + j as f64 * 0.7).sin(), (i as f64 - 2.0 * j as f64).cos())
        });
        let x = Operator::new(mat, layout).unwrap();
        // π = (0→1, 1→2, 2→0), σ = swap first two. Note dims must stay
        // consistent, so conjugate σ-then-π against the composite.
        let sigma = [1usize, 0, 2];
        let pi = [1usize, 2, 0];
        let step = permute_factors(&permute_factors(&x, &sigma).unwrap(), &pi).unwrap();
        // composite: factor k goes to pi[sigma[k]].
        let composite: Vec<usize> = (0..3).map(|k| pi[sigma[k]]).collect();
        let direct = permute_factors(&x, &composite).unwrap();
        assert!((&step.mat - &direct.mat).norm() < 1e-12);
    }

    #[test]
    fn trace_distance_basics() {
        let rho = bell().density();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-14);
        let zero = StateVector::<f64>::basis(SystemLayout::single(2), 0).density();
        let one = StateVector::<f64>::basis(SystemLayout::single(2), 1).density();
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_classical_mixture_pair() {
        // ρ_x = (1−x)|0⟩⟨0| + x|1⟩⟨1|: d(ρ_0, ρ_ε) = ε.
        let eps = 0.23;
        let zero = StateVector::<f64>::basis(SystemLayout::single(2), 0).density();
        let one = StateVector::<f64>::basis(SystemLayout::single(2), 1).density();
        let rho_eps = Operator::new(
            &zero.mat * cx(1.0 - eps, 0.0) + &one.mat * cx(eps, 0.0),
            SystemLayout::single(2),
        )
        .unwrap();
        assert!((trace_distance(&zero, &rho_eps).unwrap() - eps).abs() < 1e-12);
    }

    #[test]
    fn fidelity_basics() {
        let rho = bell().density();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);

        // Pure states: F = |⟨ψ|φ⟩|.
        let psi = StateVector::<f64>::basis(SystemLayout::single(2), 0);
        let v = CVector::<f64>::from_vec(vec![cx(0.6, 0.0), cx(0.8, 0.0)]);
        let phi = StateVector::normalized(v, SystemLayout::single(2)).unwrap();
        let f = fidelity(&psi.density(), &phi.density()).unwrap();
        assert!((f - 0.6).abs() < 1e-10);
    }

    #[test]
    fn fidelity_classical_pair_squares_to_one_minus_eps() {
        let eps = 0.37;
        let zero = StateVector::<f64>::basis(SystemLayout::single(2), 0).density();
        let one = StateVector::<f64>::basis(SystemLayout::single(2), 1).density();
        let rho_eps = Operator::new(
            &zero.mat * cx(1.0 - eps, 0.0) + &one.mat * cx(eps, 0.0),
            SystemLayout::single(2),
        )
        .unwrap();
        let f = fidelity(&zero, &rho_eps).unwrap();
        assert!((f * f - (1.0 - eps)).abs() < 1e-12);
    }

    #[test]
    fn vectorize_identity_and_roundtrip() {
        let i3 = Operator::<f64>::identity(SystemLayout::single(3));
        let v = vectorize(&i3);
        // |I₃⟩⟩ = |00⟩+|11⟩+|22⟩.
        for (idx, z) in v.vec.iter().enumerate() {
            let expected = if idx % 4 == 0 { 1.0 } else { 0.0 };
            assert!((z - cx(expected, 0.0)).norm() < 1e-15);
        }
        let back = devectorize(&v).unwrap();
        assert!((&back.mat - &i3.mat).norm() < 1e-15);
    }

    #[test]
    fn vectorize_rank_one() {
        // ||ψ⟩⟨φ|⟩⟩ = |ψ⟩⊗|φ*⟩.
        let psi = CVector::<f64>::from_vec(vec![cx(0.6, 0.0), cx(0.0, 0.8)]);
        let phi = CVector::<f64>::from_vec(vec![cx(0.0, 1.0), cx(0.0, 0.0)]);
        let op = Operator::new(&psi * phi.adjoint(), SystemLayout::single(2)).unwrap();
        let v = vectorize(&op);
        let expect = psi.kronecker(&phi.map(|z| z.conj()));
        assert!((&v.vec - expect).norm() < 1e-15);
    }

    #[test]
    fn vectorization_sandwich_identity() {
        // (X⊗Z*)|Y⟩⟩ = |XYZ†⟩⟩ on deterministic pseudo-random 3×3 triples.
        let gen = |seed: f64| {
            let mat = CMatrix::<f64>::from_fn(3, 3, |i, j| {
                cx(
                    (seed + 3.1 * i as f64 + 1.7 * j as f64).sin(),
                    (seed * 2.0 - i as f64 + 0.9 * j as f64).cos(),
                )
            });
            Operator::new(mat, SystemLayout::single(3)).unwrap()
        };
        for seed in [0.2, 1.4, 2.9] {
            let (x, y, z) = (gen(seed), gen(seed + 10.0), gen(seed + 20.0));
            let lhs = x.mat.kronecker(&z.mat.map(|w| w.conj())) * vectorize(&y).vec;
            let xyz = Operator::new(&x.mat * &y.mat * z.mat.adjoint(), SystemLayout::single(3))
                .unwrap();
            let rhs = vectorize(&xyz).vec;
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn povm_validation() {
        let i2 = Operator::<f64>::identity(SystemLayout::single(2));
        let (lo, hi) = validate_povm_element(&i2).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        let zero = Operator::<f64>::zeros(SystemLayout::single(2));
        let (lo, hi) = validate_povm_element(&zero).unwrap();
        assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);

        // ½(I+X) has eigenvalues {0, 1}.
        let half = Operator::new(
            (&i2.mat + pauli_x().mat) * cx(0.5, 0.0),
            SystemLayout::single(2),
        )
        .unwrap();
        let (lo, hi) = validate_povm_element(&half).unwrap();
        assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        // Non-Hermitian input is rejected.
        let bad = Operator::new(
            CMatrix::<f64>::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]),
            SystemLayout::single(2),
        )
        .unwrap();
        assert!(validate_povm_element(&bad).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let rho = bell().density();
        let value = rho.to_json();
        let back = Operator::<f64>::from_json(&value).unwrap();
        assert_eq!(back.layout, rho.layout);
        assert!((&back.mat - &rho.mat).norm() < 1e-15);

        let psi = bell();
        let value = psi.to_json();
        let back = StateVector::<f64>::from_json(&value).unwrap();
        assert!((&back.vec - &psi.vec).norm() < 1e-15);
    }
}
