//! Property evaluators for bipartite pure states: Schmidt data,
//! Eckart–Young overlaps, Rényi entanglement entropy, the weak Schur
//! sampling distribution, bond-dimension profiles, and padding.

use num_complex::Complex;
use rand::Rng;

use crate::hilbert::{Operator, StateVector, SystemLayout};
use crate::scalar::{c, CMatrix, CVector, Scalar};
use crate::schur::build_schur_basis;
use crate::young::YoungDiagram;
use crate::{Error, Result};

/// Singular values below `BOND_RANK_CUTOFF · (largest)` count as zero when
/// computing ranks (double-precision SVD noise floor).
pub const BOND_RANK_CUTOFF: f64 = 1e-9;

/// A normalized bipartite pure state on `C^d ⊗ C^d` with cached Schmidt data.
///
/// Convention: `coefficients` are the amplitudes `√λ_j` (descending), so the
/// squared coefficients sum to 1; Eckart–Young overlaps sum the `λ_j`.
pub struct BipartitePureState<T: Scalar> {
    pub vector: StateVector<T>,
    pub local_dim: usize,
    /// Schmidt amplitudes `√λ_j`, descending.
    pub coefficients: Vec<T>,
    /// Column `j` is `|φ_j⟩_A`.
    pub basis_a: CMatrix<T>,
    /// Column `j` is `|γ_j⟩_B`.
    pub basis_b: CMatrix<T>,
}

/// SVD of the `d×d` amplitude matrix `M[i,j] = ψ[i·d + j]`:
/// `ψ = Σ_j √λ_j |φ_j⟩_A |γ_j⟩_B`.
pub fn schmidt_decompose<T: Scalar>(psi: &StateVector<T>) -> Result<BipartitePureState<T>> {
    let len = psi.vec.len();
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len {
        return Err(Error::Shape(format!(
            "state length {len} is not a perfect square"
        )));
    }
    if psi.subnormalized {
        return Err(Error::InvalidArgument("state must be normalized".into()));
    }
    let m = CMatrix::<T>::from_fn(d, d, |i, j| psi.vec[i * d + j]);
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed");
    let vt = svd.v_t.as_ref().expect("svd computed");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let coefficients: Vec<T> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let basis_a = CMatrix::<T>::from_fn(d, d, |i, j| u[(i, order[j])]);
    // ψ_{ij} = Σ_k σ_k U[i,k]·(V†)[k,j], so |γ_k⟩_B has amplitudes V†[k,·].
    let basis_b = CMatrix::<T>::from_fn(d, d, |i, j| vt[(order[j], i)]);

    // Reconstruction check.
    let mut rebuilt = CVector::<T>::zeros(len);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                rebuilt[i * d + j] += c(coefficients[k]) * basis_a[(i, k)] * basis_b[(j, k)];
            }
        }
    }
    if (&rebuilt - &psi.vec).norm() > T::of(1e-10) {
        return Err(Error::Validation(
            "Schmidt reconstruction error exceeds 1e-10".into(),
        ));
    }
    Ok(BipartitePureState {
        vector: psi.clone(),
        local_dim: d,
        coefficients,
        basis_a,
        basis_b,
    })
}

impl<T: Scalar> BipartitePureState<T> {
    /// Reduced A-side spectrum `λ_j = coefficient_j²`, descending.
    pub fn schmidt_spectrum(&self) -> Vec<T> {
        self.coefficients.iter().map(|&s| s * s).collect()
    }

    /// Schmidt rank at the [`BOND_RANK_CUTOFF`] noise floor.
    pub fn schmidt_rank(&self) -> usize {
        let top = self.coefficients[0];
        self.coefficients
            .iter()
            .filter(|&&s| s > T::of(BOND_RANK_CUTOFF) * top)
            .count()
    }

    /// Reduced density operator on Alice's side.
    pub fn reduced_a(&self) -> Operator<T> {
        let d = self.local_dim;
        let mut mat = CMatrix::<T>::zeros(d, d);
        for k in 0..d {
            let col = self.basis_a.column(k);
            let w = c(self.coefficients[k] * self.coefficients[k]);
            for i in 0..d {
                for j in 0..d {
                    mat[(i, j)] += w * col[i] * col[j].conj();
                }
            }
        }
        Operator::new(mat, SystemLayout::single(d)).expect("square")
    }
}

/// `max_{η of Schmidt rank ≤ r} |⟨η|ψ⟩|² = Σ_{j ≤ r} λ_j` (Eckart–Young).
pub fn eckart_young_overlap<T: Scalar>(psi: &BipartitePureState<T>, r: usize) -> Result<T> {
    if r == 0 || r > psi.local_dim {
        return Err(Error::InvalidArgument(format!(
            "rank r = {r} outside 1..={}",
            psi.local_dim
        )));
    }
    Ok(psi
        .coefficients
        .iter()
        .take(r)
        .fold(T::zero(), |acc, &s| acc + s * s))
}

/// `min_{η of rank ≤ r} d_tr(ψ, η) = √(1 − Σ_{j≤r} λ_j)`.
pub fn distance_to_schmidt_rank<T: Scalar>(psi: &BipartitePureState<T>, r: usize) -> Result<T> {
    let overlap = eckart_young_overlap(psi, r)?;
    Ok((T::one() - overlap).max(T::zero()).sqrt())
}

/// α-Rényi entanglement entropy of the reduced state, in `[0, ln d]`.
/// `α = 1` is the von Neumann limit `−Σ λ ln λ`.
pub fn renyi_entanglement_entropy<T: Scalar>(psi: &BipartitePureState<T>, alpha: T) -> Result<T> {
    if alpha <= T::zero() {
        return Err(Error::InvalidArgument("Rényi order must be positive".into()));
    }
    let spectrum = psi.schmidt_spectrum();
    let floor = T::of(1e-300);
    let value = if (alpha - T::one()).abs() < T::of(1e-12) {
        -spectrum
            .iter()
            .filter(|&&p| p > floor)
            .fold(T::zero(), |acc, &p| acc + p * p.ln())
    } else {
        let power_sum = spectrum
            .iter()
            .filter(|&&p| p > floor)
            .fold(T::zero(), |acc, &p| acc + p.powf(alpha));
        power_sum.ln() / (T::one() - alpha)
    };
    Ok(value.max(T::zero()))
}

/// Probability distribution over shapes `λ ⊢ (N, d)`.
pub struct SpectrumDistribution<T: Scalar> {
    pub entries: Vec<(YoungDiagram, T)>,
}

impl<T: Scalar> SpectrumDistribution<T> {
    pub fn probability(&self, lambda: &YoungDiagram) -> Option<T> {
        self.entries.iter().find(|(l, _)| l == lambda).map(|&(_, p)| p)
    }

    /// CSV export: `lambda,probability` with `λ` as a bracketed row list.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,probability\n");
        for (lambda, p) in &self.entries {
            out.push_str(&format!(
                "\"{}\",{:.16e}\n",
                lambda.label(),
                p.to_f64().unwrap_or(f64::NAN)
            ));
        }
        out
    }
}

/// Weak Schur sampling distribution: `p(λ) = tr[Π_λ ρ^{⊗N}]` with `Π_λ` the
/// isotypic projector, computed in the Schur basis.
pub fn weak_schur_distribution<T: Scalar>(
    rho: &Operator<T>,
    n: usize,
) -> Result<SpectrumDistribution<T>> {
    let d = rho.dim();
    let tr = rho.trace();
    if (tr - Complex::new(T::one(), T::zero())).norm_sqr().sqrt() > T::of(1e-9) {
        return Err(Error::InvalidArgument("state must have unit trace".into()));
    }
    let basis = build_schur_basis::<T>(n, d)?;
    let mut power = rho.mat.clone();
    for _ in 1..n {
        power = power.kronecker(&rho.mat);
    }
    let y = basis.to_schur(&power);
    let mut entries = Vec::new();
    let mut total = T::zero();
    for b in &basis.blocks {
        let mut p = T::zero();
        for j in 0..b.dim_v {
            for m in 0..b.dim_w {
                let col = basis.col_index(b, j, m);
                p += y[(col, col)].re;
            }
        }
        total += p;
        entries.push((b.lambda.clone(), p));
    }
    if (total - T::one()).abs() > T::of(1e-10) {
        return Err(Error::Validation(format!(
            "weak Schur probabilities sum to {}",
            total.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(SpectrumDistribution { entries })
}

/// Rank of the reduced state across every contiguous cut `k | k+1` of an
/// n-partite state, with the [`BOND_RANK_CUTOFF`] singular-value floor.
pub fn bond_dimension_profile<T: Scalar>(
    psi: &StateVector<T>,
    dims: &[usize],
) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    if total != psi.vec.len() {
        return Err(Error::Shape(format!(
            "dims product {total} ≠ state length {}",
            psi.vec.len()
        )));
    }
    let mut profile = Vec::with_capacity(dims.len().saturating_sub(1));
    for cut in 1..dims.len() {
        let rows: usize = dims[..cut].iter().product();
        let cols = total / rows;
        let m = CMatrix::<T>::from_fn(rows, cols, |i, j| psi.vec[i * cols + j]);
        let svd = m.svd(false, false);
        let top = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > T::of(BOND_RANK_CUTOFF) * top)
            .count();
        profile.push(rank);
    }
    Ok(profile)
}

/// Pad a bipartite state to `n` parties: `ψ ⊗ |0⟩^{⊗(n−2)}` with pad factors
/// of the same dimension as the second party. Bond ranks and the distance to
/// Schmidt rank `r` (as a distance to `MPS^{r,n}` on the first cut) are
/// unchanged.
pub fn pad_state<T: Scalar>(psi: &StateVector<T>, n: usize) -> Result<StateVector<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument("padding needs n ≥ 2".into()));
    }
    if psi.layout.n_factors() != 2 {
        return Err(Error::Shape("pad_state expects a bipartite layout".into()));
    }
    if n == 2 {
        return Ok(psi.clone());
    }
    let pad_dim = psi.layout.factor(1).0;
    let mut dims: Vec<usize> = vec![psi.layout.factor(0).0, pad_dim];
    let mut vec = psi.vec.clone();
    for _ in 2..n {
        dims.push(pad_dim);
        let mut padded = CVector::<T>::zeros(vec.len() * pad_dim);
        for (i, &z) in vec.iter().enumerate() {
            padded[i * pad_dim] = z; // tensor with |0⟩
        }
        vec = padded;
    }
    Ok(StateVector {
        vec,
        layout: SystemLayout::untagged(&dims),
        subnormalized: psi.subnormalized,
    })
}

/// Independent maximization oracle for [`eckart_young_overlap`]: alternating
/// updates of `η = A Bᵀ` (rank-r factors) from a random start, no SVD of the
/// amplitude matrix involved.
pub fn max_overlap_rank_r_als<T: Scalar, R: Rng + ?Sized>(
    psi: &BipartitePureState<T>,
    r: usize,
    iters: usize,
    rng: &mut R,
) -> T {
    let d = psi.local_dim;
    let m = CMatrix::<T>::from_fn(d, d, |i, j| psi.vector.vec[i * d + j]);
    let gram = m.adjoint() * &m;
    let mut best = T::zero();
    for _restart in 0..4 {
        // Orthonormalized subspace iteration on M†M for the top-r right
        // singular subspace; the optimal rank-r η then projects onto it.
        let mut b = CMatrix::<T>::from_fn(d, r, |_, _| {
            Complex::new(
                T::of(rng.gen::<f64>() - 0.5),
                T::of(rng.gen::<f64>() - 0.5),
            )
        });
        for _ in 0..iters {
            b = &gram * b;
            // Modified Gram–Schmidt.
            for k in 0..r {
                for prev in 0..k {
                    let overlap = b.column(prev).dotc(&b.column(k));
                    let prev_col: CVector<T> = b.column(prev).into();
                    let mut col = b.column_mut(k);
                    for i in 0..d {
                        col[i] -= overlap * prev_col[i];
                    }
                }
                let norm = b.column(k).norm();
                if norm > T::zero() {
                    let mut col = b.column_mut(k);
                    for i in 0..d {
                        col[i] /= c(norm);
                    }
                }
            }
        }
        let overlap = (&m * &b).norm_squared();
        best = best.max(overlap);
    }
    best
}
