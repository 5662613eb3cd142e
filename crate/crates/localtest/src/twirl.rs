//! Group averaging: exact collective twirls (implemented in the Schur basis),
//! the stabilizer-subgroup twirl, and two independent cross-check oracles
//! (commutant projection and seeded Monte-Carlo).

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{Operator, SystemLayout};
use crate::scalar::{c, CMatrix, RMatrix, Scalar};
use crate::schur::{build_bipartite_basis, build_schur_basis, BipartiteSchurBasis, SchurBasis};
use crate::symrep::all_permutations;
use crate::{Error, Result};

/// Pseudo-inverse cutoff for the commutant-projection Gram matrix, relative
/// to the largest singular value.
pub const GRAM_PINV_CUTOFF: f64 = 1e-12;

/// Haar-random unitary: complex Ginibre matrix, QR decomposition, and
/// R-diagonal phase normalization (maps QR's gauge freedom away, giving the
/// exact Haar distribution).
pub fn sample_haar_unitary<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    let inv_sqrt2 = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
        Complex::new(
            T::of(rng.sample::<f64, _>(StandardNormal)) * inv_sqrt2,
            T::of(rng.sample::<f64, _>(StandardNormal)) * inv_sqrt2,
        )
    });
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let modulus = rkk.modulus();
        let phase = if modulus > T::zero() {
            rkk / c(modulus)
        } else {
            Complex::new(T::one(), T::zero())
        };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Haar-random element of the stabilizer `G = {U : U|0⟩ = |0⟩}`, i.e.
/// `U = 1 ⊕ V` with `V` Haar on `U(d−1)`.
pub fn sample_stabilizer_unitary<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> CMatrix<T> {
    assert!(dim >= 2, "stabilizer twirl needs d ≥ 2");
    let v = sample_haar_unitary::<T, _>(dim - 1, rng);
    let mut u = CMatrix::<T>::zeros(dim, dim);
    u[(0, 0)] = Complex::new(T::one(), T::zero());
    for i in 0..dim - 1 {
        for j in 0..dim - 1 {
            u[(i + 1, j + 1)] = v[(i, j)];
        }
    }
    u
}

/// The group being averaged over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwirlGroup {
    /// Full unitary group `U(d)`.
    FullUnitary,
    /// Stabilizer of `|0⟩`: `{1 ⊕ V : V ∈ U(d−1)}`.
    StabilizerOfZero,
}

/// A collective twirl: the same group element applied to every target factor.
#[derive(Clone, Debug)]
pub struct TwirlSpec {
    pub group: TwirlGroup,
    /// Factor indices (into the operator's layout) that receive the unitary.
    pub targets: Vec<usize>,
    pub n_copies: usize,
    pub local_dim: usize,
}

impl TwirlSpec {
    /// Full Haar twirl of every factor of `(C^d)^{⊗N}`.
    pub fn full(n: usize, d: usize) -> Self {
        TwirlSpec {
            group: TwirlGroup::FullUnitary,
            targets: (0..n).collect(),
            n_copies: n,
            local_dim: d,
        }
    }

    /// Haar twirl of the B factors of the interleaved bipartite layout.
    pub fn bipartite_b(n: usize, d: usize) -> Self {
        TwirlSpec {
            group: TwirlGroup::FullUnitary,
            targets: (0..n).map(|k| 2 * k + 1).collect(),
            n_copies: n,
            local_dim: d,
        }
    }

    /// Stabilizer-of-`|0⟩` twirl of every factor of `(C^d)^{⊗N}`.
    pub fn stabilizer(n: usize, d: usize) -> Self {
        TwirlSpec {
            group: TwirlGroup::StabilizerOfZero,
            targets: (0..n).collect(),
            n_copies: n,
            local_dim: d,
        }
    }

    pub fn validate(&self, layout: &SystemLayout) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::InvalidArgument("empty twirl target set".into()));
        }
        for &t in &self.targets {
            if t >= layout.n_factors() {
                return Err(Error::Shape(format!(
                    "target factor {t} out of range (layout has {})",
                    layout.n_factors()
                )));
            }
            if layout.factor(t).0 != self.local_dim {
                return Err(Error::Shape(format!(
                    "target factor {t} has dim {} ≠ local dim {}",
                    layout.factor(t).0,
                    self.local_dim
                )));
            }
        }
        if self.group == TwirlGroup::StabilizerOfZero && self.local_dim < 2 {
            return Err(Error::InvalidArgument("stabilizer twirl needs d ≥ 2".into()));
        }
        Ok(())
    }
}

/// Embed `u` collectively: `⊗_k (u if k ∈ targets else I)` over the layout.
pub fn embed_collective<T: Scalar>(
    u: &CMatrix<T>,
    layout: &SystemLayout,
    targets: &[usize],
) -> CMatrix<T> {
    let mut out = CMatrix::<T>::identity(1, 1);
    for k in 0..layout.n_factors() {
        if targets.contains(&k) {
            out = out.kronecker(u);
        } else {
            let dim = layout.factor(k).0;
            let id = CMatrix::<T>::identity(dim, dim);
            out = out.kronecker(&id);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exact twirls in the Schur basis.
// ---------------------------------------------------------------------------

/// `∫ U^{⊗N} M U^{†⊗N} dU` on a raw matrix, given a prebuilt basis: zero the
/// cross-λ blocks and replace each W_λ block with its normalized trace.
pub fn haar_twirl_in_basis<T: Scalar>(m: &CMatrix<T>, basis: &SchurBasis<T>) -> CMatrix<T> {
    let total = basis.total_dim();
    let y = basis.to_schur(m);
    let mut out = CMatrix::<T>::zeros(total, total);
    for b in &basis.blocks {
        let inv_w = c(T::one() / T::of_usize(b.dim_w));
        for j1 in 0..b.dim_v {
            for j2 in 0..b.dim_v {
                let mut d_entry = Complex::<T>::zero();
                for m in 0..b.dim_w {
                    d_entry += y[(basis.col_index(b, j1, m), basis.col_index(b, j2, m))];
                }
                d_entry *= inv_w;
                for m in 0..b.dim_w {
                    out[(basis.col_index(b, j1, m), basis.col_index(b, j2, m))] = d_entry;
                }
            }
        }
    }
    basis.from_schur(&out)
}

/// Exact collective Haar twirl `∫ U^{⊗N} X U^{†⊗N} dU` on `(C^d)^{⊗N}`.
pub fn haar_twirl<T: Scalar>(x: &Operator<T>, n: usize, d: usize) -> Result<Operator<T>> {
    let basis = build_schur_basis::<T>(n, d)?;
    if x.dim() != basis.total_dim() {
        return Err(Error::Shape(format!(
            "operator dim {} ≠ d^N = {}",
            x.dim(),
            basis.total_dim()
        )));
    }
    Operator::new(haar_twirl_in_basis(&x.mat, &basis), x.layout.clone())
}

/// B-side twirl on a raw matrix, given a prebuilt bipartite basis: blocks
/// with different λ_B vanish, equal-λ_B blocks are averaged over the W_B
/// index (Schur orthogonality for the U(d) irreps `Q_λ`).
pub fn haar_twirl_b_in_basis<T: Scalar>(
    m: &CMatrix<T>,
    basis: &BipartiteSchurBasis<T>,
) -> CMatrix<T> {
    let total = basis.total_dim();
    let y = basis.to_schur(m);
    let mut out = CMatrix::<T>::zeros(total, total);
    for rb in &basis.blocks {
        for cb in &basis.blocks {
            if rb.lambda_b != cb.lambda_b {
                continue;
            }
            let dim_wb = rb.dim_wb;
            let inv_wb = c(T::one() / T::of_usize(dim_wb));
            for ja1 in 0..rb.dim_va {
                for jb1 in 0..rb.dim_vb {
                    for ma1 in 0..rb.dim_wa {
                        for ja2 in 0..cb.dim_va {
                            for jb2 in 0..cb.dim_vb {
                                for ma2 in 0..cb.dim_wa {
                                    let mut acc = Complex::<T>::zero();
                                    for mb in 0..dim_wb {
                                        acc += y[(
                                            rb.col(ja1, jb1, ma1, mb),
                                            cb.col(ja2, jb2, ma2, mb),
                                        )];
                                    }
                                    acc *= inv_wb;
                                    for mb in 0..dim_wb {
                                        out[(
                                            rb.col(ja1, jb1, ma1, mb),
                                            cb.col(ja2, jb2, ma2, mb),
                                        )] = acc;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    basis.from_schur(&out)
}

/// Exact B-side twirl `∫ U_B^{⊗N} X U_B^{†⊗N} dU` of an operator on
/// `H_AB^{⊗N}` in the interleaved `A₁B₁A₂B₂…` layout.
pub fn haar_twirl_b<T: Scalar>(x: &Operator<T>, n: usize, d: usize) -> Result<Operator<T>> {
    let basis = build_bipartite_basis::<T>(n, d)?;
    if x.dim() != basis.total_dim() {
        return Err(Error::Shape(format!(
            "operator dim {} ≠ d^2N = {}",
            x.dim(),
            basis.total_dim()
        )));
    }
    Operator::new(haar_twirl_b_in_basis(&x.mat, &basis), x.layout.clone())
}

/// Exact collective twirl over `G = {1 ⊕ V : V ∈ U(d−1)}` on `(C^d)^{⊗N}`.
///
/// Per factor `C^d = C|0⟩ ⊕ C^{d−1}`; a matrix block between sectors with
/// `j` and `k` non-zero positions picks up a central phase `e^{iφ(j−k)}`
/// under `V ↦ e^{iφ}V` and averages to zero unless `j = k`; equal-count
/// blocks undergo a full Haar twirl at `(j, d−1)`.
pub fn stabilizer_twirl<T: Scalar>(x: &Operator<T>, n: usize, d: usize) -> Result<Operator<T>> {
    let out = stabilizer_twirl_with_spectator(&x.mat, n, d, 1)?;
    Operator::new(out, x.layout.clone())
}

/// [`stabilizer_twirl`] on a raw matrix over `(C^d)^{⊗N} ⊗ C^s`, where the
/// group acts collectively on the `N` copies and trivially on the low-order
/// spectator index (flat index `a·s + j`).
///
/// The twirl is linear and touches only the copy indices, so it applies
/// independently to each `(j, j')` spectator sub-block.
pub fn stabilizer_twirl_with_spectator<T: Scalar>(
    x: &CMatrix<T>,
    n: usize,
    d: usize,
    spectator: usize,
) -> Result<CMatrix<T>> {
    if d < 2 {
        return Err(Error::InvalidArgument("stabilizer twirl needs d ≥ 2".into()));
    }
    if spectator == 0 {
        return Err(Error::InvalidArgument("spectator dimension must be ≥ 1".into()));
    }
    if n > crate::schur::MAX_COPIES {
        return Err(Error::TooLarge(format!(
            "N capped at {}",
            crate::schur::MAX_COPIES
        )));
    }
    let total = d.pow(n as u32) * spectator;
    if x.nrows() != total || x.ncols() != total {
        return Err(Error::Shape(format!(
            "operator is {}×{}, expected d^N·s = {total}",
            x.nrows(),
            x.ncols()
        )));
    }
    let e = d - 1; // dimension of the twirled sector
    let s = spectator;
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * d;
    }
    // Flat copy index of the sector element `v ∈ (C^{d−1})^{⊗|S|}` placed on
    // the positions of S (ascending), zeros elsewhere.
    let sector_index = |positions: &[usize], v: usize| -> usize {
        let k = positions.len();
        let mut idx = 0;
        let mut rem = v;
        for j in (0..k).rev() {
            idx += (1 + rem % e) * strides[positions[j]];
            rem /= e;
        }
        idx
    };

    let mut bases: Vec<Option<SchurBasis<T>>> = (0..=n).map(|_| None).collect();
    let mut out = CMatrix::<T>::zeros(total, total);
    let subsets: Vec<Vec<usize>> = (0..1usize << n)
        .map(|mask| (0..n).filter(|k| mask >> k & 1 == 1).collect())
        .collect();
    for s_row in &subsets {
        for s_col in &subsets {
            if s_row.len() != s_col.len() {
                continue; // averages to zero by the central phase
            }
            let k = s_row.len();
            if k == 0 {
                for jr in 0..s {
                    for jc in 0..s {
                        out[(jr, jc)] = x[(jr, jc)];
                    }
                }
                continue;
            }
            let block_dim = e.pow(k as u32);
            if bases[k].is_none() {
                bases[k] = Some(build_schur_basis::<T>(k, e)?);
            }
            let mut block = CMatrix::<T>::zeros(block_dim, block_dim);
            for jr in 0..s {
                for jc in 0..s {
                    for vr in 0..block_dim {
                        let ir = sector_index(s_row, vr) * s + jr;
                        for vc in 0..block_dim {
                            block[(vr, vc)] = x[(ir, sector_index(s_col, vc) * s + jc)];
                        }
                    }
                    let twirled = haar_twirl_in_basis(&block, bases[k].as_ref().unwrap());
                    for vr in 0..block_dim {
                        let ir = sector_index(s_row, vr) * s + jr;
                        for vc in 0..block_dim {
                            out[(ir, sector_index(s_col, vc) * s + jc)] = twirled[(vr, vc)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Oracle #1: commutant projection.
// ---------------------------------------------------------------------------

/// Orthogonal projection of `X` onto `span{P(π)}` via the permutation Gram
/// matrix `G_{σπ} = d^{cycles(σ⁻¹π)}` and its pseudo-inverse.
pub fn commutant_projection_twirl<T: Scalar>(
    x: &Operator<T>,
    n: usize,
    d: usize,
) -> Result<Operator<T>> {
    if n > 4 {
        return Err(Error::TooLarge("commutant projection capped at N ≤ 4".into()));
    }
    let total = d.pow(n as u32);
    if x.dim() != total {
        return Err(Error::Shape(format!("operator dim {} ≠ d^N = {total}", x.dim())));
    }
    let perms = all_permutations(n);
    let nf = perms.len();
    let maps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| {
            crate::symrep::perm_action::<T>(p, n, d)
                .expect("sizes checked")
                .mat
                .column_iter()
                .map(|col| col.iter().position(|z| z.re > T::of(0.5)).unwrap())
                .collect()
        })
        .collect();

    let gram = RMatrix::<T>::from_fn(nf, nf, |s, p| {
        let composed = perms[s].inverse().compose(&perms[p]);
        T::of_usize(d).powi(composed.n_cycles() as i32)
    });
    // b_π = tr(P(π)† X) = Σ_j X[map_π(j), j].
    let b: Vec<Complex<T>> = maps
        .iter()
        .map(|map| {
            let mut acc = Complex::<T>::zero();
            for j in 0..total {
                acc += x.mat[(map[j], j)];
            }
            acc
        })
        .collect();

    // a = G⁺ b, pseudo-inverse with relative singular-value cutoff.
    let svd = gram.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed");
    let vt = svd.v_t.as_ref().expect("svd computed");
    let sigma_max = svd.singular_values.max();
    let cutoff = T::of(GRAM_PINV_CUTOFF) * sigma_max;
    let mut a = vec![Complex::<T>::zero(); nf];
    for r in 0..svd.singular_values.len() {
        let s = svd.singular_values[r];
        if s <= cutoff {
            continue;
        }
        // ⟨u_r, b⟩ / s · v_r (G is real symmetric; b may be complex).
        let mut proj = Complex::<T>::zero();
        for i in 0..nf {
            proj += b[i] * c(u[(i, r)]);
        }
        proj /= c(s);
        for i in 0..nf {
            a[i] += proj * c(vt[(r, i)]);
        }
    }

    let mut out = CMatrix::<T>::zeros(total, total);
    for (p, map) in maps.iter().enumerate() {
        if a[p] == Complex::<T>::zero() {
            continue;
        }
        for j in 0..total {
            out[(map[j], j)] += a[p];
        }
    }
    Operator::new(out, x.layout.clone())
}

// ---------------------------------------------------------------------------
// Oracle #2: Monte-Carlo.
// ---------------------------------------------------------------------------

/// Empirical twirl estimate: shot mean plus the per-shot scatter used for
/// k-sigma agreement tests.
pub struct MonteCarloEstimate<T: Scalar> {
    pub mean: CMatrix<T>,
    /// RMS Frobenius deviation of a single shot from the mean.
    pub shot_scatter: T,
    pub shots: usize,
}

impl<T: Scalar> MonteCarloEstimate<T> {
    /// Standard error of the mean in Frobenius norm.
    pub fn std_error(&self) -> T {
        self.shot_scatter / T::of_usize(self.shots).sqrt()
    }

    /// `‖mean − exact‖_F ≤ k·(scatter/√shots)`, with a small absolute floor
    /// so exact fixed points (zero scatter) still pass.
    pub fn agrees_with(&self, exact: &CMatrix<T>, k_sigma: T) -> bool {
        (&self.mean - exact).norm() <= k_sigma * self.std_error() + T::of(1e-9)
    }
}

/// Monte-Carlo twirl with an injected group-element sampler (`shot ↦ U`).
/// This is the test hook: forcing `U = I` makes the average the identity map.
pub fn monte_carlo_twirl_with<T, F>(
    x: &Operator<T>,
    spec: &TwirlSpec,
    shots: usize,
    mut sampler: F,
) -> Result<MonteCarloEstimate<T>>
where
    T: Scalar,
    F: FnMut(usize) -> CMatrix<T>,
{
    if shots == 0 {
        return Err(Error::InvalidArgument("shots ≥ 1 required".into()));
    }
    spec.validate(&x.layout)?;
    let dim = x.dim();
    let mut sum = CMatrix::<T>::zeros(dim, dim);
    let mut sum_norm_sq = T::zero();
    for shot in 0..shots {
        let u = sampler(shot);
        if u.nrows() != spec.local_dim || u.ncols() != spec.local_dim {
            return Err(Error::Shape(format!(
                "sampled element must be {0}×{0}",
                spec.local_dim
            )));
        }
        let w = embed_collective(&u, &x.layout, &spec.targets);
        let conj = &w * &x.mat * w.adjoint();
        sum_norm_sq += conj.norm_squared();
        sum += conj;
    }
    let mean = sum / c(T::of_usize(shots));
    let var = if shots > 1 {
        ((sum_norm_sq - T::of_usize(shots) * mean.norm_squared()) / T::of_usize(shots - 1))
            .max(T::zero())
    } else {
        T::zero()
    };
    Ok(MonteCarloEstimate {
        mean,
        shot_scatter: var.sqrt(),
        shots,
    })
}

/// Seeded Monte-Carlo twirl: empirical mean over Haar samples of the group in
/// `spec`, deterministic per `(seed, shot index)` (shots are independent RNG
/// streams, so the result is order-independent and parallelizable).
pub fn monte_carlo_twirl<T: Scalar>(
    x: &Operator<T>,
    spec: &TwirlSpec,
    shots: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<T>> {
    let group = spec.group;
    let d = spec.local_dim;
    monte_carlo_twirl_with(x, spec, shots, |shot| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot as u64);
        match group {
            TwirlGroup::FullUnitary => sample_haar_unitary::<T, _>(d, &mut rng),
            TwirlGroup::StabilizerOfZero => sample_stabilizer_unitary::<T, _>(d, &mut rng),
        }
    })
}

#[cfg(test)]
mod sampler_tests {
    use super::*;

    #[test]
    fn sampled_unitary_is_unitary_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = sample_haar_unitary::<f64, _>(5, &mut rng);
        let gram = &u * u.adjoint();
        assert!((gram - CMatrix::<f64>::identity(5, 5)).norm() < 1e-12);

        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let u2 = sample_haar_unitary::<f64, _>(5, &mut rng2);
        assert_eq!(u, u2);
    }

    #[test]
    fn first_moment_vanishes() {
        // E[U] = 0 for Haar; crude Monte-Carlo sanity check.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut acc = CMatrix::<f64>::zeros(2, 2);
        let shots = 2000;
        for _ in 0..shots {
            acc += sample_haar_unitary::<f64, _>(2, &mut rng);
        }
        acc /= num_complex::Complex64::new(shots as f64, 0.0);
        assert!(acc.norm() < 0.1, "mean norm {}", acc.norm());
    }

    #[test]
    fn stabilizer_sample_fixes_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = sample_stabilizer_unitary::<f64, _>(4, &mut rng);
        let gram = &u * u.adjoint();
        assert!((gram - CMatrix::<f64>::identity(4, 4)).norm() < 1e-12);
        assert!((u[(0, 0)] - num_complex::Complex64::ONE).norm() < 1e-15);
        for i in 1..4 {
            assert!(u[(i, 0)].norm() < 1e-15);
            assert!(u[(0, i)].norm() < 1e-15);
        }
    }
}
