//! Tester transformations on `N` copies of a bipartite state: the B-side
//! twirl `T̃`, simultaneous-permutation symmetrization `T̃̃`, localization to
//! Alice's side `T̂`, the purity projector `Π`, the purity embedding
//! `T̄ = Π T̃̃ Π`, and the one-way LOCC tester.
//!
//! A tester is a two-outcome test described by an operator `0 ⊑ T ⊑ I` on
//! `H_AB^{⊗N}` (interleaved `A₁B₁A₂B₂…` factor order); it accepts `ρ` with
//! probability `tr[T ρ^{⊗N}]`.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{
    factor_permutation_matrix, hermitian_eigen, validate_povm_element, Operator, StateVector,
    SystemLayout,
};
use crate::locc::l_lambda;
use crate::scalar::{c, CMatrix, CVector, Scalar};
use crate::schur::{build_bipartite_basis, BipartiteSchurBasis};
use crate::symrep::{all_permutations, simultaneous_perm};
use crate::twirl::haar_twirl_b_in_basis;
use crate::young::YoungDiagram;
use crate::{Error, Result};

/// Spectral slack allowed on the `0 ⊑ T ⊑ I` constraint.
pub const TESTER_TOL: f64 = 1e-9;
/// Acceptance probabilities are clamped to `[0,1]` at this tolerance; larger
/// excursions are a bug signal.
pub const CLAMP_TOL: f64 = 1e-12;

/// A two-outcome test on `H_AB^{⊗N}`.
#[derive(Clone)]
pub struct Tester<T: Scalar> {
    pub op: Operator<T>,
    pub n_copies: usize,
    pub local_dim: usize,
}

/// A tester acting non-trivially only on Alice's copies: the stored operator
/// lives on `H_A^{⊗N}`; the B-side identity is implicit.
#[derive(Clone)]
pub struct LocalTester<T: Scalar> {
    pub a_side: Operator<T>,
    pub n_copies: usize,
    pub local_dim: usize,
}

fn check_povm_range<T: Scalar>(op: &Operator<T>, what: &str) -> Result<()> {
    let (min, max) = validate_povm_element(op)?;
    let tol = T::of(TESTER_TOL);
    if min < -tol || max > T::one() + tol {
        return Err(Error::Validation(format!(
            "{what} spectrum [{}, {}] outside [0,1]",
            min.to_f64().unwrap_or(f64::NAN),
            max.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// `ρ^{⊗N}` in the interleaved bipartite layout, from `ρ` on `H_AB`.
fn density_power<T: Scalar>(rho: &Operator<T>, n: usize, d: usize) -> Result<Operator<T>> {
    if rho.dim() != d * d {
        return Err(Error::Shape(format!(
            "state must be a density operator on C^{d} ⊗ C^{d}"
        )));
    }
    let tr = rho.trace();
    if (tr - Complex::new(T::one(), T::zero())).norm_sqr().sqrt() > T::of(1e-9) {
        return Err(Error::InvalidArgument("state must have unit trace".into()));
    }
    let mut mat = rho.mat.clone();
    for _ in 1..n {
        mat = mat.kronecker(&rho.mat);
    }
    Operator::new(mat, SystemLayout::bipartite_copies(n, d))
}

fn clamp_probability<T: Scalar>(value: T) -> Result<T> {
    if value < -T::of(TESTER_TOL) || value > T::one() + T::of(TESTER_TOL) {
        return Err(Error::Validation(format!(
            "acceptance probability {} clamps by more than {TESTER_TOL}",
            value.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(value.max(T::zero()).min(T::one()))
}

impl<T: Scalar> Tester<T> {
    pub fn new(op: Operator<T>, n: usize, d: usize) -> Result<Self> {
        let expected = d.pow(2 * n as u32);
        if op.dim() != expected {
            return Err(Error::Shape(format!(
                "tester dim {} ≠ d^2N = {expected}",
                op.dim()
            )));
        }
        check_povm_range(&op, "tester")?;
        Ok(Tester {
            op,
            n_copies: n,
            local_dim: d,
        })
    }

    pub fn identity(n: usize, d: usize) -> Self {
        let dim = d.pow(2 * n as u32);
        Tester {
            op: Operator::new(
                CMatrix::<T>::identity(dim, dim),
                SystemLayout::bipartite_copies(n, d),
            )
            .expect("square"),
            n_copies: n,
            local_dim: d,
        }
    }

    /// `tr[T ρ^{⊗N}]`, clamped to `[0,1]`.
    pub fn acceptance(&self, rho: &Operator<T>) -> Result<T> {
        let power = density_power(rho, self.n_copies, self.local_dim)?;
        clamp_probability((&self.op.mat * &power.mat).trace().re)
    }

    /// Acceptance on the exact `N`-copy operator (already on `H_AB^{⊗N}`).
    pub fn acceptance_on_power(&self, rho_power: &Operator<T>) -> Result<T> {
        if rho_power.dim() != self.op.dim() {
            return Err(Error::Shape("N-copy state dimension mismatch".into()));
        }
        clamp_probability((&self.op.mat * &rho_power.mat).trace().re)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_copies": self.n_copies,
            "local_dim": self.local_dim,
            "operator": self.op.to_json(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let n = value["n_copies"]
            .as_u64()
            .ok_or_else(|| Error::Config("tester JSON missing n_copies".into()))?
            as usize;
        let d = value["local_dim"]
            .as_u64()
            .ok_or_else(|| Error::Config("tester JSON missing local_dim".into()))?
            as usize;
        let op = Operator::from_json(&value["operator"])?;
        Tester::new(op, n, d)
    }
}

impl<T: Scalar> LocalTester<T> {
    pub fn new(a_side: Operator<T>, n: usize, d: usize) -> Result<Self> {
        if a_side.dim() != d.pow(n as u32) {
            return Err(Error::Shape(format!(
                "A-side dim {} ≠ d^N = {}",
                a_side.dim(),
                d.pow(n as u32)
            )));
        }
        check_povm_range(&a_side, "local tester A-side")?;
        Ok(LocalTester {
            a_side,
            n_copies: n,
            local_dim: d,
        })
    }

    /// The full-space operator `M_A ⊗ I_B` in the interleaved layout.
    pub fn embed(&self) -> Result<Operator<T>> {
        let n = self.n_copies;
        let d = self.local_dim;
        let half = d.pow(n as u32);
        let grouped = self.a_side.mat.kronecker(&CMatrix::<T>::identity(half, half));
        // Grouped order A₁…A_N B₁…B_N → interleaved A₁B₁…A_N B_N.
        let mut pi = Vec::with_capacity(2 * n);
        for k in 0..n {
            pi.push(2 * k);
        }
        for k in 0..n {
            pi.push(2 * k + 1);
        }
        let untagged = SystemLayout::untagged(&vec![d; 2 * n]);
        let p = factor_permutation_matrix::<T>(&untagged, &pi)?;
        Operator::new(
            &p.mat * grouped * p.mat.adjoint(),
            SystemLayout::bipartite_copies(n, d),
        )
    }

    /// `tr[(M_A ⊗ I_B) ρ^{⊗N}]`, clamped to `[0,1]`.
    pub fn acceptance(&self, rho: &Operator<T>) -> Result<T> {
        let full = self.embed()?;
        let power = density_power(rho, self.n_copies, self.local_dim)?;
        clamp_probability((&full.mat * &power.mat).trace().re)
    }
}

/// `tr[T ρ^{⊗N}]` — free-function form of [`Tester::acceptance`].
pub fn acceptance_probability<T: Scalar>(t: &Tester<T>, rho: &Operator<T>) -> Result<T> {
    t.acceptance(rho)
}

/// `T̃ = ∫ U_B^{⊗N} T U_B^{†⊗N} dU` — the B-side twirled tester.
pub fn twirl_tester<T: Scalar>(t: &Tester<T>) -> Result<Tester<T>> {
    let basis = build_bipartite_basis::<T>(t.n_copies, t.local_dim)?;
    twirl_tester_in_basis(t, &basis)
}

/// [`twirl_tester`] with a prebuilt basis (avoids rebuilding in pipelines).
pub fn twirl_tester_in_basis<T: Scalar>(
    t: &Tester<T>,
    basis: &BipartiteSchurBasis<T>,
) -> Result<Tester<T>> {
    let mat = haar_twirl_b_in_basis(&t.op.mat, basis);
    Tester::new(
        Operator::new(mat, t.op.layout.clone())?,
        t.n_copies,
        t.local_dim,
    )
}

/// `T̃̃ = (1/N!) Σ_π (P_A ⊗ P_B)(π) T (P_A ⊗ P_B)(π)†` — simultaneous
/// permutation symmetrization. Acceptance on any `ρ^{⊗N}` is unchanged.
pub fn permutation_symmetrize<T: Scalar>(t: &Tester<T>) -> Result<Tester<T>> {
    let n = t.n_copies;
    let d = t.local_dim;
    let dim = t.op.dim();
    let mut acc = CMatrix::<T>::zeros(dim, dim);
    let perms = all_permutations(n);
    for pi in &perms {
        let p = simultaneous_perm::<T>(pi, n, d)?;
        acc += &p.mat * &t.op.mat * p.mat.adjoint();
    }
    acc /= c(T::of_usize(perms.len()));
    Tester::new(Operator::new(acc, t.op.layout.clone())?, n, d)
}

/// `Π = Σ_λ (1/dim V_λ)|I_{V_λ}⟩⟩⟨⟨I_{V_λ}| ⊗ I_{W_A} ⊗ I_{W_B}`, equal to
/// the simultaneous-permutation symmetrizer `(1/N!) Σ_π P_A(π) ⊗ P_B(π)`.
/// Projects onto the span of pure tensor powers.
pub fn purity_projector<T: Scalar>(n: usize, d: usize) -> Result<Tester<T>> {
    let dim = d
        .checked_pow(2 * n as u32)
        .filter(|&t| t <= crate::schur::MAX_TOTAL_DIM)
        .ok_or_else(|| Error::TooLarge("d^2N exceeds the dense guard".into()))?;
    let mut acc = CMatrix::<T>::zeros(dim, dim);
    let perms = all_permutations(n);
    for pi in &perms {
        acc += &simultaneous_perm::<T>(pi, n, d)?.mat;
    }
    acc /= c(T::of_usize(perms.len()));
    Tester::new(
        Operator::new(acc, SystemLayout::bipartite_copies(n, d))?,
        n,
        d,
    )
}

/// `T̂` of the localization theorem: a tester on Alice's copies alone that
/// behaves identically to `T̃` on every pure tensor power.
///
/// In the bipartite Schur basis, `a_side = Σ_λ (1/(dim W_λ · dim V_λ))
/// I_{V_λ,A} ⊗ tr_{W_B}[⟨⟨I_{V_λ}| T̃ |I_{V_λ}⟩⟩]`, re-assembled in the
/// single-sided Schur basis of the A copies.
pub fn localize<T: Scalar>(t: &Tester<T>) -> Result<LocalTester<T>> {
    let basis = build_bipartite_basis::<T>(t.n_copies, t.local_dim)?;
    let twirled = twirl_tester_in_basis(t, &basis)?;
    let blocks = extract_paired_blocks(&twirled, &basis)?;

    let n = t.n_copies;
    let d = t.local_dim;
    let single = &basis.single;
    let half = single.total_dim();
    let mut y = CMatrix::<T>::zeros(half, half);
    for pb in &blocks {
        let sb = single
            .block(&pb.lambda)
            .expect("single block exists for every paired block");
        let scale = c(T::one() / T::of_usize(pb.dim_v * pb.dim_w));
        for j in 0..pb.dim_v {
            for m1 in 0..pb.dim_w {
                for m2 in 0..pb.dim_w {
                    y[(single.col_index(sb, j, m1), single.col_index(sb, j, m2))] =
                        pb.h[(m1, m2)] * scale;
                }
            }
        }
    }
    let a_mat = single.from_schur(&y);
    LocalTester::new(Operator::new(a_mat, SystemLayout::copies(n, d))?, n, d)
}

/// `T̄ = Π T̃̃ Π` where `T̃̃ = permutation_symmetrize(twirl_tester(T))`.
/// The commutation `[Π, T̃̃] = 0` is verified first (bug signal otherwise).
pub fn embed_purity<T: Scalar>(t: &Tester<T>) -> Result<Tester<T>> {
    let tt = permutation_symmetrize(&twirl_tester(t)?)?;
    let pi = purity_projector::<T>(t.n_copies, t.local_dim)?;
    let comm = &pi.op.mat * &tt.op.mat - &tt.op.mat * &pi.op.mat;
    if comm.norm() > T::of(TESTER_TOL) * T::of_usize(t.op.dim()).sqrt() {
        return Err(Error::Validation(format!(
            "[Π, T̃̃] norm {} exceeds tolerance",
            comm.norm().to_f64().unwrap_or(f64::NAN)
        )));
    }
    let mat = &pi.op.mat * &tt.op.mat * &pi.op.mat;
    Tester::new(
        Operator::new(mat, t.op.layout.clone())?,
        t.n_copies,
        t.local_dim,
    )
}

/// Per-λ data extracted from a B-twirled (or symmetrized) tester:
/// `H_λ = tr_{W_B}[⟨⟨I_{V_λ}| T' |I_{V_λ}⟩⟩]`, a `dim W_λ` square matrix.
pub struct PairedBlock<T: Scalar> {
    pub lambda: YoungDiagram,
    pub dim_v: usize,
    pub dim_w: usize,
    pub h: CMatrix<T>,
}

fn extract_paired_blocks<T: Scalar>(
    t: &Tester<T>,
    basis: &BipartiteSchurBasis<T>,
) -> Result<Vec<PairedBlock<T>>> {
    let y = basis.to_schur(&t.op.mat);
    let mut out = Vec::new();
    for b in &basis.blocks {
        if b.lambda_a != b.lambda_b {
            continue;
        }
        let mut h = CMatrix::<T>::zeros(b.dim_wa, b.dim_wa);
        for ma1 in 0..b.dim_wa {
            for ma2 in 0..b.dim_wa {
                let mut acc = Complex::<T>::zero();
                for mb in 0..b.dim_wb {
                    for j in 0..b.dim_va {
                        for k in 0..b.dim_va {
                            acc += y[(b.col(j, j, ma1, mb), b.col(k, k, ma2, mb))];
                        }
                    }
                }
                h[(ma1, ma2)] = acc;
            }
        }
        out.push(PairedBlock {
            lambda: b.lambda_a.clone(),
            dim_v: b.dim_va,
            dim_w: b.dim_wa,
            h,
        });
    }
    Ok(out)
}

/// The one-way LOCC tester together with the per-λ measurement blocks the
/// shot-level simulation consumes.
pub struct LoccTester<T: Scalar> {
    pub tester: Tester<T>,
    pub blocks: Vec<PairedBlock<T>>,
}

/// `T̂ = Σ_λ (1/(dim W_λ · dim V_λ)) L_λ ⊗ H_λ ⊗ I_{W_B}` on the block
/// `(λ,λ)` of the bipartite Schur basis, where `H_λ` is extracted from
/// `T̃̃` and `L_λ` is the LOCC-implementable operator on `V_A ⊗ V_B`.
/// Each `H_λ` must be PSD (bug signal otherwise).
pub fn locc_tester<T: Scalar>(t: &Tester<T>) -> Result<LoccTester<T>> {
    let basis = build_bipartite_basis::<T>(t.n_copies, t.local_dim)?;
    let tt = permutation_symmetrize(&twirl_tester_in_basis(t, &basis)?)?;
    let blocks = extract_paired_blocks(&tt, &basis)?;

    let total = basis.total_dim();
    let mut y = CMatrix::<T>::zeros(total, total);
    for pb in &blocks {
        let (eigs, _) = hermitian_eigen(&pb.h);
        let scale_tol = T::of(TESTER_TOL) * T::of_usize(pb.dim_v * pb.dim_w);
        if eigs[0] < -scale_tol {
            return Err(Error::Validation(format!(
                "⟨⟨I|S|I⟩⟩ block for λ={} has negative eigenvalue {}",
                pb.lambda,
                eigs[0].to_f64().unwrap_or(f64::NAN)
            )));
        }
        let b = basis
            .block(&pb.lambda, &pb.lambda)
            .expect("paired block exists");
        let l = l_lambda::<T>(pb.dim_v)?;
        let scale = c(T::one() / T::of_usize(pb.dim_v * pb.dim_w));
        for j1 in 0..pb.dim_v {
            for j2 in 0..pb.dim_v {
                for k1 in 0..pb.dim_v {
                    for k2 in 0..pb.dim_v {
                        let l_entry = l.mat[(j1 * pb.dim_v + j2, k1 * pb.dim_v + k2)];
                        if l_entry == Complex::<T>::zero() {
                            continue;
                        }
                        for m1 in 0..pb.dim_w {
                            for m2 in 0..pb.dim_w {
                                let entry = l_entry * pb.h[(m1, m2)] * scale;
                                for mb in 0..b.dim_wb {
                                    y[(b.col(j1, j2, m1, mb), b.col(k1, k2, m2, mb))] += entry;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mat = basis.from_schur(&y);
    let tester = Tester::new(
        Operator::new(mat, t.op.layout.clone())?,
        t.n_copies,
        t.local_dim,
    )?;
    Ok(LoccTester { tester, blocks })
}

// ---------------------------------------------------------------------------
// Random-instance helpers (shared by tests across modules and by the CLI).
// ---------------------------------------------------------------------------

/// A random valid tester: Gaussian Hermitian with the spectrum affinely
/// mapped into `[0.05, 0.95]`.
pub fn random_tester<T: Scalar, R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Tester<T> {
    let dim = d.pow(2 * n as u32);
    let g = CMatrix::<T>::from_fn(dim, dim, |_, _| {
        Complex::new(
            T::of(rng.sample::<f64, _>(StandardNormal)),
            T::of(rng.sample::<f64, _>(StandardNormal)),
        )
    });
    let h = (&g + g.adjoint()) * c(T::of(0.5));
    let (eigs, vecs) = hermitian_eigen(&h);
    let (lo, hi) = (eigs[0], eigs[eigs.len() - 1]);
    let span = (hi - lo).max(T::of(1e-12));
    let diag = CMatrix::<T>::from_fn(dim, dim, |i, j| {
        if i == j {
            c(T::of(0.05) + T::of(0.9) * (eigs[i] - lo) / span)
        } else {
            Complex::<T>::zero()
        }
    });
    let mat = &vecs * diag * vecs.adjoint();
    Tester::new(
        Operator::new(mat, SystemLayout::bipartite_copies(n, d)).expect("square"),
        n,
        d,
    )
    .expect("spectrum in [0.05, 0.95]")
}

/// A random full-rank density operator (Gaussian Wishart, trace-normalized).
pub fn random_density<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    layout: SystemLayout,
    rng: &mut R,
) -> Operator<T> {
    let g = CMatrix::<T>::from_fn(dim, dim, |_, _| {
        Complex::new(
            T::of(rng.sample::<f64, _>(StandardNormal)),
            T::of(rng.sample::<f64, _>(StandardNormal)),
        )
    });
    let w = &g * g.adjoint();
    let tr = w.trace();
    Operator::new(w / tr, layout).expect("square")
}

/// A Haar-random pure state on `C^dim`.
pub fn random_pure_state<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    layout: SystemLayout,
    rng: &mut R,
) -> StateVector<T> {
    let u = crate::twirl::sample_haar_unitary::<T, _>(dim, rng);
    let vec: CVector<T> = u.column(0).into();
    StateVector::normalized(vec, layout).expect("unit column")
}
