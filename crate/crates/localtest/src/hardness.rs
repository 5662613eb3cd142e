//! Hard-instance families for sample-complexity lower bounds, with numerical
//! verification of every finite-size inequality the bounds rest on.
//!
//! The central objects are the pair of planted bipartite states
//! `ψ = √(1−θ)|00⟩ + Σ_{i<r} √(θ/(r−1))|ii⟩` (Schmidt rank `r`) and `φ`
//! (same form, Schmidt rank `d`), and the `N`-copy averages
//!
//! `ρ0 = ∫_{U∈G, V∈U(d)} ((U_A ⊗ V_B) ψψ† (U_A ⊗ V_B)†)^{⊗N}` (σ0 from φ),
//!
//! where `G = {U : U|0⟩ = |0⟩}` is the stabilizer of `|0⟩`. Dense matrices of
//! dimension `d^{2N}` are avoided: after the collective Haar average on B the
//! state is block-diagonal in the B-side Schur basis, with one block
//! `M_λ ⊗ I_{W_λ}` per partition λ acting on `C^{d^N}_A ⊗ V_λ`. All
//! subsequent steps (the G-twirl on A, trace distances, fidelities, partial
//! traces) work block-by-block on these small matrices; [`BTwirledOperator`]
//! holds the representation, and a dense expansion is available for small
//! dimensions as a cross-check.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::hilbert::{
    hermitian_eigen, sqrt_psd, tensor_power, trace_distance, Operator, Party, StateVector,
    SystemLayout,
};
use crate::properties::{schmidt_decompose, BipartitePureState};
use crate::scalar::{c, CMatrix, CVector, Scalar};
use crate::schur::{build_schur_basis, SchurBasis};
use crate::twirl::{stabilizer_twirl, stabilizer_twirl_with_spectator};
use crate::young::YoungDiagram;
use crate::{Error, Result};

/// Re-twirling a twirled pair must change nothing beyond this.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Size guard on the notional full dimension `d^{2N}` of a twirled pair.
pub const PAIR_DIM_GUARD: usize = 4096;
/// Size guard on actually materializing the dense `d^{2N}` matrix.
pub const DENSE_DIM_GUARD: usize = 1024;
/// Margins this close to zero from below are equality cases seen through
/// double-precision roundoff (e.g. `1 − F ≤ d_tr` at one copy, where both
/// sides vanish); they are snapped to 0. Anything below is a real violation.
pub const MARGIN_ROUNDOFF: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Hard instances.
// ---------------------------------------------------------------------------

/// The planted pair (ψ of Schmidt rank `r`, φ of Schmidt rank `d`) together
/// with the parameters that generated it.
pub struct HardInstance<T: Scalar> {
    pub psi: BipartitePureState<T>,
    pub phi: BipartitePureState<T>,
    /// Number of parties `n` in the chain the instance is embedded into.
    pub n_parties: usize,
    pub r: usize,
    pub d: usize,
    pub epsilon: T,
    /// `θ = 8ε²/n`.
    pub theta: T,
}

/// `√(1−θ)|00⟩ + Σ_{i=1}^{k−1} √(θ/(k−1))|ii⟩` on `C^d ⊗ C^d`.
fn planted_state<T: Scalar>(d: usize, k: usize, theta: T) -> Result<BipartitePureState<T>> {
    let mut vec = CVector::<T>::zeros(d * d);
    vec[0] = c((T::one() - theta).sqrt());
    let tail = (theta / T::of((k - 1) as f64)).sqrt();
    for i in 1..k {
        vec[i * d + i] = c(tail);
    }
    let psi = StateVector::normalized(vec, SystemLayout::bipartite_copies(1, d))?;
    schmidt_decompose(&psi)
}

/// Build the hard instance for `n` parties, target rank `r`, local dimension
/// `d`, and distance parameter `ε`; sets `θ = 8ε²/n`.
pub fn hard_instance<T: Scalar>(
    n: usize,
    r: usize,
    d: usize,
    epsilon: T,
) -> Result<HardInstance<T>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "number of parties must be even and ≥ 2, got {n}"
        )));
    }
    if r < 2 {
        return Err(Error::InvalidArgument(format!("rank r must be ≥ 2, got {r}")));
    }
    if d < 2 * r {
        return Err(Error::InvalidArgument(format!(
            "local dimension d = {d} must be ≥ 2r = {}",
            2 * r
        )));
    }
    if epsilon <= T::zero() {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    let theta = T::of(8.0) * epsilon * epsilon / T::of(n as f64);
    if theta > T::one() {
        return Err(Error::InvalidArgument(format!(
            "θ = 8ε²/n = {} exceeds 1; shrink ε",
            theta.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(HardInstance {
        psi: planted_state(d, r, theta)?,
        phi: planted_state(d, d, theta)?,
        n_parties: n,
        r,
        d,
        epsilon,
        theta,
    })
}

/// The instance whose `θ` equals the given value exactly (solves `ε` from
/// `θ = 8ε²/n`); convenient for grids pinned in terms of `θ`.
pub fn instance_for_theta<T: Scalar>(
    n: usize,
    r: usize,
    d: usize,
    theta: T,
) -> Result<HardInstance<T>> {
    if theta <= T::zero() || theta > T::one() {
        return Err(Error::InvalidArgument("θ must lie in (0, 1]".into()));
    }
    let epsilon = (theta * T::of(n as f64) / T::of(8.0)).sqrt();
    hard_instance(n, r, d, epsilon)
}

// ---------------------------------------------------------------------------
// Block representation of the twirled N-copy states.
// ---------------------------------------------------------------------------

/// One B-Schur block of a doubly twirled `N`-copy state: the operator acts as
/// `M_λ ⊗ I_{W_λ}` with `M_λ` on `C^{d^N}_A ⊗ V_λ` (flat index `a·dim_v + j`).
pub struct BTwirledBlock<T: Scalar> {
    pub lambda: YoungDiagram,
    /// Dimension of the symmetric-group irrep `V_λ` (the retained B index).
    pub dim_v: usize,
    /// Dimension of the unitary-group irrep `W_λ` (the multiplicity).
    pub dim_w: usize,
    pub m: CMatrix<T>,
}

/// A state on `H_AB^{⊗N}` that is invariant under the collective Haar twirl
/// on B, stored block-by-block in the B-side Schur basis.
pub struct BTwirledOperator<T: Scalar> {
    pub n_copies: usize,
    pub local_dim: usize,
    pub blocks: Vec<BTwirledBlock<T>>,
}

/// `Σ|eig|` of the Hermitization of `m`.
fn trace_norm_raw<T: Scalar>(m: &CMatrix<T>) -> T {
    let (values, _) = hermitian_eigen(m);
    values.iter().fold(T::zero(), |acc, &v| acc + v.abs())
}

/// Unnormalized fidelity `tr√(√a b √a)` of two PSD matrices, via the singular
/// values of `√a·√b`.
fn fidelity_raw<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    let sa = sqrt_psd(a)?;
    let sb = sqrt_psd(b)?;
    let svd = (sa * sb).svd(false, false);
    Ok(svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc + s))
}

impl<T: Scalar> BTwirledOperator<T> {
    pub fn trace(&self) -> T {
        self.blocks.iter().fold(T::zero(), |acc, b| {
            let tr: Complex<T> = b.m.diagonal().iter().fold(Complex::zero(), |s, &x| s + x);
            acc + T::of(b.dim_w as f64) * tr.re
        })
    }

    /// Every block Hermitian and PSD, total trace 1.
    pub fn validate(&self) -> Result<()> {
        for b in &self.blocks {
            let herm_gap = (&b.m - b.m.adjoint()).norm();
            if herm_gap > T::of(1e-10) * T::of(b.m.nrows() as f64).sqrt() {
                return Err(Error::Validation(format!(
                    "block {} is not Hermitian (gap {})",
                    b.lambda.label(),
                    herm_gap.to_f64().unwrap_or(f64::NAN)
                )));
            }
            let (values, _) = hermitian_eigen(&b.m);
            if values[0] < -T::of(1e-10) {
                return Err(Error::Validation(format!(
                    "block {} has negative eigenvalue {}",
                    b.lambda.label(),
                    values[0].to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        let tr = self.trace();
        if (tr - T::one()).abs() > T::of(1e-10) {
            return Err(Error::Validation(format!(
                "trace {} ≠ 1",
                tr.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_copies != other.n_copies
            || self.local_dim != other.local_dim
            || self.blocks.len() != other.blocks.len()
            || self
                .blocks
                .iter()
                .zip(&other.blocks)
                .any(|(a, b)| a.lambda != b.lambda)
        {
            return Err(Error::Shape(
                "operators have different block structures".into(),
            ));
        }
        Ok(())
    }

    /// Trace distance `½‖self − other‖₁`, block-additive.
    pub fn trace_distance_to(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let mut sum = T::zero();
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let diff = &a.m - &b.m;
            sum = sum + T::of(a.dim_w as f64) * trace_norm_raw(&diff);
        }
        Ok(sum * T::of(0.5))
    }

    /// Fidelity `tr√(√σ ρ √σ)`, block-additive.
    pub fn fidelity_with(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let mut sum = T::zero();
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            sum = sum + T::of(a.dim_w as f64) * fidelity_raw(&a.m, &b.m)?;
        }
        Ok(sum)
    }

    /// Reduced state on `H_A^{⊗N}` (trace out all B factors).
    pub fn reduced_a(&self) -> Operator<T> {
        let dn = self.local_dim.pow(self.n_copies as u32);
        let mut mat = CMatrix::<T>::zeros(dn, dn);
        for b in &self.blocks {
            let w = c(T::of(b.dim_w as f64));
            for a in 0..dn {
                for a2 in 0..dn {
                    let mut acc = Complex::zero();
                    for j in 0..b.dim_v {
                        acc += b.m[(a * b.dim_v + j, a2 * b.dim_v + j)];
                    }
                    mat[(a, a2)] += w * acc;
                }
            }
        }
        Operator {
            mat,
            layout: SystemLayout::copies(self.n_copies, self.local_dim),
        }
    }

    /// Dense matrix on the interleaved layout `A₁B₁…A_N B_N`, for small
    /// dimensions only (cross-checks against the generic twirl routines).
    pub fn to_full_interleaved(&self, basis: &SchurBasis<T>) -> Result<Operator<T>> {
        let n = self.n_copies;
        let d = self.local_dim;
        let dn = d.pow(n as u32);
        let total = dn * dn;
        if total > DENSE_DIM_GUARD {
            return Err(Error::TooLarge(format!(
                "dense expansion of dimension {total} exceeds {DENSE_DIM_GUARD}"
            )));
        }
        if basis.n_copies() != n || basis.local_dim() != d {
            return Err(Error::Shape("Schur basis does not match the operator".into()));
        }
        // Hybrid (A-computational ⊗ B-Schur) matrix, grouped order A^N ⊗ B^N.
        let mut hybrid = CMatrix::<T>::zeros(total, total);
        for blk in &self.blocks {
            let sb = basis
                .block(&blk.lambda)
                .ok_or_else(|| Error::Shape("block missing from basis".into()))?;
            for m in 0..blk.dim_w {
                for a in 0..dn {
                    for j in 0..blk.dim_v {
                        let row = a * dn + basis.col_index(sb, j, m);
                        for a2 in 0..dn {
                            for j2 in 0..blk.dim_v {
                                let col = a2 * dn + basis.col_index(sb, j2, m);
                                hybrid[(row, col)] =
                                    blk.m[(a * blk.dim_v + j, a2 * blk.dim_v + j2)];
                            }
                        }
                    }
                }
            }
        }
        let w = CMatrix::<T>::identity(dn, dn).kronecker(&basis.isometry);
        let grouped_mat = &w * hybrid * w.adjoint();
        let mut factors = vec![(d, Party::A); n];
        factors.extend(std::iter::repeat((d, Party::B)).take(n));
        let grouped = Operator {
            mat: grouped_mat,
            layout: SystemLayout::new(factors)?,
        };
        let mut pi = Vec::with_capacity(2 * n);
        pi.extend((0..n).map(|k| 2 * k));
        pi.extend((0..n).map(|k| 2 * k + 1));
        crate::hilbert::permute_factors(&grouped, &pi)
    }
}

/// Average `((U_A ⊗ V_B) ψψ† (U_A ⊗ V_B)†)^{⊗N}` over `V` Haar on `U(d)` and
/// `U` Haar on the stabilizer of `|0⟩`, for a planted state with diagonal
/// amplitudes `coeffs` (`ψ = Σ_i coeffs[i] |ii⟩`).
///
/// Grouped as `A^N ⊗ B^N`, `ψ^{⊗N} = Σ_a D_a |a⟩|a⟩` with
/// `D_a = Π_k coeffs[digit_k(a)]`. In the B-Schur basis the Haar average on B
/// leaves, per block λ, `M_λ[(a,j),(a',j')] = (1/dim_w) Σ_m z_m z_m†` with
/// `z_m[(a,j)] = D_a S[a, col(λ,j,m)]`; the G-twirl then acts on the A index
/// of each block with the B index as a spectator.
fn doubly_twirled_power<T: Scalar>(
    coeffs: &[T],
    n: usize,
    basis: &SchurBasis<T>,
) -> Result<BTwirledOperator<T>> {
    let d = coeffs.len();
    let dn = d.pow(n as u32);
    // Diagonal amplitudes of the grouped product state.
    let mut amps = vec![T::one(); dn];
    for (a, amp) in amps.iter_mut().enumerate() {
        let mut rem = a;
        for _ in 0..n {
            *amp = *amp * coeffs[rem % d];
            rem /= d;
        }
    }
    let s = &basis.isometry_real;
    let mut blocks = Vec::with_capacity(basis.blocks.len());
    for sb in &basis.blocks {
        let dim = dn * sb.dim_v;
        let mut m = CMatrix::<T>::zeros(dim, dim);
        let inv_w = T::one() / T::of(sb.dim_w as f64);
        let mut z = vec![T::zero(); dim];
        for w in 0..sb.dim_w {
            for a in 0..dn {
                for j in 0..sb.dim_v {
                    z[a * sb.dim_v + j] = amps[a] * s[(a, basis.col_index(sb, j, w))];
                }
            }
            for row in 0..dim {
                let zr = z[row] * inv_w;
                if zr == T::zero() {
                    continue;
                }
                for col in 0..dim {
                    m[(row, col)] += Complex::new(zr * z[col], T::zero());
                }
            }
        }
        let twirled = stabilizer_twirl_with_spectator(&m, n, d, sb.dim_v)?;
        blocks.push(BTwirledBlock {
            lambda: sb.lambda.clone(),
            dim_v: sb.dim_v,
            dim_w: sb.dim_w,
            m: twirled,
        });
    }
    let out = BTwirledOperator {
        n_copies: n,
        local_dim: d,
        blocks,
    };
    out.validate()?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Twirled pairs and the distance bounds.
// ---------------------------------------------------------------------------

/// The doubly twirled `N`-copy pair `(ρ0, σ0)` plus the auxiliary uniform
/// states `τ_r`, `τ_d` on the subspaces `span{|1⟩..|r−1⟩}`, `span{|1⟩..|d−1⟩}`.
pub struct TwirledPair<T: Scalar> {
    pub n_copies: usize,
    pub rho0: BTwirledOperator<T>,
    pub sigma0: BTwirledOperator<T>,
    pub tau_r: Operator<T>,
    pub tau_d: Operator<T>,
}

/// Uniform state on `span{|1⟩, …, |k−1⟩} ⊂ C^d`.
fn tau_state<T: Scalar>(d: usize, k: usize) -> Operator<T> {
    let mut mat = CMatrix::<T>::zeros(d, d);
    let p = c(T::one() / T::of((k - 1) as f64));
    for i in 1..k {
        mat[(i, i)] = p;
    }
    Operator {
        mat,
        layout: SystemLayout::single(d),
    }
}

/// Compute `(ρ0, σ0)` for `N` copies of the instance's planted pair.
pub fn twirled_pair<T: Scalar>(inst: &HardInstance<T>, n_copies: usize) -> Result<TwirledPair<T>> {
    let d = inst.d;
    if n_copies == 0 {
        return Err(Error::InvalidArgument("need at least one copy".into()));
    }
    let full_dim = d
        .checked_pow(2 * n_copies as u32)
        .ok_or_else(|| Error::TooLarge("d^{2N} overflows".into()))?;
    if full_dim > PAIR_DIM_GUARD {
        return Err(Error::TooLarge(format!(
            "d^{{2N}} = {full_dim} exceeds the guard {PAIR_DIM_GUARD}"
        )));
    }
    let basis = build_schur_basis::<T>(n_copies, d)?;
    let mut c_psi = vec![T::zero(); d];
    c_psi[0] = (T::one() - inst.theta).sqrt();
    let tail_psi = (inst.theta / T::of((inst.r - 1) as f64)).sqrt();
    for x in c_psi.iter_mut().take(inst.r).skip(1) {
        *x = tail_psi;
    }
    let mut c_phi = vec![T::zero(); d];
    c_phi[0] = c_psi[0];
    let tail_phi = (inst.theta / T::of((d - 1) as f64)).sqrt();
    for x in c_phi.iter_mut().skip(1) {
        *x = tail_phi;
    }
    Ok(TwirledPair {
        n_copies,
        rho0: doubly_twirled_power(&c_psi, n_copies, &basis)?,
        sigma0: doubly_twirled_power(&c_phi, n_copies, &basis)?,
        tau_r: tau_state(d, inst.r),
        tau_d: tau_state(d, d),
    })
}

impl<T: Scalar> TwirledPair<T> {
    pub fn trace_distance(&self) -> Result<T> {
        self.rho0.trace_distance_to(&self.sigma0)
    }

    pub fn fidelity(&self) -> Result<T> {
        self.rho0.fidelity_with(&self.sigma0)
    }

    /// Both states are exact fixed points of the G-twirl on A (re-twirling
    /// each block moves nothing beyond [`FIXED_POINT_TOL`]); invariance under
    /// the B twirl is structural but is cross-checked densely in tests.
    pub fn check_fixed_points(&self) -> Result<()> {
        for op in [&self.rho0, &self.sigma0] {
            for b in &op.blocks {
                let again =
                    stabilizer_twirl_with_spectator(&b.m, op.n_copies, op.local_dim, b.dim_v)?;
                let gap = (&again - &b.m).norm();
                if gap > T::of(FIXED_POINT_TOL) {
                    return Err(Error::Validation(format!(
                        "block {} moved by {} under re-twirling",
                        b.lambda.label(),
                        gap.to_f64().unwrap_or(f64::NAN)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One verified inequality: `lhs ≤ rhs`, `margin = rhs − lhs ≥ 0`.
#[derive(Clone, Debug)]
pub struct BoundRow<T: Scalar> {
    pub n_copies: usize,
    pub r: usize,
    pub d: usize,
    pub theta: T,
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
}

/// All inequalities checked for one `(instance, N)` pair.
pub struct DistanceBoundsReport<T: Scalar> {
    /// `d_tr(ρ0, σ0) ≤ 4√2·Nθ/r · min{Nθ, 1}`.
    pub main_bound: BoundRow<T>,
    /// `d_tr(∫_G (Uτ_r U†)^{⊗N}, ∫_G (Uτ_d U†)^{⊗N}) ≤ √2(N/(r−1)+N/(d−1))`.
    pub tau_bound: BoundRow<T>,
    /// Upper Fuchs–van de Graaf link: `d_tr(ρ0,σ0) ≤ √(1−F(ρ0,σ0)²)`.
    pub fvdg_upper: BoundRow<T>,
    /// Lower Fuchs–van de Graaf link: `1 − F(ρ0,σ0) ≤ d_tr(ρ0,σ0)`.
    pub fvdg_lower: BoundRow<T>,
    /// `|d_tr(ρ0,σ0) − d_tr(tr_B ρ0, tr_B σ0)|` (an equality in exact
    /// arithmetic: the B sides of ρ0 and σ0 carry no distinguishing
    /// information after the Haar twirl).
    pub reduced_equality_gap: T,
}

impl<T: Scalar> DistanceBoundsReport<T> {
    pub fn rows(&self) -> [&BoundRow<T>; 4] {
        [
            &self.main_bound,
            &self.tau_bound,
            &self.fvdg_upper,
            &self.fvdg_lower,
        ]
    }

    /// CSV with the pinned columns, one row per inequality.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,r,d,theta,lhs,rhs,margin\n");
        for row in self.rows() {
            out.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                row.n_copies,
                row.r,
                row.d,
                row.theta.to_f64().unwrap_or(f64::NAN),
                row.lhs.to_f64().unwrap_or(f64::NAN),
                row.rhs.to_f64().unwrap_or(f64::NAN),
                row.margin.to_f64().unwrap_or(f64::NAN),
            ));
        }
        out
    }
}

/// Verify every finite-size inequality for the pair; errors if any margin is
/// negative or the reduced-state equality fails (which would falsify the
/// implementation, not the analysis).
pub fn verify_distance_bounds<T: Scalar>(
    pair: &TwirledPair<T>,
    inst: &HardInstance<T>,
) -> Result<DistanceBoundsReport<T>> {
    let n = pair.n_copies;
    let nf = T::of(n as f64);
    let sqrt2 = T::of(std::f64::consts::SQRT_2);
    let row = |lhs: T, rhs: T| {
        let raw = rhs - lhs;
        let margin = if raw < T::zero() && raw >= -T::of(MARGIN_ROUNDOFF) {
            T::zero()
        } else {
            raw
        };
        BoundRow {
            n_copies: n,
            r: inst.r,
            d: inst.d,
            theta: inst.theta,
            lhs,
            rhs,
            margin,
        }
    };

    let dist = pair.trace_distance()?;
    let fid = pair.fidelity()?;
    let ntheta = nf * inst.theta;
    let main_rhs = T::of(4.0) * sqrt2 * ntheta / T::of(inst.r as f64)
        * if ntheta < T::one() { ntheta } else { T::one() };
    let main_bound = row(dist, main_rhs);

    // Single-sided G-twirl of the τ tensor powers, dense on (C^d)^{⊗N}.
    let tau_r_n = stabilizer_twirl(&tensor_power(&pair.tau_r, n)?, n, inst.d)?;
    let tau_d_n = stabilizer_twirl(&tensor_power(&pair.tau_d, n)?, n, inst.d)?;
    let tau_lhs = trace_distance(&tau_r_n, &tau_d_n)?;
    let tau_rhs = sqrt2 * (nf / T::of((inst.r - 1) as f64) + nf / T::of((inst.d - 1) as f64));
    let tau_bound = row(tau_lhs, tau_rhs);

    let one_minus_f2 = (T::one() - fid * fid).max(T::zero());
    let fvdg_upper = row(dist, one_minus_f2.sqrt());
    let fvdg_lower = row(T::one() - fid, dist);

    let reduced_dist = trace_distance(&pair.rho0.reduced_a(), &pair.sigma0.reduced_a())?;
    let reduced_equality_gap = (dist - reduced_dist).abs();

    let report = DistanceBoundsReport {
        main_bound,
        tau_bound,
        fvdg_upper,
        fvdg_lower,
        reduced_equality_gap,
    };
    for r in report.rows() {
        if r.margin < T::zero() {
            return Err(Error::Validation(format!(
                "bound violated: lhs {} > rhs {}",
                r.lhs.to_f64().unwrap_or(f64::NAN),
                r.rhs.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    if report.reduced_equality_gap > T::of(FIXED_POINT_TOL) {
        return Err(Error::Validation(format!(
            "reduced-state distance differs from full distance by {}",
            report.reduced_equality_gap.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Pinned parameter grid.
// ---------------------------------------------------------------------------

/// Parameter grid for the margin checks, pinned in a config file so the
/// reported margins are reproducible.
#[derive(Debug, Clone, Deserialize)]
pub struct HardnessGrid {
    pub n_parties: usize,
    pub n_copies: Vec<usize>,
    pub r: Vec<usize>,
    pub d: Vec<usize>,
    pub theta: Vec<f64>,
}

impl HardnessGrid {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            grid: HardnessGrid,
        }
        let file: File =
            toml::from_str(text).map_err(|e| Error::Config(format!("grid config: {e}")))?;
        if file.grid.n_copies.is_empty()
            || file.grid.r.is_empty()
            || file.grid.d.is_empty()
            || file.grid.theta.is_empty()
        {
            return Err(Error::Config("grid config has an empty axis".into()));
        }
        Ok(file.grid)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// All grid points as `(N, r, d, θ)`.
    pub fn points(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for &n in &self.n_copies {
            for &r in &self.r {
                for &d in &self.d {
                    for &theta in &self.theta {
                        out.push((n, r, d, theta));
                    }
                }
            }
        }
        out
    }
}

/// Run [`verify_distance_bounds`] over a grid; returns one report per point.
pub fn verify_grid<T: Scalar>(grid: &HardnessGrid) -> Result<Vec<DistanceBoundsReport<T>>> {
    let mut reports = Vec::new();
    for (n, r, d, theta) in grid.points() {
        let inst = instance_for_theta::<T>(grid.n_parties, r, d, T::of(theta))?;
        let pair = twirled_pair(&inst, n)?;
        pair.check_fixed_points()?;
        reports.push(verify_distance_bounds(&pair, &inst)?);
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Helstrom bound and the purity lower-bound curve.
// ---------------------------------------------------------------------------

/// The optimal one-shot distinguishing data for a pair of density operators.
pub struct HelstromBound<T: Scalar> {
    /// `½(1 + d_tr(ρ, σ))`.
    pub bound: T,
    /// The POVM element achieving it: the projector onto the positive part
    /// of `ρ − σ`.
    pub povm: Operator<T>,
}

impl<T: Scalar> HelstromBound<T> {
    /// Success probability of the returned POVM on an equal-prior pair:
    /// `½(tr[Eρ] + tr[(I−E)σ])`; equals `bound` up to roundoff.
    pub fn achieved_success(&self, rho: &Operator<T>, sigma: &Operator<T>) -> T {
        let e = &self.povm.mat;
        let tr_rho: Complex<T> = (e * &rho.mat).diagonal().iter().sum();
        let tr_sigma: Complex<T> = (e * &sigma.mat).diagonal().iter().sum();
        T::of(0.5) * (T::one() + tr_rho.re - tr_sigma.re)
    }
}

/// Optimal success probability `½(1 + d_tr(ρ,σ))` of distinguishing two
/// equally likely density operators, with the POVM that achieves it.
pub fn helstrom_bound<T: Scalar>(rho: &Operator<T>, sigma: &Operator<T>) -> Result<HelstromBound<T>> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape("helstrom_bound: dimension mismatch".into()));
    }
    let diff = &rho.mat - &sigma.mat;
    let (values, vectors) = hermitian_eigen(&diff);
    let dim = rho.dim();
    let mut povm = CMatrix::<T>::zeros(dim, dim);
    let mut half_norm = T::zero();
    for (k, &v) in values.iter().enumerate() {
        half_norm = half_norm + v.abs();
        if v > T::zero() {
            let col = vectors.column(k);
            povm += &col * col.adjoint();
        }
    }
    Ok(HelstromBound {
        bound: T::of(0.5) * (T::one() + T::of(0.5) * half_norm),
        povm: Operator {
            mat: povm,
            layout: rho.layout.clone(),
        },
    })
}

/// One row of the purity testing lower-bound curve.
#[derive(Clone, Debug)]
pub struct PurityRow<T: Scalar> {
    pub copies: usize,
    /// `F(ρ0^{⊗S}, ρε^{⊗S})²`, asserted equal to `(1−ε)^S` to 1e-12.
    pub fidelity_sq: T,
    /// `½(1 + √(1 − (1−ε)^S))`.
    pub success_bound: T,
}

/// The pair `ρ0 = |0⟩⟨0|`, `ρε = (1−ε)|0⟩⟨0| + ε|1⟩⟨1|` (ε-far in trace
/// distance from pure) and the copy-count curve of the distinguishing bound.
///
/// The per-copy fidelity is computed densely; tensor powers use
/// multiplicativity of fidelity, which is itself verified densely for S ≤ 3.
pub fn purity_lower_bound_curve<T: Scalar>(epsilon: T, s_max: usize) -> Result<Vec<PurityRow<T>>> {
    if epsilon < T::zero() || epsilon >= T::one() {
        return Err(Error::InvalidArgument("ε must lie in [0, 1)".into()));
    }
    let layout = SystemLayout::single(2);
    let mut pure = CMatrix::<T>::zeros(2, 2);
    pure[(0, 0)] = Complex::one();
    let rho0 = Operator {
        mat: pure,
        layout: layout.clone(),
    };
    let mut mixed = CMatrix::<T>::zeros(2, 2);
    mixed[(0, 0)] = c(T::one() - epsilon);
    mixed[(1, 1)] = c(epsilon);
    let rho_eps = Operator { mat: mixed, layout };

    let f1 = crate::hilbert::fidelity(&rho0, &rho_eps)?;
    let f1_sq = f1 * f1;
    let mut rows = Vec::with_capacity(s_max + 1);
    let mut f_sq = T::one();
    for s in 0..=s_max {
        if s > 0 {
            f_sq = f_sq * f1_sq;
        }
        let reference = (T::one() - epsilon).powi(s as i32);
        if (f_sq - reference).abs() > T::of(1e-12) {
            return Err(Error::Validation(format!(
                "fidelity² at S = {s} deviates from (1−ε)^S by {}",
                (f_sq - reference).abs().to_f64().unwrap_or(f64::NAN)
            )));
        }
        if (1..=3).contains(&s) {
            let dense = crate::hilbert::fidelity(
                &tensor_power(&rho0, s)?,
                &tensor_power(&rho_eps, s)?,
            )?;
            if (dense * dense - f_sq).abs() > T::of(1e-12) {
                return Err(Error::Validation(format!(
                    "fidelity multiplicativity fails at S = {s}"
                )));
            }
        }
        let gap = (T::one() - f_sq).max(T::zero());
        rows.push(PurityRow {
            copies: s,
            fidelity_sq: f_sq,
            success_bound: T::of(0.5) * (T::one() + gap.sqrt()),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::permute_factors;
    use crate::twirl::{embed_collective, haar_twirl_b, sample_haar_unitary,
        sample_stabilizer_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_doubly_twirled(coeffs: &[f64], n: usize) -> Operator<f64> {
        // Oracle: Haar-B twirl via the bipartite Schur machinery, then the
        // G-twirl on A applied after grouping the A factors to the front.
        let d = coeffs.len();
        let mut vec = CVector::<f64>::zeros(d.pow(2));
        for (i, &x) in coeffs.iter().enumerate() {
            vec[i * d + i] = c(x);
        }
        let psi = StateVector::normalized(vec, SystemLayout::bipartite_copies(1, d)).unwrap();
        let power = psi.tensor_power(n).density();
        let b_twirled = haar_twirl_b(&power, n, d).unwrap();
        let mut group = Vec::with_capacity(2 * n);
        group.extend((0..n).map(|k| 2 * k));
        group.extend((0..n).map(|k| 2 * k + 1));
        let mut inv = vec![0usize; 2 * n];
        for (k, &img) in group.iter().enumerate() {
            inv[img] = k;
        }
        let grouped = permute_factors(&b_twirled, &inv).unwrap();
        let twirled =
            stabilizer_twirl_with_spectator(&grouped.mat, n, d, d.pow(n as u32)).unwrap();
        let grouped = Operator {
            mat: twirled,
            layout: grouped.layout,
        };
        permute_factors(&grouped, &group).unwrap()
    }

    #[test]
    fn instance_parameters_and_spectra() {
        let inst = hard_instance::<f64>(8, 2, 4, 0.1).unwrap();
        assert!((inst.theta - 0.01).abs() < 1e-15);
        assert_eq!(inst.psi.schmidt_rank(), 2);
        assert_eq!(inst.phi.schmidt_rank(), 4);
        let spec = inst.psi.schmidt_spectrum();
        assert!((spec[0] - 0.99).abs() < 1e-12);
        assert!((spec[1] - 0.01).abs() < 1e-12);

        assert!(hard_instance::<f64>(7, 2, 4, 0.1).is_err()); // odd n
        assert!(hard_instance::<f64>(8, 1, 4, 0.1).is_err()); // rank too small
        assert!(hard_instance::<f64>(8, 2, 3, 0.1).is_err()); // d < 2r
        assert!(hard_instance::<f64>(2, 2, 4, 0.9).is_err()); // θ > 1
    }

    #[test]
    fn phi_overlap_with_rank_r_states() {
        let inst = hard_instance::<f64>(8, 2, 4, 0.3).unwrap();
        let theta = inst.theta;
        let overlap = crate::properties::eckart_young_overlap(&inst.phi, inst.r).unwrap();
        let expected = 1.0 - theta + (inst.r - 1) as f64 / (inst.d - 1) as f64 * theta;
        assert!((overlap - expected).abs() < 1e-12);
        assert!(overlap <= 1.0 - theta / 2.0 + 1e-12);
    }

    #[test]
    fn stabilizer_average_of_tau_r_is_tau_d() {
        let inst = instance_for_theta::<f64>(8, 2, 6, 0.1).unwrap();
        let pair = twirled_pair(&inst, 1).unwrap();
        let averaged = stabilizer_twirl(&pair.tau_r, 1, inst.d).unwrap();
        assert!((&averaged.mat - &pair.tau_d.mat).norm() < 1e-12);
    }

    #[test]
    fn single_copy_pair_collapses() {
        let inst = instance_for_theta::<f64>(8, 2, 4, 0.2).unwrap();
        let pair = twirled_pair(&inst, 1).unwrap();
        // tr_B[ρ0] = (1−θ)|0⟩⟨0| + θ·τ_d.
        let reduced = pair.rho0.reduced_a();
        let mut expected = CMatrix::<f64>::zeros(4, 4);
        expected[(0, 0)] = c(1.0 - inst.theta);
        for i in 1..4 {
            expected[(i, i)] = c(inst.theta / 3.0);
        }
        assert!((&reduced.mat - &expected).norm() < 1e-12);
        // At one copy the two averages coincide exactly.
        assert!(pair.trace_distance().unwrap() < 1e-12);
    }

    #[test]
    fn block_representation_matches_dense_oracle() {
        for (n, d) in [(1, 4), (2, 4)] {
            let inst = instance_for_theta::<f64>(8, 2, d, 0.2).unwrap();
            let pair = twirled_pair(&inst, n).unwrap();
            let basis = build_schur_basis::<f64>(n, d).unwrap();
            let full = pair.rho0.to_full_interleaved(&basis).unwrap();
            let mut c_psi = vec![0.0; d];
            c_psi[0] = (1.0 - inst.theta).sqrt();
            c_psi[1] = inst.theta.sqrt();
            let oracle = dense_doubly_twirled(&c_psi, n);
            assert!((&full.mat - &oracle.mat).norm() < 1e-10);
            assert!((full.trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_trace_distance_and_fidelity_agree_with_blocks() {
        let inst = instance_for_theta::<f64>(8, 2, 4, 0.2).unwrap();
        let pair = twirled_pair(&inst, 2).unwrap();
        let basis = build_schur_basis::<f64>(2, 4).unwrap();
        let rho = pair.rho0.to_full_interleaved(&basis).unwrap();
        let sigma = pair.sigma0.to_full_interleaved(&basis).unwrap();
        let dense_dist = trace_distance(&rho, &sigma).unwrap();
        let dense_fid = crate::hilbert::fidelity(&rho, &sigma).unwrap();
        assert!((dense_dist - pair.trace_distance().unwrap()).abs() < 1e-9);
        assert!((dense_fid - pair.fidelity().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_cross_check_single_copy() {
        // Sample (U, V) ∈ G × U(d) directly and average the conjugated
        // product state; compare with the exact block construction.
        let inst = instance_for_theta::<f64>(8, 2, 4, 0.2).unwrap();
        let pair = twirled_pair(&inst, 1).unwrap();
        let basis = build_schur_basis::<f64>(1, 4).unwrap();
        let exact = pair.rho0.to_full_interleaved(&basis).unwrap();
        let layout = SystemLayout::bipartite_copies(1, 4);
        let mut vec = CVector::<f64>::zeros(16);
        vec[0] = c((1.0 - inst.theta).sqrt());
        vec[5] = c(inst.theta.sqrt());
        let psi = StateVector::normalized(vec, layout.clone()).unwrap();
        let x = psi.density();
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a5d);
        let shots = 4000;
        let mut mean = CMatrix::<f64>::zeros(16, 16);
        for _ in 0..shots {
            let u = sample_stabilizer_unitary::<f64, _>(4, &mut rng);
            let v = sample_haar_unitary::<f64, _>(4, &mut rng);
            let ua = embed_collective(&u, &layout, &[0]);
            let vb = embed_collective(&v, &layout, &[1]);
            let w = ua * vb;
            mean += &w * &x.mat * w.adjoint() / c(shots as f64);
        }
        assert!((&mean - &exact.mat).norm() < 0.05);
    }

    #[test]
    fn grid_bounds_all_hold() {
        let grid = HardnessGrid::from_toml_str(
            "[grid]\nn_parties = 8\nn_copies = [1, 2, 3]\nr = [2]\nd = [4]\ntheta = [0.05, 0.2]\n",
        )
        .unwrap();
        let reports = verify_grid::<f64>(&grid).unwrap();
        assert_eq!(reports.len(), 6);
        for report in &reports {
            for row in report.rows() {
                assert!(row.margin >= 0.0);
            }
            assert!(report.reduced_equality_gap <= FIXED_POINT_TOL);
        }
        // r = d makes the two τ states (and hence their twirls) identical.
        let same = tau_state::<f64>(6, 6);
        assert!((&same.mat - &tau_state::<f64>(6, 6).mat).norm() < 1e-15);
        let a = stabilizer_twirl(&tensor_power(&same, 2).unwrap(), 2, 6).unwrap();
        let b = stabilizer_twirl(&tensor_power(&tau_state::<f64>(6, 6), 2).unwrap(), 2, 6).unwrap();
        assert!(trace_distance(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn pinned_grid_config_parses() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../config/hardness_grid.toml");
        let grid = HardnessGrid::load(&path).unwrap();
        assert_eq!(grid.points().len(), 6);
    }

    #[test]
    fn helstrom_examples() {
        let layout = SystemLayout::single(2);
        let rho = StateVector::<f64>::basis(layout.clone(), 0).density();
        let sigma = StateVector::<f64>::basis(layout.clone(), 1).density();
        let h = helstrom_bound(&rho, &sigma).unwrap();
        assert!((h.bound - 1.0).abs() < 1e-12);
        assert!((h.achieved_success(&rho, &sigma) - h.bound).abs() < 1e-10);

        let same = helstrom_bound(&rho, &rho).unwrap();
        assert!((same.bound - 0.5).abs() < 1e-12);

        // The pair behind the purity curve: d_tr = ε, bound ½(1+ε).
        let eps = 0.3;
        let mut mixed = CMatrix::<f64>::zeros(2, 2);
        mixed[(0, 0)] = c(1.0 - eps);
        mixed[(1, 1)] = c(eps);
        let rho_eps = Operator {
            mat: mixed,
            layout,
        };
        let h = helstrom_bound(&rho, &rho_eps).unwrap();
        assert!((h.bound - 0.5 * (1.0 + eps)).abs() < 1e-12);
        assert!((h.achieved_success(&rho, &rho_eps) - h.bound).abs() < 1e-10);
    }

    #[test]
    fn purity_curve_values() {
        let rows = purity_lower_bound_curve::<f64>(0.1, 12).unwrap();
        assert!((rows[0].fidelity_sq - 1.0).abs() < 1e-15);
        assert!((rows[0].success_bound - 0.5).abs() < 1e-12);
        assert!((rows[10].fidelity_sq - 0.9f64.powi(10)).abs() < 1e-12);
        let zero = purity_lower_bound_curve::<f64>(0.0, 5).unwrap();
        for row in &zero {
            assert!((row.fidelity_sq - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_points_hold_on_a_sample_pair() {
        let inst = instance_for_theta::<f64>(8, 2, 4, 0.2).unwrap();
        let pair = twirled_pair(&inst, 2).unwrap();
        pair.check_fixed_points().unwrap();
        // B-twirl invariance, checked densely.
        let basis = build_schur_basis::<f64>(2, 4).unwrap();
        let full = pair.rho0.to_full_interleaved(&basis).unwrap();
        let again = haar_twirl_b(&full, 2, 4).unwrap();
        assert!((&again.mat - &full.mat).norm() < 1e-10);
    }

    #[test]
    fn size_guard_rejects_large_pairs() {
        let inst = instance_for_theta::<f64>(8, 2, 4, 0.1).unwrap();
        assert!(matches!(
            twirled_pair(&inst, 4),
            Err(Error::TooLarge(_))
        ));
    }
}
