//! Schur bases: explicit unitary changes of basis realizing
//! `(C^d)^{⊗N} ≅ ⊕_λ V_λ ⊗ W_λ` (single-sided) and the bipartite doubling
//! `H_AB^{⊗N} ≅ ⊕_{λ₁,λ₂} V_{λ₁,A} ⊗ V_{λ₂,B} ⊗ W_{λ₁,A} ⊗ W_{λ₂,B}`.
//!
//! Construction: canonical isotypic projection. For each shape λ the group
//! algebra elements `e_{j0} = (dim V_λ/N!) Σ_π [P_λ(π)]_{j0} P(π)` are matrix
//! units; the range of the projector `e_{00}` is seeded from computational
//! basis vectors in lexicographic order and orthonormalized (modified
//! Gram–Schmidt with re-orthogonalization), then `e_{j0}` transports that
//! W-basis to every V-index `j`. This pins the V-labels to the chosen
//! `P_λ(π)` matrices and the W-basis to the seed order — the convention all
//! downstream blocks share (the A/B maximally-entangled pairings need it).
//!
//! Every constructed basis is verified on the spot (unitarity, intertwining
//! with all adjacent transpositions and random unitaries); a failure is a bug
//! signal, reported as `Error::Validation`.

use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hilbert::{StateVector, SystemLayout};
use crate::scalar::{c, CMatrix, CVector, RMatrix, Scalar};
use crate::symrep::{all_permutations, Permutation, SymIrrep};
use crate::twirl::sample_haar_unitary;
use crate::young::{dim_unitary_irrep, enumerate_partitions, YoungDiagram};
use crate::{Error, Result};

/// Dense-numerics guard on the total dimension.
pub const MAX_TOTAL_DIM: usize = 4096;
/// Guard on the copy count (N! permutation sums).
pub const MAX_COPIES: usize = 8;
/// Intertwining / unitarity verification tolerance.
pub const VERIFY_TOL: f64 = 1e-9;

/// One isotypic block of a single-sided Schur basis.
#[derive(Clone, Debug)]
pub struct SchurBlock {
    pub lambda: YoungDiagram,
    pub dim_v: usize,
    pub dim_w: usize,
    pub col_offset: usize,
}

/// Unitary change of basis for `(C^d)^{⊗N}` into `⊕_λ V_λ ⊗ W_λ`.
///
/// Column `col_offset + j·dim_w + m` of [`Self::isometry`] is the basis
/// vector with V-index `j` and W-index `m` of block λ (V-major order).
pub struct SchurBasis<T: Scalar> {
    n_copies: usize,
    local_dim: usize,
    pub isometry: CMatrix<T>,
    /// Real copy of the isometry (the construction is real-orthogonal).
    pub isometry_real: RMatrix<T>,
    pub blocks: Vec<SchurBlock>,
    irreps: Vec<SymIrrep<T>>,
    perms: Vec<Permutation>,
}

/// `perm_maps` entry for one permutation: new index of old flat index `i`
/// when factor `k` moves to slot `π(k)` (all factors dimension `d`).
fn perm_index_map(pi: &Permutation, n: usize, d: usize) -> Vec<usize> {
    let total = d.pow(n as u32);
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * d;
    }
    (0..total)
        .map(|i| {
            let mut out = 0;
            for k in 0..n {
                let digit = (i / strides[k]) % d;
                out += digit * strides[pi.apply(k)];
            }
            out
        })
        .collect()
}

impl<T: Scalar> SchurBasis<T> {
    pub fn n_copies(&self) -> usize {
        self.n_copies
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn total_dim(&self) -> usize {
        self.isometry.nrows()
    }

    pub fn block(&self, lambda: &YoungDiagram) -> Option<&SchurBlock> {
        self.blocks.iter().find(|b| &b.lambda == lambda)
    }

    pub fn irrep(&self, lambda: &YoungDiagram) -> Option<&SymIrrep<T>> {
        self.irreps.iter().find(|r| r.lambda() == lambda)
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// Column of the basis vector (λ-block `b`, V-index `j`, W-index `m`).
    pub fn col_index(&self, b: &SchurBlock, j: usize, m: usize) -> usize {
        debug_assert!(j < b.dim_v && m < b.dim_w);
        b.col_offset + j * b.dim_w + m
    }

    /// Conjugate into the Schur basis: `S† X S`.
    pub fn to_schur(&self, x: &CMatrix<T>) -> CMatrix<T> {
        self.isometry.adjoint() * x * &self.isometry
    }

    /// Conjugate back: `S Y S†`.
    pub fn from_schur(&self, y: &CMatrix<T>) -> CMatrix<T> {
        &self.isometry * y * self.isometry.adjoint()
    }

    /// The U(d) irrep block `Q_λ(U)` (dim W_λ square, unitary).
    pub fn gl_irrep_block(&self, u: &CMatrix<T>, lambda: &YoungDiagram) -> Result<CMatrix<T>> {
        let block = self.block(lambda).ok_or_else(|| {
            Error::InvalidArgument(format!("λ={lambda} has no block at d={}", self.local_dim))
        })?;
        if u.nrows() != self.local_dim || u.ncols() != self.local_dim {
            return Err(Error::Shape(format!(
                "unitary must be {0}×{0}",
                self.local_dim
            )));
        }
        let mut u_pow = u.clone();
        for _ in 1..self.n_copies {
            u_pow = u_pow.kronecker(u);
        }
        // Q[m,m'] = ⟨λ,0,m| U^{⊗N} |λ,0,m'⟩.
        let cols = self
            .isometry
            .columns(self.col_index(block, 0, 0), block.dim_w);
        Ok((cols.adjoint() * u_pow * cols).into())
    }

    /// Basis dump (index map + matrix) for golden-file regression.
    pub fn to_json(&self) -> serde_json::Value {
        let blocks: Vec<serde_json::Value> = self
            .blocks
            .iter()
            .map(|b| {
                serde_json::json!({
                    "lambda": b.lambda.rows(),
                    "dim_v": b.dim_v,
                    "dim_w": b.dim_w,
                    "col_offset": b.col_offset,
                })
            })
            .collect();
        let op = crate::hilbert::Operator::new(
            self.isometry.clone(),
            SystemLayout::copies(self.n_copies, self.local_dim),
        )
        .expect("isometry is square");
        serde_json::json!({
            "n_copies": self.n_copies,
            "local_dim": self.local_dim,
            "blocks": blocks,
            "matrix": op.to_json(),
        })
    }
}

/// Build and verify the Schur basis for `(C^d)^{⊗N}`.
pub fn build_schur_basis<T: Scalar>(n: usize, d: usize) -> Result<SchurBasis<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("N ≥ 1 and d ≥ 1 required".into()));
    }
    let total = d.checked_pow(n as u32).filter(|&t| t <= MAX_TOTAL_DIM);
    let total = total.ok_or_else(|| {
        Error::TooLarge(format!("d^N exceeds the {MAX_TOTAL_DIM} dense guard"))
    })?;
    if n > MAX_COPIES {
        return Err(Error::TooLarge(format!("N capped at {MAX_COPIES}")));
    }

    let perms = all_permutations(n);
    let perm_maps: Vec<Vec<usize>> = perms.iter().map(|p| perm_index_map(p, n, d)).collect();
    let n_fact = perms.len();

    let lambdas = enumerate_partitions(n, d);
    let mut blocks = Vec::new();
    let mut irreps = Vec::new();
    let mut isometry_real = RMatrix::<T>::zeros(total, total);
    let mut col_offset = 0;

    for lambda in &lambdas {
        let dim_w = dim_unitary_irrep(&lambda, d) as usize;
        if dim_w == 0 {
            continue;
        }
        let rep = SymIrrep::<T>::new(lambda)?;
        let dim_v = rep.dim();
        // [P_λ(π)]_{j0} for every π, prescaled by dim V_λ / N!.
        let scale = T::of_usize(dim_v) / T::of_usize(n_fact);
        let rep_cols: Vec<Vec<T>> = perms
            .iter()
            .map(|pi| {
                let m = rep.matrix(pi).expect("arity matches");
                (0..dim_v).map(|j| m[(j, 0)] * scale).collect()
            })
            .collect();

        // out += Σ_π coeff_π(j) P(π) v, with P(π) acting by index relocation.
        let apply_unit = |j: usize, v: &[T], out: &mut [T]| {
            for (p, map) in perm_maps.iter().enumerate() {
                let coeff = rep_cols[p][j];
                if coeff != T::zero() {
                    for (i, &target) in map.iter().enumerate() {
                        out[target] += coeff * v[i];
                    }
                }
            }
        };

        // Orthonormal basis of range(e_00): seed with computational basis
        // vectors in lexicographic order, modified Gram–Schmidt with one
        // re-orthogonalization pass.
        let mut w_basis: Vec<Vec<T>> = Vec::with_capacity(dim_w);
        for seed in 0..total {
            if w_basis.len() == dim_w {
                break;
            }
            // e_00 applied to a basis vector: column of the projector.
            let mut v = vec![T::zero(); total];
            for (p, map) in perm_maps.iter().enumerate() {
                v[map[seed]] += rep_cols[p][0];
            }
            for _pass in 0..2 {
                for w in &w_basis {
                    let overlap = v
                        .iter()
                        .zip(w)
                        .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                    for (vi, &wi) in v.iter_mut().zip(w) {
                        *vi -= overlap * wi;
                    }
                }
            }
            let norm = v.iter().fold(T::zero(), |acc, &a| acc + a * a).sqrt();
            if norm > T::of(1e-6) {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                w_basis.push(v);
            }
        }
        if w_basis.len() != dim_w {
            return Err(Error::Validation(format!(
                "isotypic projector rank {} ≠ dim W = {dim_w} for λ={lambda}",
                w_basis.len()
            )));
        }

        // Transport the W-basis to every V-index via e_{j0}.
        for j in 0..dim_v {
            for (m, w0) in w_basis.iter().enumerate() {
                let col = col_offset + j * dim_w + m;
                if j == 0 {
                    for (i, &wi) in w0.iter().enumerate() {
                        isometry_real[(i, col)] = wi;
                    }
                } else {
                    let mut v = vec![T::zero(); total];
                    apply_unit(j, w0, &mut v);
                    for (i, &vi) in v.iter().enumerate() {
                        isometry_real[(i, col)] = vi;
                    }
                }
            }
        }

        blocks.push(SchurBlock {
            lambda: lambda.clone(),
            dim_v,
            dim_w,
            col_offset,
        });
        irreps.push(rep);
        col_offset += dim_v * dim_w;
    }
    debug_assert_eq!(col_offset, total, "Schur–Weyl completeness");

    let isometry = isometry_real.map(|x| Complex::new(x, T::zero()));
    let basis = SchurBasis {
        n_copies: n,
        local_dim: d,
        isometry,
        isometry_real,
        blocks,
        irreps,
        perms,
    };
    verify_schur_basis(&basis)?;
    Ok(basis)
}

/// Unitarity + intertwining checks; `Error::Validation` is a bug signal.
fn verify_schur_basis<T: Scalar>(basis: &SchurBasis<T>) -> Result<()> {
    let n = basis.n_copies;
    let d = basis.local_dim;
    let total = basis.total_dim();
    let tol = T::of(VERIFY_TOL) * T::of_usize(total).sqrt();

    let gram = &basis.isometry_real.transpose() * &basis.isometry_real;
    if (gram - RMatrix::<T>::identity(total, total)).norm() > tol {
        return Err(Error::Validation("Schur basis is not unitary".into()));
    }

    // Intertwining with every adjacent transposition:
    // Sᵀ P(s_k) S = ⊕_λ P_λ(s_k) ⊗ I_{W_λ}.
    for k in 0..n.saturating_sub(1) {
        let pi = Permutation::adjacent_transposition(n, k);
        let map = perm_index_map(&pi, n, d);
        let mut permuted = RMatrix::<T>::zeros(total, total);
        for i in 0..total {
            let row = basis.isometry_real.row(i);
            let mut target = permuted.row_mut(map[i]);
            for col in 0..total {
                target[col] = row[col];
            }
        }
        let conj = basis.isometry_real.transpose() * permuted;
        let mut expected = RMatrix::<T>::zeros(total, total);
        for (b, rep) in basis.blocks.iter().zip(&basis.irreps) {
            let pm = rep.matrix(&pi)?;
            for j1 in 0..b.dim_v {
                for j2 in 0..b.dim_v {
                    for m in 0..b.dim_w {
                        expected[(
                            basis.col_index(b, j1, m),
                            basis.col_index(b, j2, m),
                        )] = pm[(j1, j2)];
                    }
                }
            }
        }
        if (conj - expected).norm() > tol {
            return Err(Error::Validation(format!(
                "permutation intertwining failed at s_{k}"
            )));
        }
    }

    // Intertwining with random unitaries: S† U^{⊗N} S = ⊕_λ I_{V_λ} ⊗ Q_λ(U).
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_5eed);
    for _ in 0..5 {
        let u = sample_haar_unitary::<T, _>(d, &mut rng);
        let mut u_pow = u.clone();
        for _ in 1..n {
            u_pow = u_pow.kronecker(&u);
        }
        let conj = basis.to_schur(&u_pow);
        let mut expected = CMatrix::<T>::zeros(total, total);
        for b in &basis.blocks {
            let cols = basis.isometry.columns(basis.col_index(b, 0, 0), b.dim_w);
            let q: CMatrix<T> = (cols.adjoint() * &u_pow * cols).into();
            for j in 0..b.dim_v {
                for m1 in 0..b.dim_w {
                    for m2 in 0..b.dim_w {
                        expected[(
                            basis.col_index(b, j, m1),
                            basis.col_index(b, j, m2),
                        )] = q[(m1, m2)];
                    }
                }
            }
        }
        if (conj - expected).norm() > tol {
            return Err(Error::Validation("unitary intertwining failed".into()));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Bipartite doubling.
// ---------------------------------------------------------------------------

/// One block of the bipartite Schur basis, keyed by (λ_A, λ_B).
///
/// Columns within a block are ordered `(j_A, j_B, m_A, m_B)` row-major:
/// `col_offset + ((j_A·dim_vb + j_B)·dim_wa + m_A)·dim_wb + m_B`.
#[derive(Clone, Debug)]
pub struct BipartiteBlock {
    pub lambda_a: YoungDiagram,
    pub lambda_b: YoungDiagram,
    pub dim_va: usize,
    pub dim_vb: usize,
    pub dim_wa: usize,
    pub dim_wb: usize,
    pub col_offset: usize,
}

impl BipartiteBlock {
    pub fn dim(&self) -> usize {
        self.dim_va * self.dim_vb * self.dim_wa * self.dim_wb
    }

    pub fn col(&self, ja: usize, jb: usize, ma: usize, mb: usize) -> usize {
        debug_assert!(ja < self.dim_va && jb < self.dim_vb && ma < self.dim_wa && mb < self.dim_wb);
        self.col_offset + ((ja * self.dim_vb + jb) * self.dim_wa + ma) * self.dim_wb + mb
    }
}

/// Unitary change of basis for `H_AB^{⊗N}` (interleaved factor order
/// `A₁B₁A₂B₂…`) into `⊕_{λ₁,λ₂} V_{λ₁,A}⊗V_{λ₂,B}⊗W_{λ₁,A}⊗W_{λ₂,B}`.
pub struct BipartiteSchurBasis<T: Scalar> {
    pub single: SchurBasis<T>,
    pub isometry: CMatrix<T>,
    pub blocks: Vec<BipartiteBlock>,
}

impl<T: Scalar> BipartiteSchurBasis<T> {
    pub fn n_copies(&self) -> usize {
        self.single.n_copies()
    }

    pub fn local_dim(&self) -> usize {
        self.single.local_dim()
    }

    pub fn total_dim(&self) -> usize {
        self.isometry.nrows()
    }

    pub fn block(&self, la: &YoungDiagram, lb: &YoungDiagram) -> Option<&BipartiteBlock> {
        self.blocks
            .iter()
            .find(|b| &b.lambda_a == la && &b.lambda_b == lb)
    }

    pub fn to_schur(&self, x: &CMatrix<T>) -> CMatrix<T> {
        self.isometry.adjoint() * x * &self.isometry
    }

    pub fn from_schur(&self, y: &CMatrix<T>) -> CMatrix<T> {
        &self.isometry * y * self.isometry.adjoint()
    }

    pub fn to_schur_vec(&self, v: &CVector<T>) -> CVector<T> {
        self.isometry.adjoint() * v
    }

    pub fn from_schur_vec(&self, v: &CVector<T>) -> CVector<T> {
        &self.isometry * v
    }
}

/// Flat-index interleaver: grouped `(a, b)` (A-copies major) to the
/// interleaved layout `A₁B₁A₂B₂…` with all factors of dimension `d`.
fn interleave_index(a: usize, b: usize, n: usize, d: usize) -> usize {
    let mut out = 0;
    let mut a = a;
    let mut b = b;
    // Digits come out least-significant first: copy N down to 1.
    let mut place = 1usize;
    for _ in 0..n {
        let db = b % d;
        b /= d;
        let da = a % d;
        a /= d;
        out += db * place;
        place *= d;
        out += da * place;
        place *= d;
    }
    out
}

/// Build and verify the bipartite Schur basis.
pub fn build_bipartite_basis<T: Scalar>(n: usize, d: usize) -> Result<BipartiteSchurBasis<T>> {
    let total = d
        .checked_pow(2 * n as u32)
        .filter(|&t| t <= MAX_TOTAL_DIM)
        .ok_or_else(|| Error::TooLarge(format!("d^2N exceeds the {MAX_TOTAL_DIM} dense guard")))?;
    let single = build_schur_basis::<T>(n, d)?;
    let half = single.total_dim();

    let mut blocks = Vec::new();
    let mut isometry = CMatrix::<T>::zeros(total, total);
    let mut col_offset = 0;
    for ba in &single.blocks {
        for bb in &single.blocks {
            let block = BipartiteBlock {
                lambda_a: ba.lambda.clone(),
                lambda_b: bb.lambda.clone(),
                dim_va: ba.dim_v,
                dim_vb: bb.dim_v,
                dim_wa: ba.dim_w,
                dim_wb: bb.dim_w,
                col_offset,
            };
            for ja in 0..ba.dim_v {
                for jb in 0..bb.dim_v {
                    for ma in 0..ba.dim_w {
                        for mb in 0..bb.dim_w {
                            let col = block.col(ja, jb, ma, mb);
                            let col_a = single.col_index(ba, ja, ma);
                            let col_b = single.col_index(bb, jb, mb);
                            for a in 0..half {
                                let va = single.isometry_real[(a, col_a)];
                                if va == T::zero() {
                                    continue;
                                }
                                for b in 0..half {
                                    let vb = single.isometry_real[(b, col_b)];
                                    if vb != T::zero() {
                                        isometry[(interleave_index(a, b, n, d), col)] =
                                            Complex::new(va * vb, T::zero());
                                    }
                                }
                            }
                        }
                    }
                }
            }
            col_offset += block.dim();
            blocks.push(block);
        }
    }
    debug_assert_eq!(col_offset, total);

    let basis = BipartiteSchurBasis {
        single,
        isometry,
        blocks,
    };
    verify_bipartite_basis(&basis)?;
    Ok(basis)
}

fn verify_bipartite_basis<T: Scalar>(basis: &BipartiteSchurBasis<T>) -> Result<()> {
    let n = basis.n_copies();
    let d = basis.local_dim();
    let total = basis.total_dim();
    let tol = T::of(VERIFY_TOL) * T::of_usize(total).sqrt();

    let gram = basis.isometry.adjoint() * &basis.isometry;
    if (gram - CMatrix::<T>::identity(total, total)).norm() > tol {
        return Err(Error::Validation("bipartite Schur basis not unitary".into()));
    }

    // Simultaneous permutations conjugate to P_{λ₁}(π) ⊗ P_{λ₂}(π) ⊗ I ⊗ I.
    for k in 0..n.saturating_sub(1) {
        let pi = Permutation::adjacent_transposition(n, k);
        let sim = crate::symrep::simultaneous_perm::<T>(&pi, n, d)?;
        let conj = basis.to_schur(&sim.mat);
        let mut expected = CMatrix::<T>::zeros(total, total);
        for b in &basis.blocks {
            let pa = basis
                .single
                .irrep(&b.lambda_a)
                .expect("block irrep cached")
                .matrix(&pi)?;
            let pb = basis
                .single
                .irrep(&b.lambda_b)
                .expect("block irrep cached")
                .matrix(&pi)?;
            for ja1 in 0..b.dim_va {
                for ja2 in 0..b.dim_va {
                    for jb1 in 0..b.dim_vb {
                        for jb2 in 0..b.dim_vb {
                            let entry = pa[(ja1, ja2)] * pb[(jb1, jb2)];
                            if entry == T::zero() {
                                continue;
                            }
                            for ma in 0..b.dim_wa {
                                for mb in 0..b.dim_wb {
                                    expected[(
                                        b.col(ja1, jb1, ma, mb),
                                        b.col(ja2, jb2, ma, mb),
                                    )] = Complex::new(entry, T::zero());
                                }
                            }
                        }
                    }
                }
            }
        }
        if (conj - expected).norm() > tol {
            return Err(Error::Validation(format!(
                "bipartite permutation intertwining failed at s_{k}"
            )));
        }
    }

    // U_B^{⊗N} conjugates to I ⊗ I ⊗ I ⊗ Q_{λ₂}(U).
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1b1_b1b1);
    let u = sample_haar_unitary::<T, _>(d, &mut rng);
    let id = CMatrix::<T>::identity(d, d);
    let mut u_b = CMatrix::<T>::identity(1, 1);
    for _ in 0..n {
        u_b = u_b.kronecker(&id).kronecker(&u);
    }
    let conj = basis.to_schur(&u_b);
    let mut expected = CMatrix::<T>::zeros(total, total);
    for b in &basis.blocks {
        let q = basis.single.gl_irrep_block(&u, &b.lambda_b)?;
        for ja in 0..b.dim_va {
            for jb in 0..b.dim_vb {
                for ma in 0..b.dim_wa {
                    for mb1 in 0..b.dim_wb {
                        for mb2 in 0..b.dim_wb {
                            expected[(
                                b.col(ja, jb, ma, mb1),
                                b.col(ja, jb, ma, mb2),
                            )] = q[(mb1, mb2)];
                        }
                    }
                }
            }
        }
    }
    if (conj - expected).norm() > tol {
        return Err(Error::Validation("U_B intertwining failed".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Normal form of pure tensor powers.
// ---------------------------------------------------------------------------

/// The normal form `|ψ⟩_AB^{⊗N} = Σ_λ |I_{V_λ}⟩⟩ ⊗ |w_λ⟩`.
pub struct PurePowerComponents<T: Scalar> {
    pub n_copies: usize,
    /// Per λ: the vector `w_λ ∈ W_{λ,A} ⊗ W_{λ,B}`, (m_A, m_B) row-major.
    pub components: Vec<(YoungDiagram, CVector<T>)>,
    /// `‖ψ^{⊗N} − Σ_λ |I_{V_λ}⟩⟩ ⊗ |w_λ⟩‖`: everything outside the λ₁=λ₂
    /// maximally-entangled sectors, measured amplitude by amplitude.
    pub residual: T,
}

impl<T: Scalar> PurePowerComponents<T> {
    /// `dim V_λ · ‖w_λ‖²` (the λ-weight; sums to 1).
    pub fn weight(&self, lambda: &YoungDiagram) -> Option<T> {
        let (_, w) = self.components.iter().find(|(l, _)| l == lambda)?;
        let dim_v = crate::young::dim_sym_irrep(lambda) as usize;
        Some(T::of_usize(dim_v) * w.norm_squared())
    }

    /// Reassemble `Σ_λ |I_{V_λ}⟩⟩ ⊗ |w_λ⟩` in the computational basis.
    pub fn reconstruct(&self, basis: &BipartiteSchurBasis<T>) -> Result<StateVector<T>> {
        let total = basis.total_dim();
        let mut y = CVector::<T>::zeros(total);
        for (lambda, w) in &self.components {
            let b = basis
                .block(lambda, lambda)
                .ok_or_else(|| Error::InvalidArgument(format!("no block ({lambda},{lambda})")))?;
            for j in 0..b.dim_va {
                for ma in 0..b.dim_wa {
                    for mb in 0..b.dim_wb {
                        y[b.col(j, j, ma, mb)] = w[ma * b.dim_wb + mb];
                    }
                }
            }
        }
        let vec = basis.from_schur_vec(&y);
        StateVector::subnormalized(
            vec,
            SystemLayout::bipartite_copies(basis.n_copies(), basis.local_dim()),
        )
    }
}

/// Decompose `|ψ⟩^{⊗N}` into its normal-form components. `psi` is a
/// normalized bipartite vector on `C^d ⊗ C^d`.
pub fn pure_power_components<T: Scalar>(
    psi: &StateVector<T>,
    basis: &BipartiteSchurBasis<T>,
) -> Result<PurePowerComponents<T>> {
    let d = basis.local_dim();
    if psi.vec.len() != d * d {
        return Err(Error::Shape(format!(
            "state must live on C^{d} ⊗ C^{d}"
        )));
    }
    if psi.subnormalized {
        return Err(Error::InvalidArgument("state must be normalized".into()));
    }
    let n = basis.n_copies();
    let power = StateVector {
        vec: psi.vec.clone(),
        layout: SystemLayout::bipartite_copies(1, d),
        subnormalized: false,
    }
    .tensor_power(n);
    let y = basis.to_schur_vec(&power.vec);

    let mut components = Vec::new();
    // Residual = ‖y − model‖ computed entrywise against the normal-form
    // model Σ_λ |I_{V_λ}⟩⟩ ⊗ |w_λ⟩. Measuring the deviation per amplitude
    // (rather than as a difference of two squared norms ≈ 1) keeps it at
    // machine precision for true pure powers instead of √eps.
    let total = basis.total_dim();
    let mut in_sector = vec![false; total];
    let mut residual_sq = T::zero();
    for b in &basis.blocks {
        if b.lambda_a != b.lambda_b {
            continue;
        }
        let dim_v = b.dim_va;
        let mut w = CVector::<T>::zeros(b.dim_wa * b.dim_wb);
        for ma in 0..b.dim_wa {
            for mb in 0..b.dim_wb {
                let mut acc = Complex::<T>::zero();
                for j in 0..dim_v {
                    acc += y[b.col(j, j, ma, mb)];
                }
                w[ma * b.dim_wb + mb] = acc / c(T::of_usize(dim_v));
            }
        }
        for ja in 0..dim_v {
            for jb in 0..dim_v {
                for ma in 0..b.dim_wa {
                    for mb in 0..b.dim_wb {
                        let col = b.col(ja, jb, ma, mb);
                        in_sector[col] = true;
                        let model = if ja == jb {
                            w[ma * b.dim_wb + mb]
                        } else {
                            Complex::zero()
                        };
                        residual_sq += (y[col] - model).norm_sqr();
                    }
                }
            }
        }
        components.push((b.lambda_a.clone(), w));
    }
    for col in 0..total {
        if !in_sector[col] {
            residual_sq += y[col].norm_sqr();
        }
    }
    Ok(PurePowerComponents {
        n_copies: n,
        components,
        residual: residual_sq.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn block_dims(basis: &SchurBasis<f64>) -> Vec<(Vec<usize>, usize, usize)> {
        basis
            .blocks
            .iter()
            .map(|b| (b.lambda.rows().to_vec(), b.dim_v, b.dim_w))
            .collect()
    }

    #[test]
    fn schur_basis_small_block_structure() {
        let b22 = build_schur_basis::<f64>(2, 2).unwrap();
        assert_eq!(
            block_dims(&b22),
            vec![(vec![2], 1, 3), (vec![1, 1], 1, 1)]
        );
        let b32 = build_schur_basis::<f64>(3, 2).unwrap();
        assert_eq!(
            block_dims(&b32),
            vec![(vec![3], 1, 4), (vec![2, 1], 2, 2)]
        );
        let b42 = build_schur_basis::<f64>(4, 2).unwrap();
        assert_eq!(
            block_dims(&b42),
            vec![(vec![4], 1, 5), (vec![3, 1], 3, 3), (vec![2, 2], 2, 1)]
        );
    }

    #[test]
    fn schur_basis_verifies_at_mixed_dims() {
        // Construction self-verifies; reaching here means intertwining holds.
        build_schur_basis::<f64>(2, 3).unwrap();
        build_schur_basis::<f64>(3, 3).unwrap();
        build_schur_basis::<f64>(4, 2).unwrap();
        build_schur_basis::<f64>(2, 4).unwrap();
        build_schur_basis::<f64>(3, 4).unwrap();
    }

    #[test]
    fn gl_block_identity_and_homomorphism() {
        let basis = build_schur_basis::<f64>(2, 2).unwrap();
        let lambda = YoungDiagram::new(vec![2]).unwrap();
        let id = CMatrix::<f64>::identity(2, 2);
        let q = basis.gl_irrep_block(&id, &lambda).unwrap();
        assert!((q - CMatrix::<f64>::identity(3, 3)).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u = sample_haar_unitary::<f64, _>(2, &mut rng);
        let v = sample_haar_unitary::<f64, _>(2, &mut rng);
        let quv = basis.gl_irrep_block(&(&u * &v), &lambda).unwrap();
        let qu = basis.gl_irrep_block(&u, &lambda).unwrap();
        let qv = basis.gl_irrep_block(&v, &lambda).unwrap();
        assert!((quv - qu * qv).norm() < 1e-11);
    }

    #[test]
    fn gl_block_symmetric_power_character() {
        // tr Q_(2)(U) = (tr U)²/2 + tr(U²)/2.
        let basis = build_schur_basis::<f64>(2, 2).unwrap();
        let lambda = YoungDiagram::new(vec![2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let u = sample_haar_unitary::<f64, _>(2, &mut rng);
            let q = basis.gl_irrep_block(&u, &lambda).unwrap();
            let tr_u = u.trace();
            let tr_u2 = (&u * &u).trace();
            let expected = tr_u * tr_u * Complex64::new(0.5, 0.0) + tr_u2 * Complex64::new(0.5, 0.0);
            assert!((q.trace() - expected).norm() < 1e-11);
        }
    }

    #[test]
    fn bipartite_basis_block_bookkeeping() {
        let basis = build_bipartite_basis::<f64>(2, 2).unwrap();
        assert_eq!(basis.blocks.len(), 4);
        let dim_sum: usize = basis.blocks.iter().map(|b| b.dim()).sum();
        assert_eq!(dim_sum, 16);
    }

    fn random_bipartite_state(d: usize, seed: u64) -> StateVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = sample_haar_unitary::<f64, _>(d * d, &mut rng);
        let vec: CVector<f64> = u.column(0).into();
        StateVector::normalized(vec, SystemLayout::bipartite_copies(1, d)).unwrap()
    }

    #[test]
    fn pure_power_components_product_state() {
        let basis = build_bipartite_basis::<f64>(3, 2).unwrap();
        let psi = StateVector::<f64>::basis(SystemLayout::bipartite_copies(1, 2), 0);
        let comp = pure_power_components(&psi, &basis).unwrap();
        let triv = YoungDiagram::new(vec![3]).unwrap();
        assert!((comp.weight(&triv).unwrap() - 1.0).abs() < 1e-12);
        assert!(comp.residual < 1e-10);
    }

    #[test]
    fn pure_power_components_bell_weights() {
        let basis = build_bipartite_basis::<f64>(2, 2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let vec = CVector::<f64>::from_vec(vec![
            Complex64::new(s, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(s, 0.0),
        ]);
        let psi = StateVector::normalized(vec, SystemLayout::bipartite_copies(1, 2)).unwrap();
        let comp = pure_power_components(&psi, &basis).unwrap();
        let sym = YoungDiagram::new(vec![2]).unwrap();
        let anti = YoungDiagram::new(vec![1, 1]).unwrap();
        assert!((comp.weight(&sym).unwrap() - 0.75).abs() < 1e-12);
        assert!((comp.weight(&anti).unwrap() - 0.25).abs() < 1e-12);
        assert!(comp.residual < 1e-10);
    }

    #[test]
    fn pure_power_components_random_residual_and_reconstruction() {
        for (n, d, seed) in [(2usize, 2usize, 1u64), (3, 2, 2), (2, 3, 3)] {
            let basis = build_bipartite_basis::<f64>(n, d).unwrap();
            let psi = random_bipartite_state(d, seed);
            let comp = pure_power_components(&psi, &basis).unwrap();
            assert!(comp.residual < 1e-10, "residual at (N,d)=({n},{d})");
            let total: f64 = comp
                .components
                .iter()
                .map(|(l, _)| comp.weight(l).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10);

            let rebuilt = comp.reconstruct(&basis).unwrap();
            let power = StateVector {
                vec: psi.vec.clone(),
                layout: SystemLayout::bipartite_copies(1, d),
                subnormalized: false,
            }
            .tensor_power(n);
            assert!((&rebuilt.vec - &power.vec).norm() < 1e-10);
        }
    }

    #[test]
    fn interleave_index_matches_layout_arithmetic() {
        let (n, d) = (3usize, 2usize);
        let grouped_dims: Vec<usize> = vec![d; 2 * n];
        let layout = SystemLayout::untagged(&grouped_dims);
        for a in 0..d.pow(n as u32) {
            for b in 0..d.pow(n as u32) {
                // digits of a = A₁A₂A₃, b = B₁B₂B₃; interleaved A₁B₁A₂B₂A₃B₃.
                let a_digits = SystemLayout::copies(n, d).to_multi(a);
                let b_digits = SystemLayout::copies(n, d).to_multi(b);
                let mut multi = Vec::new();
                for k in 0..n {
                    multi.push(a_digits[k]);
                    multi.push(b_digits[k]);
                }
                assert_eq!(interleave_index(a, b, n, d), layout.from_multi(&multi));
            }
        }
    }
}
