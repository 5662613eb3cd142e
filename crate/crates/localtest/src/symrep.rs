//! Symmetric-group representations: the permutation action on `(C^d)^{⊗N}`,
//! Young's orthogonal irreducible representations `P_λ(π)`, and simultaneous
//! permutations on interleaved bipartite copies.
//!
//! Conventions:
//! * permutations are functions on positions `{0..N-1}` in one-line notation;
//!   `compose(π,σ) = π∘σ`, and `P(π)P(σ) = P(π∘σ)`;
//! * the tensor action moves factor `k` to slot `π(k)`, i.e.
//!   `P(π)|ψ_1…ψ_N⟩ = |ψ_{π⁻¹(1)}…ψ_{π⁻¹(N)}⟩`;
//! * irrep rows/columns are indexed by standard tableaux sorted by their
//!   row-reading word (the canonical order from [`crate::young`]).

use crate::hilbert::{factor_permutation_matrix, Operator, SystemLayout};
use crate::scalar::{RMatrix, Scalar};
use crate::young::{standard_tableaux, StandardTableau, YoungDiagram};
use crate::{Error, Result};

/// A permutation of `{0..n-1}` in one-line notation: `images[k] = π(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// The adjacent transposition `s_k` exchanging positions `k` and `k+1`.
    pub fn adjacent_transposition(n: usize, k: usize) -> Self {
        assert!(k + 1 < n, "adjacent transposition out of range");
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(k, k + 1);
        Self { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k]
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.n(), other.n());
        Permutation {
            images: other.images.iter().map(|&k| self.images[k]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (k, &img) in self.images.iter().enumerate() {
            images[img] = k;
        }
        Permutation { images }
    }

    /// Number of cycles (fixed points count as 1-cycles).
    pub fn n_cycles(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut cycles = 0;
        for start in 0..self.n() {
            if !seen[start] {
                cycles += 1;
                let mut k = start;
                while !seen[k] {
                    seen[k] = true;
                    k = self.images[k];
                }
            }
        }
        cycles
    }

    /// Decompose into adjacent transpositions: `π = s_{k_m} ∘ … ∘ s_{k_1}`,
    /// returned as `[k_1, …, k_m]` (apply left to right).
    pub fn adjacent_word(&self) -> Vec<usize> {
        // Bubble-sort the one-line array; swapping positions j, j+1 of the
        // array of τ realizes τ ↦ τ∘s_j, so sorting π to the identity yields
        // identity = π ∘ s_{j_1} ∘ … ∘ s_{j_m}, i.e. π = s_{j_m} ∘ … ∘ s_{j_1}.
        let mut arr = self.images.clone();
        let mut word = Vec::new();
        let n = arr.len();
        loop {
            let mut swapped = false;
            for j in 0..n.saturating_sub(1) {
                if arr[j] > arr[j + 1] {
                    arr.swap(j, j + 1);
                    word.push(j);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        word
    }
}

/// All permutations of `{0..n-1}` (n! entries), deterministic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    fn recurse(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Permutation>) {
        if current.len() == n {
            out.push(Permutation {
                images: current.clone(),
            });
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                current.push(k);
                recurse(n, current, used, out);
                current.pop();
                used[k] = false;
            }
        }
    }
    recurse(n, &mut current, &mut used, &mut out);
    out
}

/// The permutation matrix of `π` on `(C^d)^{⊗N}`:
/// `P(π)|ψ_1…ψ_N⟩ = |ψ_{π⁻¹(1)}…⟩`. Real, unitary.
pub fn perm_action<T: Scalar>(pi: &Permutation, n: usize, d: usize) -> Result<Operator<T>> {
    if pi.n() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation on {} letters, expected {n}",
            pi.n()
        )));
    }
    factor_permutation_matrix(&SystemLayout::copies(n, d), pi.images())
}

/// The simultaneous permutation `P_A(π) ⊗ P_B(π)` on the interleaved layout
/// `A_1 B_1 A_2 B_2 …` of `H_AB^{⊗N}`.
pub fn simultaneous_perm<T: Scalar>(pi: &Permutation, n: usize, d: usize) -> Result<Operator<T>> {
    if pi.n() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation on {} letters, expected {n}",
            pi.n()
        )));
    }
    let mut factor_perm = vec![0usize; 2 * n];
    for k in 0..n {
        factor_perm[2 * k] = 2 * pi.apply(k);
        factor_perm[2 * k + 1] = 2 * pi.apply(k) + 1;
    }
    factor_permutation_matrix(&SystemLayout::bipartite_copies(n, d), &factor_perm)
}

/// Young's orthogonal representation of `S_N` for a fixed shape λ:
/// real orthogonal matrices indexed by standard tableaux.
#[derive(Clone, Debug)]
pub struct SymIrrep<T: Scalar> {
    lambda: YoungDiagram,
    tableaux: Vec<StandardTableau>,
    /// Images of the adjacent transpositions `s_1 … s_{N-1}`.
    generators: Vec<RMatrix<T>>,
}

impl<T: Scalar> SymIrrep<T> {
    pub fn new(lambda: &YoungDiagram) -> Result<Self> {
        let n = lambda.boxes();
        let tableaux = standard_tableaux(lambda)?;
        let dim = tableaux.len();
        let index_of = |t: &StandardTableau| -> usize {
            tableaux
                .iter()
                .position(|u| u == t)
                .expect("swapped tableau must be in the enumeration")
        };
        let mut generators = Vec::with_capacity(n.saturating_sub(1));
        for k in 1..n {
            // Young's orthogonal form for s_k: on tableau t with axial
            // distance r = content(k+1) − content(k),
            //   s_k e_t = (1/r) e_t + √(1 − 1/r²) e_{s_k·t} (if standard).
            let mut m = RMatrix::<T>::zeros(dim, dim);
            for (a, t) in tableaux.iter().enumerate() {
                let r = t.content_of(k + 1) - t.content_of(k);
                let inv_r = T::one() / T::of(r as f64);
                m[(a, a)] = inv_r;
                if let Some(swapped) = t.apply_adjacent_transposition(k) {
                    let b = index_of(&swapped);
                    m[(b, a)] = (T::one() - inv_r * inv_r).sqrt();
                }
            }
            generators.push(m);
        }
        Ok(Self {
            lambda: lambda.clone(),
            tableaux,
            generators,
        })
    }

    pub fn lambda(&self) -> &YoungDiagram {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.tableaux.len()
    }

    pub fn tableaux(&self) -> &[StandardTableau] {
        &self.tableaux
    }

    /// The orthogonal matrix `P_λ(π)`.
    pub fn matrix(&self, pi: &Permutation) -> Result<RMatrix<T>> {
        if pi.n() != self.lambda.boxes() {
            return Err(Error::InvalidArgument(format!(
                "permutation on {} letters for shape with {} boxes",
                pi.n(),
                self.lambda.boxes()
            )));
        }
        let dim = self.dim();
        let mut m = RMatrix::<T>::identity(dim, dim);
        // π = s_{k_m} ∘ … ∘ s_{k_1} ⇒ P(π) = P(s_{k_m}) ⋯ P(s_{k_1}).
        for &k in pi.adjacent_word().iter().rev() {
            m = &m * &self.generators[k];
        }
        Ok(m)
    }
}

/// One-shot `P_λ(π)` without caching the irrep.
pub fn sym_irrep_matrix<T: Scalar>(lambda: &YoungDiagram, pi: &Permutation) -> Result<RMatrix<T>> {
    SymIrrep::<T>::new(lambda)?.matrix(pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::enumerate_partitions;
    use nalgebra::DMatrix;

    #[test]
    fn perm_action_identity_and_swap() {
        let id = Permutation::identity(2);
        let p = perm_action::<f64>(&id, 2, 2).unwrap();
        assert_eq!(p.mat, crate::scalar::CMatrix::<f64>::identity(4, 4));

        let swap = Permutation::adjacent_transposition(2, 0);
        let p = perm_action::<f64>(&swap, 2, 2).unwrap();
        // SWAP: |01⟩ ↦ |10⟩.
        assert_eq!(p.mat[(2, 1)].re, 1.0);
        assert_eq!(p.mat[(1, 2)].re, 1.0);
        assert_eq!(p.mat[(0, 0)].re, 1.0);
        assert_eq!(p.mat[(3, 3)].re, 1.0);
    }

    #[test]
    fn perm_action_homomorphism() {
        let pi = Permutation::new(vec![1, 2, 0]).unwrap();
        let sigma = Permutation::new(vec![0, 2, 1]).unwrap();
        let lhs = perm_action::<f64>(&pi, 3, 2).unwrap().mat
            * perm_action::<f64>(&sigma, 3, 2).unwrap().mat;
        let rhs = perm_action::<f64>(&pi.compose(&sigma), 3, 2).unwrap().mat;
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn perm_action_moves_factors() {
        // P(π)|ψ₁ψ₂ψ₃⟩ should put ψ_k at slot π(k).
        let pi = Permutation::new(vec![2, 0, 1]).unwrap();
        // |ψ⟩ = |0⟩|1⟩|1⟩ (index 3); expect |1⟩|1⟩|0⟩ (index 6).
        let p = perm_action::<f64>(&pi, 3, 2).unwrap();
        assert_eq!(p.mat[(6, 3)].re, 1.0);
    }

    #[test]
    fn irrep_trivial_and_sign() {
        let triv = YoungDiagram::new(vec![3]).unwrap();
        let rep = SymIrrep::<f64>::new(&triv).unwrap();
        for pi in all_permutations(3) {
            let m = rep.matrix(&pi).unwrap();
            assert!((m[(0, 0)] - 1.0).abs() < 1e-14);
        }
        let sign = YoungDiagram::new(vec![1, 1, 1]).unwrap();
        let rep = SymIrrep::<f64>::new(&sign).unwrap();
        let t = Permutation::adjacent_transposition(3, 1);
        assert!((rep.matrix(&t).unwrap()[(0, 0)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn irrep_orthogonal_homomorphism() {
        for n in 2..=4usize {
            for lambda in enumerate_partitions(n, n) {
                let rep = SymIrrep::<f64>::new(&lambda).unwrap();
                let perms = all_permutations(n);
                for pi in &perms {
                    let m = rep.matrix(pi).unwrap();
                    let gram = &m * m.transpose();
                    assert!(
                        (gram - DMatrix::<f64>::identity(rep.dim(), rep.dim())).norm() < 1e-12,
                        "orthogonality for λ={lambda}"
                    );
                }
                // Spot-check homomorphism on a few pairs.
                let pairs = [(1 % perms.len(), 2 % perms.len()), (0, perms.len() - 1), (perms.len() / 2, 1)];
                for (a, b) in pairs {
                    let lhs = rep.matrix(&perms[a]).unwrap() * rep.matrix(&perms[b]).unwrap();
                    let rhs = rep.matrix(&perms[a].compose(&perms[b])).unwrap();
                    assert!((lhs - rhs).norm() < 1e-12, "homomorphism for λ={lambda}");
                }
            }
        }
    }

    #[test]
    fn irrep_characters_two_one() {
        // λ=(2,1): character 0 at transpositions, −1 at 3-cycles.
        let lambda = YoungDiagram::new(vec![2, 1]).unwrap();
        let rep = SymIrrep::<f64>::new(&lambda).unwrap();
        let transposition = Permutation::new(vec![1, 0, 2]).unwrap();
        let three_cycle = Permutation::new(vec![1, 2, 0]).unwrap();
        assert!(rep.matrix(&transposition).unwrap().trace().abs() < 1e-14);
        assert!((rep.matrix(&three_cycle).unwrap().trace() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn simultaneous_perm_factorizes() {
        // Against the independent code path: P_A(π)⊗P_B(π) built on grouped
        // layout, then reordered to interleaved.
        let pi = Permutation::new(vec![1, 2, 0]).unwrap();
        let (n, d) = (3usize, 2usize);
        let sim = simultaneous_perm::<f64>(&pi, n, d).unwrap();

        let single = perm_action::<f64>(&pi, n, d).unwrap();
        let grouped = crate::hilbert::tensor_product(&[&single, &single]).unwrap();
        // Reorder grouped (A₁A₂A₃B₁B₂B₃) to interleaved (A₁B₁A₂B₂A₃B₃):
        // factor k<n goes to 2k, factor n+k goes to 2k+1.
        let mut perm = vec![0usize; 2 * n];
        for k in 0..n {
            perm[k] = 2 * k;
            perm[n + k] = 2 * k + 1;
        }
        let reordered = crate::hilbert::permute_factors(&grouped, &perm).unwrap();
        assert!((&sim.mat - &reordered.mat).norm() < 1e-13);
    }

    #[test]
    fn simultaneous_perm_fixes_pure_powers() {
        // |ψ⟩_AB^{⊗N} is invariant under every simultaneous permutation.
        let v = crate::scalar::CVector::<f64>::from_vec(vec![
            num_complex::Complex64::new(0.6, 0.0),
            num_complex::Complex64::new(0.0, 0.48),
            num_complex::Complex64::new(-0.36, 0.0),
            num_complex::Complex64::new(0.0, -0.528),
        ]);
        let psi = crate::hilbert::StateVector::normalized(
            v.normalize(),
            crate::hilbert::SystemLayout::bipartite_copies(1, 2),
        )
        .unwrap();
        let power = psi.tensor_power(3);
        for pi in all_permutations(3) {
            let p = simultaneous_perm::<f64>(&pi, 3, 2).unwrap();
            assert!((&p.mat * &power.vec - &power.vec).norm() < 1e-12);
        }
    }
}
