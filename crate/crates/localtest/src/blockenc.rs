//! Exact block-encoding algebra: verification against a declared target,
//! linear combination of encodings (LCU), down-scaling, and the conversions
//! between rank-1 reflections and projector block-encodings.
//!
//! Conventions (pinned for golden files):
//! * A block-encoding unitary acts on `C^n_target ⊗ C^{2^a}_ancilla` with the
//!   ancilla register **low-order**: flat index `t·2^a + anc`. The encoded
//!   block is `(I ⊗ ⟨0|^a) U (I ⊗ |0⟩^a)`, read off at ancilla index 0.
//! * Inside [`lcu_combine`] the select oracle `Σ_j |j⟩⟨j| ⊗ U_j` keeps the
//!   control register **high-order**; the result is then factor-permuted so
//!   the combined ancilla register (control bits above the old ancillas) sits
//!   low-order again.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::hilbert::{hermitian_eigen, permute_factors, Operator, SystemLayout};
use crate::scalar::{c, CMatrix, CVector, Scalar};
use crate::{Error, Result};

/// Constructed encodings with exact inputs must verify to within this.
pub const EXACT_TOL: f64 = 1e-10;
/// Unitarity tolerance for encoding inputs.
pub const UNITARY_TOL: f64 = 1e-9;

/// Operator (spectral) norm: largest singular value.
fn op_norm<T: Scalar>(m: &CMatrix<T>) -> T {
    let svd = m.clone().svd(false, false);
    svd.singular_values
        .iter()
        .fold(T::zero(), |acc, &s| if s > acc { s } else { acc })
}

fn check_unitary<T: Scalar>(u: &CMatrix<T>, what: &str) -> Result<()> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::Shape(format!("{what} is not square")));
    }
    let gap = (u.adjoint() * u - CMatrix::<T>::identity(n, n)).norm();
    if gap > T::of(UNITARY_TOL) * T::of(n as f64).sqrt() {
        return Err(Error::Validation(format!(
            "{what} is not unitary (deviation {})",
            gap.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Domain types.
// ---------------------------------------------------------------------------

/// An `(α, a, ε)`-block-encoding: a unitary on `C^n ⊗ C^{2^a}` whose
/// upper-left block (ancillas at `|0⟩^a`) approximates `A/α` in operator
/// norm: `‖α·(I⊗⟨0|^a) U (I⊗|0⟩^a) − A‖ ≤ ε`.
pub struct BlockEncoding<T: Scalar> {
    pub unitary: Operator<T>,
    pub alpha: T,
    pub ancillas: usize,
    pub epsilon: T,
    /// Dimension `n` of the encoded operator.
    pub target_dim: usize,
}

impl<T: Scalar> BlockEncoding<T> {
    /// Wrap a unitary as an encoding with the given declared parameters
    /// (`ε` is a declaration; measure it with [`verify_block_encoding`]).
    pub fn new(unitary: Operator<T>, alpha: T, ancillas: usize, epsilon: T) -> Result<Self> {
        if alpha <= T::zero() {
            return Err(Error::InvalidArgument("subnormalization α must be > 0".into()));
        }
        if epsilon < T::zero() {
            return Err(Error::InvalidArgument("ε must be ≥ 0".into()));
        }
        let anc_dim = 1usize << ancillas;
        let dim = unitary.dim();
        if dim % anc_dim != 0 {
            return Err(Error::Shape(format!(
                "unitary dimension {dim} is not divisible by the ancilla dimension {anc_dim}"
            )));
        }
        check_unitary(&unitary.mat, "block-encoding unitary")?;
        Ok(Self {
            target_dim: dim / anc_dim,
            unitary,
            alpha,
            ancillas,
            epsilon,
        })
    }

    /// The raw encoded block `(I⊗⟨0|^a) U (I⊗|0⟩^a)` (not yet scaled by α).
    pub fn encoded_block(&self) -> CMatrix<T> {
        let n = self.target_dim;
        let anc = 1usize << self.ancillas;
        CMatrix::from_fn(n, n, |i, j| self.unitary.mat[(i * anc, j * anc)])
    }

    /// `α · encoded_block()`: the operator this encoding represents.
    pub fn represented(&self) -> CMatrix<T> {
        self.encoded_block() * c(self.alpha)
    }
}

/// A `(β, b, ε)`-state-preparation-pair for coefficients `y`:
/// `P_L|0^b⟩ = Σ c_j|j⟩`, `P_R|0^b⟩ = Σ d_j|j⟩` with
/// `Σ_j |β c_j* d_j − y_j| ≤ ε` and `c_j* d_j = 0` past the support.
pub struct StatePrepPair<T: Scalar> {
    pub p_l: CMatrix<T>,
    pub p_r: CMatrix<T>,
    pub y: Vec<Complex<T>>,
    pub beta: T,
    pub b: usize,
}

/// Complete `first` (unit norm) to a unitary: identity columns, modified
/// Gram–Schmidt against the fixed first column.
fn unitary_with_first_column<T: Scalar>(first: &CVector<T>) -> Result<CMatrix<T>> {
    let n = first.len();
    let mut cols: Vec<CVector<T>> = vec![first.clone()];
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = CVector::<T>::zeros(n);
        v[i] = Complex::one();
        for existing in &cols {
            let overlap = existing.dotc(&v);
            v -= existing * overlap;
        }
        let norm = v.norm();
        if norm > T::of(1e-6) {
            cols.push(v / c(norm));
        }
    }
    if cols.len() != n {
        return Err(Error::Validation(
            "failed to complete the preparation column to a unitary".into(),
        ));
    }
    let mut u = CMatrix::<T>::zeros(n, n);
    for (k, col) in cols.iter().enumerate() {
        u.set_column(k, col);
    }
    check_unitary(&u, "preparation unitary")?;
    Ok(u)
}

impl<T: Scalar> StatePrepPair<T> {
    /// Exact pair for the coefficient vector `y`: `β = ‖y‖₁`,
    /// `c_j = √(|y_j|/β)`, `d_j = e^{i·arg y_j} √(|y_j|/β)`.
    pub fn for_coefficients(y: &[Complex<T>]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient vector".into()));
        }
        let beta = y
            .iter()
            .fold(T::zero(), |acc, v| acc + (v.norm_sqr()).sqrt());
        if beta <= T::zero() {
            return Err(Error::InvalidArgument("coefficients are all zero".into()));
        }
        let m = y.len();
        let b = (usize::BITS - (m - 1).leading_zeros()) as usize; // ⌈log₂ m⌉
        let dim = 1usize << b;
        let mut cl = CVector::<T>::zeros(dim);
        let mut dr = CVector::<T>::zeros(dim);
        for (j, &yj) in y.iter().enumerate() {
            let mag = yj.norm_sqr().sqrt();
            let amp = (mag / beta).sqrt();
            cl[j] = c(amp);
            dr[j] = if mag > T::zero() {
                yj / c(mag) * c(amp)
            } else {
                Complex::zero()
            };
        }
        let pair = Self {
            p_l: unitary_with_first_column(&cl)?,
            p_r: unitary_with_first_column(&dr)?,
            y: y.to_vec(),
            beta,
            b,
        };
        let residual = pair.residual();
        if residual > T::of(EXACT_TOL) {
            return Err(Error::Validation(format!(
                "preparation pair residual {}",
                residual.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(pair)
    }

    /// `Σ_j |β c_j* d_j − y_j|` plus the off-support products (should all be
    /// zero for an exact pair).
    pub fn residual(&self) -> T {
        let dim = 1usize << self.b;
        let mut total = T::zero();
        for j in 0..dim {
            let prod = self.p_l[(j, 0)].conj() * self.p_r[(j, 0)] * c(self.beta);
            let target = if j < self.y.len() {
                self.y[j]
            } else {
                Complex::zero()
            };
            total = total + (prod - target).norm_sqr().sqrt();
        }
        total
    }
}

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

/// Exact residual `‖α·(I⊗⟨0|^a) U (I⊗|0⟩^a) − A‖` (operator norm).
pub fn verify_block_encoding<T: Scalar>(
    u: &Operator<T>,
    a: &CMatrix<T>,
    alpha: T,
    ancillas: usize,
) -> Result<T> {
    let anc = 1usize << ancillas;
    let n = a.nrows();
    if a.ncols() != n || u.dim() != n * anc {
        return Err(Error::Shape(format!(
            "target is {}×{} but unitary dimension is {} (expected {})",
            a.nrows(),
            a.ncols(),
            u.dim(),
            n * anc
        )));
    }
    let block = CMatrix::<T>::from_fn(n, n, |i, j| u.mat[(i * anc, j * anc)]);
    Ok(op_norm(&(block * c(alpha) - a)))
}

/// Linear combination of block-encoded operators: with `(P_L, P_R)` a
/// `(β, b, ε₁)`-pair for `y` and each `U_j` an `(α, a, ε₂)`-encoding of
/// `A_j`, returns the `(αβ, a+b, αε₁+αβε₂)`-encoding of `Σ_j y_j A_j`,
/// built as `(P_L† ⊗ I)(Σ_j |j⟩⟨j| ⊗ U_j)(P_R ⊗ I)`.
pub fn lcu_combine<T: Scalar>(
    pair: &StatePrepPair<T>,
    encodings: &[BlockEncoding<T>],
) -> Result<BlockEncoding<T>> {
    if encodings.is_empty() {
        return Err(Error::InvalidArgument("no encodings to combine".into()));
    }
    let m = encodings.len();
    if m != pair.y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} encodings but {} coefficients",
            m,
            pair.y.len()
        )));
    }
    let first = &encodings[0];
    let (alpha, a, n) = (first.alpha, first.ancillas, first.target_dim);
    let mut eps2 = T::zero();
    for e in encodings {
        if e.alpha != alpha || e.ancillas != a || e.target_dim != n {
            return Err(Error::InvalidArgument(
                "encodings must share (α, a) and target dimension".into(),
            ));
        }
        if e.epsilon > eps2 {
            eps2 = e.epsilon;
        }
    }
    let ctrl = 1usize << pair.b;
    let inner = n << a;
    let total = ctrl * inner;
    // Select oracle, control high-order; identity on unused control values.
    let mut select = CMatrix::<T>::identity(total, total);
    for (j, e) in encodings.iter().enumerate() {
        let off = j * inner;
        select
            .view_mut((off, off), (inner, inner))
            .copy_from(&e.unitary.mat);
    }
    let pl_big = pair.p_l.adjoint().kronecker(&CMatrix::<T>::identity(inner, inner));
    let pr_big = pair.p_r.kronecker(&CMatrix::<T>::identity(inner, inner));
    let w = pl_big * select * pr_big;
    // Reorder (control, target, ancilla) → (target, control, ancilla) so the
    // combined ancilla register is low-order.
    let grouped = Operator::new(w, SystemLayout::untagged(&[ctrl, n, 1 << a]))?;
    let permuted = permute_factors(&grouped, &[1, 0, 2])?;
    let unitary = Operator::new(permuted.mat, SystemLayout::untagged(&[n, ctrl << a]))?;
    BlockEncoding::new(
        unitary,
        alpha * pair.beta,
        a + pair.b,
        alpha * pair.residual() + alpha * pair.beta * eps2,
    )
}

/// Down-scaling: from a `(1, a, ε)`-encoding of `A` to a
/// `(1, a+1, ε/α)`-encoding of `A/α` (`α > 1`), by one extra low-order
/// ancilla qubit prepared with a rotation of angle `arccos(1/α)`.
pub fn down_scale<T: Scalar>(be: &BlockEncoding<T>, factor: T) -> Result<BlockEncoding<T>> {
    if factor <= T::one() {
        return Err(Error::InvalidArgument("down-scaling factor must exceed 1".into()));
    }
    if (be.alpha - T::one()).abs() > T::of(1e-12) {
        return Err(Error::InvalidArgument(
            "down-scaling expects a subnormalization of exactly 1".into(),
        ));
    }
    let inv = T::one() / factor;
    let rest = (T::one() - inv * inv).sqrt();
    let mut rot = CMatrix::<T>::zeros(2, 2);
    rot[(0, 0)] = c(inv);
    rot[(1, 0)] = c(rest);
    rot[(0, 1)] = c(-rest);
    rot[(1, 1)] = c(inv);
    let dim = be.unitary.dim();
    let u_big = be.unitary.mat.kronecker(&CMatrix::<T>::identity(2, 2));
    let rot_big = CMatrix::<T>::identity(dim, dim).kronecker(&rot);
    let unitary = Operator::new(
        u_big * rot_big,
        SystemLayout::untagged(&[be.target_dim, 2 << be.ancillas]),
    )?;
    BlockEncoding::new(unitary, T::one(), be.ancillas + 1, be.epsilon / factor)
}

/// Check `r = I − 2|ψ⟩⟨ψ|`: unitary, Hermitian, eigenvalues `±1` with the
/// `−1` eigenspace one-dimensional. Returns `|ψ⟩`.
fn rank_one_reflection_state<T: Scalar>(r: &Operator<T>) -> Result<CVector<T>> {
    check_unitary(&r.mat, "reflection")?;
    let herm_gap = (&r.mat - r.mat.adjoint()).norm();
    if herm_gap > T::of(1e-9) {
        return Err(Error::Validation("reflection is not Hermitian".into()));
    }
    let (values, vectors) = hermitian_eigen(&r.mat);
    let minus: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| (v + T::one()).abs() < T::of(1e-8))
        .map(|(k, _)| k)
        .collect();
    let plus = values
        .iter()
        .filter(|&&v| (v - T::one()).abs() < T::of(1e-8))
        .count();
    if minus.len() != 1 || plus != values.len() - 1 {
        return Err(Error::Validation(
            "operator is not a rank-1 reflection (need spectrum {+1,…,+1,−1})".into(),
        ));
    }
    Ok(vectors.column(minus[0]).into_owned())
}

/// From a rank-1 reflection `R = I − 2|ψ⟩⟨ψ|` to a `(2, 2, 0)`-encoding of
/// `|ψ⟩⟨ψ|`: LCU with the pair `((|0⟩+|1⟩)/√2, (|0⟩−|1⟩)/√2)` for `(1, −1)`
/// (giving `I − R = 2|ψ⟩⟨ψ|` at subnormalization 2, i.e. `|ψ⟩⟨ψ|` at 1),
/// then a down-scaling by 2 to restore the α = 2 oracle convention.
pub fn reflection_to_projector<T: Scalar>(r: &Operator<T>) -> Result<BlockEncoding<T>> {
    let psi = rank_one_reflection_state(r)?;
    let pair = StatePrepPair::for_coefficients(&[
        Complex::one(),
        Complex::new(-T::one(), T::zero()),
    ])?;
    let n = r.dim();
    let identity = BlockEncoding::new(
        Operator::new(CMatrix::<T>::identity(n, n), r.layout.clone())?,
        T::one(),
        0,
        T::zero(),
    )?;
    let refl = BlockEncoding::new(r.clone(), T::one(), 0, T::zero())?;
    let combined = lcu_combine(&pair, &[identity, refl])?;
    // `combined` is a (2,1,0)-encoding of 2|ψ⟩⟨ψ|, hence a (1,1,0)-encoding
    // of |ψ⟩⟨ψ|; rescale the declaration, then halve the block.
    let unit = BlockEncoding::new(combined.unitary, T::one(), combined.ancillas, T::zero())?;
    let scaled = down_scale(&unit, T::of(2.0))?;
    let result = BlockEncoding::new(scaled.unitary, T::of(2.0), scaled.ancillas, T::zero())?;
    let projector = CMatrix::<T>::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
    let residual = verify_block_encoding(&result.unitary, &projector, result.alpha, result.ancillas)?;
    if residual > T::of(EXACT_TOL) {
        return Err(Error::Validation(format!(
            "constructed projector encoding has residual {}",
            residual.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(result)
}

/// From an exact `(2, a, 0)`-encoding of a projector `A = |ψ⟩⟨ψ|` to the
/// `(5, a+1, 0)`-encoding of `I − 2A` (the object amplitude amplification
/// would then bring to subnormalization 1; that step is out of scope).
///
/// Uses the `(5, 1, 0)`-pair for `(1, −4)` with `U_1 = I` (an `(1, a, 0)`-
/// encoding of `I`) and `U_2` the input (an `(1, a, 0)`-encoding of `A/2`):
/// `1·I − 4·(A/2) = I − 2A`.
pub fn projector_to_reflection_pre_aa<T: Scalar>(
    be: &BlockEncoding<T>,
) -> Result<BlockEncoding<T>> {
    if (be.alpha - T::of(2.0)).abs() > T::of(1e-12) {
        return Err(Error::InvalidArgument(
            "expected a subnormalization of exactly 2".into(),
        ));
    }
    if be.epsilon > T::of(EXACT_TOL) {
        return Err(Error::InvalidArgument(
            "construction requires an exact (ε = 0) input encoding".into(),
        ));
    }
    let pair = StatePrepPair::for_coefficients(&[
        Complex::one(),
        Complex::new(-T::of(4.0), T::zero()),
    ])?;
    let dim = be.unitary.dim();
    let identity = BlockEncoding::new(
        Operator::new(
            CMatrix::<T>::identity(dim, dim),
            be.unitary.layout.clone(),
        )?,
        T::one(),
        be.ancillas,
        T::zero(),
    )?;
    let half_proj = BlockEncoding::new(
        be.unitary.clone(),
        T::one(),
        be.ancillas,
        T::zero(),
    )?;
    let combined = lcu_combine(&pair, &[identity, half_proj])?;
    // Sanity: top-left block equals (I − 2A)/5.
    let a_mat = be.represented();
    let n = be.target_dim;
    let target = CMatrix::<T>::identity(n, n) - a_mat * c(T::of(2.0));
    let residual =
        verify_block_encoding(&combined.unitary, &target, combined.alpha, combined.ancillas)?;
    if residual > T::of(EXACT_TOL) {
        return Err(Error::Validation(format!(
            "constructed reflection encoding has residual {}",
            residual.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(combined)
}
