//! One-way LOCC: the `L_λ` operator, a shot-level simulation of the
//! five-step measurement protocol, and soundness amplification with exact
//! binomial tails.

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hilbert::{hermitian_eigen, Operator, SystemLayout};
use crate::scalar::{c, CMatrix, Scalar};
use crate::schur::build_bipartite_basis;
use crate::testers::LoccTester;
use crate::twirl::sample_haar_unitary;
use crate::{Error, Result};

/// `L = (1/dim)|I⟩⟩⟨⟨I| + (1/(dim+1))(I − (1/dim)|I⟩⟩⟨⟨I|)` on
/// `C^dim ⊗ C^dim`, with eigenvalue 1 on `|I⟩⟩/√dim` and `1/(dim+1)` on its
/// orthogonal complement. Equals the Haar average of
/// `Σ_i (U ⊗ U*)|ii⟩⟨ii|(U ⊗ U*)†`, which is what makes it one-way-LOCC
/// implementable.
pub fn l_lambda<T: Scalar>(dim: usize) -> Result<Operator<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("l_lambda needs dim ≥ 1".into()));
    }
    let d2 = dim * dim;
    let mut mat = CMatrix::<T>::identity(d2, d2) * c(T::one() / T::of_usize(dim + 1));
    let coeff = (T::one() / T::of_usize(dim)
        - T::one() / (T::of_usize(dim) * T::of_usize(dim + 1)))
    .max(T::zero());
    for i in 0..dim {
        for j in 0..dim {
            mat[(i * dim + i, j * dim + j)] += c(coeff);
        }
    }
    Operator::new(mat, SystemLayout::untagged(&[dim, dim]))
}

// ---------------------------------------------------------------------------
// Shot-level protocol simulation.
// ---------------------------------------------------------------------------

/// One shot of the protocol. Bob's sampled unitaries are recorded as the
/// per-shot RNG stream (seed digest), not as full matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoccShotRecord {
    pub shot: usize,
    pub rng_stream: u64,
    pub lambda_b: String,
    pub i_b: usize,
    /// `None` when Alice's measurement lands in the reject residue.
    pub lambda_a: Option<String>,
    pub i_a: Option<usize>,
    pub accept: bool,
}

/// Full protocol transcript, one record per shot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoccTranscript {
    pub seed: u64,
    pub records: Vec<LoccShotRecord>,
}

impl LoccTranscript {
    /// JSON-lines export (one shot per line, sorted by shot index).
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("plain struct serializes"));
            out.push('\n');
        }
        out
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.accept).count() as f64 / self.records.len() as f64
    }
}

/// Simulate the one-way LOCC protocol for `shots` independent rounds on
/// `ρ^{⊗N}` and return the empirical acceptance rate with the transcript.
///
/// Per shot: Bob Haar-samples `U_λ` for every shape λ, measures his copies in
/// the rotated Schur basis obtaining `(λ_B, i_B)`, and sends the message to
/// Alice; Alice measures `{U_λ|i⟩⟨i|U_λ† ⊗ H_λ/(dim V_λ · dim W_λ)}` plus the
/// reject residue, and accepts on `(λ_A, i_A) = (λ_B, i_B)`. The empirical
/// rate is an unbiased estimator of `tr[T̂ ρ^{⊗N}]`.
pub fn simulate_one_way_locc<T: Scalar>(
    hat: &LoccTester<T>,
    rho: &Operator<T>,
    shots: usize,
    seed: u64,
) -> Result<(T, LoccTranscript)> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots ≥ 1 required".into()));
    }
    let n = hat.tester.n_copies;
    let d = hat.tester.local_dim;
    let basis = build_bipartite_basis::<T>(n, d)?;

    // Alice's normalized W-side blocks; validity of her POVM requires each
    // to sit below the identity (otherwise the residue is non-normalizable).
    let mut h_norm: Vec<CMatrix<T>> = Vec::with_capacity(hat.blocks.len());
    for pb in &hat.blocks {
        let hn = &pb.h * c(T::one() / T::of_usize(pb.dim_v * pb.dim_w));
        let (eigs, _) = hermitian_eigen(&hn);
        if eigs[eigs.len() - 1] > T::one() + T::of(1e-9) {
            return Err(Error::Validation(format!(
                "non-normalizable measurement residue for λ={} (‖H‖/(dimV·dimW) = {})",
                pb.lambda,
                eigs[eigs.len() - 1].to_f64().unwrap_or(f64::NAN)
            )));
        }
        h_norm.push(hn);
    }

    // ρ^{⊗N} in the Schur basis, computed once.
    let mut power = rho.mat.clone();
    for _ in 1..n {
        power = power.kronecker(&rho.mat);
    }
    let y = basis.to_schur(&power);

    // tr[y · (P_A ⊗ O_B ⊗ G_{W_A} ⊗ I_{W_B})] over the given bipartite blocks.
    // `None` factors mean identity on that tensor slot.
    let contract = |lambda_a: Option<usize>,
                    lambda_b: usize,
                    pa: Option<&CMatrix<T>>,
                    ob: &CMatrix<T>,
                    g: Option<&CMatrix<T>>|
     -> T {
        let mut acc = Complex::<T>::zero();
        for (bi, b) in basis.blocks.iter().enumerate() {
            if let Some(la) = lambda_a {
                if b.lambda_a != hat.blocks[la].lambda {
                    continue;
                }
            }
            if b.lambda_b != hat.blocks[lambda_b].lambda {
                continue;
            }
            let _ = bi;
            for ja_r in 0..b.dim_va {
                for ja_c in 0..b.dim_va {
                    let pa_entry = match pa {
                        Some(p) => p[(ja_c, ja_r)],
                        None => {
                            if ja_c == ja_r {
                                Complex::new(T::one(), T::zero())
                            } else {
                                continue;
                            }
                        }
                    };
                    for jb_r in 0..b.dim_vb {
                        for jb_c in 0..b.dim_vb {
                            let ob_entry = ob[(jb_c, jb_r)];
                            if ob_entry == Complex::<T>::zero() {
                                continue;
                            }
                            for ma_r in 0..b.dim_wa {
                                for ma_c in 0..b.dim_wa {
                                    let g_entry = match g {
                                        Some(gm) => gm[(ma_c, ma_r)],
                                        None => {
                                            if ma_c == ma_r {
                                                Complex::new(T::one(), T::zero())
                                            } else {
                                                continue;
                                            }
                                        }
                                    };
                                    for mb in 0..b.dim_wb {
                                        acc += y[(
                                            b.col(ja_r, jb_r, ma_r, mb),
                                            b.col(ja_c, jb_c, ma_c, mb),
                                        )] * pa_entry
                                            * ob_entry
                                            * g_entry;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        acc.re
    };

    let mut records = Vec::with_capacity(shots);
    let mut accepted = 0usize;
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot as u64);

        // Bob's Haar unitaries, one per shape, in block order.
        let unitaries: Vec<CMatrix<T>> = hat
            .blocks
            .iter()
            .map(|pb| sample_haar_unitary::<T, _>(pb.dim_v, &mut rng))
            .collect();

        // Bob's outcome distribution over (λ_B, i_B).
        let mut bob_probs: Vec<(usize, usize, T)> = Vec::new();
        for (li, pb) in hat.blocks.iter().enumerate() {
            let u = &unitaries[li];
            for i in 0..pb.dim_v {
                // O = U*|i⟩⟨i|Uᵀ on V_B.
                let ob = CMatrix::<T>::from_fn(pb.dim_v, pb.dim_v, |a, bcol| {
                    u[(a, i)].conj() * u[(bcol, i)]
                });
                let p = contract(None, li, None, &ob, None).max(T::zero());
                bob_probs.push((li, i, p));
            }
        }
        let total_p: T = bob_probs.iter().fold(T::zero(), |acc, &(_, _, p)| acc + p);
        if (total_p - T::one()).abs() > T::of(1e-8) {
            return Err(Error::Validation(format!(
                "Bob outcome probabilities sum to {} ≠ 1",
                total_p.to_f64().unwrap_or(f64::NAN)
            )));
        }

        let draw = T::of(rng.gen::<f64>()) * total_p;
        let mut cum = T::zero();
        let mut bob_choice = bob_probs.len() - 1;
        for (idx, &(_, _, p)) in bob_probs.iter().enumerate() {
            cum += p;
            if draw < cum {
                bob_choice = idx;
                break;
            }
        }
        let (lb, ib, p_bob) = bob_probs[bob_choice];
        let u_b = &unitaries[lb];
        let ob = CMatrix::<T>::from_fn(
            hat.blocks[lb].dim_v,
            hat.blocks[lb].dim_v,
            |a, bcol| u_b[(a, ib)].conj() * u_b[(bcol, ib)],
        );

        // Alice's conditional outcome distribution over (λ_A, i_A) ∪ reject.
        let mut alice_probs: Vec<(usize, usize, T)> = Vec::new();
        for (la, pa_block) in hat.blocks.iter().enumerate() {
            let u = &unitaries[la];
            for i in 0..pa_block.dim_v {
                let pa = CMatrix::<T>::from_fn(pa_block.dim_v, pa_block.dim_v, |a, bcol| {
                    u[(a, i)] * u[(bcol, i)].conj()
                });
                let t_joint =
                    contract(Some(la), lb, Some(&pa), &ob, Some(&h_norm[la])).max(T::zero());
                alice_probs.push((la, i, t_joint));
            }
        }
        let joint_sum: T = alice_probs.iter().fold(T::zero(), |acc, &(_, _, p)| acc + p);
        if joint_sum > p_bob + T::of(1e-8) {
            return Err(Error::Validation(
                "non-normalizable measurement residue (Alice probabilities exceed 1)".into(),
            ));
        }

        let draw_a = T::of(rng.gen::<f64>()) * p_bob;
        let mut cum_a = T::zero();
        let mut alice_outcome: Option<(usize, usize)> = None;
        for &(la, i, p) in &alice_probs {
            cum_a += p;
            if draw_a < cum_a {
                alice_outcome = Some((la, i));
                break;
            }
        }
        let accept = alice_outcome == Some((lb, ib));
        if accept {
            accepted += 1;
        }
        records.push(LoccShotRecord {
            shot,
            rng_stream: shot as u64,
            lambda_b: hat.blocks[lb].lambda.label(),
            i_b: ib,
            lambda_a: alice_outcome.map(|(la, _)| hat.blocks[la].lambda.label()),
            i_a: alice_outcome.map(|(_, i)| i),
            accept,
        });
    }

    let rate = T::of_usize(accepted) / T::of_usize(shots);
    Ok((rate, LoccTranscript { seed, records }))
}

// ---------------------------------------------------------------------------
// Amplification.
// ---------------------------------------------------------------------------

/// Repetition schedule turning a `(c, (s+c)/2)`-gap into a `(c, s)`-tester.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AmplifierConfig {
    pub completeness: f64,
    pub soundness: f64,
    pub repetitions: usize,
    pub threshold: f64,
}

/// `n = ⌈100·ln(1/s + 10)·(c−s)⁻³⌉`, `t = 3c/4 + s/4`.
pub fn amplification_schedule(c: f64, s: f64) -> Result<AmplifierConfig> {
    if !(0.0 < s && s < c && c <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < s < c ≤ 1, got c={c}, s={s}"
        )));
    }
    let n = (100.0 * (1.0 / s + 10.0).ln() / (c - s).powi(3)).ceil() as usize;
    Ok(AmplifierConfig {
        completeness: c,
        soundness: s,
        repetitions: n,
        threshold: 0.75 * c + 0.25 * s,
    })
}

/// Which binomial tail to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// `Pr[X/n ≥ t]`.
    AtLeast,
    /// `Pr[X/n < t]`.
    Below,
}

/// Exact binomial tail for `X ~ Bin(n, p)` via stable log-space summation.
pub fn amplified_error_exact(p: f64, n: usize, t: f64, tail: Tail) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0,1]")));
    }
    // k ≥ n·t for AtLeast; handle the edge where n·t is an integer exactly.
    let k_min = (n as f64 * t).ceil() as usize;
    let at_least = if p == 0.0 {
        if k_min == 0 { 1.0 } else { 0.0 }
    } else if p == 1.0 {
        if k_min <= n { 1.0 } else { 0.0 }
    } else {
        // ln k! table, then log-sum-exp over the smaller tail.
        let mut ln_fact = vec![0.0f64; n + 1];
        for k in 1..=n {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let ln_p = p.ln();
        let ln_q = (1.0 - p).ln();
        let log_terms: Vec<f64> = (k_min..=n)
            .map(|k| {
                ln_fact[n] - ln_fact[k] - ln_fact[n - k]
                    + k as f64 * ln_p
                    + (n - k) as f64 * ln_q
            })
            .collect();
        if log_terms.is_empty() {
            0.0
        } else {
            let m = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = log_terms.iter().map(|&l| (l - m).exp()).sum();
            (m + sum.ln()).exp().min(1.0)
        }
    };
    Ok(match tail {
        Tail::AtLeast => at_least,
        Tail::Below => (1.0 - at_least).clamp(0.0, 1.0),
    })
}

/// Hoeffding bound on the same tail: `exp(−2nΔ²)` with `Δ = |t − p|`,
/// valid when the tail points away from the mean.
pub fn hoeffding_bound(p: f64, n: usize, t: f64, tail: Tail) -> f64 {
    let delta = match tail {
        Tail::AtLeast => t - p,
        Tail::Below => p - t,
    };
    if delta <= 0.0 {
        return 1.0;
    }
    (-2.0 * n as f64 * delta * delta).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testers::{locc_tester, random_pure_state, random_tester, Tester};
    use crate::twirl::sample_haar_unitary;
    use num_complex::Complex64;

    #[test]
    fn l_lambda_structure() {
        let l1 = l_lambda::<f64>(1).unwrap();
        assert!((l1.mat[(0, 0)] - Complex64::ONE).norm() < 1e-12);

        for dim in 2..=4usize {
            let l = l_lambda::<f64>(dim).unwrap();
            let (eigs, _) = hermitian_eigen(&l.mat);
            // One eigenvalue 1, the rest 1/(dim+1).
            let expect_low = 1.0 / (dim as f64 + 1.0);
            assert!((eigs[eigs.len() - 1] - 1.0).abs() < 1e-12);
            for &e in &eigs[..eigs.len() - 1] {
                assert!((e - expect_low).abs() < 1e-12, "eig {e}");
            }
            // |I⟩⟩ is the top eigenvector.
            let mut max_ent = crate::scalar::CVector::<f64>::zeros(dim * dim);
            for i in 0..dim {
                max_ent[i * dim + i] = Complex64::ONE;
            }
            let applied = &l.mat * &max_ent;
            assert!((applied - &max_ent).norm() < 1e-12);
        }
    }

    #[test]
    fn l_lambda_is_the_locc_haar_average() {
        // L = E_U[(U ⊗ U*)(Σ_i |ii⟩⟨ii|)(U ⊗ U*)†], Monte-Carlo check.
        let dim = 2usize;
        let l = l_lambda::<f64>(dim).unwrap();
        let mut diag = CMatrix::<f64>::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            diag[(i * dim + i, i * dim + i)] = Complex64::ONE;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shots = 20_000;
        let mut acc = CMatrix::<f64>::zeros(dim * dim, dim * dim);
        for _ in 0..shots {
            let u = sample_haar_unitary::<f64, _>(dim, &mut rng);
            let u_conj = u.map(|z| z.conj());
            let w = u.kronecker(&u_conj);
            acc += &w * &diag * w.adjoint();
        }
        acc /= Complex64::new(shots as f64, 0.0);
        assert!(
            (&acc - &l.mat).norm() < 0.05,
            "MC deviation {}",
            (&acc - &l.mat).norm()
        );
    }

    #[test]
    fn simulation_accepts_pure_powers_under_identity_tester() {
        let (n, d) = (2usize, 2usize);
        let hat = locc_tester(&Tester::<f64>::identity(n, d)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi =
            random_pure_state::<f64, _>(d * d, SystemLayout::bipartite_copies(1, d), &mut rng);
        let (rate, transcript) = simulate_one_way_locc(&hat, &psi.density(), 300, 17).unwrap();
        assert!((rate - 1.0).abs() < 1e-12, "rate {rate}");
        for r in &transcript.records {
            assert!(r.accept);
            assert_eq!(r.lambda_a.as_deref(), Some(r.lambda_b.as_str()));
            assert_eq!(r.i_a, Some(r.i_b));
        }
    }

    #[test]
    fn simulation_matches_exact_acceptance() {
        let (n, d) = (2usize, 2usize);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = random_tester::<f64, _>(n, d, &mut rng);
        let hat = locc_tester(&t).unwrap();
        let psi =
            random_pure_state::<f64, _>(d * d, SystemLayout::bipartite_copies(1, d), &mut rng);
        let rho = psi.density();
        let exact = hat.tester.acceptance(&rho).unwrap();
        let shots = 20_000usize;
        let (rate, _) = simulate_one_way_locc(&hat, &rho, shots, 23).unwrap();
        let sigma = (exact * (1.0 - exact) / shots as f64).sqrt().max(1e-6);
        assert!(
            (rate - exact).abs() <= 4.0 * sigma,
            "rate {rate} vs exact {exact} (4σ = {})",
            4.0 * sigma
        );
    }

    #[test]
    fn simulation_is_deterministic_and_transcript_consistent() {
        let (n, d) = (2usize, 2usize);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = random_tester::<f64, _>(n, d, &mut rng);
        let hat = locc_tester(&t).unwrap();
        let psi =
            random_pure_state::<f64, _>(d * d, SystemLayout::bipartite_copies(1, d), &mut rng);
        let rho = psi.density();
        let (r1, tr1) = simulate_one_way_locc(&hat, &rho, 100, 44).unwrap();
        let (r2, tr2) = simulate_one_way_locc(&hat, &rho, 100, 44).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(tr1.to_json_lines(), tr2.to_json_lines());
        // accept ⇔ outcomes match.
        for r in &tr1.records {
            let matches =
                r.lambda_a.as_deref() == Some(r.lambda_b.as_str()) && r.i_a == Some(r.i_b);
            assert_eq!(r.accept, matches);
        }
        assert!((tr1.acceptance_rate() - r1).abs() < 1e-12);
    }

    #[test]
    fn amplification_schedule_constants() {
        let cfg = amplification_schedule(2.0 / 3.0, 1.0 / 3.0).unwrap();
        assert_eq!(cfg.repetitions, 6926);
        assert!((cfg.threshold - 7.0 / 12.0).abs() < 1e-15);

        let cfg1 = amplification_schedule(1.0, 0.2).unwrap();
        assert!((cfg1.threshold - (0.75 + 0.05)).abs() < 1e-15);
        assert!(amplification_schedule(0.3, 0.5).is_err());
    }

    #[test]
    fn exact_tails_edge_cases_and_midpoint() {
        assert_eq!(amplified_error_exact(1.0, 100, 0.9, Tail::AtLeast).unwrap(), 1.0);
        assert_eq!(amplified_error_exact(0.0, 100, 0.1, Tail::AtLeast).unwrap(), 0.0);

        // Midpoint per-trial probability with the (2/3, 1/3) schedule: the
        // no-instance error Pr[mean ≥ 7/12] must fall below 1/3 (it is tiny).
        let cfg = amplification_schedule(2.0 / 3.0, 1.0 / 3.0).unwrap();
        let err = amplified_error_exact(0.5, cfg.repetitions, cfg.threshold, Tail::AtLeast)
            .unwrap();
        assert!(err < 1.0 / 3.0, "err {err}");
        assert!(err < 1e-6, "expected a tiny tail, got {err}");
    }

    #[test]
    fn exact_tails_respect_hoeffding() {
        for &(p, n, t) in &[
            (0.5, 200usize, 0.6),
            (0.5, 1000, 0.55),
            (0.7, 500, 0.8),
            (0.3, 500, 0.2),
            (0.9, 100, 0.95),
        ] {
            for tail in [Tail::AtLeast, Tail::Below] {
                let exact = amplified_error_exact(p, n, t, tail).unwrap();
                let bound = hoeffding_bound(p, n, t, tail);
                assert!(
                    exact <= bound + 1e-12,
                    "p={p}, n={n}, t={t}, {tail:?}: exact {exact} > bound {bound}"
                );
            }
        }
    }

    #[test]
    fn amplified_pipeline_brackets_target_errors() {
        // Yes-instances accept ≥ c per trial; no-instances ≤ (s+c)/2.
        let (c, s) = (2.0 / 3.0, 1.0 / 3.0);
        let cfg = amplification_schedule(c, s).unwrap();
        let yes_fail =
            amplified_error_exact(c, cfg.repetitions, cfg.threshold, Tail::Below).unwrap();
        let no_pass = amplified_error_exact(
            (s + c) / 2.0,
            cfg.repetitions,
            cfg.threshold,
            Tail::AtLeast,
        )
        .unwrap();
        assert!(yes_fail <= 1.0 - c, "yes-instance failure {yes_fail}");
        assert!(no_pass <= s, "no-instance pass {no_pass}");
    }
}
