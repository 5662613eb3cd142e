//! Configuration-driven verification suites with JSON/CSV report emission.
//!
//! Each suite re-runs a family of exact identities and inequality margins
//! from the other modules at desk scale and records one [`CheckRecord`] per
//! aggregate check. Reports are deterministic functions of the configuration
//! (including its seed): emitting the same configuration twice yields
//! byte-identical files. For that reason wall-clock runtimes are kept out of
//! the serialized records; [`Report::elapsed`] carries the total as a plain
//! field that `emit` never writes.
//!
//! The CLI crate is a thin wrapper: parse flags into an
//! [`ExperimentConfig`], call [`run_suite`], [`Report::emit`] the result, and
//! map `passed()` onto the exit status.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockenc::{
    projector_to_reflection_pre_aa, reflection_to_projector, verify_block_encoding,
};
use crate::hardness::{helstrom_bound, purity_lower_bound_curve, verify_grid, HardnessGrid};
use crate::hilbert::{hermitian_eigen, validate_povm_element, Operator, SystemLayout};
use crate::locc::{
    amplification_schedule, amplified_error_exact, hoeffding_bound, l_lambda,
    simulate_one_way_locc, Tail,
};
use crate::properties::weak_schur_distribution;
use crate::schur::{build_bipartite_basis, pure_power_components};
use crate::testers::{
    embed_purity, locc_tester, localize, permutation_symmetrize, purity_projector,
    random_density, random_pure_state, random_tester, twirl_tester,
};
use crate::twirl::{commutant_projection_twirl, haar_twirl, monte_carlo_twirl, sample_haar_unitary, TwirlSpec};
use crate::young::{dim_sym_irrep, schur_polynomial};
use crate::{CMatrix, Error, Result};

/// Grid shipped with the repository; used when no override path is given so
/// the hardness suite works regardless of the working directory.
const DEFAULT_HARDNESS_GRID: &str = include_str!("../../../config/hardness_grid.toml");

// ---------------------------------------------------------------------------
// Suites.
// ---------------------------------------------------------------------------

/// The verification suites the runner knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Normal form of pure powers, weak Schur sampling, twirl agreement.
    Schur,
    /// Localization equality, POVM validity, purity-projector identities.
    Localize,
    /// `L_λ` identities, the one-way measurement chain, shot simulation.
    Locc,
    /// Distance-bound margins, purity fidelity curve, optimal discrimination.
    Hardness,
    /// Reflection ↔ projector block-encoding round trips.
    Blockenc,
    /// Exact repetition tails against their concentration bounds.
    Amplify,
    /// Everything above, in the order listed.
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Schur => "schur",
            Suite::Localize => "localize",
            Suite::Locc => "locc",
            Suite::Hardness => "hardness",
            Suite::Blockenc => "blockenc",
            Suite::Amplify => "amplify",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schur" => Ok(Suite::Schur),
            "localize" => Ok(Suite::Localize),
            "locc" => Ok(Suite::Locc),
            "hardness" => Ok(Suite::Hardness),
            "blockenc" => Ok(Suite::Blockenc),
            "amplify" => Ok(Suite::Amplify),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!(
                "unknown suite {other:?}; expected one of \
                 schur|localize|locc|hardness|blockenc|amplify|all"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

/// Top-level runner configuration. Every field has a default, so an empty
/// TOML document is a valid configuration running the `all` suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Suite to run (see [`Suite`]).
    pub suite: String,
    /// Master seed: every random draw in every suite derives from it.
    pub seed: u64,
    /// Shots for every Monte-Carlo / simulation check.
    pub shots: u64,
    /// Report output directory; `None` disables emission from [`run_suite`]
    /// callers that honor it (the library itself never writes implicitly).
    pub out_dir: Option<PathBuf>,
    /// `"json"` or `"csv"`.
    pub format: String,
    pub schur: SchurSuiteConfig,
    pub localize: LocalizeSuiteConfig,
    pub locc: LoccSuiteConfig,
    pub hardness: HardnessSuiteConfig,
    pub blockenc: BlockencSuiteConfig,
    pub amplify: AmplifySuiteConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: "all".into(),
            seed: 7,
            shots: 20_000,
            out_dir: None,
            format: "json".into(),
            schur: SchurSuiteConfig::default(),
            localize: LocalizeSuiteConfig::default(),
            locc: LoccSuiteConfig::default(),
            hardness: HardnessSuiteConfig::default(),
            blockenc: BlockencSuiteConfig::default(),
            amplify: AmplifySuiteConfig::default(),
        }
    }
}

/// `(N, d)` grid plus sample counts for the Schur-side identity checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchurSuiteConfig {
    /// `(n_copies, local_dim)` pairs.
    pub pairs: Vec<[usize; 2]>,
    /// Random bipartite pure states per pair (normal-form checks).
    pub states: usize,
    /// Random spectra per pair (weak Schur sampling checks).
    pub spectra: usize,
    /// Random operators per pair (twirl triple-agreement checks).
    pub twirl_ops: usize,
}

impl Default for SchurSuiteConfig {
    fn default() -> Self {
        SchurSuiteConfig {
            pairs: vec![[2, 2], [3, 2]],
            states: 5,
            spectra: 5,
            twirl_ops: 2,
        }
    }
}

/// Grid and sample counts for the localization suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizeSuiteConfig {
    /// `(n_copies, local_dim)` pairs.
    pub pairs: Vec<[usize; 2]>,
    /// Random testers per pair.
    pub testers: usize,
    /// Random pure states per tester.
    pub states: usize,
}

impl Default for LocalizeSuiteConfig {
    fn default() -> Self {
        LocalizeSuiteConfig {
            pairs: vec![[2, 2], [3, 2]],
            testers: 5,
            states: 5,
        }
    }
}

/// Dimensions and sample counts for the one-way measurement suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoccSuiteConfig {
    /// Dimensions at which the `L` operator identities are checked.
    pub dims: Vec<usize>,
    /// `(n_copies, local_dim)` for the measurement-chain checks.
    pub pair: [usize; 2],
    /// Random testers for the chain checks.
    pub testers: usize,
    /// Random mixed states per tester for the slack check.
    pub states: usize,
}

impl Default for LoccSuiteConfig {
    fn default() -> Self {
        LoccSuiteConfig {
            dims: vec![1, 2, 3],
            pair: [2, 2],
            testers: 3,
            states: 3,
        }
    }
}

/// Grid source and curve parameters for the hard-instance suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardnessSuiteConfig {
    /// Override path for the margin grid; `None` uses the grid compiled into
    /// the library (`config/hardness_grid.toml`).
    pub grid_path: Option<PathBuf>,
    /// Depolarization strengths for the fidelity-power curve.
    pub purity_epsilons: Vec<f64>,
    /// Largest copy count on the curve.
    pub purity_max_copies: usize,
}

impl Default for HardnessSuiteConfig {
    fn default() -> Self {
        HardnessSuiteConfig {
            grid_path: None,
            purity_epsilons: vec![0.05, 0.1, 0.3],
            purity_max_copies: 10,
        }
    }
}

/// Sample counts for the block-encoding round trips.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockencSuiteConfig {
    /// Random pure states per qubit count.
    pub states: usize,
    /// Qubit counts 1..=max_qubits are exercised.
    pub max_qubits: usize,
}

impl Default for BlockencSuiteConfig {
    fn default() -> Self {
        BlockencSuiteConfig {
            states: 5,
            max_qubits: 2,
        }
    }
}

/// Thresholds and grid size for the repetition-tail suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplifySuiteConfig {
    pub completeness: f64,
    pub soundness: f64,
    /// Acceptance probabilities checked for concentration-bound domination.
    pub grid_points: usize,
}

impl Default for AmplifySuiteConfig {
    fn default() -> Self {
        AmplifySuiteConfig {
            completeness: 2.0 / 3.0,
            soundness: 1.0 / 3.0,
            grid_points: 20,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Re-validate everything the suites assume before dispatch.
    pub fn validate(&self) -> Result<()> {
        self.suite.parse::<Suite>()?;
        if self.format != "json" && self.format != "csv" {
            return Err(Error::Config(format!(
                "format must be \"json\" or \"csv\", got {:?}",
                self.format
            )));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be ≥ 1".into()));
        }
        for &[n, d] in self.schur.pairs.iter().chain(&self.localize.pairs) {
            if n == 0 || d < 2 {
                return Err(Error::Config(format!(
                    "grid pair ({n},{d}) needs N ≥ 1 and d ≥ 2"
                )));
            }
            if d.pow(2 * n as u32) > 4096 {
                return Err(Error::Config(format!(
                    "grid pair ({n},{d}) exceeds the d^2N ≤ 4096 dense guard"
                )));
            }
        }
        let [n, d] = self.locc.pair;
        if self.locc.testers > 0 && (n == 0 || d < 2 || d.pow(2 * n as u32) > 4096) {
            return Err(Error::Config(format!(
                "locc pair ({n},{d}) invalid or beyond the dense guard"
            )));
        }
        let (c, s) = (self.amplify.completeness, self.amplify.soundness);
        if !(0.0 < s && s < c && c <= 1.0) {
            return Err(Error::Config(format!(
                "amplify thresholds need 0 < s < c ≤ 1, got c={c}, s={s}"
            )));
        }
        for &eps in &self.hardness.purity_epsilons {
            if !(0.0 < eps && eps < 1.0) {
                return Err(Error::Config(format!("purity ε must lie in (0,1), got {eps}")));
            }
        }
        if self.blockenc.max_qubits > 5 {
            return Err(Error::Config("blockenc.max_qubits capped at 5".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Records and reports.
// ---------------------------------------------------------------------------

/// Whether a check is a two-sided identity or a one-sided inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Passes iff `|lhs − rhs| ≤ tolerance`.
    Eq,
    /// Passes iff `lhs ≤ rhs + tolerance`.
    Bound,
}

/// One aggregate check. `margin ≥ 0 ⇔ pass` for both kinds:
/// `tolerance − |lhs − rhs|` for identities, `rhs + tolerance − lhs` for
/// inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Which statement the check instantiates, in plain words.
    pub anchor: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub margin: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn eq(name: &str, anchor: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = tolerance - (lhs - rhs).abs();
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            kind: CheckKind::Eq,
            lhs,
            rhs,
            tolerance,
            margin,
            pass: margin >= 0.0,
        }
    }

    pub fn bound(name: &str, anchor: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs + tolerance - lhs;
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            kind: CheckKind::Bound,
            lhs,
            rhs,
            tolerance,
            margin,
            pass: margin >= 0.0,
        }
    }
}

/// A finished suite run. Serialization covers `suite`, `seed`, and `checks`
/// only; `elapsed` is informational and deliberately excluded so identical
/// configurations emit identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    /// Total runtime in seconds; not serialized.
    #[serde(skip)]
    pub elapsed: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Pretty JSON with a trailing newline; field order is fixed by the
    /// struct definitions.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// CSV with a pinned header; floats in full `%.16e` precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,anchor,kind,lhs,rhs,tolerance,margin,pass\n");
        for c in &self.checks {
            let kind = match c.kind {
                CheckKind::Eq => "eq",
                CheckKind::Bound => "bound",
            };
            writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                c.name, c.anchor.replace(',', ";"), kind, c.lhs, c.rhs, c.tolerance, c.margin, c.pass
            )
            .expect("string write");
        }
        out
    }

    /// Write `report_<suite>.<ext>` under `dir`; returns the path.
    pub fn emit(&self, dir: &Path, format: &str) -> Result<PathBuf> {
        let (ext, body) = match format {
            "json" => ("json", self.to_json()),
            "csv" => ("csv", self.to_csv()),
            other => {
                return Err(Error::Config(format!(
                    "format must be \"json\" or \"csv\", got {other:?}"
                )))
            }
        };
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("report_{}.{ext}", self.suite));
        std::fs::write(&path, body)?;
        Ok(path)
    }
}

// ---------------------------------------------------------------------------
// Runner.
// ---------------------------------------------------------------------------

/// Run one suite (or `all`) and collect its records. Deterministic given the
/// configuration: all randomness derives from `config.seed` through fixed
/// per-suite streams, and checks are appended in a fixed order.
pub fn run_suite(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let suite: Suite = config.suite.parse()?;
    let start = std::time::Instant::now();
    let mut checks = Vec::new();
    let ordered = match suite {
        Suite::All => vec![
            Suite::Schur,
            Suite::Localize,
            Suite::Locc,
            Suite::Hardness,
            Suite::Blockenc,
            Suite::Amplify,
        ],
        s => vec![s],
    };
    for s in ordered {
        match s {
            Suite::Schur => schur_checks(config, &mut checks)?,
            Suite::Localize => localize_checks(config, &mut checks)?,
            Suite::Locc => locc_checks(config, &mut checks)?,
            Suite::Hardness => hardness_checks(config, &mut checks)?,
            Suite::Blockenc => blockenc_checks(config, &mut checks)?,
            Suite::Amplify => amplify_checks(config, &mut checks)?,
            Suite::All => unreachable!("all expands above"),
        }
    }
    Ok(Report {
        suite: suite.as_str().into(),
        seed: config.seed,
        checks,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Distinct, fixed RNG stream per (suite, purpose) so adding draws to one
/// check never shifts another.
fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(tag))
}

fn schur_checks(config: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let cfg = &config.schur;
    // Normal form: cross-block residual and λ-weight normalization.
    for &[n, d] in &cfg.pairs {
        if cfg.states == 0 {
            continue;
        }
        let basis = build_bipartite_basis::<f64>(n, d)?;
        let mut rng = stream(config.seed, 0x5c);
        let mut max_residual: f64 = 0.0;
        let mut max_weight_dev: f64 = 0.0;
        for _ in 0..cfg.states {
            let psi = random_pure_state::<f64, _>(
                d * d,
                SystemLayout::bipartite_copies(1, d),
                &mut rng,
            );
            let comp = pure_power_components(&psi, &basis)?;
            max_residual = max_residual.max(comp.residual);
            let weight_sum: f64 = comp
                .components
                .iter()
                .map(|(l, _)| comp.weight(l).expect("own component"))
                .sum();
            max_weight_dev = max_weight_dev.max((weight_sum - 1.0).abs());
        }
        out.push(CheckRecord::eq(
            &format!("normal_form_residual_n{n}_d{d}"),
            "pure tensor powers have no weight outside the paired diagonal blocks",
            max_residual,
            0.0,
            1e-10,
        ));
        out.push(CheckRecord::eq(
            &format!("normal_form_weight_sum_n{n}_d{d}"),
            "block weights dimV·|w|^2 sum to one",
            max_weight_dev,
            0.0,
            1e-10,
        ));
    }

    // Weak Schur sampling against the symmetric-function formula.
    for &[n, d] in &cfg.pairs {
        if cfg.spectra == 0 {
            continue;
        }
        let mut rng = stream(config.seed, 0x5d);
        let mut max_dev: f64 = 0.0;
        for _ in 0..cfg.spectra {
            let mut spec: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let norm: f64 = spec.iter().sum();
            for p in &mut spec {
                *p /= norm;
            }
            let mut mat = CMatrix::<f64>::zeros(d, d);
            for (i, &p) in spec.iter().enumerate() {
                mat[(i, i)] = Complex::new(p, 0.0);
            }
            let rho = Operator::new(mat, SystemLayout::single(d))?;
            let dist = weak_schur_distribution(&rho, n)?;
            for (lambda, prob) in &dist.entries {
                let oracle =
                    dim_sym_irrep(lambda) as f64 * schur_polynomial(lambda, &spec)?;
                max_dev = max_dev.max((prob - oracle).abs());
            }
        }
        out.push(CheckRecord::eq(
            &format!("weak_schur_distribution_n{n}_d{d}"),
            "label distribution equals dimV · Schur polynomial of the spectrum",
            max_dev,
            0.0,
            1e-9,
        ));
    }

    // Twirl triple agreement: Schur-basis twirl vs commutant projection vs
    // Monte-Carlo.
    for &[n, d] in &cfg.pairs {
        if cfg.twirl_ops == 0 || n > 4 {
            continue;
        }
        let mut rng = stream(config.seed, 0x5e);
        let mut max_exact_dev: f64 = 0.0;
        let mut max_mc_lhs: f64 = 0.0;
        let mut max_mc_rhs: f64 = 0.0;
        for k in 0..cfg.twirl_ops {
            let layout = SystemLayout::copies(n, d);
            let x = random_density::<f64, _>(d.pow(n as u32), layout, &mut rng);
            let exact = haar_twirl(&x, n, d)?;
            let proj = commutant_projection_twirl(&x, n, d)?;
            max_exact_dev = max_exact_dev.max((&exact.mat - &proj.mat).norm());
            let est = monte_carlo_twirl(
                &x,
                &TwirlSpec::full(n, d),
                config.shots as usize,
                config.seed ^ (k as u64),
            )?;
            max_mc_lhs = max_mc_lhs.max((&est.mean - &exact.mat).norm());
            max_mc_rhs = max_mc_rhs.max(4.0 * est.std_error() + 1e-9);
        }
        out.push(CheckRecord::eq(
            &format!("twirl_commutant_agreement_n{n}_d{d}"),
            "Schur-basis collective twirl equals the commutant projection",
            max_exact_dev,
            0.0,
            1e-8,
        ));
        out.push(CheckRecord::bound(
            &format!("twirl_monte_carlo_agreement_n{n}_d{d}"),
            "sampled twirl within four standard errors of the exact twirl",
            max_mc_lhs,
            max_mc_rhs,
            0.0,
        ));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

fn localize_checks(config: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let cfg = &config.localize;
    for &[n, d] in &cfg.pairs {
        if cfg.testers == 0 {
            continue;
        }
        let mut rng = stream(config.seed, 0x10);
        let mut max_gap: f64 = 0.0;
        let mut min_eig: f64 = f64::INFINITY;
        let mut max_eig: f64 = f64::NEG_INFINITY;
        let mut max_comm: f64 = 0.0;
        for _ in 0..cfg.testers {
            let t = random_tester::<f64, _>(n, d, &mut rng);
            let hat = localize(&t)?;
            let tilde = twirl_tester(&t)?;
            for _ in 0..cfg.states {
                let psi = random_pure_state::<f64, _>(
                    d * d,
                    SystemLayout::bipartite_copies(1, d),
                    &mut rng,
                );
                let rho = psi.density();
                let a = hat.acceptance(&rho)?;
                let b = tilde.acceptance(&rho)?;
                max_gap = max_gap.max((a - b).abs());
            }
            let (lo, hi) = validate_povm_element(&hat.embed()?)?;
            min_eig = min_eig.min(lo);
            max_eig = max_eig.max(hi);

            // The purity projector commutes with the doubly symmetrized tester.
            let pi = purity_projector::<f64>(n, d)?;
            let tt = permutation_symmetrize(&twirl_tester(&t)?)?;
            let comm = &pi.op.mat * &tt.op.mat - &tt.op.mat * &pi.op.mat;
            max_comm = max_comm.max(comm.norm());
        }
        out.push(CheckRecord::eq(
            &format!("localization_equality_n{n}_d{d}"),
            "one-sided tester reproduces the twirled tester on every pure power",
            max_gap,
            0.0,
            1e-9,
        ));
        out.push(CheckRecord::bound(
            &format!("localized_povm_floor_n{n}_d{d}"),
            "localized tester stays positive semidefinite",
            -min_eig,
            0.0,
            1e-9,
        ));
        out.push(CheckRecord::bound(
            &format!("localized_povm_ceiling_n{n}_d{d}"),
            "localized tester stays below the identity",
            max_eig,
            1.0,
            1e-9,
        ));
        out.push(CheckRecord::bound(
            &format!("projector_commutes_n{n}_d{d}"),
            "purity projector commutes with the symmetrized twirled tester",
            max_comm,
            0.0,
            1e-9,
        ));

        // Rank of the purity projector = number of symmetric multi-indices.
        let pi = purity_projector::<f64>(n, d)?;
        let (eigs, _) = hermitian_eigen(&pi.op.mat);
        let rank = eigs.iter().filter(|&&e| e > 0.5).count();
        let expected = binomial(d * d + n - 1, n);
        out.push(CheckRecord::eq(
            &format!("projector_rank_n{n}_d{d}"),
            "purity projector rank equals the symmetric-subspace dimension",
            rank as f64,
            expected as f64,
            0.0,
        ));
    }
    Ok(())
}

fn locc_checks(config: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let cfg = &config.locc;
    // Eigenvalues of L and agreement with the sampled conjugate twirl.
    for &dim in &cfg.dims {
        let l = l_lambda::<f64>(dim)?;
        let (eigs, _) = hermitian_eigen(&l.mat);
        let target = 1.0 / (dim as f64 + 1.0);
        let max_dev = eigs
            .iter()
            .map(|&e| (e - 1.0).abs().min((e - target).abs()))
            .fold(0.0_f64, f64::max);
        out.push(CheckRecord::eq(
            &format!("l_operator_spectrum_dim{dim}"),
            "eigenvalues are exactly one and 1/(dim+1)",
            max_dev,
            0.0,
            1e-9,
        ));

        // Monte-Carlo oracle: average of (U ⊗ U*) Σ|ii><ii| (U ⊗ U*)†.
        let d2 = dim * dim;
        let mut diag = CMatrix::<f64>::zeros(d2, d2);
        for i in 0..dim {
            diag[(i * dim + i, i * dim + i)] = Complex::new(1.0, 0.0);
        }
        let shots = (config.shots as usize).min(5000).max(1);
        let mut rng = stream(config.seed, 0x4c ^ dim as u64);
        let mut mean = CMatrix::<f64>::zeros(d2, d2);
        let mut sq_norms = 0.0_f64;
        for _ in 0..shots {
            let u = sample_haar_unitary::<f64, _>(dim, &mut rng);
            let w = u.kronecker(&u.map(|z| z.conj()));
            let shot = &w * &diag * w.adjoint();
            sq_norms += shot.norm_squared();
            mean += shot;
        }
        mean /= Complex::new(shots as f64, 0.0);
        let scatter = (sq_norms / shots as f64 - mean.norm_squared()).max(0.0).sqrt();
        let lhs = (&mean - &l.mat).norm();
        let rhs = 4.0 * scatter / (shots as f64).sqrt() + 1e-9;
        out.push(CheckRecord::bound(
            &format!("l_operator_sampled_twirl_dim{dim}"),
            "L equals the averaged conjugate twirl of the diagonal pair projector",
            lhs,
            rhs,
            0.0,
        ));
    }

    // Measurement chain: the one-way tester dominates the fully localized
    // one, with bounded slack on arbitrary mixed inputs, and its shot-level
    // simulation matches the exact acceptance.
    let [n, d] = cfg.pair;
    if cfg.testers > 0 {
        let mut rng = stream(config.seed, 0x4d);
        let mut min_eig: f64 = f64::INFINITY;
        let mut max_slack_lhs: f64 = 0.0;
        let mut sim_lhs: f64 = 0.0;
        let mut sim_rhs: f64 = 0.0;
        for k in 0..cfg.testers {
            let t = random_tester::<f64, _>(n, d, &mut rng);
            let hat = locc_tester(&t)?;
            let bar = embed_purity(&t)?;
            let diff = &hat.tester.op.mat - &bar.op.mat;
            let (eigs, _) = hermitian_eigen(&diff);
            min_eig = min_eig.min(eigs[0]);
            for _ in 0..cfg.states {
                let mixed =
                    random_density::<f64, _>(d * d, SystemLayout::bipartite_copies(1, d), &mut rng);
                let a = hat.tester.acceptance(&mixed)?;
                let b = bar.acceptance(&mixed)?;
                max_slack_lhs = max_slack_lhs.max(a - b - 1.0 / n as f64);
            }
            if k == 0 {
                let rho =
                    random_density::<f64, _>(d * d, SystemLayout::bipartite_copies(1, d), &mut rng);
                let exact = hat.tester.acceptance(&rho)?;
                let shots = config.shots as usize;
                let (rate, _) =
                    simulate_one_way_locc(&hat, &rho, shots, config.seed ^ 0xace)?;
                sim_lhs = (rate - exact).abs();
                sim_rhs = 4.0 * (exact * (1.0 - exact) / shots as f64).sqrt() + 1e-9;
            }
        }
        out.push(CheckRecord::bound(
            &format!("locc_dominates_localized_n{n}_d{d}"),
            "one-way measurement operator dominates the localized tester",
            -min_eig,
            0.0,
            1e-10,
        ));
        out.push(CheckRecord::bound(
            &format!("locc_no_instance_slack_n{n}_d{d}"),
            "acceptance excess over the localized tester is at most 1/N",
            max_slack_lhs,
            0.0,
            1e-9,
        ));
        out.push(CheckRecord::bound(
            &format!("locc_simulation_agreement_n{n}_d{d}"),
            "shot-level protocol acceptance within four standard errors of exact",
            sim_lhs,
            sim_rhs,
            0.0,
        ));
    }
    Ok(())
}

fn hardness_checks(config: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let cfg = &config.hardness;
    let grid = match &cfg.grid_path {
        Some(p) => HardnessGrid::load(p)?,
        None => HardnessGrid::from_toml_str(DEFAULT_HARDNESS_GRID)?,
    };
    if !grid.points().is_empty() {
        match verify_grid::<f64>(&grid) {
            Ok(reports) => {
                let mut min_margin = f64::INFINITY;
                let mut max_reduced_gap: f64 = 0.0;
                for rep in &reports {
                    for row in rep.rows() {
                        min_margin = min_margin.min(row.margin);
                    }
                    max_reduced_gap = max_reduced_gap.max(rep.reduced_equality_gap);
                }
                out.push(CheckRecord::bound(
                    "hardness_margins",
                    "trace-distance bounds hold with nonnegative margin on the pinned grid",
                    -min_margin,
                    0.0,
                    0.0,
                ));
                out.push(CheckRecord::eq(
                    "hardness_reduced_equality",
                    "trace distance is unchanged by discarding the Haar-scrambled side",
                    max_reduced_gap,
                    0.0,
                    1e-9,
                ));
            }
            Err(e) => {
                // Violations become failing records rather than runner errors.
                out.push(CheckRecord::bound(
                    "hardness_margins",
                    &format!("bound verification failed: {e}"),
                    1.0,
                    0.0,
                    0.0,
                ));
            }
        }
    }

    // Fidelity of depolarized powers follows the exact product law.
    for &eps in &cfg.purity_epsilons {
        let rows = purity_lower_bound_curve::<f64>(eps, cfg.purity_max_copies)?;
        let mut max_dev: f64 = 0.0;
        for row in &rows {
            let oracle = (1.0 - eps).powi(row.copies as i32);
            max_dev = max_dev.max((row.fidelity_sq - oracle).abs());
        }
        out.push(CheckRecord::eq(
            &format!("purity_fidelity_curve_eps{eps}"),
            "squared fidelity of depolarized copies equals (1-eps)^S",
            max_dev,
            0.0,
            1e-12,
        ));
    }

    // Optimal two-state discrimination: the returned measurement achieves the
    // bound, and the bound takes its closed form on the two-level pair.
    let eps = 0.1;
    let layout = SystemLayout::single(2);
    let mut rho_mat = CMatrix::<f64>::zeros(2, 2);
    rho_mat[(0, 0)] = Complex::new(1.0, 0.0);
    let mut sig_mat = CMatrix::<f64>::zeros(2, 2);
    sig_mat[(0, 0)] = Complex::new(1.0 - eps, 0.0);
    sig_mat[(1, 1)] = Complex::new(eps, 0.0);
    let rho = Operator::new(rho_mat, layout.clone())?;
    let sigma = Operator::new(sig_mat, layout)?;
    let hb = helstrom_bound(&rho, &sigma)?;
    out.push(CheckRecord::eq(
        "helstrom_two_level_value",
        "optimal discrimination success on the two-level pair is (1+eps)/2",
        hb.bound,
        0.5 * (1.0 + eps),
        1e-10,
    ));
    out.push(CheckRecord::eq(
        "helstrom_povm_achieves",
        "returned measurement achieves the optimal success probability",
        hb.achieved_success(&rho, &sigma),
        hb.bound,
        1e-10,
    ));
    Ok(())
}

fn blockenc_checks(config: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let cfg = &config.blockenc;
    for q in 1..=cfg.max_qubits {
        if cfg.states == 0 {
            continue;
        }
        let dim = 1usize << q;
        let mut rng = stream(config.seed, 0xb0 ^ q as u64);
        let mut max_proj_res: f64 = 0.0;
        let mut max_refl_res: f64 = 0.0;
        let mut max_rescale_dev: f64 = 0.0;
        for _ in 0..cfg.states {
            let psi = random_pure_state::<f64, _>(dim, SystemLayout::single(dim), &mut rng);
            let proj = CMatrix::<f64>::from_fn(dim, dim, |i, j| {
                psi.vec[i] * psi.vec[j].conj()
            });
            let refl = CMatrix::<f64>::identity(dim, dim) - &proj * Complex::new(2.0, 0.0);
            let r = Operator::new(refl.clone(), SystemLayout::single(dim))?;

            let be = reflection_to_projector(&r)?;
            max_proj_res =
                max_proj_res.max(verify_block_encoding(&be.unitary, &proj, be.alpha, be.ancillas)?);

            let pre = projector_to_reflection_pre_aa(&be)?;
            max_refl_res =
                max_refl_res.max(verify_block_encoding(&pre.unitary, &refl, pre.alpha, pre.ancillas)?);

            // Analytic ×α rescale of the encoded block recovers the reflection.
            let rescaled = pre.encoded_block() * Complex::new(pre.alpha, 0.0);
            max_rescale_dev = max_rescale_dev.max((&rescaled - &refl).norm());
        }
        out.push(CheckRecord::bound(
            &format!("reflection_to_projector_q{q}"),
            "reflection converts to an exact (2,2,0) encoding of the projector",
            max_proj_res,
            0.0,
            1e-10,
        ));
        out.push(CheckRecord::bound(
            &format!("projector_to_reflection_q{q}"),
            "projector encoding converts to an exact (5,a+1,0) encoding of I-2P",
            max_refl_res,
            0.0,
            1e-10,
        ));
        out.push(CheckRecord::eq(
            &format!("reflection_rescale_roundtrip_q{q}"),
            "rescaling the encoded block by its subnormalization recovers I-2P",
            max_rescale_dev,
            0.0,
            1e-10,
        ));
    }
    Ok(())
}

fn amplify_checks(config: &ExperimentConfig, out: &mut Vec<CheckRecord>) -> Result<()> {
    let cfg = &config.amplify;
    let sched = amplification_schedule(cfg.completeness, cfg.soundness)?;
    let (n, t) = (sched.repetitions, sched.threshold);

    // A no-instance at the soundness threshold rarely crosses the cut.
    let err_no = amplified_error_exact(cfg.soundness, n, t, Tail::AtLeast)?;
    out.push(CheckRecord::bound(
        "amplify_no_instance_error",
        "repetition schedule drives the no-instance acceptance below 1/3",
        err_no,
        1.0 / 3.0,
        0.0,
    ));

    // A yes-instance at the completeness threshold rarely falls below it,
    // and the exact tail never exceeds the sub-Gaussian bound.
    let err_yes = amplified_error_exact(cfg.completeness, n, t, Tail::Below)?;
    let hoeff_yes = hoeffding_bound(cfg.completeness, n, t, Tail::Below);
    out.push(CheckRecord::bound(
        "amplify_yes_instance_error",
        "yes-instance rejection is within the sub-Gaussian tail bound",
        err_yes,
        hoeff_yes,
        1e-12,
    ));

    // Domination exp(-2nΔ²) ≥ exact tail on an acceptance-probability grid.
    if cfg.grid_points > 0 {
        let mut max_excess = f64::NEG_INFINITY;
        for i in 0..cfg.grid_points {
            let p = (i + 1) as f64 / (cfg.grid_points + 1) as f64;
            let tail = if p < t { Tail::AtLeast } else { Tail::Below };
            let exact = amplified_error_exact(p, n, t, tail)?;
            let bound = hoeffding_bound(p, n, t, tail);
            max_excess = max_excess.max(exact - bound);
        }
        out.push(CheckRecord::bound(
            "amplify_hoeffding_domination",
            "exact binomial tails never exceed the sub-Gaussian bound on the grid",
            max_excess,
            0.0,
            1e-12,
        ));
    }
    Ok(())
}
