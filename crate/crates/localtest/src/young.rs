//! Young-diagram combinatorics: partition enumeration, hook lengths,
//! irreducible dimensions for the symmetric and unitary groups, standard
//! tableau enumeration, and Schur polynomials via semistandard tableaux.
//!
//! Everything here is exact integer/rational arithmetic (u128 internally);
//! sizes are guarded at N ≤ 10 where enumeration is requested.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Explosion guard for tableau enumeration.
pub const MAX_BOXES_FOR_ENUMERATION: usize = 10;

/// A partition λ ⊢ N: weakly decreasing positive row lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct YoungDiagram {
    rows: Vec<usize>,
}

impl YoungDiagram {
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        if rows.is_empty() || rows.iter().any(|&r| r == 0) {
            return Err(Error::InvalidArgument(
                "diagram rows must be positive and non-empty".into(),
            ));
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "diagram rows must be weakly decreasing".into(),
            ));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of boxes N = Σ rows.
    pub fn boxes(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Hook length of the cell (i, j), 0-based.
    pub fn hook(&self, i: usize, j: usize) -> usize {
        let arm = self.rows[i] - j - 1;
        let leg = self.rows[i + 1..].iter().filter(|&&r| r > j).count();
        arm + leg + 1
    }

    /// Serialized form, e.g. "[4,3,1]".
    pub fn label(&self) -> String {
        let inner: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        format!("[{}]", inner.join(","))
    }
}

impl std::fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// All partitions of `n` with at most `d` rows, lexicographically descending.
pub fn enumerate_partitions(n: usize, d: usize) -> Vec<YoungDiagram> {
    assert!(n >= 1 && d >= 1, "enumerate_partitions requires N ≥ 1, d ≥ 1");
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(remaining: usize, max_part: usize, rows_left: usize, current: &mut Vec<usize>, out: &mut Vec<YoungDiagram>) {
        if remaining == 0 {
            out.push(YoungDiagram {
                rows: current.clone(),
            });
            return;
        }
        if rows_left == 0 {
            return;
        }
        // Descend from the largest allowed part so output is lex-descending.
        let hi = remaining.min(max_part);
        for part in (1..=hi).rev() {
            current.push(part);
            recurse(remaining - part, part, rows_left - 1, current, out);
            current.pop();
        }
    }
    recurse(n, n, d, &mut current, &mut out);
    out
}

/// dim V_λ = N! / Π hooks (number of standard tableaux).
pub fn dim_sym_irrep(lambda: &YoungDiagram) -> u128 {
    let n = lambda.boxes();
    let mut numerator: u128 = 1;
    for k in 1..=n as u128 {
        numerator *= k;
    }
    let mut denominator: u128 = 1;
    for i in 0..lambda.n_rows() {
        for j in 0..lambda.rows()[i] {
            denominator *= lambda.hook(i, j) as u128;
        }
    }
    debug_assert_eq!(numerator % denominator, 0);
    numerator / denominator
}

/// dim W_λ for U(d): Π cells (d + j − i) / hook(i,j); 0 when rows > d.
pub fn dim_unitary_irrep(lambda: &YoungDiagram, d: usize) -> u128 {
    if lambda.n_rows() > d {
        return 0;
    }
    let mut numerator: u128 = 1;
    let mut denominator: u128 = 1;
    for i in 0..lambda.n_rows() {
        for j in 0..lambda.rows()[i] {
            numerator *= (d + j - i) as u128;
            denominator *= lambda.hook(i, j) as u128;
        }
    }
    debug_assert_eq!(numerator % denominator, 0);
    numerator / denominator
}

/// A standard Young tableau: entries 1..N, rows and columns strictly
/// increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardTableau {
    filling: Vec<Vec<usize>>,
}

impl StandardTableau {
    pub fn filling(&self) -> &[Vec<usize>] {
        &self.filling
    }

    pub fn shape(&self) -> YoungDiagram {
        YoungDiagram {
            rows: self.filling.iter().map(|r| r.len()).collect(),
        }
    }

    /// (row, column) of the entry `k` (1-based entry).
    pub fn position_of(&self, k: usize) -> (usize, usize) {
        for (i, row) in self.filling.iter().enumerate() {
            if let Some(j) = row.iter().position(|&e| e == k) {
                return (i, j);
            }
        }
        panic!("entry {k} not present in tableau");
    }

    /// Content (column − row) of the cell holding entry `k`.
    pub fn content_of(&self, k: usize) -> i64 {
        let (i, j) = self.position_of(k);
        j as i64 - i as i64
    }

    /// Row-reading word: concatenation of rows, used for the canonical
    /// tableau ordering.
    fn row_word(&self) -> Vec<usize> {
        self.filling.iter().flatten().copied().collect()
    }

    /// The tableau with entries `k` and `k+1` exchanged, if still standard.
    pub fn apply_adjacent_transposition(&self, k: usize) -> Option<StandardTableau> {
        let (ri, ci) = self.position_of(k);
        let (rj, cj) = self.position_of(k + 1);
        // Exchange is standard iff k and k+1 are in different rows AND
        // different columns.
        if ri == rj || ci == cj {
            return None;
        }
        let mut filling = self.filling.clone();
        filling[ri][ci] = k + 1;
        filling[rj][cj] = k;
        Some(StandardTableau { filling })
    }
}

/// All standard tableaux of shape λ, sorted by row-reading word
/// (lexicographic). Count equals `dim_sym_irrep(λ)`.
pub fn standard_tableaux(lambda: &YoungDiagram) -> Result<Vec<StandardTableau>> {
    let n = lambda.boxes();
    if n > MAX_BOXES_FOR_ENUMERATION {
        return Err(Error::TooLarge(format!(
            "standard tableau enumeration capped at {MAX_BOXES_FOR_ENUMERATION} boxes, got {n}"
        )));
    }
    let rows = lambda.rows();
    let mut filling: Vec<Vec<usize>> = rows.iter().map(|&r| vec![0; r]).collect();
    let mut out = Vec::new();
    // Place 1..N one at a time at every frontier cell; the invariant that
    // earlier entries are smaller makes rows/columns strictly increasing.
    fn recurse(
        entry: usize,
        n: usize,
        rows: &[usize],
        filling: &mut Vec<Vec<usize>>,
        out: &mut Vec<StandardTableau>,
    ) {
        if entry > n {
            out.push(StandardTableau {
                filling: filling.clone(),
            });
            return;
        }
        for i in 0..rows.len() {
            let j = filling[i].iter().position(|&e| e == 0);
            if let Some(j) = j {
                let row_ok = j == 0 || filling[i][j - 1] != 0;
                let col_ok = i == 0 || (filling[i - 1].len() > j && filling[i - 1][j] != 0);
                if row_ok && col_ok {
                    filling[i][j] = entry;
                    recurse(entry + 1, n, rows, filling, out);
                    filling[i][j] = 0;
                }
            }
        }
    }
    recurse(1, n, rows, &mut filling, &mut out);
    out.sort_by_key(|t| t.row_word());
    debug_assert_eq!(out.len() as u128, dim_sym_irrep(lambda));
    Ok(out)
}

/// Schur polynomial `s_λ(x_1..x_d)` evaluated by summing over semistandard
/// tableaux (monomial per tableau). Independent of all representation-matrix
/// machinery, which is what makes it useful as an oracle.
pub fn schur_polynomial(lambda: &YoungDiagram, xs: &[f64]) -> Result<f64> {
    let n = lambda.boxes();
    if n > MAX_BOXES_FOR_ENUMERATION {
        return Err(Error::TooLarge(format!(
            "semistandard enumeration capped at {MAX_BOXES_FOR_ENUMERATION} boxes, got {n}"
        )));
    }
    if lambda.n_rows() > xs.len() {
        return Ok(0.0);
    }
    let rows = lambda.rows();
    let d = xs.len();
    let mut filling: Vec<Vec<usize>> = rows.iter().map(|&r| vec![usize::MAX; r]).collect();
    let mut total = 0.0;
    // Fill cells in row-major order with values 0..d−1: rows weakly
    // increasing, columns strictly increasing.
    fn recurse(
        cell: usize,
        cells: &[(usize, usize)],
        d: usize,
        xs: &[f64],
        filling: &mut Vec<Vec<usize>>,
        monomial: f64,
        total: &mut f64,
    ) {
        if cell == cells.len() {
            *total += monomial;
            return;
        }
        let (i, j) = cells[cell];
        let min_row = if j > 0 { filling[i][j - 1] } else { 0 };
        let min_col = if i > 0 { filling[i - 1][j] + 1 } else { 0 };
        for v in min_row.max(min_col)..d {
            filling[i][j] = v;
            recurse(cell + 1, cells, d, xs, filling, monomial * xs[v], total);
        }
        filling[i][j] = usize::MAX;
    }
    let cells: Vec<(usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| (0..r).map(move |j| (i, j)))
        .collect();
    recurse(0, &cells, d, xs, &mut filling, 1.0, &mut total);
    Ok(total)
}
