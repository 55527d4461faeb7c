//! Finite two-player bimatrix games.
//!
//! Player A picks a row, player B picks a column, and each player is paid
//! by their own matrix at the chosen cell. Mixed strategies are probability
//! vectors over rows (for A) or columns (for B); the expected payoff is
//! bilinear in the pair, which is why checking pure deviations suffices to
//! certify a Nash equilibrium.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack allowed when checking that a probability vector sums
/// to one.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Which side of the game a strategy index refers to: player A owns the
/// rows, player B owns the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    A,
    B,
}

/// Rectangular grid of real payoffs, row-major. The row index is A's
/// strategy and the column index is B's.
///
/// Entries must be finite; the grid must be non-empty and rectangular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PayoffMatrix {
    rows: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Shape("payoff matrix must be non-empty".into()));
        }
        let width = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {width}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Domain(format!("payoff at ({i}, {j}) is {v}")));
                }
            }
        }
        Ok(Self { rows })
    }

    /// Square matrix with `diag` on the diagonal and zero elsewhere.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut rows = vec![vec![0.0; n]; n];
        for (i, &v) in diag.iter().enumerate() {
            rows[i][i] = v;
        }
        Self::new(rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.rows[row]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[col]).collect()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Lowest-index strategy of `player` that weakly dominates every other
    /// strategy on that axis and is strictly better somewhere against each
    /// non-identical alternative. Duplicate copies of the dominant line do
    /// not block dominance, but if all lines are identical there is no
    /// preference to speak of and the result is `None`. A lone strategy is
    /// trivially dominant.
    pub fn dominant_strategy(&self, player: Player) -> Option<usize> {
        let lines: Vec<Vec<f64>> = match player {
            Player::A => self.rows.clone(),
            Player::B => (0..self.n_cols()).map(|k| self.column(k)).collect(),
        };
        let n = lines.len();
        if n == 1 {
            return Some(0);
        }
        'candidate: for i in 0..n {
            let mut strict_somewhere = false;
            for r in 0..n {
                if r == i {
                    continue;
                }
                if !lines[i].iter().zip(&lines[r]).all(|(x, y)| x >= y) {
                    continue 'candidate;
                }
                if lines[i] != lines[r] {
                    strict_somewhere = true;
                }
            }
            if strict_somewhere {
                return Some(i);
            }
        }
        None
    }
}

impl TryFrom<Vec<Vec<f64>>> for PayoffMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<PayoffMatrix> for Vec<Vec<f64>> {
    fn from(m: PayoffMatrix) -> Self {
        m.rows
    }
}

/// Probability vector over one player's strategies: entries are finite,
/// non-negative, and sum to one within [`PROB_SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Shape("strategy must have at least one entry".into()));
        }
        for (i, &v) in probs.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "probability {i} is {v}; entries must be finite and non-negative"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Domain(format!(
                "probabilities sum to {sum}, expected 1 within {PROB_SUM_TOLERANCE}"
            )));
        }
        Ok(Self { probs })
    }

    /// Degenerate strategy that plays `index` with probability one.
    pub fn pure(index: usize, len: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::Shape(format!(
                "pure strategy index {index} out of range for {len} strategies"
            )));
        }
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Shape("strategy must have at least one entry".into()));
        }
        Self::new(vec![1.0 / len as f64; len])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A pair of mixed strategies, one per player.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    p: MixedStrategy,
    q: MixedStrategy,
}

impl Profile {
    pub fn new(p: MixedStrategy, q: MixedStrategy) -> Self {
        Self { p, q }
    }

    pub fn p(&self) -> &MixedStrategy {
        &self.p
    }

    pub fn q(&self) -> &MixedStrategy {
        &self.q
    }
}

/// Expected payoffs of the two players under a strategy profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainReport {
    pub gain_a: f64,
    pub gain_b: f64,
}

/// Outcome of a Nash-equilibrium check: `worst_violation` is the largest
/// payoff improvement any single player can realize by a unilateral pure
/// deviation (clamped at zero when the profile passes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCheck {
    pub passed: bool,
    pub worst_violation: f64,
}

/// A finite two-player game given by one payoff matrix per player, both of
/// the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame {
    payoff_a: PayoffMatrix,
    payoff_b: PayoffMatrix,
}

impl BimatrixGame {
    pub fn new(payoff_a: PayoffMatrix, payoff_b: PayoffMatrix) -> Result<Self> {
        if payoff_a.n_rows() != payoff_b.n_rows() || payoff_a.n_cols() != payoff_b.n_cols() {
            return Err(Error::Shape(format!(
                "payoff matrices disagree: {}x{} vs {}x{}",
                payoff_a.n_rows(),
                payoff_a.n_cols(),
                payoff_b.n_rows(),
                payoff_b.n_cols()
            )));
        }
        Ok(Self { payoff_a, payoff_b })
    }

    pub fn payoff_a(&self) -> &PayoffMatrix {
        &self.payoff_a
    }

    pub fn payoff_b(&self) -> &PayoffMatrix {
        &self.payoff_b
    }

    pub fn n_rows(&self) -> usize {
        self.payoff_a.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.payoff_a.n_cols()
    }

    fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.p().len() != self.n_rows() {
            return Err(Error::Shape(format!(
                "row strategy has {} entries, game has {} rows",
                profile.p().len(),
                self.n_rows()
            )));
        }
        if profile.q().len() != self.n_cols() {
            return Err(Error::Shape(format!(
                "column strategy has {} entries, game has {} columns",
                profile.q().len(),
                self.n_cols()
            )));
        }
        Ok(())
    }

    /// Expected payoff of each player under `profile`: the bilinear form
    /// `sum_jk M[j][k] p_j q_k` evaluated on both matrices.
    pub fn expected_payoff(&self, profile: &Profile) -> Result<GainReport> {
        self.check_profile(profile)?;
        let p = profile.p().probs();
        let q = profile.q().probs();
        let mut gain_a = 0.0;
        let mut gain_b = 0.0;
        for (j, &pj) in p.iter().enumerate() {
            for (k, &qk) in q.iter().enumerate() {
                gain_a += self.payoff_a.get(j, k) * pj * qk;
                gain_b += self.payoff_b.get(j, k) * pj * qk;
            }
        }
        Ok(GainReport { gain_a, gain_b })
    }

    /// Dominant strategy of `player` in that player's own payoff matrix.
    /// See [`PayoffMatrix::dominant_strategy`].
    pub fn dominant_strategy(&self, player: Player) -> Option<usize> {
        match player {
            Player::A => self.payoff_a.dominant_strategy(Player::A),
            Player::B => self.payoff_b.dominant_strategy(Player::B),
        }
    }

    /// All pure-strategy Nash cells, scanned row-major: `(j, k)` qualifies
    /// when `A[j][k]` is maximal in column `k` of A and `B[j][k]` is
    /// maximal in row `j` of B. Ties count, so cells sharing the maxima
    /// are all reported.
    pub fn find_pure_equilibria(&self) -> Vec<(usize, usize)> {
        let n = self.n_rows();
        let m = self.n_cols();
        let col_max_a: Vec<f64> = (0..m)
            .map(|k| {
                (0..n)
                    .map(|j| self.payoff_a.get(j, k))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let row_max_b: Vec<f64> = (0..n)
            .map(|j| {
                (0..m)
                    .map(|k| self.payoff_b.get(j, k))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let mut cells = Vec::new();
        for (j, &row_max) in row_max_b.iter().enumerate() {
            for (k, &col_max) in col_max_a.iter().enumerate() {
                if self.payoff_a.get(j, k) >= col_max && self.payoff_b.get(j, k) >= row_max {
                    cells.push((j, k));
                }
            }
        }
        cells
    }

    /// Interior mixed equilibrium of a 2x2 game from the indifference
    /// conditions: `p` makes B indifferent between columns and `q` makes A
    /// indifferent between rows, so
    ///
    /// ```text
    /// p1 = (b22 - b21) / (b11 + b22 - b12 - b21)
    /// q1 = (a22 - a12) / (a11 + a22 - a12 - a21)
    /// ```
    ///
    /// A vanishing denominator means the player is indifferent everywhere
    /// and no isolated interior solution exists
    /// ([`Error::DegenerateGame`]); a solution outside `[0, 1]` means the
    /// game has no interior equilibrium at all
    /// ([`Error::NoInteriorEquilibrium`]), which is the generic situation
    /// when some player has a dominant strategy.
    pub fn mixed_equilibrium_2x2(&self) -> Result<Profile> {
        if self.n_rows() != 2 || self.n_cols() != 2 {
            return Err(Error::Shape(format!(
                "mixed solver requires a 2x2 game, got {}x{}",
                self.n_rows(),
                self.n_cols()
            )));
        }
        let a = &self.payoff_a;
        let b = &self.payoff_b;
        let denom_p = b.get(0, 0) + b.get(1, 1) - b.get(0, 1) - b.get(1, 0);
        let denom_q = a.get(0, 0) + a.get(1, 1) - a.get(0, 1) - a.get(1, 0);
        let p1 = (denom_p != 0.0).then(|| (b.get(1, 1) - b.get(1, 0)) / denom_p);
        let q1 = (denom_q != 0.0).then(|| (a.get(1, 1) - a.get(0, 1)) / denom_q);
        // An out-of-range coordinate settles the question even when the
        // other player's denominator happens to be degenerate.
        for (name, value) in [("p1", p1), ("q1", q1)] {
            if let Some(v) = value
                && !(0.0..=1.0).contains(&v)
            {
                return Err(Error::NoInteriorEquilibrium(format!(
                    "indifference requires {name} = {v}, outside [0, 1]"
                )));
            }
        }
        let (Some(p1), Some(q1)) = (p1, q1) else {
            return Err(Error::DegenerateGame(
                "an indifference denominator is zero, so interior equilibria are not isolated"
                    .into(),
            ));
        };
        Ok(Profile::new(
            MixedStrategy::new(vec![p1, 1.0 - p1])?,
            MixedStrategy::new(vec![q1, 1.0 - q1])?,
        ))
    }

    /// Check whether `profile` is a Nash equilibrium up to `tolerance`.
    ///
    /// By bilinearity it suffices to scan pure deviations. The row player
    /// is scanned first: if some row improves A's payoff by more than
    /// `tolerance`, the check fails immediately and reports A's worst
    /// improvement, without consulting B. Otherwise B's columns are
    /// scanned the same way. On a pass, `worst_violation` is the largest
    /// improvement found for either player, clamped at zero.
    pub fn verify_equilibrium(
        &self,
        profile: &Profile,
        tolerance: f64,
    ) -> Result<EquilibriumCheck> {
        if !tolerance.is_finite() || tolerance < 0.0 {
            return Err(Error::Parameter(format!(
                "tolerance must be finite and non-negative, got {tolerance}"
            )));
        }
        self.check_profile(profile)?;
        let base = self.expected_payoff(profile)?;
        let p = profile.p().probs();
        let q = profile.q().probs();

        let mut worst_a = f64::NEG_INFINITY;
        for j in 0..self.n_rows() {
            let gain: f64 = q
                .iter()
                .enumerate()
                .map(|(k, &qk)| self.payoff_a.get(j, k) * qk)
                .sum();
            worst_a = worst_a.max(gain - base.gain_a);
        }
        if worst_a > tolerance {
            return Ok(EquilibriumCheck {
                passed: false,
                worst_violation: worst_a,
            });
        }

        let mut worst_b = f64::NEG_INFINITY;
        for k in 0..self.n_cols() {
            let gain: f64 = p
                .iter()
                .enumerate()
                .map(|(j, &pj)| self.payoff_b.get(j, k) * pj)
                .sum();
            worst_b = worst_b.max(gain - base.gain_b);
        }
        if worst_b > tolerance {
            return Ok(EquilibriumCheck {
                passed: false,
                worst_violation: worst_b,
            });
        }

        Ok(EquilibriumCheck {
            passed: true,
            worst_violation: worst_a.max(worst_b).max(0.0),
        })
    }

    /// Best pure response of `player` against the opponent's mixed
    /// strategy, as a degenerate [`MixedStrategy`]. Ties resolve to the
    /// lowest index. A pure response is always optimal by bilinearity;
    /// `grid_steps` (>= 1) is accepted for callers that sweep response
    /// grids and only controls validation here.
    pub fn best_response(
        &self,
        opponent: &MixedStrategy,
        player: Player,
        grid_steps: usize,
    ) -> Result<MixedStrategy> {
        if grid_steps == 0 {
            return Err(Error::Parameter("grid_steps must be at least 1".into()));
        }
        let scores: Vec<f64> = match player {
            Player::A => {
                if opponent.len() != self.n_cols() {
                    return Err(Error::Shape(format!(
                        "opponent strategy has {} entries, game has {} columns",
                        opponent.len(),
                        self.n_cols()
                    )));
                }
                (0..self.n_rows())
                    .map(|j| {
                        opponent
                            .probs()
                            .iter()
                            .enumerate()
                            .map(|(k, &qk)| self.payoff_a.get(j, k) * qk)
                            .sum()
                    })
                    .collect()
            }
            Player::B => {
                if opponent.len() != self.n_rows() {
                    return Err(Error::Shape(format!(
                        "opponent strategy has {} entries, game has {} rows",
                        opponent.len(),
                        self.n_rows()
                    )));
                }
                (0..self.n_cols())
                    .map(|k| {
                        opponent
                            .probs()
                            .iter()
                            .enumerate()
                            .map(|(j, &pj)| self.payoff_b.get(j, k) * pj)
                            .sum()
                    })
                    .collect()
            }
        };
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        MixedStrategy::pure(best, scores.len())
    }
}
