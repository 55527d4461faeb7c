//! The diagonal bonus model.
//!
//! Askers and answerers play an n-by-n game whose payoffs vanish off the
//! diagonal: matching on topic `j` pays the asker `a_j > 0` and the
//! answerer `b_j > 0`. The interesting equilibrium is the interior one
//! where each side mixes so the *other* side is indifferent, which forces
//!
//! ```text
//! p_j = (1/b_j) / sum_k (1/b_k)        (asker's mix, pinned by b)
//! q_k = (1/a_k) / sum_j (1/a_j)        (answerer's mix, pinned by a)
//! ```
//!
//! Because the map is built from reciprocals it inverts in closed form:
//! observed frequencies determine the bonuses up to one positive scale
//! constant per side ([`invert_from_equilibrium`]), and fixing the total
//! answering budget pins that scale ([`invert_with_budget`]).

use crate::error::{Error, Result};
use crate::game::{BimatrixGame, MixedStrategy, PayoffMatrix, Profile};

/// Relative slack allowed between a declared budget and the actual bonus
/// total.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// Bonus vectors of the two sides, with an optional declared budget for
/// the answering side. All bonuses are finite and strictly positive; when
/// a budget is declared it matches `sum(b)` within [`BUDGET_TOLERANCE`]
/// (relative).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaModel {
    a: Vec<f64>,
    b: Vec<f64>,
    budget: Option<f64>,
}

impl AlphaModel {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::build(a, b, None)
    }

    pub fn with_budget(a: Vec<f64>, b: Vec<f64>, budget: f64) -> Result<Self> {
        Self::build(a, b, Some(budget))
    }

    fn build(a: Vec<f64>, b: Vec<f64>, budget: Option<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Shape("bonus vectors must be non-empty".into()));
        }
        if a.len() != b.len() {
            return Err(Error::Shape(format!(
                "bonus vectors disagree: a has {} entries, b has {}",
                a.len(),
                b.len()
            )));
        }
        for (name, v) in [("a", &a), ("b", &b)] {
            if let Some((i, &x)) = v
                .iter()
                .enumerate()
                .find(|(_, x)| !x.is_finite() || **x <= 0.0)
            {
                return Err(Error::Domain(format!(
                    "bonus {name}[{i}] is {x}; bonuses must be finite and positive"
                )));
            }
        }
        if let Some(budget) = budget {
            if !budget.is_finite() || budget <= 0.0 {
                return Err(Error::Domain(format!(
                    "budget is {budget}; it must be finite and positive"
                )));
            }
            let total: f64 = b.iter().sum();
            if (total - budget).abs() > BUDGET_TOLERANCE * budget {
                return Err(Error::Domain(format!(
                    "bonuses sum to {total} but the declared budget is {budget}"
                )));
            }
        }
        Ok(Self { a, b, budget })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    /// Declared budget, or the current bonus total when none was declared.
    pub fn effective_budget(&self) -> f64 {
        self.budget.unwrap_or_else(|| self.b.iter().sum())
    }

    /// The unique interior equilibrium: each side plays reciprocals of the
    /// opponent-facing bonuses, normalized. Every entry is strictly
    /// positive.
    pub fn equilibrium(&self) -> EquilibriumProfile {
        EquilibriumProfile {
            p: harmonic_weights(&self.b),
            q: harmonic_weights(&self.a),
        }
    }

    /// Expand the diagonal model into an explicit bimatrix game with the
    /// same equilibria. Every diagonal cell is a pure equilibrium of the
    /// expansion; the interior one is [`Self::equilibrium`].
    pub fn to_bimatrix(&self) -> BimatrixGame {
        let payoff_a = PayoffMatrix::diagonal(&self.a).expect("validated bonuses form a matrix");
        let payoff_b = PayoffMatrix::diagonal(&self.b).expect("validated bonuses form a matrix");
        BimatrixGame::new(payoff_a, payoff_b).expect("diagonal matrices share a shape")
    }

    /// Rescale the answering bonuses so they sum to `budget`, and declare
    /// it. The equilibrium is unchanged: scaling `b` by a positive
    /// constant cancels out of the normalized reciprocals. When `budget`
    /// already equals the current total the bonuses are returned
    /// bit-for-bit.
    pub fn normalize_to_budget(&self, budget: f64) -> Result<AlphaModel> {
        if !budget.is_finite() || budget <= 0.0 {
            return Err(Error::Parameter(format!(
                "budget must be finite and positive, got {budget}"
            )));
        }
        let total: f64 = self.b.iter().sum();
        let b = if budget == total {
            self.b.clone()
        } else {
            // Multiply before dividing: when b_k * budget is exact the
            // quotient is correctly rounded in one step.
            self.b.iter().map(|&x| x * budget / total).collect()
        };
        AlphaModel::with_budget(self.a.clone(), b, budget)
    }

    /// The answering side's expected equilibrium gain, the harmonic
    /// aggregate `1 / sum_k (1/b_k)`. Also equal to the bilinear payoff
    /// `sum_j b_j p_j q_j` at the equilibrium, and to the `b`-side scale
    /// constant that [`invert_from_equilibrium`] recovers from this
    /// model's own equilibrium.
    pub fn provider_gain(&self) -> f64 {
        1.0 / self.b.iter().map(|x| 1.0 / x).sum::<f64>()
    }
}

fn harmonic_weights(v: &[f64]) -> MixedStrategy {
    let inv: Vec<f64> = v.iter().map(|x| 1.0 / x).collect();
    let total: f64 = inv.iter().sum();
    MixedStrategy::new(inv.into_iter().map(|w| w / total).collect())
        .expect("normalized reciprocals of positive bonuses form a distribution")
}

/// Interior equilibrium of an [`AlphaModel`]: `p` over questions, `q`
/// over answers, of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    p: MixedStrategy,
    q: MixedStrategy,
}

impl EquilibriumProfile {
    pub fn new(p: MixedStrategy, q: MixedStrategy) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Shape(format!(
                "profile sides disagree: p has {} entries, q has {}",
                p.len(),
                q.len()
            )));
        }
        Ok(Self { p, q })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &MixedStrategy {
        &self.p
    }

    pub fn q(&self) -> &MixedStrategy {
        &self.q
    }

    /// The same pair as a plain game profile.
    pub fn to_profile(&self) -> Profile {
        Profile::new(self.p.clone(), self.q.clone())
    }
}

/// Positive per-side scale constants for the inverse problem. The forward
/// map only exposes bonus ratios, so reconstruction needs one constant
/// per side; `1` on both sides is the canonical choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleConstants {
    a_scale: f64,
    b_scale: f64,
}

impl ScaleConstants {
    pub fn new(a_scale: f64, b_scale: f64) -> Result<Self> {
        for (name, v) in [("a_scale", a_scale), ("b_scale", b_scale)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "{name} is {v}; scale constants must be finite and positive"
                )));
            }
        }
        Ok(Self { a_scale, b_scale })
    }

    /// The `b`-side scale that makes the reconstructed bonuses sum to
    /// `budget`, with the `a` side left at the canonical scale of one.
    pub fn for_budget(p: &MixedStrategy, budget: f64) -> Result<Self> {
        if !budget.is_finite() || budget <= 0.0 {
            return Err(Error::Domain(format!(
                "budget is {budget}; it must be finite and positive"
            )));
        }
        if let Some((i, &x)) = p.probs().iter().enumerate().find(|(_, x)| **x <= 0.0) {
            return Err(Error::Domain(format!(
                "probability {i} is {x}; a budget scale needs strictly positive frequencies"
            )));
        }
        let inv_total: f64 = p.probs().iter().map(|x| 1.0 / x).sum();
        Ok(Self {
            a_scale: 1.0,
            b_scale: budget / inv_total,
        })
    }

    pub fn a_scale(&self) -> f64 {
        self.a_scale
    }

    pub fn b_scale(&self) -> f64 {
        self.b_scale
    }
}

impl Default for ScaleConstants {
    fn default() -> Self {
        Self {
            a_scale: 1.0,
            b_scale: 1.0,
        }
    }
}

/// Reconstruct the bonus vectors that produce `profile` as their interior
/// equilibrium: `a_j = a_scale / q_j` and `b_k = b_scale / p_k`. Every
/// frequency must be strictly positive — a zero would demand an infinite
/// bonus, so callers must smooth their counts first.
pub fn invert_from_equilibrium(
    profile: &EquilibriumProfile,
    scales: &ScaleConstants,
) -> Result<AlphaModel> {
    for (name, side) in [("p", profile.p()), ("q", profile.q())] {
        if let Some((i, &x)) = side.probs().iter().enumerate().find(|(_, x)| **x <= 0.0) {
            return Err(Error::Domain(format!(
                "{name}[{i}] is {x}; inversion needs strictly positive frequencies"
            )));
        }
    }
    let a = profile
        .q()
        .probs()
        .iter()
        .map(|&x| scales.a_scale / x)
        .collect();
    let b = profile
        .p()
        .probs()
        .iter()
        .map(|&x| scales.b_scale / x)
        .collect();
    AlphaModel::new(a, b)
}

/// [`invert_from_equilibrium`] with the `b`-side scale chosen so the
/// reconstructed bonuses sum to `budget` (declared on the result), and
/// the `a` side at the canonical scale of one.
pub fn invert_with_budget(profile: &EquilibriumProfile, budget: f64) -> Result<AlphaModel> {
    let scales = ScaleConstants::for_budget(profile.p(), budget)?;
    invert_from_equilibrium(profile, &scales)?.normalize_to_budget(budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(a: &[f64], b: &[f64]) -> AlphaModel {
        AlphaModel::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn construction_validation() {
        assert!(AlphaModel::new(vec![1.0], vec![1.0]).is_ok());
        assert!(matches!(
            AlphaModel::new(vec![], vec![]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            AlphaModel::new(vec![1.0, 2.0], vec![1.0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            AlphaModel::new(vec![1.0, 0.0], vec![1.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            AlphaModel::new(vec![1.0, -2.0], vec![1.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            AlphaModel::new(vec![1.0, f64::INFINITY], vec![1.0, 1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn budget_must_match_bonus_total() {
        assert!(AlphaModel::with_budget(vec![2.0, 2.0], vec![1.0, 3.0], 4.0).is_ok());
        assert!(matches!(
            AlphaModel::with_budget(vec![2.0, 2.0], vec![1.0, 3.0], 5.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            AlphaModel::with_budget(vec![1.0], vec![1.0], -1.0),
            Err(Error::Domain(_))
        ));
        // Relative slack: off by less than one part in 1e9 passes.
        assert!(AlphaModel::with_budget(vec![1.0], vec![1.0 + 1e-13], 1.0).is_ok());
    }

    #[test]
    fn equilibrium_two_states() {
        let eq = model(&[2.0, 2.0], &[1.0, 3.0]).equilibrium();
        // p follows reciprocals of b: (1, 1/3) normalized.
        assert!((eq.p().probs()[0] - 0.75).abs() < 1e-15);
        assert!((eq.p().probs()[1] - 0.25).abs() < 1e-15);
        // q follows reciprocals of a: uniform.
        assert!((eq.q().probs()[0] - 0.5).abs() < 1e-15);
        assert!((eq.q().probs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_three_states() {
        let eq = model(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).equilibrium();
        let expected = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (i, &want) in expected.iter().enumerate() {
            assert!((eq.p().probs()[i] - want).abs() < 1e-15);
            assert!((eq.q().probs()[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn equilibrium_is_strictly_positive() {
        let eq = model(&[1.0, 1000.0, 0.001], &[5.0, 0.01, 200.0]).equilibrium();
        assert!(eq.p().probs().iter().all(|&x| x > 0.0));
        assert!(eq.q().probs().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn equilibrium_verifies_on_expanded_game() {
        let m = model(&[1.0, 2.0, 4.0], &[3.0, 5.0, 7.0]);
        let check = m
            .to_bimatrix()
            .verify_equilibrium(&m.equilibrium().to_profile(), 1e-9)
            .unwrap();
        assert!(check.passed, "worst violation {}", check.worst_violation);
    }

    #[test]
    fn expanded_game_structure() {
        let m = model(&[2.0, 3.0], &[5.0, 7.0]);
        let g = m.to_bimatrix();
        assert_eq!(g.payoff_a().rows(), &[vec![2.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(g.payoff_b().rows(), &[vec![5.0, 0.0], vec![0.0, 7.0]]);
        // Every diagonal cell of the expansion is a pure equilibrium.
        assert_eq!(g.find_pure_equilibria(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn provider_gain_values() {
        assert!((model(&[1.0, 1.0], &[1.0, 3.0]).provider_gain() - 0.75).abs() < 1e-15);
        assert!((model(&[1.0, 1.0], &[2.0, 6.0]).provider_gain() - 1.5).abs() < 1e-15);
        // Equal bonuses: the harmonic aggregate is b/n.
        assert!((model(&[1.0, 1.0], &[2.0, 2.0]).provider_gain() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn provider_gain_matches_bilinear_payoff() {
        let m = model(&[1.0, 2.0, 4.0], &[3.0, 5.0, 7.0]);
        let gains = m
            .to_bimatrix()
            .expected_payoff(&m.equilibrium().to_profile())
            .unwrap();
        let gain = m.provider_gain();
        assert!((gains.gain_b - gain).abs() <= 1e-12 * gain.abs());
    }

    #[test]
    fn provider_gain_scales_linearly() {
        let g1 = model(&[1.0, 1.0], &[1.0, 3.0]).provider_gain();
        let g2 = model(&[1.0, 1.0], &[2.0, 6.0]).provider_gain();
        assert!((g2 - 2.0 * g1).abs() < 1e-15);
    }

    #[test]
    fn invert_canonical_scales() {
        let profile = EquilibriumProfile::new(
            MixedStrategy::new(vec![0.75, 0.25]).unwrap(),
            MixedStrategy::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let m = invert_from_equilibrium(&profile, &ScaleConstants::default()).unwrap();
        assert_eq!(m.a(), &[2.0, 2.0]);
        assert_eq!(m.b(), &[4.0 / 3.0, 4.0]);
        assert_eq!(m.budget(), None);
    }

    #[test]
    fn invert_with_budget_recovers_bonuses() {
        let profile = EquilibriumProfile::new(
            MixedStrategy::new(vec![0.75, 0.25]).unwrap(),
            MixedStrategy::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let m = invert_with_budget(&profile, 4.0).unwrap();
        assert_eq!(m.a(), &[2.0, 2.0]);
        assert_eq!(m.b(), &[1.0, 3.0]);
        assert_eq!(m.budget(), Some(4.0));
    }

    #[test]
    fn invert_rejects_zero_frequency() {
        let profile = EquilibriumProfile::new(
            MixedStrategy::new(vec![1.0, 0.0]).unwrap(),
            MixedStrategy::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            invert_from_equilibrium(&profile, &ScaleConstants::default()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            invert_with_budget(&profile, 4.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn forward_of_inverse_reproduces_frequencies() {
        let profile = EquilibriumProfile::new(
            MixedStrategy::new(vec![0.2, 0.3, 0.5]).unwrap(),
            MixedStrategy::new(vec![0.1, 0.6, 0.3]).unwrap(),
        )
        .unwrap();
        let m = invert_from_equilibrium(&profile, &ScaleConstants::new(2.5, 0.7).unwrap()).unwrap();
        let eq = m.equilibrium();
        for i in 0..3 {
            assert!((eq.p().probs()[i] - profile.p().probs()[i]).abs() < 1e-12);
            assert!((eq.q().probs()[i] - profile.q().probs()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_forward_preserves_ratios() {
        let m = model(&[1.0, 2.0, 4.0], &[3.0, 5.0, 7.0]);
        let back = invert_from_equilibrium(&m.equilibrium(), &ScaleConstants::default()).unwrap();
        let ratio_a = back.a()[0] / m.a()[0];
        let ratio_b = back.b()[0] / m.b()[0];
        for i in 0..3 {
            assert!((back.a()[i] / m.a()[i] - ratio_a).abs() < 1e-12 * ratio_a);
            assert!((back.b()[i] / m.b()[i] - ratio_b).abs() < 1e-12 * ratio_b);
        }
    }

    #[test]
    fn provider_gain_equals_recovered_scale() {
        // Inverting a model's own equilibrium at its own budget returns
        // the original bonuses, and the budget-determined scale constant
        // coincides with the equilibrium gain.
        let m = model(&[2.0, 2.0], &[1.0, 3.0]);
        let scales = ScaleConstants::for_budget(m.equilibrium().p(), 4.0).unwrap();
        assert!((scales.b_scale() - m.provider_gain()).abs() < 1e-15);
        let back = invert_with_budget(&m.equilibrium(), 4.0).unwrap();
        assert_eq!(back.b(), m.b());
    }

    #[test]
    fn normalize_to_budget_identity() {
        let m = AlphaModel::new(vec![2.0, 2.0], vec![1.0, 3.0]).unwrap();
        let same = m.normalize_to_budget(4.0).unwrap();
        assert_eq!(same.b(), &[1.0, 3.0]);
        assert_eq!(same.budget(), Some(4.0));
    }

    #[test]
    fn normalize_round_trips_through_currency_change() {
        // Rescale into a much smaller unit and back: integer arithmetic
        // keeps the round trip exact.
        let m = model(&[2.0, 2.0], &[1.0, 3.0]);
        let inflated = m.normalize_to_budget(7828.0).unwrap();
        assert_eq!(inflated.b(), &[1957.0, 5871.0]);
        let back = inflated.normalize_to_budget(4.0).unwrap();
        assert_eq!(back.b(), &[1.0, 3.0]);
    }

    #[test]
    fn normalize_preserves_equilibrium() {
        let m = model(&[1.0, 2.0, 4.0], &[3.0, 5.0, 7.0]);
        let scaled = m.normalize_to_budget(1957.0).unwrap();
        let (before, after) = (m.equilibrium(), scaled.equilibrium());
        for i in 0..3 {
            assert!((before.p().probs()[i] - after.p().probs()[i]).abs() < 1e-12);
            assert!((before.q().probs()[i] - after.q().probs()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_validation() {
        let m = model(&[1.0], &[1.0]);
        assert!(matches!(
            m.normalize_to_budget(0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            m.normalize_to_budget(-4.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            m.normalize_to_budget(f64::NAN),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn profile_length_mismatch() {
        assert!(matches!(
            EquilibriumProfile::new(
                MixedStrategy::uniform(2).unwrap(),
                MixedStrategy::uniform(3).unwrap(),
            ),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn scale_constants_validation() {
        assert!(ScaleConstants::new(1.0, 1.0).is_ok());
        assert!(matches!(
            ScaleConstants::new(0.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ScaleConstants::new(1.0, -2.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ScaleConstants::for_budget(&MixedStrategy::uniform(2).unwrap(), 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ScaleConstants::for_budget(&MixedStrategy::pure(0, 2).unwrap(), 4.0),
            Err(Error::Domain(_))
        ));
    }
}
