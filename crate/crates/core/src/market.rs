//! Market primitives: parameters, prices, consumer utilities, indifference
//! thresholds, demand-regime classification, channel demands, and profits.
//!
//! Consumers carry a valuation `v` uniform on [0, 1] with unit density.
//! Three channels sell the same product: a small unorganized shop (u,
//! channel 1) reached at transport cost `t * x`, whose assortment buyers
//! accept with factor `alpha`; an organized chain store (o, channel 2) with
//! purchase disutility `mu1`; and an online store (e, channel 3) accepted
//! with factor `theta < alpha` and purchase disutility `mu2`. A consumer
//! buys from the channel offering the highest positive utility:
//!
//! ```text
//! U_u = alpha * v - m * p1 - t * x
//! U_o =         v - m * p2 - mu1
//! U_e = theta * v - m * p3 - mu2
//! ```
//!
//! Thresholds, demands, and profits are evaluated exactly as written, with
//! no clamping to [0, 1]: out-of-range values are reported through
//! diagnostics so that infeasible-but-published configurations remain
//! reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Denominator, ModelError};

/// Absolute magnitude below which a formula denominator is treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Relative tolerance used to detect ties in threshold comparisons.
pub const TIE_TOL: f64 = 1e-12;

/// True when `a` and `b` coincide within [`TIE_TOL`], scaled by magnitude.
pub fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

// ============================================================================
// Channels
// ============================================================================

/// One of the three retail channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Unorganized,
    Organized,
    Online,
}

impl Channel {
    /// Zero-based index: unorganized 0, organized 1, online 2.
    pub fn index(self) -> usize {
        match self {
            Channel::Unorganized => 0,
            Channel::Organized => 1,
            Channel::Online => 2,
        }
    }

    /// Conventional one-letter tag: u, o, e.
    pub fn tag(self) -> &'static str {
        match self {
            Channel::Unorganized => "u",
            Channel::Organized => "o",
            Channel::Online => "e",
        }
    }
}

/// The set of channels offered to consumers in a given market setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSet {
    /// Organized and online.
    Oe,
    /// Unorganized and organized.
    Uo,
    /// Unorganized and online.
    Ue,
    /// All three channels.
    Uoe,
}

impl ChannelSet {
    pub fn contains(self, channel: Channel) -> bool {
        match self {
            ChannelSet::Oe => channel != Channel::Unorganized,
            ChannelSet::Uo => channel != Channel::Online,
            ChannelSet::Ue => channel != Channel::Organized,
            ChannelSet::Uoe => true,
        }
    }

    /// Parses the compact tags "oe", "uo", "ue", "uoe".
    pub fn parse(s: &str) -> Option<ChannelSet> {
        match s {
            "oe" => Some(ChannelSet::Oe),
            "uo" => Some(ChannelSet::Uo),
            "ue" => Some(ChannelSet::Ue),
            "uoe" => Some(ChannelSet::Uoe),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ChannelSet::Oe => "oe",
            ChannelSet::Uo => "uo",
            ChannelSet::Ue => "ue",
            ChannelSet::Uoe => "uoe",
        }
    }
}

// ============================================================================
// Parameters and prices
// ============================================================================

/// The eleven exogenous market parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Consumer acceptance of the unorganized channel, in (0, 1).
    pub alpha: f64,
    /// Consumer acceptance of the online channel, in (0, 1); theta < alpha.
    pub theta: f64,
    /// Probability that category-level demand materializes, in (0, 1].
    pub beta: f64,
    /// Marginal utility of money, in (0, 1].
    pub m: f64,
    /// Transport cost per km, Rs, >= 0.
    pub t: f64,
    /// Distance to the nearest unorganized shop, km, >= 0.
    pub x: f64,
    /// Disutility of buying from the organized channel, Rs, >= 0.
    pub mu1: f64,
    /// Disutility of buying online, Rs, >= 0.
    pub mu2: f64,
    /// Marginal cost of the unorganized channel, Rs, >= 0.
    pub c1: f64,
    /// Marginal cost of the organized channel, Rs, >= 0.
    pub c2: f64,
    /// Marginal cost of the online channel, Rs, >= 0.
    pub c3: f64,
}

impl MarketParams {
    /// Combined travel cost `t * x`.
    pub fn tx(&self) -> f64 {
        self.t * self.x
    }

    /// Range violations against the documented parameter domains.
    ///
    /// Validation is deliberately separate from evaluation: every formula in
    /// this crate accepts whatever finite values it is given, so published
    /// configurations that break the model's own assumptions can still be
    /// reproduced. An empty list means all ranges hold.
    pub fn range_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                v.push(msg.to_string());
            }
        };
        check(
            self.alpha > 0.0 && self.alpha < 1.0,
            &format!("alpha = {} outside (0, 1)", self.alpha),
        );
        check(
            self.theta > 0.0 && self.theta < 1.0,
            &format!("theta = {} outside (0, 1)", self.theta),
        );
        check(
            self.beta > 0.0 && self.beta <= 1.0,
            &format!("beta = {} outside (0, 1]", self.beta),
        );
        check(
            self.m > 0.0 && self.m <= 1.0,
            &format!("m = {} outside (0, 1]", self.m),
        );
        check(self.t >= 0.0, &format!("t = {} negative", self.t));
        check(self.x >= 0.0, &format!("x = {} negative", self.x));
        check(self.mu1 >= 0.0, &format!("mu1 = {} negative", self.mu1));
        check(self.mu2 >= 0.0, &format!("mu2 = {} negative", self.mu2));
        check(self.c1 >= 0.0, &format!("c1 = {} negative", self.c1));
        check(self.c2 >= 0.0, &format!("c2 = {} negative", self.c2));
        check(self.c3 >= 0.0, &format!("c3 = {} negative", self.c3));
        v
    }

    /// Copy with one named field replaced; used by sensitivity sweeps.
    pub fn with_value(&self, field: crate::sensitivity::SweepParam, value: f64) -> MarketParams {
        let mut p = *self;
        *field.slot(&mut p) = value;
        p
    }
}

/// The three channel prices (decision variables of the pricing game).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceVector {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PriceVector {
    pub fn new(p1: f64, p2: f64, p3: f64) -> PriceVector {
        PriceVector { p1, p2, p3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    pub fn get(&self, channel: Channel) -> f64 {
        self.as_array()[channel.index()]
    }

    /// Violations of the price domain (finite and non-negative).
    pub fn range_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, value) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3)] {
            if !value.is_finite() {
                v.push(format!("{name} = {value} is not finite"));
            } else if value < 0.0 {
                v.push(format!("{name} = {value} negative"));
            }
        }
        v
    }
}

// ============================================================================
// Utilities and indifference thresholds
// ============================================================================

/// Consumer utilities (U_u, U_o, U_e) at valuation `v`.
pub fn utilities(v: f64, params: &MarketParams, prices: &PriceVector) -> (f64, f64, f64) {
    let u_u = params.alpha * v - params.m * prices.p1 - params.t * params.x;
    let u_o = v - params.m * prices.p2 - params.mu1;
    let u_e = params.theta * v - params.m * prices.p3 - params.mu2;
    (u_u, u_o, u_e)
}

/// The seven valuation thresholds.
///
/// `v_u`, `v_o`, `v_e` are the participation thresholds (utility of the
/// channel crosses zero); `v_uo`, `v_oe`, `v_ue` equalize channel pairs; and
/// `v_uoe` simultaneously equalizes u-vs-o and u-vs-e. Thresholds are not
/// clamped and may fall outside [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndifferencePoints {
    pub v_u: f64,
    pub v_o: f64,
    pub v_e: f64,
    pub v_uo: f64,
    pub v_oe: f64,
    pub v_ue: f64,
    pub v_uoe: f64,
}

/// Evaluates all seven thresholds, reporting which denominator vanished if
/// any of alpha, theta, 1-theta, alpha-1, alpha-theta, or 2*alpha-theta-1
/// is within [`DEGENERACY_TOL`] of zero.
pub fn indifference_points(
    params: &MarketParams,
    prices: &PriceVector,
) -> Result<IndifferencePoints, ModelError> {
    let MarketParams {
        alpha,
        theta,
        m,
        mu1,
        mu2,
        ..
    } = *params;
    let tx = params.tx();
    let PriceVector { p1, p2, p3 } = *prices;

    let denominators = [
        (Denominator::Alpha, alpha),
        (Denominator::Theta, theta),
        (Denominator::OneMinusTheta, 1.0 - theta),
        (Denominator::AlphaMinusOne, alpha - 1.0),
        (Denominator::AlphaMinusTheta, alpha - theta),
        (
            Denominator::TwoAlphaMinusThetaMinusOne,
            2.0 * alpha - theta - 1.0,
        ),
    ];
    for (which, value) in denominators {
        if value.abs() <= DEGENERACY_TOL {
            return Err(ModelError::DegenerateDenominator { which, value });
        }
    }

    Ok(IndifferencePoints {
        v_u: (m * p1 + tx) / alpha,
        v_o: m * p2 + mu1,
        v_e: (m * p3 + mu2) / theta,
        v_uo: (m * (p1 - p2) + tx - mu1) / (alpha - 1.0),
        v_oe: (m * (p2 - p3) + mu1 - mu2) / (1.0 - theta),
        v_ue: (m * (p1 - p3) + tx - mu2) / (alpha - theta),
        v_uoe: (m * (2.0 * p1 - p2 - p3) + 2.0 * tx - mu1 - mu2) / (2.0 * alpha - theta - 1.0),
    })
}

// ============================================================================
// Regime classification
// ============================================================================

/// Which channels a classified case leaves with positive demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ActiveSet {
    pub u: bool,
    pub o: bool,
    pub e: bool,
}

impl ActiveSet {
    pub fn contains(self, channel: Channel) -> bool {
        match channel {
            Channel::Unorganized => self.u,
            Channel::Organized => self.o,
            Channel::Online => self.e,
        }
    }
}

/// The classified demand cases, one pair per market setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    /// {o,e}: v_e < v_o, both channels sell.
    OrganizedOnlineBoth,
    /// {o,e}: v_e > v_o, online demand is zero.
    OrganizedOnlineOrganizedOnly,
    /// {u,o}: v_o < v_u, both channels sell.
    UnorganizedOrganizedBoth,
    /// {u,o}: v_o > v_u, organized demand is zero.
    UnorganizedOrganizedUnorganizedOnly,
    /// {u,e}: v_e < v_u, both channels sell.
    UnorganizedOnlineBoth,
    /// {u,e}: v_e > v_u, online demand is zero.
    UnorganizedOnlineUnorganizedOnly,
    /// {u,o,e}: v_ue < v_uo, all three channels sell.
    TripleAllActive,
    /// {u,o,e}: v_ue > v_uo, organized demand is zero.
    TripleOrganizedInactive,
}

impl CaseLabel {
    pub fn active_set(self) -> ActiveSet {
        let (u, o, e) = match self {
            CaseLabel::OrganizedOnlineBoth => (false, true, true),
            CaseLabel::OrganizedOnlineOrganizedOnly => (false, true, false),
            CaseLabel::UnorganizedOrganizedBoth => (true, true, false),
            CaseLabel::UnorganizedOrganizedUnorganizedOnly => (true, false, false),
            CaseLabel::UnorganizedOnlineBoth => (true, false, true),
            CaseLabel::UnorganizedOnlineUnorganizedOnly => (true, false, false),
            CaseLabel::TripleAllActive => (true, true, true),
            CaseLabel::TripleOrganizedInactive => (true, false, true),
        };
        ActiveSet { u, o, e }
    }
}

/// A classified market setting: offered channels, the case that applies,
/// and the channels that case leaves active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub channel_set: ChannelSet,
    pub case_label: CaseLabel,
    pub active_set: ActiveSet,
}

fn strictly_less(
    left: &'static str,
    l: f64,
    right: &'static str,
    r: f64,
) -> Result<bool, ModelError> {
    if ties(l, r) {
        return Err(ModelError::TieCase {
            left,
            right,
            value: l,
        });
    }
    Ok(l < r)
}

/// Classifies which demand case applies for the offered channel set.
///
/// The comparisons follow the model's stated case conditions: v_e vs v_o for
/// {o,e}, v_o vs v_u for {u,o}, v_e vs v_u for {u,e}, and v_ue vs v_uo for
/// the triple setting. Equal thresholds (within [`TIE_TOL`], scaled) raise
/// [`ModelError::TieCase`] rather than picking a side.
pub fn classify_regime(
    points: &IndifferencePoints,
    channel_set: ChannelSet,
) -> Result<Regime, ModelError> {
    let case_label = match channel_set {
        ChannelSet::Oe => {
            if strictly_less("v_e", points.v_e, "v_o", points.v_o)? {
                CaseLabel::OrganizedOnlineBoth
            } else {
                CaseLabel::OrganizedOnlineOrganizedOnly
            }
        }
        ChannelSet::Uo => {
            if strictly_less("v_o", points.v_o, "v_u", points.v_u)? {
                CaseLabel::UnorganizedOrganizedBoth
            } else {
                CaseLabel::UnorganizedOrganizedUnorganizedOnly
            }
        }
        ChannelSet::Ue => {
            if strictly_less("v_e", points.v_e, "v_u", points.v_u)? {
                CaseLabel::UnorganizedOnlineBoth
            } else {
                CaseLabel::UnorganizedOnlineUnorganizedOnly
            }
        }
        ChannelSet::Uoe => {
            if strictly_less("v_ue", points.v_ue, "v_uo", points.v_uo)? {
                CaseLabel::TripleAllActive
            } else {
                CaseLabel::TripleOrganizedInactive
            }
        }
    };
    Ok(Regime {
        channel_set,
        case_label,
        active_set: case_label.active_set(),
    })
}

// ============================================================================
// Demand
// ============================================================================

/// Per-channel demand fractions of the unit-density population on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandSplit {
    pub d_u: f64,
    pub d_o: f64,
    pub d_e: f64,
}

impl DemandSplit {
    pub fn as_array(&self) -> [f64; 3] {
        [self.d_u, self.d_o, self.d_e]
    }

    pub fn get(&self, channel: Channel) -> f64 {
        self.as_array()[channel.index()]
    }

    pub fn sum(&self) -> f64 {
        self.d_u + self.d_o + self.d_e
    }
}

/// Interior-solution diagnostics for a demand split. Raw formula values are
/// reported unchanged; these flags mark where they leave the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DemandDiagnostics {
    pub d_u_in_bounds: bool,
    pub d_o_in_bounds: bool,
    pub d_e_in_bounds: bool,
    pub sum_at_most_one: bool,
}

impl DemandDiagnostics {
    pub fn of(split: &DemandSplit) -> DemandDiagnostics {
        let in_bounds = |d: f64| (0.0..=1.0).contains(&d);
        DemandDiagnostics {
            d_u_in_bounds: in_bounds(split.d_u),
            d_o_in_bounds: in_bounds(split.d_o),
            d_e_in_bounds: in_bounds(split.d_e),
            // Tiny slack absorbs telescoping roundoff when the market is
            // exactly covered.
            sum_at_most_one: split.sum() <= 1.0 + 1e-12,
        }
    }

    pub fn clean(&self) -> bool {
        self.d_u_in_bounds && self.d_o_in_bounds && self.d_e_in_bounds && self.sum_at_most_one
    }
}

/// Demand under the all-three-active formulas, evaluated unconditionally:
///
/// ```text
/// D_u = 1 - v_uoe,  D_o = v_uoe - v_oe,  D_e = v_oe - v_e
/// ```
///
/// These are the expressions the profit functions and the closed-form
/// equilibrium are built on, so they are exposed directly: equilibrium
/// analysis evaluates them even where the classified case or the interior
/// bounds disagree, and feasibility is reported separately.
pub fn demand_triple_raw(
    params: &MarketParams,
    prices: &PriceVector,
) -> Result<DemandSplit, ModelError> {
    let pts = indifference_points(params, prices)?;
    Ok(DemandSplit {
        d_u: 1.0 - pts.v_uoe,
        d_o: pts.v_uoe - pts.v_oe,
        d_e: pts.v_oe - pts.v_e,
    })
}

/// Demand with the formula set selected by regime classification.
///
/// Values are never clamped; diagnostics carry any interior-solution
/// violations. Note that for the triple setting the classified case with
/// v_ue > v_uo zeroes the organized channel, which differs from the
/// all-active expressions of [`demand_triple_raw`] used by the equilibrium
/// pipeline; see the crate documentation for the trade-off.
pub fn demand(
    params: &MarketParams,
    prices: &PriceVector,
    channel_set: ChannelSet,
) -> Result<(DemandSplit, Regime, DemandDiagnostics), ModelError> {
    let pts = indifference_points(params, prices)?;
    let regime = classify_regime(&pts, channel_set)?;
    let split = match regime.case_label {
        CaseLabel::OrganizedOnlineBoth => DemandSplit {
            d_u: 0.0,
            d_o: 1.0 - pts.v_oe,
            d_e: pts.v_oe - pts.v_e,
        },
        CaseLabel::OrganizedOnlineOrganizedOnly => DemandSplit {
            d_u: 0.0,
            d_o: 1.0 - pts.v_o,
            d_e: 0.0,
        },
        CaseLabel::UnorganizedOrganizedBoth => DemandSplit {
            d_u: 1.0 - pts.v_uo,
            d_o: pts.v_uo - pts.v_o,
            d_e: 0.0,
        },
        CaseLabel::UnorganizedOrganizedUnorganizedOnly
        | CaseLabel::UnorganizedOnlineUnorganizedOnly => DemandSplit {
            d_u: 1.0 - pts.v_u,
            d_o: 0.0,
            d_e: 0.0,
        },
        CaseLabel::UnorganizedOnlineBoth => DemandSplit {
            d_u: 1.0 - pts.v_ue,
            d_o: 0.0,
            d_e: pts.v_ue - pts.v_e,
        },
        CaseLabel::TripleAllActive => DemandSplit {
            d_u: 1.0 - pts.v_uoe,
            d_o: pts.v_uoe - pts.v_oe,
            d_e: pts.v_oe - pts.v_e,
        },
        CaseLabel::TripleOrganizedInactive => DemandSplit {
            d_u: 1.0 - pts.v_uoe,
            d_o: 0.0,
            d_e: pts.v_uoe - pts.v_e,
        },
    };
    let diagnostics = DemandDiagnostics::of(&split);
    Ok((split, regime, diagnostics))
}

// ============================================================================
// Profits
// ============================================================================

/// Per-channel profits, Rs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfitVector {
    pub pi1: f64,
    pub pi2: f64,
    pub pi3: f64,
}

impl ProfitVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.pi1, self.pi2, self.pi3]
    }

    pub fn get(&self, channel: Channel) -> f64 {
        self.as_array()[channel.index()]
    }
}

/// pi_i = beta * (p_i - c_i) * d_i for each channel.
pub fn profits(params: &MarketParams, prices: &PriceVector, split: &DemandSplit) -> ProfitVector {
    ProfitVector {
        pi1: params.beta * (prices.p1 - params.c1) * split.d_u,
        pi2: params.beta * (prices.p2 - params.c2) * split.d_o,
        pi3: params.beta * (prices.p3 - params.c3) * split.d_e,
    }
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn base_params() -> MarketParams {
        MarketParams {
            alpha: 0.9,
            theta: 0.6,
            beta: 1.0,
            m: 1.0,
            t: 10.0,
            x: 0.86,
            mu1: 20.0,
            mu2: 20.0,
            c1: 175.0,
            c2: 140.0,
            c3: 140.0,
        }
    }

    fn small_params() -> MarketParams {
        MarketParams {
            alpha: 0.9,
            theta: 0.6,
            beta: 1.0,
            m: 1.0,
            t: 10.0,
            x: 0.1,
            mu1: 0.05,
            mu2: 0.05,
            c1: 0.2,
            c2: 0.15,
            c3: 0.1,
        }
    }

    #[test]
    fn utilities_zero_case() {
        let mut p = small_params();
        p.t = 0.0;
        p.x = 0.0;
        p.mu1 = 0.0;
        p.mu2 = 0.0;
        let zero = PriceVector::new(0.0, 0.0, 0.0);
        assert_eq!(utilities(0.0, &p, &zero), (0.0, 0.0, 0.0));
    }

    #[test]
    fn utilities_direct_arithmetic() {
        // alpha=0.9, theta=0.6, t*x=1, mu=0.05 at v=0.5 and zero prices.
        let p = small_params();
        let zero = PriceVector::new(0.0, 0.0, 0.0);
        let (u_u, u_o, u_e) = utilities(0.5, &p, &zero);
        assert!((u_u - (-0.55)).abs() < 1e-15);
        assert!((u_o - 0.45).abs() < 1e-15);
        assert!((u_e - 0.25).abs() < 1e-15);
    }

    #[test]
    fn participation_thresholds_zero_their_utility() {
        let p = small_params();
        let prices = PriceVector::new(0.3, 0.25, 0.12);
        let pts = indifference_points(&p, &prices).unwrap();
        let (u_u, _, _) = utilities(pts.v_u, &p, &prices);
        let (_, u_o, _) = utilities(pts.v_o, &p, &prices);
        let (_, _, u_e) = utilities(pts.v_e, &p, &prices);
        assert!(u_u.abs() < 1e-12);
        assert!(u_o.abs() < 1e-12);
        assert!(u_e.abs() < 1e-12);
    }

    #[test]
    fn pairwise_thresholds_equalize_utilities() {
        let p = small_params();
        let prices = PriceVector::new(0.3, 0.25, 0.12);
        let pts = indifference_points(&p, &prices).unwrap();
        let at = |v: f64| utilities(v, &p, &prices);
        let (a, b, _) = at(pts.v_uo);
        assert!((a - b).abs() < 1e-12);
        let (_, b, c) = at(pts.v_oe);
        assert!((b - c).abs() < 1e-12);
        let (a, _, c) = at(pts.v_ue);
        assert!((a - c).abs() < 1e-12);
        // v_uoe equates the unorganized utility with the mean of the other
        // two (its defining equation doubles U_u against U_o + U_e).
        let (a, b, c) = at(pts.v_uoe);
        assert!((2.0 * a - (b + c)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_online_organized_terms_zero_v_oe() {
        let p = small_params();
        let prices = PriceVector::new(0.3, 0.2, 0.2);
        let pts = indifference_points(&p, &prices).unwrap();
        assert_eq!(pts.v_oe, 0.0);
    }

    #[test]
    fn v_o_direct_arithmetic() {
        let mut p = small_params();
        p.mu1 = 0.1;
        let prices = PriceVector::new(0.3, 0.3, 0.1);
        let pts = indifference_points(&p, &prices).unwrap();
        assert!((pts.v_o - 0.4).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominator_is_named() {
        let mut p = small_params();
        p.alpha = 1.0;
        let prices = PriceVector::new(0.3, 0.25, 0.12);
        let err = indifference_points(&p, &prices).unwrap_err();
        match err {
            ModelError::DegenerateDenominator { which, .. } => {
                assert_eq!(which, Denominator::AlphaMinusOne);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn profit_chain_reproduces_published_level_within_one_percent() {
        // At the equilibrium prices this parameter set induces, the profit of
        // the unorganized channel lands within 1% of the published 2803.11
        // even though the demand fraction is far outside [0, 1].
        let p = base_params();
        let prices = crate::equilibrium::closed_form_prices(&p).unwrap();
        let pts = indifference_points(&p, &prices).unwrap();
        let pi1 = p.beta * (prices.p1 - p.c1) * (1.0 - pts.v_uoe);
        let rel = (pi1 - 2803.11).abs() / 2803.11;
        assert!(rel < 0.01, "pi1 = {pi1}, rel deviation {rel}");
    }

    #[test]
    fn classification_covers_all_eight_cases() {
        let mk = |v_u: f64, v_o: f64, v_e: f64, v_uo: f64, v_ue: f64| IndifferencePoints {
            v_u,
            v_o,
            v_e,
            v_uo,
            v_oe: 0.5,
            v_ue,
            v_uoe: 0.9,
        };
        let cases = [
            (
                ChannelSet::Oe,
                mk(0.5, 0.4, 0.2, 0.1, 0.3),
                CaseLabel::OrganizedOnlineBoth,
            ),
            (
                ChannelSet::Oe,
                mk(0.5, 0.2, 0.4, 0.1, 0.3),
                CaseLabel::OrganizedOnlineOrganizedOnly,
            ),
            (
                ChannelSet::Uo,
                mk(0.5, 0.4, 0.2, 0.1, 0.3),
                CaseLabel::UnorganizedOrganizedBoth,
            ),
            (
                ChannelSet::Uo,
                mk(0.4, 0.5, 0.2, 0.1, 0.3),
                CaseLabel::UnorganizedOrganizedUnorganizedOnly,
            ),
            (
                ChannelSet::Ue,
                mk(0.5, 0.4, 0.2, 0.1, 0.3),
                CaseLabel::UnorganizedOnlineBoth,
            ),
            (
                ChannelSet::Ue,
                mk(0.2, 0.4, 0.5, 0.1, 0.3),
                CaseLabel::UnorganizedOnlineUnorganizedOnly,
            ),
            (
                ChannelSet::Uoe,
                mk(0.5, 0.4, 0.2, 0.6, 0.3),
                CaseLabel::TripleAllActive,
            ),
            (
                ChannelSet::Uoe,
                mk(0.5, 0.4, 0.2, 0.3, 0.6),
                CaseLabel::TripleOrganizedInactive,
            ),
        ];
        for (set, pts, expected) in cases {
            let regime = classify_regime(&pts, set).unwrap();
            assert_eq!(regime.case_label, expected);
            assert_eq!(regime.active_set, expected.active_set());
            assert_eq!(regime.channel_set, set);
        }
    }

    #[test]
    fn exact_threshold_tie_is_rejected() {
        let pts = IndifferencePoints {
            v_u: 0.5,
            v_o: 0.5,
            v_e: 0.2,
            v_uo: 0.1,
            v_oe: 0.5,
            v_ue: 0.3,
            v_uoe: 0.9,
        };
        let err = classify_regime(&pts, ChannelSet::Uo).unwrap_err();
        assert!(matches!(
            err,
            ModelError::TieCase {
                left: "v_o",
                right: "v_u",
                ..
            }
        ));
    }

    #[test]
    fn boundary_prices_give_exactly_zero_unorganized_demand() {
        // With alpha = 3/4 and theta = 1/4 every intermediate quantity in
        // v_uoe is a small power of two, so the boundary hits 1.0 exactly.
        let p = MarketParams {
            alpha: 0.75,
            theta: 0.25,
            beta: 1.0,
            m: 1.0,
            t: 0.0,
            x: 0.0,
            mu1: 0.0,
            mu2: 0.0,
            c1: 0.1,
            c2: 0.1,
            c3: 0.1,
        };
        let k = 2.0 * p.alpha - p.theta - 1.0;
        let prices = PriceVector::new(k, k / 2.0, k / 2.0);
        let pts = indifference_points(&p, &prices).unwrap();
        assert_eq!(pts.v_uoe, 1.0);
        let split = demand_triple_raw(&p, &prices).unwrap();
        assert_eq!(split.d_u, 0.0);
    }

    #[test]
    fn base_case_demand_diagnostics_flag_violations() {
        let p = base_params();
        let prices = crate::equilibrium::closed_form_prices(&p).unwrap();
        let split = demand_triple_raw(&p, &prices).unwrap();
        let diag = DemandDiagnostics::of(&split);
        assert!(split.d_u < 0.0);
        assert!(split.d_o > 1.0);
        assert!(split.d_e < 0.0);
        assert!(!diag.d_u_in_bounds);
        assert!(!diag.d_o_in_bounds);
        assert!(!diag.d_e_in_bounds);
        assert!(!diag.clean());
    }

    #[test]
    fn zero_margin_and_zero_beta_zero_profits() {
        let mut p = small_params();
        let prices = PriceVector::new(p.c1, p.c2, p.c3);
        let split = demand_triple_raw(&p, &prices).unwrap();
        let pi = profits(&p, &prices, &split);
        assert_eq!(pi.as_array(), [0.0, 0.0, 0.0]);

        p.beta = 0.0;
        let prices = PriceVector::new(0.3, 0.25, 0.12);
        let split = demand_triple_raw(&p, &prices).unwrap();
        let pi = profits(&p, &prices, &split);
        assert_eq!(pi.as_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn range_violations_empty_on_valid_params() {
        assert!(base_params().range_violations().is_empty());
        let mut p = base_params();
        p.alpha = 1.2;
        p.c1 = -3.0;
        let v = p.range_violations();
        assert_eq!(v.len(), 2);
        assert!(v[0].contains("alpha"));
        assert!(v[1].contains("c1"));
    }
}
