//! Price competition across three retail channels of one product market:
//! unorganized street retail, organized (large-format) retail, and online
//! sale. Consumers differ in a single valuation drawn uniformly from
//! [0, 1], discount the channels by fixed quality factors, and pay
//! channel-specific frictions (travel cost for street retail, inconvenience
//! costs for the other two). Each channel sets one price; the crate
//! computes the demand split implied by any price triple, channel profits,
//! and the simultaneous-move price equilibrium in closed form.
//!
//! The equilibrium layer works with the all-channels-active demand
//! formulas, whose stationarity conditions produce the closed-form prices;
//! the same formulas back the first-order-condition residuals, the
//! concavity check, and the feasibility report that says whether the
//! resulting split actually lies inside the population. A separate
//! simulation oracle ([`monte_carlo_demand`]) estimates demand by applying
//! the consumer choice rule directly, with no threshold algebra, and
//! [`nash_deviation_check`] certifies candidate equilibria by unilateral
//! profit search. The [`sensitivity`] module sweeps one parameter at a
//! time and annotates every point with the same diagnostics.
//!
//! Numeric conventions, used consistently everywhere: denominators within
//! [`DEGENERACY_TOL`] of zero are reported as degenerate rather than
//! divided by; regime classification refuses to break exact threshold ties
//! ([`TIE_TOL`], relative); raw formula values are never clamped, and
//! out-of-range demand fractions surface as flags instead of being
//! silently repaired.

pub mod equilibrium;
pub mod error;
pub mod market;
pub mod oracle;
pub mod sensitivity;

pub use equilibrium::{
    closed_form_denominator, closed_form_prices, concavity_check, foc_residuals, solve_equilibrium,
    solve_foc_system, ConcavityReport, EquilibriumResult, FeasibilityCheck, FeasibilityReport,
    FocSolution, CONDITION_LIMIT,
};
pub use error::{Denominator, EquilibriumError, ModelError, OracleError, SweepError};
pub use market::{
    classify_regime, demand, demand_triple_raw, indifference_points, profits, ties, utilities,
    ActiveSet, CaseLabel, Channel, ChannelSet, DemandDiagnostics, DemandSplit, IndifferencePoints,
    MarketParams, PriceVector, ProfitVector, Regime, DEGENERACY_TOL, TIE_TOL,
};
pub use oracle::{
    best_response, mc_comparison_valid, monte_carlo_demand, nash_deviation_check, own_profit,
    DeviationReport, McDemandEstimate, MC_PARTITION, MC_RNG_NAME,
};
pub use sensitivity::{
    ofat_sweep, sign_summary, Monotonicity, SeriesTrend, SweepMode, SweepParam, SweepResult,
    SweepRow, SweepSpec, ALL_SWEEP_PARAMS, DEFAULT_SWEEP_STEPS, FLAT_REL_TOL,
};
