//! One-factor-at-a-time parameter sweeps.
//!
//! A sweep holds every parameter at its base value except one, walks that
//! parameter over a range, and records the full equilibrium outcome at each
//! point: prices, profits, demands, the concavity flag, the feasibility
//! verdict, and an error code where the point cannot be evaluated at all.
//! Failed points stay in the output as annotated rows so a series over a
//! range that crosses a degenerate parameter combination keeps its shape.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::{concavity_check, solve_equilibrium};
use crate::error::{EquilibriumError, ModelError, SweepError};
use crate::market::{DemandSplit, MarketParams, PriceVector, ProfitVector};

// ============================================================================
// Sweep parameter identifiers
// ============================================================================

/// The model parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Alpha,
    Theta,
    T,
    X,
    Beta,
    M,
    Mu1,
    Mu2,
    C1,
    C2,
    C3,
}

pub const ALL_SWEEP_PARAMS: [SweepParam; 11] = [
    SweepParam::Alpha,
    SweepParam::Theta,
    SweepParam::T,
    SweepParam::X,
    SweepParam::Beta,
    SweepParam::M,
    SweepParam::Mu1,
    SweepParam::Mu2,
    SweepParam::C1,
    SweepParam::C2,
    SweepParam::C3,
];

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Theta => "theta",
            SweepParam::T => "t",
            SweepParam::X => "x",
            SweepParam::Beta => "beta",
            SweepParam::M => "m",
            SweepParam::Mu1 => "mu1",
            SweepParam::Mu2 => "mu2",
            SweepParam::C1 => "c1",
            SweepParam::C2 => "c2",
            SweepParam::C3 => "c3",
        }
    }

    pub fn parse(s: &str) -> Result<SweepParam, SweepError> {
        ALL_SWEEP_PARAMS
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                SweepError::InvalidSpec(format!(
                    "unknown sweep parameter {s:?}; expected one of \
                     alpha, theta, t, x, beta, m, mu1, mu2, c1, c2, c3"
                ))
            })
    }

    /// Mutable reference to this parameter's field.
    pub fn slot(self, params: &mut MarketParams) -> &mut f64 {
        match self {
            SweepParam::Alpha => &mut params.alpha,
            SweepParam::Theta => &mut params.theta,
            SweepParam::T => &mut params.t,
            SweepParam::X => &mut params.x,
            SweepParam::Beta => &mut params.beta,
            SweepParam::M => &mut params.m,
            SweepParam::Mu1 => &mut params.mu1,
            SweepParam::Mu2 => &mut params.mu2,
            SweepParam::C1 => &mut params.c1,
            SweepParam::C2 => &mut params.c2,
            SweepParam::C3 => &mut params.c3,
        }
    }

    /// Reference sweep range (lo, hi, lo_open, hi_open) for this parameter.
    ///
    /// Open sides mark values where the model degenerates (theta = 0,
    /// m = 0) or the range is defined exclusively; grids touch them only up
    /// to a half-step offset. Strict-mode validation confines sweeps to
    /// these ranges.
    pub fn table_range(self) -> (f64, f64, bool, bool) {
        match self {
            SweepParam::Alpha => (0.8, 1.0, true, false),
            SweepParam::Theta => (0.0, 0.8, true, true),
            SweepParam::T => (0.0, 20.0, false, false),
            SweepParam::X => (0.0, 10.0, false, false),
            SweepParam::Beta => (0.0, 1.0, true, false),
            SweepParam::M => (0.0, 1.0, true, false),
            SweepParam::Mu1 | SweepParam::Mu2 => (0.0, 200.0, false, false),
            SweepParam::C1 => (119.0, 231.0, false, false),
            SweepParam::C2 | SweepParam::C3 => (49.0, 231.0, false, false),
        }
    }
}

// ============================================================================
// Sweep specification
// ============================================================================

/// How sweep points are placed within [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepMode {
    /// `steps` evenly spaced points. Endpoints are included, except that an
    /// endpoint sitting exactly on an open reference-range bound is moved
    /// half a step inward (those bounds are degenerate or excluded).
    Grid,
    /// `n` independent uniform draws, reported sorted ascending.
    Random { seed: u64, n: u32 },
}

/// Default number of grid points when the caller does not choose one.
pub const DEFAULT_SWEEP_STEPS: u32 = 50;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepSpec {
    pub base: MarketParams,
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    /// Grid point count (ignored in random mode, which carries its own n).
    pub steps: u32,
    pub mode: SweepMode,
}

impl SweepSpec {
    /// Checks the sweep request, returning warnings for conditions that do not stop
    /// the sweep. With `strict` set, leaving the parameter's reference
    /// range is an error instead of a warning.
    pub fn validate(&self, strict: bool) -> Result<Vec<String>, SweepError> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(SweepError::InvalidSpec(format!(
                "sweep range [{}, {}] must be finite",
                self.lo, self.hi
            )));
        }
        if self.lo >= self.hi {
            return Err(SweepError::InvalidSpec(format!(
                "sweep range lo = {} must be strictly below hi = {}",
                self.lo, self.hi
            )));
        }
        let points = self.point_count();
        if points == 0 {
            return Err(SweepError::InvalidSpec(
                "sweep must request at least one point".into(),
            ));
        }

        let mut warnings = Vec::new();
        let (table_lo, table_hi, _, _) = self.param.table_range();
        if self.lo < table_lo || self.hi > table_hi {
            let msg = format!(
                "sweep range [{}, {}] leaves the reference range [{}, {}] for {}",
                self.lo,
                self.hi,
                table_lo,
                table_hi,
                self.param.name()
            );
            if strict {
                return Err(SweepError::InvalidSpec(msg));
            }
            warnings.push(msg);
        }
        for violation in self.base.range_violations() {
            let msg = format!("base scenario: {violation}");
            if strict {
                return Err(SweepError::InvalidSpec(msg));
            }
            warnings.push(msg);
        }
        Ok(warnings)
    }

    /// Number of rows the sweep will produce.
    pub fn point_count(&self) -> u32 {
        match self.mode {
            SweepMode::Grid => self.steps,
            SweepMode::Random { n, .. } => n,
        }
    }

    /// The parameter values the sweep evaluates, in row order.
    pub fn values(&self) -> Vec<f64> {
        match self.mode {
            SweepMode::Grid => grid_values(self.param, self.lo, self.hi, self.steps),
            SweepMode::Random { seed, n } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut v: Vec<f64> = (0..n)
                    .map(|_| self.lo + (self.hi - self.lo) * rng.random::<f64>())
                    .collect();
                v.sort_by(f64::total_cmp);
                v
            }
        }
    }
}

/// Evenly spaced values over [lo, hi] with half-step offsets off any
/// endpoint that sits exactly on an open reference-range bound.
fn grid_values(param: SweepParam, lo: f64, hi: f64, steps: u32) -> Vec<f64> {
    let (table_lo, table_hi, lo_open, hi_open) = param.table_range();
    let h = if steps > 1 {
        (hi - lo) / (steps - 1) as f64
    } else {
        hi - lo
    };
    let eff_lo = if lo_open && lo == table_lo {
        lo + 0.5 * h
    } else {
        lo
    };
    let eff_hi = if hi_open && hi == table_hi {
        hi - 0.5 * h
    } else {
        hi
    };
    if steps == 1 {
        return vec![eff_lo];
    }
    let span = eff_hi - eff_lo;
    (0..steps)
        .map(|j| {
            if j == 0 {
                eff_lo
            } else if j == steps - 1 {
                eff_hi
            } else {
                eff_lo + span * j as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

// ============================================================================
// Sweep results
// ============================================================================

/// One evaluated sweep point. Value columns are `None` exactly when
/// `error_code` is set; the concavity flag is computable either way because
/// it depends only on the substituted parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param_value: f64,
    pub prices: Option<PriceVector>,
    pub profits: Option<ProfitVector>,
    pub split: Option<DemandSplit>,
    pub concavity_ok: bool,
    /// True when every feasibility check passed at this point.
    pub feasible: bool,
    pub error_code: Option<String>,
}

impl SweepRow {
    /// Whether the point produced numbers (its error column is empty).
    pub fn evaluated(&self) -> bool {
        self.error_code.is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

/// Stable one-token codes for the error column of a sweep row.
fn error_code(err: &EquilibriumError) -> String {
    match err {
        EquilibriumError::SingularDenominator { .. } => "singular_denominator".into(),
        EquilibriumError::SingularSystem { .. } => "singular_system".into(),
        EquilibriumError::Model(ModelError::DegenerateDenominator { which, .. }) => {
            format!("degenerate_denominator({})", which.expression())
        }
        EquilibriumError::Model(ModelError::TieCase { .. }) => "tie_case".into(),
    }
}

/// Runs a one-factor-at-a-time sweep.
///
/// Every point substitutes the swept parameter into a copy of the base
/// scenario and solves for the equilibrium. Points where the solve fails
/// (degenerate denominators, singular systems) become annotated rows with
/// an error code; they are never dropped, so the row count always equals
/// the requested point count and rows are ordered by parameter value.
pub fn ofat_sweep(spec: &SweepSpec, strict: bool) -> Result<SweepResult, SweepError> {
    let warnings = spec.validate(strict)?;
    let rows = spec
        .values()
        .into_iter()
        .map(|value| {
            let params = spec.base.with_value(spec.param, value);
            match solve_equilibrium(&params) {
                Ok(eq) => SweepRow {
                    param_value: value,
                    prices: Some(eq.prices),
                    profits: Some(eq.profits),
                    split: Some(eq.split),
                    concavity_ok: eq.concavity.ok(),
                    feasible: eq.feasibility.all_green(),
                    error_code: None,
                },
                Err(err) => SweepRow {
                    param_value: value,
                    prices: None,
                    profits: None,
                    split: None,
                    concavity_ok: concavity_check(&params).ok(),
                    feasible: false,
                    error_code: Some(error_code(&err)),
                },
            }
        })
        .collect();
    Ok(SweepResult {
        param: spec.param,
        rows,
        warnings,
    })
}

// ============================================================================
// Monotonicity summary
// ============================================================================

/// Direction label for one output column across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Flat,
    NonMonotone,
}

impl Monotonicity {
    pub fn label(self) -> &'static str {
        match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::Flat => "flat",
            Monotonicity::NonMonotone => "non-monotone",
        }
    }
}

/// Monotonicity verdict for one output column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeriesTrend {
    pub column: &'static str,
    pub label: Monotonicity,
}

const TREND_COLUMNS: usize = 9;
/// Relative threshold below which a step between consecutive rows counts
/// as no change.
pub const FLAT_REL_TOL: f64 = 1e-9;

/// Labels the direction of each output column over the sweep.
///
/// Only steps between consecutive evaluated rows count; pairs straddling
/// an error row are skipped, so an annotated failure in the middle of a
/// range cannot manufacture a spurious jump. With fewer than two evaluated
/// rows in a row anywhere, there is nothing to compare.
pub fn sign_summary(result: &SweepResult) -> Result<[SeriesTrend; TREND_COLUMNS], SweepError> {
    let columns = |row: &SweepRow| -> [f64; TREND_COLUMNS] {
        let p = row.prices.expect("evaluated row");
        let pi = row.profits.expect("evaluated row");
        let d = row.split.expect("evaluated row");
        [
            p.p1, p.p2, p.p3, pi.pi1, pi.pi2, pi.pi3, d.d_u, d.d_o, d.d_e,
        ]
    };

    let mut rose = [false; TREND_COLUMNS];
    let mut fell = [false; TREND_COLUMNS];
    let mut pairs = 0usize;
    for pair in result.rows.windows(2) {
        if !(pair[0].evaluated() && pair[1].evaluated()) {
            continue;
        }
        pairs += 1;
        let a = columns(&pair[0]);
        let b = columns(&pair[1]);
        for i in 0..TREND_COLUMNS {
            let scale = a[i].abs().max(b[i].abs());
            let step = b[i] - a[i];
            if step.abs() <= FLAT_REL_TOL * scale {
                continue;
            }
            if step > 0.0 {
                rose[i] = true;
            } else {
                fell[i] = true;
            }
        }
    }
    if pairs == 0 {
        let evaluated = result.rows.iter().filter(|r| r.evaluated()).count();
        return Err(SweepError::InsufficientData { rows: evaluated });
    }

    const NAMES: [&str; TREND_COLUMNS] = ["p1", "p2", "p3", "pi1", "pi2", "pi3", "du", "do", "de"];
    let mut out = [SeriesTrend {
        column: "",
        label: Monotonicity::Flat,
    }; TREND_COLUMNS];
    for i in 0..TREND_COLUMNS {
        out[i] = SeriesTrend {
            column: NAMES[i],
            label: match (rose[i], fell[i]) {
                (true, true) => Monotonicity::NonMonotone,
                (true, false) => Monotonicity::Increasing,
                (false, true) => Monotonicity::Decreasing,
                (false, false) => Monotonicity::Flat,
            },
        };
    }
    Ok(out)
}

// ============================================================================
// Tests
// ============================================================================
