//! Least-squares smile calibration.
//!
//! Fits Heston parameters to implied-volatility (or normalised-price)
//! quotes by minimising the weighted sum of squared vol residuals. The
//! default workflow fits the closed-form two-term expansion first, which
//! is cheap enough for thousands of objective evaluations, and optionally
//! polishes against the exact Fourier pricer from that warm start.
//!
//! The optimiser is derivative-free Nelder-Mead on an unconstrained
//! reparameterisation (log for kappa, theta, sigma, y0; arctanh for rho)
//! with a soft barrier `1e-8 * (-log(kappa_bar))` keeping the share-measure
//! mean reversion positive. Runs are deterministic: no randomised
//! restarts.

use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::{self, AsymError};
use crate::bs;
use crate::fourier::{self, QuadratureConfig, StrikeSpec};
use crate::params::HestonParams;

/// How a quote's `value` field is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    ImpliedVol,
    NormalizedPrice,
}

/// One market observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quote {
    /// Time to maturity in years, > 0.
    pub maturity: f64,
    /// Strike price, > 0.
    pub strike: f64,
    /// Spot price, > 0.
    pub spot: f64,
    /// Interpretation of `value`.
    pub kind: ValueKind,
    /// Implied volatility in (0, 5), or normalised price within the
    /// no-arbitrage bounds.
    pub value: f64,
    /// Nonnegative least-squares weight.
    pub weight: f64,
}

impl Quote {
    fn validate(&self) -> Result<(), String> {
        if !(self.maturity > 0.0) {
            return Err(format!("maturity must be positive, got {}", self.maturity));
        }
        if !(self.strike > 0.0) {
            return Err(format!("strike must be positive, got {}", self.strike));
        }
        if !(self.spot > 0.0) {
            return Err(format!("spot must be positive, got {}", self.spot));
        }
        if !(self.weight >= 0.0) {
            return Err(format!("weight must be nonnegative, got {}", self.weight));
        }
        match self.kind {
            ValueKind::ImpliedVol => {
                if !(self.value > 0.0 && self.value < 5.0) {
                    return Err(format!("implied vol must lie in (0, 5), got {}", self.value));
                }
            }
            ValueKind::NormalizedPrice => {
                let intrinsic = (1.0 - self.strike / self.spot).max(0.0);
                if !(self.value > intrinsic && self.value < 1.0) {
                    return Err(format!(
                        "normalised price {} outside no-arbitrage bounds ({intrinsic}, 1)",
                        self.value
                    ));
                }
            }
        }
        Ok(())
    }

    fn total_log_moneyness(&self) -> f64 {
        (self.strike / self.spot).ln()
    }
}

/// A validated collection of quotes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteSet(Vec<Quote>);

impl QuoteSet {
    pub fn new(quotes: Vec<Quote>) -> Result<Self, CalibError> {
        if quotes.is_empty() {
            return Err(CalibError::EmptyQuoteSet);
        }
        for (i, q) in quotes.iter().enumerate() {
            q.validate().map_err(|reason| CalibError::Parse {
                row: i + 1,
                column: "quote".to_string(),
                reason,
            })?;
        }
        Ok(Self(quotes))
    }

    pub fn quotes(&self) -> &[Quote] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Which smile model evaluates the residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmileModel {
    /// Two-term closed-form expansion (fast).
    Asymptotic,
    /// Exact Fourier pricer plus implied-vol inversion (slow).
    Fourier,
}

/// Calibration errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibError {
    /// A malformed CSV cell or an invalid quote.
    #[error("quote data error at row {row}, column {column}: {reason}")]
    Parse { row: usize, column: String, reason: String },
    /// No quotes survived parsing.
    #[error("quote set is empty")]
    EmptyQuoteSet,
    /// The iteration budget must be at least one.
    #[error("iteration budget must be >= 1, got {0}")]
    BadBudget(usize),
}

/// Fit outcome. `objective_value` is the weighted sum of squared vol
/// residuals at `params`, recomputable through [`smile_objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub params: HestonParams,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub per_quote_residuals: Vec<f64>,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    kappa: f64,
    theta: f64,
    sigma: f64,
    rho: f64,
    y0: f64,
    objective: f64,
    iterations: usize,
    converged: bool,
    residuals: &'a [f64],
}

impl CalibrationResult {
    /// The result serialised with the documented keys: kappa, theta,
    /// sigma, rho, y0, objective, iterations, converged, residuals.
    pub fn to_json_string(&self) -> String {
        let json = ResultJson {
            kappa: self.params.kappa,
            theta: self.params.theta,
            sigma: self.params.sigma,
            rho: self.params.rho,
            y0: self.params.y0,
            objective: self.objective_value,
            iterations: self.iterations,
            converged: self.converged,
            residuals: &self.per_quote_residuals,
        };
        serde_json::to_string_pretty(&json).expect("result serialises")
    }
}

/// Reads quotes from CSV with header
/// `maturity_years,strike,spot,kind,value,weight`; `kind` is `iv` or
/// `price`; the weight column is optional and defaults to 1. Rows that
/// violate the quote invariants are rejected with their row number.
pub fn load_quotes<R: Read>(source: R) -> Result<QuoteSet, CalibError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| CalibError::Parse { row: 1, column: "header".into(), reason: e.to_string() })?
        .clone();
    let expected = ["maturity_years", "strike", "spot", "kind", "value"];
    for (i, name) in expected.iter().enumerate() {
        if headers.get(i) != Some(*name) {
            return Err(CalibError::Parse {
                row: 1,
                column: (*name).to_string(),
                reason: format!(
                    "expected header column {i} to be '{name}', got '{}'",
                    headers.get(i).unwrap_or("")
                ),
            });
        }
    }

    let mut quotes = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // 1-based, after the header line
        let record = record.map_err(|e| CalibError::Parse {
            row,
            column: "record".into(),
            reason: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |i: usize, name: &str| -> Result<f64, CalibError> {
            let raw = record.get(i).ok_or_else(|| CalibError::Parse {
                row,
                column: name.to_string(),
                reason: "missing field".into(),
            })?;
            raw.parse::<f64>().map_err(|_| CalibError::Parse {
                row,
                column: name.to_string(),
                reason: format!("not a number: '{raw}'"),
            })
        };
        let kind = match record.get(3) {
            Some("iv") => ValueKind::ImpliedVol,
            Some("price") => ValueKind::NormalizedPrice,
            other => {
                return Err(CalibError::Parse {
                    row,
                    column: "kind".into(),
                    reason: format!("expected 'iv' or 'price', got '{}'", other.unwrap_or("")),
                })
            }
        };
        let weight = match record.get(5) {
            None | Some("") => 1.0,
            Some(_) => field(5, "weight")?,
        };
        let quote = Quote {
            maturity: field(0, "maturity_years")?,
            strike: field(1, "strike")?,
            spot: field(2, "spot")?,
            kind,
            value: field(4, "value")?,
            weight,
        };
        quote.validate().map_err(|reason| CalibError::Parse {
            row,
            column: "quote".into(),
            reason,
        })?;
        quotes.push(quote);
    }
    if quotes.is_empty() {
        return Err(CalibError::EmptyQuoteSet);
    }
    Ok(QuoteSet(quotes))
}

/// One evaluated residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuoteResidual {
    /// `model_vol - quote_vol`, or 0 when excluded.
    pub residual: f64,
    /// Effective weight after the near-threshold down-weighting.
    pub weight: f64,
    /// False when the quote was excluded (expansion out of regime).
    pub included: bool,
}

fn quote_vol(q: &Quote) -> Option<f64> {
    match q.kind {
        ValueKind::ImpliedVol => Some(q.value),
        ValueKind::NormalizedPrice => {
            bs::implied_vol(q.value, q.total_log_moneyness(), q.maturity).ok()
        }
    }
}

fn model_vol(params: &HestonParams, q: &Quote, model: SmileModel, quad: &QuadratureConfig) -> Option<f64> {
    let x_total = q.total_log_moneyness();
    match model {
        SmileModel::Asymptotic => {
            let x = x_total / q.maturity;
            match asymptotics::implied_var_asymptotic(params, x, q.maturity) {
                Ok(var) => Some(var.sqrt()),
                Err(AsymError::NonPositiveResult(_)) => None,
                Err(AsymError::AmplitudeRatioNonPositive { .. }) => None,
            }
        }
        SmileModel::Fourier => {
            fourier::exact_implied_vol(params, StrikeSpec::Total(x_total), q.maturity, quad).ok()
        }
    }
}

/// Per-quote residuals under the given model. In asymptotic mode, quotes
/// whose log-moneyness rate falls within 1e-3 of a special point are
/// down-weighted by 0.1 (the expansion's error bound is not uniform
/// there); quotes the expansion cannot represent at their maturity are
/// excluded with zero residual and flagged.
pub fn smile_residuals(
    params: &HestonParams,
    quotes: &QuoteSet,
    model: SmileModel,
) -> Vec<QuoteResidual> {
    use rayon::prelude::*;
    let quad = QuadratureConfig::default();
    let eval = |q: &Quote| -> QuoteResidual {
        let mut weight = q.weight;
        if model == SmileModel::Asymptotic {
            let x = q.total_log_moneyness() / q.maturity;
            let near_left = (x + params.theta / 2.0).abs() < 1e-3;
            let near_right = (x - params.theta_bar / 2.0).abs() < 1e-3;
            if near_left || near_right {
                weight *= 0.1;
            }
        }
        match (model_vol(params, q, model, &quad), quote_vol(q)) {
            (Some(m), Some(v)) => QuoteResidual { residual: m - v, weight, included: true },
            _ => QuoteResidual { residual: 0.0, weight, included: false },
        }
    };
    match model {
        // exact pricing is the expensive path; spread quotes across threads
        SmileModel::Fourier => quotes.quotes().par_iter().map(eval).collect(),
        SmileModel::Asymptotic => quotes.quotes().iter().map(eval).collect(),
    }
}

/// Weighted sum of squared vol residuals.
pub fn smile_objective(params: &HestonParams, quotes: &QuoteSet, model: SmileModel) -> f64 {
    smile_residuals(params, quotes, model)
        .iter()
        .map(|r| r.weight * r.residual * r.residual)
        .sum()
}

fn encode(p: &HestonParams) -> [f64; 5] {
    [p.kappa.ln(), p.theta.ln(), p.sigma.ln(), p.rho.atanh(), p.y0.ln()]
}

fn decode(z: &[f64]) -> Option<HestonParams> {
    let kappa = z[0].exp();
    let theta = z[1].exp();
    let sigma = z[2].exp();
    let rho = z[3].tanh();
    let y0 = z[4].exp();
    if !(kappa - rho * sigma > 0.0) {
        return None;
    }
    HestonParams::new(kappa, theta, sigma, rho, y0).ok()
}

struct NmOutcome {
    z: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Plain deterministic Nelder-Mead with the standard coefficients.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, z0: &[f64], step: f64, budget: usize) -> NmOutcome {
    let n = z0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(z0.to_vec());
    for i in 0..n {
        let mut v = z0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = (values[worst] - values[best]).abs();
        let diameter = (0..n)
            .map(|j| {
                let coords: Vec<f64> = simplex.iter().map(|v| v[j]).collect();
                let max = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let min = coords.iter().cloned().fold(f64::INFINITY, f64::min);
                max - min
            })
            .fold(0.0f64, f64::max);
        if values[best] <= 1e-18
            || (spread <= 1e-14 * (1.0 + values[best].abs()) && diameter <= 1e-9)
        {
            converged = true;
        }
        if converged || iterations >= budget {
            return NmOutcome {
                z: simplex[best].clone(),
                iterations,
                converged,
            };
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| {
                order[..n].iter().map(|&i| simplex[i][j]).sum::<f64>() / n as f64
            })
            .collect();
        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + (centroid[j] - simplex[worst][j]))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < values[best] {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_reflect;
            }
        } else if f_reflect < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = f_reflect;
        } else {
            let contract_outside = f_reflect < values[worst];
            let towards = if contract_outside { &reflect } else { &simplex[worst] };
            let contract: Vec<f64> =
                (0..n).map(|j| centroid[j] + 0.5 * (towards[j] - centroid[j])).collect();
            let f_contract = f(&contract);
            if f_contract < values[worst].min(f_reflect) {
                simplex[worst] = contract;
                values[worst] = f_contract;
            } else {
                // shrink towards the best vertex
                let best_v = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for j in 0..n {
                        simplex[i][j] = best_v[j] + 0.5 * (simplex[i][j] - best_v[j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
}

/// Least-squares fit of the smile. The objective at the result never
/// exceeds the objective at `init`; parameters stay inside the validated
/// region throughout; reruns with identical inputs are bit-identical.
/// When the budget runs out the best point so far is returned with
/// `converged = false`.
pub fn calibrate(
    quotes: &QuoteSet,
    init: &HestonParams,
    model: SmileModel,
    budget: usize,
) -> Result<CalibrationResult, CalibError> {
    if budget < 1 {
        return Err(CalibError::BadBudget(budget));
    }
    if quotes.is_empty() {
        return Err(CalibError::EmptyQuoteSet);
    }
    let objective = |z: &[f64]| -> f64 {
        match decode(z) {
            Some(p) => {
                let barrier = 1e-8 * -(p.kappa_bar.ln());
                smile_objective(&p, quotes, model) + barrier
            }
            None => f64::INFINITY,
        }
    };
    let z0 = encode(init);
    let first = nelder_mead(&objective, &z0, 0.1, budget);
    // one deterministic restart with a tighter simplex polishes stalls
    let remaining = budget.saturating_sub(first.iterations);
    let outcome = if !first.converged || remaining == 0 {
        first
    } else {
        let second = nelder_mead(&objective, &first.z, 0.01, remaining);
        NmOutcome {
            iterations: first.iterations + second.iterations,
            ..second
        }
    };

    let params = decode(&outcome.z).expect("optimizer keeps iterates feasible");
    let residuals = smile_residuals(&params, quotes, model);
    let objective_value: f64 = residuals.iter().map(|r| r.weight * r.residual * r.residual).sum();
    Ok(CalibrationResult {
        params,
        objective_value,
        iterations: outcome.iterations,
        converged: outcome.converged,
        per_quote_residuals: residuals.iter().map(|r| r.residual).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5() -> HestonParams {
        HestonParams::eurostoxx_2006()
    }

    /// Quotes generated from the asymptotic model itself.
    fn synthetic_asymptotic_quotes(p: &HestonParams, spot: f64) -> QuoteSet {
        let mut quotes = Vec::new();
        for t in [5.0, 9.0] {
            for i in 0..10 {
                let strike = spot * (0.6 + 0.09 * i as f64);
                let x = (strike / spot).ln() / t;
                let var = asymptotics::implied_var_asymptotic(p, x, t).unwrap();
                quotes.push(Quote {
                    maturity: t,
                    strike,
                    spot,
                    kind: ValueKind::ImpliedVol,
                    value: var.sqrt(),
                    weight: 1.0,
                });
            }
        }
        QuoteSet::new(quotes).unwrap()
    }

    #[test]
    fn load_single_row() {
        let csv = "maturity_years,strike,spot,kind,value,weight\n5,3700,3729.79,iv,0.21,1\n";
        let quotes = load_quotes(csv.as_bytes()).unwrap();
        assert_eq!(quotes.len(), 1);
        let q = quotes.quotes()[0];
        assert_eq!(q.maturity, 5.0);
        assert_eq!(q.kind, ValueKind::ImpliedVol);
    }

    #[test]
    fn load_without_weight_column() {
        let csv = "maturity_years,strike,spot,kind,value\n2,100,100,price,0.1\n";
        let quotes = load_quotes(csv.as_bytes()).unwrap();
        assert_eq!(quotes.quotes()[0].weight, 1.0);
        assert_eq!(quotes.quotes()[0].kind, ValueKind::NormalizedPrice);
    }

    #[test]
    fn load_rejects_negative_strike_with_row_number() {
        let csv = "maturity_years,strike,spot,kind,value,weight\n5,3700,3729.79,iv,0.21,1\n5,-10,3729.79,iv,0.21,1\n";
        match load_quotes(csv.as_bytes()) {
            Err(CalibError::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_bad_kind_and_empty_set() {
        let csv = "maturity_years,strike,spot,kind,value,weight\n5,3700,3729.79,vol,0.21,1\n";
        assert!(matches!(load_quotes(csv.as_bytes()), Err(CalibError::Parse { .. })));
        let csv = "maturity_years,strike,spot,kind,value,weight\n";
        assert!(matches!(load_quotes(csv.as_bytes()), Err(CalibError::EmptyQuoteSet)));
    }

    #[test]
    fn load_reference_shaped_surface() {
        let mut csv = String::from("maturity_years,strike,spot,kind,value,weight\n");
        for t in 1..=9 {
            for strike in (1460..=7300).step_by(1460) {
                csv.push_str(&format!("{t},{strike},3729.79,iv,0.22,1\n"));
            }
        }
        let quotes = load_quotes(csv.as_bytes()).unwrap();
        assert_eq!(quotes.len(), 45);
    }

    #[test]
    fn self_fit_objective_is_zero() {
        let p = p5();
        let quotes = synthetic_asymptotic_quotes(&p, 3729.79);
        let obj = smile_objective(&p, &quotes, SmileModel::Asymptotic);
        assert!(obj < 1e-16, "self-fit objective {obj}");
    }

    #[test]
    fn objective_scales_with_weights() {
        let p = p5();
        let quotes = synthetic_asymptotic_quotes(&p, 3729.79);
        let shifted = HestonParams::new(p.kappa, p.theta * 1.1, p.sigma, p.rho, p.y0).unwrap();
        let base = smile_objective(&shifted, &quotes, SmileModel::Asymptotic);
        let doubled = QuoteSet::new(
            quotes.quotes().iter().map(|q| Quote { weight: 2.0 * q.weight, ..*q }).collect(),
        )
        .unwrap();
        let scaled = smile_objective(&shifted, &doubled, SmileModel::Asymptotic);
        assert!((scaled - 2.0 * base).abs() < 1e-12 * base);
    }

    #[test]
    fn stationary_start_converges_immediately() {
        let p = p5();
        let quotes = synthetic_asymptotic_quotes(&p, 3729.79);
        let result = calibrate(&quotes, &p, SmileModel::Asymptotic, 500).unwrap();
        assert!(result.converged);
        assert!(result.iterations <= 2, "took {} iterations", result.iterations);
        assert!((result.params.kappa - p.kappa).abs() < 1e-8);
        assert!((result.params.theta - p.theta).abs() < 1e-8);
        assert!((result.params.sigma - p.sigma).abs() < 1e-8);
        assert!((result.params.rho - p.rho).abs() < 1e-8);
        assert!((result.params.y0 - p.y0).abs() < 1e-8);
    }

    #[test]
    fn objective_never_increases_and_residuals_recompute() {
        let p = p5();
        let quotes = synthetic_asymptotic_quotes(&p, 3729.79);
        let init = HestonParams::new(
            p.kappa * 1.2,
            p.theta * 0.8,
            p.sigma * 1.2,
            p.rho * 0.9,
            p.y0 * 1.2,
        )
        .unwrap();
        let before = smile_objective(&init, &quotes, SmileModel::Asymptotic);
        let result = calibrate(&quotes, &init, SmileModel::Asymptotic, 400).unwrap();
        assert!(result.objective_value <= before);
        let recomputed = smile_objective(&result.params, &quotes, SmileModel::Asymptotic);
        assert!((recomputed - result.objective_value).abs() <= 1e-12 * (1.0 + recomputed));
        assert_eq!(result.per_quote_residuals.len(), quotes.len());
        let from_residuals: f64 = smile_residuals(&result.params, &quotes, SmileModel::Asymptotic)
            .iter()
            .map(|r| r.weight * r.residual * r.residual)
            .sum();
        assert_eq!(from_residuals, result.objective_value);
    }

    #[test]
    fn near_degenerate_kappa_bar_stays_feasible() {
        let p = p5();
        let quotes = synthetic_asymptotic_quotes(&p, 3729.79);
        // kappa_bar = 0.3 - 0.28 = 0.02
        let init = HestonParams::new(0.3, 0.05, 1.0, 0.28, 0.05).unwrap();
        let result = calibrate(&quotes, &init, SmileModel::Asymptotic, 200).unwrap();
        assert!(result.params.kappa_bar > 0.0);
    }

    #[test]
    fn calibration_is_reproducible() {
        let p = p5();
        let quotes = synthetic_asymptotic_quotes(&p, 3729.79);
        let init = HestonParams::new(2.0, 0.06, 0.5, -0.4, 0.05).unwrap();
        let a = calibrate(&quotes, &init, SmileModel::Asymptotic, 300).unwrap();
        let b = calibrate(&quotes, &init, SmileModel::Asymptotic, 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn result_json_has_documented_keys() {
        let p = p5();
        let quotes = synthetic_asymptotic_quotes(&p, 3729.79);
        let result = calibrate(&quotes, &p, SmileModel::Asymptotic, 10).unwrap();
        let json: serde_json::Value = serde_json::from_str(&result.to_json_string()).unwrap();
        for key in ["kappa", "theta", "sigma", "rho", "y0", "objective", "iterations", "converged", "residuals"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(json["residuals"].as_array().unwrap().len(), quotes.len());
    }
}
