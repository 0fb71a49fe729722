use serde::{Deserialize, Serialize};

/// Fits below this R² are flagged rather than reported as an order.
pub const MIN_R_SQUARED: f64 = 0.98;

/// Least-squares line through `(ln Δt, ln error)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Errors shrink strictly with the step size.
    pub monotone: bool,
}

impl SlopeFit {
    /// True when the fit is too poor, or the data too irregular, to read as an order.
    pub fn flagged(&self) -> bool {
        !(self.r_squared >= MIN_R_SQUARED) || !self.monotone
    }
}

/// Fits `ln e = slope · ln Δt + c`. Returns `None` for fewer than three
/// samples or when some error is zero or not finite.
pub fn fit_slope(dts: &[f64], errors: &[f64]) -> Option<SlopeFit> {
    if dts.len() != errors.len() || dts.len() < 3 {
        return None;
    }
    if dts.iter().chain(errors).any(|&v| !(v > 0.0 && v.is_finite())) {
        return None;
    }
    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };

    let mut order: Vec<usize> = (0..dts.len()).collect();
    order.sort_by(|&i, &j| dts[j].total_cmp(&dts[i]));
    let monotone = order.windows(2).all(|w| errors[w[1]] < errors[w[0]]);
    Some(SlopeFit { slope, intercept: my - slope * mx, r_squared, monotone })
}
