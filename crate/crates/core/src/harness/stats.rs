use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centred moving average. The window covers `t - (w-1)/2 ..= t + w/2` and is
/// truncated at both ends of the series.
pub fn smooth(raw: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let (before, after) = ((window - 1) / 2, window / 2);
    let mut prefix = Vec::with_capacity(raw.len() + 1);
    prefix.push(0.0);
    for &x in raw {
        prefix.push(prefix.last().unwrap() + x);
    }
    (0..raw.len())
        .map(|t| {
            let lo = t.saturating_sub(before);
            let hi = (t + after + 1).min(raw.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// First rollout index whose value reaches `threshold`.
pub fn convergence_rollout(curve: &[f64], threshold: f64) -> Option<usize> {
    curve.iter().position(|&x| x >= threshold)
}

/// Rollouts needed to try every (perceptual state, behaviour) pair once:
/// three sensing actions with four states plus one without states.
pub fn baseline_rollouts(j: usize) -> usize {
    3 * 4 * j + j
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} points", points.len())));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// `1 - k_a / k_b` for linear fits of variant A and B convergence counts over
/// `J`, given as `(J, n_a, n_b)`.
pub fn asymptotic_speedup(pairs: &[(f64, f64, f64)]) -> Result<f64> {
    let a: Vec<_> = pairs.iter().map(|p| (p.0, p.1)).collect();
    let b: Vec<_> = pairs.iter().map(|p| (p.0, p.2)).collect();
    let (fa, fb) = (linear_fit(&a)?, linear_fit(&b)?);
    if fb.slope == 0.0 {
        return Err(Error::DegenerateFit("reference slope is zero".into()));
    }
    Ok(1.0 - fa.slope / fb.slope)
}
