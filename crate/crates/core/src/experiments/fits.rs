//! Least-squares fits of the multipartite optimum against N.

use crate::error::{Error, Result};

use super::Table;

/// Pairwise discord carried by each additional party.
pub const PAIR_DISCORD: f64 = 0.2018;

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub model: String,
    /// (name, value) in model order.
    pub coefficients: Vec<(String, f64)>,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
    pub points: Vec<(f64, f64)>,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|(n, _)| n == name).map(|c| c.1)
    }
}

fn check(points: &[(f64, f64)], needed: usize) -> Result<()> {
    if points.len() < needed {
        return Err(Error::Underdetermined(format!(
            "{} points cannot determine {needed} coefficients",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Config("fit points must be finite".into()));
    }
    Ok(())
}

/// Solves min Σ (y − a·u − c)² for (a, c); returns (a, c, residual norm).
fn affine(us: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = us.len() as f64;
    let mu = us.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let suu: f64 = us.iter().map(|u| (u - mu).powi(2)).sum();
    if suu < 1e-300 {
        return Err(Error::Underdetermined("fit abscissae are degenerate".into()));
    }
    let suy: f64 = us.iter().zip(ys).map(|(u, y)| (u - mu) * (y - my)).sum();
    let a = suy / suu;
    let c = my - a * mu;
    let r = us
        .iter()
        .zip(ys)
        .map(|(u, y)| (y - a * u - c).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((a, c, r))
}

/// y = slope·x + intercept.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    check(points, 2)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let (a, c, r) = affine(&xs, &ys)?;
    Ok(FitResult {
        model: "linear".into(),
        coefficients: vec![("slope".into(), a), ("intercept".into(), c)],
        residual_norm: r,
        points: points.to_vec(),
    })
}

/// y = a·exp(b·x) + c. For each b the best (a, c) is linear least squares;
/// b is located by a coarse scan and golden-section refinement.
pub fn exponential_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    check(points, 3)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let span = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
    if span <= 0.0 {
        return Err(Error::Underdetermined("fit abscissae are degenerate".into()));
    }
    let limit = 20.0 / span;
    let residual = |b: f64| -> f64 {
        let us: Vec<f64> = xs.iter().map(|x| (b * x).exp()).collect();
        affine(&us, &ys).map_or(f64::INFINITY, |r| r.2)
    };
    let scan = 4001;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..scan {
        let b = -limit + 2.0 * limit * i as f64 / (scan - 1) as f64;
        if b.abs() < 1e-9 {
            continue;
        }
        let r = residual(b);
        if r < best.0 {
            best = (r, b);
        }
    }
    let h = 2.0 * limit / (scan - 1) as f64;
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if residual(a) <= residual(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let b = 0.5 * (lo + hi);
    let us: Vec<f64> = xs.iter().map(|x| (b * x).exp()).collect();
    let (a, c, r) = affine(&us, &ys)?;
    Ok(FitResult {
        model: "exponential".into(),
        coefficients: vec![("a".into(), a), ("b".into(), b), ("c".into(), c)],
        residual_norm: r,
        points: points.to_vec(),
    })
}

/// Linear fit of the optimum against N, and an exponential fit of the excess
/// ξ(N) = 𝒢(N) − d·(N − 1) over `pair_discord` d per added party.
pub fn scaling_fits(g_m: &[(usize, f64)], pair_discord: f64) -> Result<(FitResult, FitResult)> {
    let lin: Vec<(f64, f64)> = g_m.iter().map(|&(n, g)| (n as f64, g)).collect();
    let xi: Vec<(f64, f64)> = g_m
        .iter()
        .map(|&(n, g)| (n as f64, g - pair_discord * (n as f64 - 1.0)))
        .collect();
    Ok((linear_fit(&lin)?, exponential_fit(&xi)?))
}

pub fn fits_table(fits: &[&FitResult]) -> Result<Table> {
    let mut t = Table::new("fits", &["model", "coefficient", "value", "residual_norm"]);
    for f in fits {
        for (name, v) in &f.coefficients {
            t.push(vec![
                f.model.as_str().into(),
                name.as_str().into(),
                (*v).into(),
                f.residual_norm.into(),
            ])?;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_zero_residual() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let f = linear_fit(&pts).unwrap();
        assert!((f.coefficient("slope").unwrap() - 2.0).abs() < 1e-12);
        assert!((f.coefficient("intercept").unwrap() + 1.0).abs() < 1e-12);
        assert!(f.residual_norm < 1e-12);
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let pts: Vec<(f64, f64)> = (2..6)
            .map(|n| (n as f64, -0.33 * (-0.29 * n as f64).exp() + 0.2))
            .collect();
        let f = exponential_fit(&pts).unwrap();
        assert!((f.coefficient("a").unwrap() + 0.33).abs() < 1e-5);
        assert!((f.coefficient("b").unwrap() + 0.29).abs() < 1e-5);
        assert!((f.coefficient("c").unwrap() - 0.2).abs() < 1e-5);
    }

    #[test]
    fn underdetermined_fits_are_rejected() {
        assert!(linear_fit(&[(1.0, 1.0)]).is_err());
        assert!(exponential_fit(&[(1.0, 1.0), (2.0, 3.0)]).is_err());
        assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }
}
