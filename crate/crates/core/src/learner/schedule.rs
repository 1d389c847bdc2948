//! Regularization and sample-size schedules from the recovery guarantee.

use crate::error::{Error, Result};

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )))
    }
}

fn check_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be positive")));
    }
    Ok(())
}

/// `λ = 2 (ν + sqrt((2/n) log(2 p (d+1) / δ)))`.
pub fn lambda_schedule(n: usize, p: usize, d: usize, nu: f64, delta: f64) -> Result<f64> {
    check_positive("n", n)?;
    check_positive("p", p)?;
    check_delta(delta)?;
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "nu must be non-negative, got {nu}"
        )));
    }
    let log_term = (2.0 * p as f64 * (d as f64 + 1.0) / delta).ln();
    Ok(2.0 * (nu + (2.0 / n as f64 * log_term).sqrt()))
}

/// Smallest integer `n` strictly above
/// `max{ (2/N) log(2p(d+1)/δ), (8(d+1)/C_min) log(m(1+dm)/δ) }`
/// with `N = (C_min / (36 m² (d+1)²) - ν)²`.
pub fn sample_schedule(
    p: usize,
    d: usize,
    m: usize,
    c_min: f64,
    nu: f64,
    delta: f64,
) -> Result<u64> {
    check_positive("p", p)?;
    check_positive("m", m)?;
    check_delta(delta)?;
    if !(c_min > 0.0) {
        return Err(Error::ScheduleInfeasible(format!(
            "C_min must be positive, got {c_min}"
        )));
    }
    let (pf, df, mf) = (p as f64, d as f64, m as f64);
    let margin = c_min / (36.0 * mf * mf * (df + 1.0).powi(2));
    if nu >= margin {
        return Err(Error::ScheduleInfeasible(format!(
            "nu = {nu} is not below C_min / (36 m^2 (d+1)^2) = {margin}"
        )));
    }
    let big_n = (margin - nu).powi(2);
    let first = 2.0 / big_n * (2.0 * pf * (df + 1.0) / delta).ln();
    let second = 8.0 * (df + 1.0) / c_min * (mf * (1.0 + df * mf) / delta).ln();
    let bound = first.max(second);
    if !bound.is_finite() || bound >= u64::MAX as f64 {
        return Err(Error::ScheduleInfeasible(format!(
            "required sample size {bound} is not representable"
        )));
    }
    Ok(bound.floor() as u64 + 1)
}

/// Per-player approximation level `48 (d_i + 1) λ / C_min`.
pub fn epsilon_bound(degree: usize, lambda: f64, c_min: f64) -> f64 {
    48.0 * (degree as f64 + 1.0) * lambda / c_min
}
