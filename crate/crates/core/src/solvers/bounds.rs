use crate::error::{Error, Result};

fn check_dims(p: usize, d: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::param("sensors", "need at least one sensor"));
    }
    if d < 2 {
        return Err(Error::param("orientations", format!("need at least two orientations, got {d}")));
    }
    Ok(p as f64 * (d as f64).ln())
}

/// beta = 1 / (1 + sqrt(2 p ln d / L)), the multiplicative-weights rate.
pub fn dwm_beta(l_tilde: f64, p: usize, d: usize) -> Result<f64> {
    let a = check_dims(p, d)?;
    if !(l_tilde > 0.0 && l_tilde.is_finite()) {
        return Err(Error::param("l_tilde", format!("must be positive and finite, got {l_tilde}")));
    }
    let beta = 1.0 / (1.0 + (2.0 * a / l_tilde).sqrt());
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", format!("{beta} outside (0, 1)")));
    }
    Ok(beta)
}

/// eps_T = sqrt(2 L p ln d) / T + p ln d / T
pub fn epsilon_bound(t: u64, l_tilde: f64, p: usize, d: usize) -> Result<f64> {
    let a = check_dims(p, d)?;
    if t == 0 {
        return Err(Error::param("iterations", "T must be at least 1"));
    }
    if !(l_tilde > 0.0 && l_tilde.is_finite()) {
        return Err(Error::param("l_tilde", format!("must be positive and finite, got {l_tilde}")));
    }
    let t = t as f64;
    Ok((2.0 * l_tilde * a).sqrt() / t + a / t)
}

/// Smallest T with epsilon_bound(T, T, p, d) <= eps.
pub fn iterations_for_epsilon(eps: f64, p: usize, d: usize) -> Result<u64> {
    let a = check_dims(p, d)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    // with s = 1/sqrt(T): a s^2 + sqrt(2a) s - eps = 0
    let b = (2.0 * a).sqrt();
    let s = (-b + (b * b + 4.0 * a * eps).sqrt()) / (2.0 * a);
    let mut t = (1.0 / (s * s)).ceil().max(1.0) as u64;
    let bound = |t: u64| epsilon_bound(t, t as f64, p, d);
    while t > 1 && bound(t - 1)? <= eps {
        t -= 1;
    }
    while bound(t)? > eps {
        t += 1;
    }
    Ok(t)
}
