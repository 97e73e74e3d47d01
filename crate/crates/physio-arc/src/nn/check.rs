//! Central finite-difference gradient verification.

/// Maximum relative error between an analytic gradient and central finite
/// differences of `f` over every coordinate of `params`. The relative error
/// of coordinate i is |a − n| / max(|a|, |n|, 1).
pub fn max_rel_err(
    params: &[f64],
    analytic: &[f64],
    eps: f64,
    mut f: impl FnMut(&[f64]) -> f64,
) -> f64 {
    assert_eq!(params.len(), analytic.len());
    let mut work = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let h = eps * params[i].abs().max(1.0);
        work[i] = params[i] + h;
        let up = f(&work);
        work[i] = params[i] - h;
        let down = f(&work);
        work[i] = params[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
        worst = worst.max(err);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_verifies() {
        let p = vec![0.5, -1.5, 2.0];
        let analytic: Vec<f64> = p.iter().map(|&v| 2.0 * v).collect();
        let err = max_rel_err(&p, &analytic, 1e-5, |w| w.iter().map(|v| v * v).sum());
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let p = vec![1.0, 2.0];
        let wrong = vec![1.0, 1.0];
        let err = max_rel_err(&p, &wrong, 1e-5, |w| w.iter().map(|v| v * v).sum());
        assert!(err > 0.1, "{err}");
    }
}
