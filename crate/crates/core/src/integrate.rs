//! Fixed-step explicit integration.

/// One classic fourth-order Runge–Kutta step of an autonomous system
/// `x' = f(x)` (inputs are held constant over the step).
pub fn rk4_step<F, E>(x: &[f64], h: f64, mut f: F) -> Result<Vec<f64>, E>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, E>,
{
    let n = x.len();
    let offset = |k: &[f64], scale: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(xi, ki)| xi + scale * ki).collect()
    };
    let k1 = f(x)?;
    let k2 = f(&offset(&k1, 0.5 * h))?;
    let k3 = f(&offset(&k2, 0.5 * h))?;
    let k4 = f(&offset(&k3, h))?;
    let mut next = Vec::with_capacity(n);
    for i in 0..n {
        next.push(x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn exponential_decay_has_fourth_order_error() {
        let run = |h: f64| {
            let mut x = vec![1.0];
            let steps = (1.0 / h).round() as usize;
            for _ in 0..steps {
                x = rk4_step::<_, Infallible>(&x, h, |x| Ok(vec![-x[0]])).unwrap();
            }
            (x[0] - (-1.0f64).exp()).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn harmonic_oscillator_quarter_period() {
        let h = 1e-3;
        let mut x = vec![1.0, 0.0];
        let steps = (std::f64::consts::FRAC_PI_2 / h).round() as usize;
        for _ in 0..steps {
            x = rk4_step::<_, Infallible>(&x, h, |x| Ok(vec![x[1], -x[0]])).unwrap();
        }
        let t = steps as f64 * h;
        assert!((x[0] - t.cos()).abs() < 1e-12);
        assert!((x[1] + t.sin()).abs() < 1e-12);
    }
}
