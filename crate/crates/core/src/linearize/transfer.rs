use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

/// Discrete transfer function in powers of `z^-1`:
///
/// ```text
/// H(z^-1) = z^-delay * (b0 + b1 z^-1 + ... ) / (1 + a1 z^-1 + a2 z^-2 + ...)
/// ```
///
/// For a fourth-order plant there are four numerator taps, four denominator
/// lags and a one-sample pure delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTF {
    /// `b0, b1, ...`
    pub numerator: Vec<f64>,
    /// `a1, a2, ...`; the leading 1 is implied.
    pub denominator: Vec<f64>,
    pub ts: f64,
    pub delay: usize,
}

impl DiscreteTF {
    pub fn order(&self) -> usize {
        self.denominator.len()
    }

    /// Output of the difference equation driven by `input` from rest.
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(input.len());
        for k in 0..input.len() {
            let mut acc = 0.0;
            for (i, b) in self.numerator.iter().enumerate() {
                if let Some(j) = k.checked_sub(self.delay + i) {
                    acc += b * input[j];
                }
            }
            for (i, a) in self.denominator.iter().enumerate() {
                if let Some(j) = k.checked_sub(i + 1) {
                    acc -= a * y[j];
                }
            }
            y.push(acc);
        }
        y
    }

    pub fn impulse_response(&self, len: usize) -> Vec<f64> {
        let mut u = vec![0.0; len];
        if len > 0 {
            u[0] = 1.0;
        }
        self.filter(&u)
    }

    /// `1 + a1 x + a2 x^2 + ...` evaluated at complex `x` (re, im).
    pub fn denominator_at(&self, x: (f64, f64)) -> (f64, f64) {
        // Horner from the highest lag down
        let mut acc = (0.0, 0.0);
        for a in self.denominator.iter().rev().chain(std::iter::once(&1.0)) {
            acc = (acc.0 * x.0 - acc.1 * x.1 + a, acc.0 * x.1 + acc.1 * x.0);
        }
        acc
    }
}

/// Characteristic polynomial coefficients `[c0, c1, ..., c_{n-1}, 1]` of
/// `a` and the matrices `M_1..M_n` of the Leverrier–Faddeev recursion, with
/// `adj(zI - a) = sum_k M_k z^(n-k)`.
pub fn leverrier_faddeev(a: &DMatrix<f64>) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    let identity = DMatrix::<f64>::identity(n, n);
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut ms = Vec::with_capacity(n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &identity * coeffs[n - k + 1];
        coeffs[n - k] = -(a * &m).trace() / k as f64;
        ms.push(m.clone());
    }
    (coeffs, ms)
}

/// Transfer function of `x[k+1] = a_d x[k] + b_d u[k]`, `y[k] = c x[k]`.
///
/// With no feedthrough the numerator `c adj(zI - a_d) b_d` has degree
/// `n - 1`, so one factor `z^-1` comes out as a pure delay.
pub fn tf_from_state_space(
    a_d: &DMatrix<f64>,
    b_d: &DVector<f64>,
    c_row: &RowDVector<f64>,
    ts: f64,
) -> DiscreteTF {
    let n = a_d.nrows();
    let (coeffs, ms) = leverrier_faddeev(a_d);
    let numerator = ms.iter().map(|m| (c_row * m * b_d)[(0, 0)]).collect();
    let denominator = (1..=n).map(|k| coeffs[n - k]).collect();
    DiscreteTF {
        numerator,
        denominator,
        ts,
        delay: 1,
    }
}
