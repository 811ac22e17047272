use nalgebra::{DMatrix, DVector};

/// Relative size of the last Taylor term at which the series is truncated.
pub const SERIES_TOL: f64 = 1e-12;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring: the argument is scaled by
/// `2^-s` until its 1-norm is at most 1/2, the Taylor series is summed until
/// the next term is below `SERIES_TOL` relative to the partial sum, and the
/// result is squared `s` times.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square(), "expm of a non-square matrix");
    let n = m.nrows();
    let norm = norm1(m);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m * 2f64.powi(-squarings);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=64 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if norm1(&term) <= SERIES_TOL * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Zero-order-hold discretization of `x' = A x + B u` with period `ts`, read
/// off the exponential of the augmented matrix `[[A, B], [0, 0]] ts`.
pub fn discretize_zoh(a: &DMatrix<f64>, b: &DVector<f64>, ts: f64) -> (DMatrix<f64>, DVector<f64>) {
    assert!(ts > 0.0, "sample period must be positive");
    let n = a.nrows();
    let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    aug.view_mut((0, n), (n, 1)).copy_from(b);
    let e = expm(&(aug * ts));
    let a_d = e.view((0, 0), (n, n)).into_owned();
    let b_d = DVector::from_iterator(n, e.view((0, n), (n, 1)).iter().copied());
    (a_d, b_d)
}
