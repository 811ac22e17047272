use super::{SimError, TimeSeries};

/// Performance indices over a window of a logged run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Integral of |e| (p.u. s), rectangle rule at the sample spacing.
    pub iae: f64,
    /// Integral of e^2 (p.u.^2 s).
    pub ise: f64,
    /// Peak excursion past the most recent reference step in the window, as
    /// a fraction of the step. Zero when the window holds no reference step.
    pub overshoot: f64,
    /// Time from the window start until `|e|` stays within the band, `None`
    /// if it is still outside at the end of the window.
    pub settling_time: Option<f64>,
    pub max_abs_error: f64,
}

/// Metrics over the samples with `t` in `[start, end)`.
pub fn compute_metrics(
    series: &TimeSeries,
    window: (f64, f64),
    band: f64,
) -> Result<Metrics, SimError> {
    let (start, end) = window;
    let eps = 1e-9 * series.spacing;
    let samples = &series.samples;
    let first = samples.partition_point(|s| s.t < start - eps);
    let last = samples.partition_point(|s| s.t < end - eps);
    if first >= last {
        return Err(SimError::EmptyWindow { start, end });
    }
    let win = &samples[first..last];
    let dt = series.spacing;

    let iae = win.iter().map(|s| s.e.abs()).sum::<f64>() * dt;
    let ise = win.iter().map(|s| s.e * s.e).sum::<f64>() * dt;
    let max_abs_error = win.iter().fold(0.0f64, |m, s| m.max(s.e.abs()));

    let step_at = (first.max(1)..last)
        .rev()
        .find(|&k| samples[k].reference != samples[k - 1].reference);
    let overshoot = match step_at {
        Some(k) => {
            let target = samples[k].reference;
            let step = target - samples[k - 1].reference;
            let peak = samples[k..last]
                .iter()
                .map(|s| (s.vt_dev - target) * step.signum())
                .fold(0.0f64, f64::max);
            peak / step.abs()
        }
        None => 0.0,
    };

    let settling_time = match win.iter().rposition(|s| s.e.abs() > band) {
        None => Some(0.0),
        Some(j) if j + 1 == win.len() => None,
        Some(j) => Some(win[j + 1].t - start),
    };

    Ok(Metrics {
        iae,
        ise,
        overshoot,
        settling_time,
        max_abs_error,
    })
}
