//! CSV output. Numbers carry 9 significant digits in scientific notation,
//! rows end with LF.

use std::io::{self, Write};

use crate::sim::{Comparison, Metrics, TimeSeries};

pub const TRACE_HEADER: &str = "t,ref,vt_dev,e,u,vf,delta,slip,te,c";
pub const METRICS_HEADER: &str =
    "variant,window_start,window_end,iae,ise,overshoot,settling_time,max_abs_error";

/// `x` with 9 significant digits, e.g. `-5.00000000e-2`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_trace<W: Write>(series: &TimeSeries, mut w: W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for s in &series.samples {
        let row = [
            s.t,
            s.reference,
            s.vt_dev,
            s.e,
            s.u,
            s.v_f,
            s.delta,
            s.slip,
            s.te_dev,
            s.c,
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

fn metrics_row(variant: &str, start: f64, end: f64, m: &Metrics) -> String {
    let settling = m.settling_time.map(fmt_num).unwrap_or_default();
    format!(
        "{variant},{},{},{},{},{},{settling},{}",
        fmt_num(start),
        fmt_num(end),
        fmt_num(m.iae),
        fmt_num(m.ise),
        fmt_num(m.overshoot),
        fmt_num(m.max_abs_error)
    )
}

/// One row per (variant, event window); an unsettled window leaves
/// `settling_time` empty.
pub fn write_metrics<W: Write>(cmp: &Comparison, mut w: W) -> io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for (variant, pick) in [("adaptive", true), ("fixed", false)] {
        for win in &cmp.windows {
            let m = if pick { &win.adaptive } else { &win.fixed };
            writeln!(w, "{}", metrics_row(variant, win.start, win.end, m))?;
        }
    }
    w.flush()
}
