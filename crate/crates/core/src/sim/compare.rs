use super::{compute_metrics, run_closed_loop, Metrics, ScenarioConfig, SimError, TimeSeries};
use crate::fuzzy::FuzzyPIConfig;
use crate::machine::GeneratorParams;
use crate::network::NetworkAdmittance;
use crate::tuner::TunerConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowMetrics {
    pub start: f64,
    pub end: f64,
    pub adaptive: Metrics,
    pub fixed: Metrics,
}

/// Adaptive run, fixed-`c` run (at `c1`) and metrics per event window.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub adaptive: TimeSeries,
    pub fixed: TimeSeries,
    pub windows: Vec<WindowMetrics>,
}

/// `[t_i, t_{i+1})` for consecutive (grid-snapped) event times, the last
/// window running to the end of the scenario.
pub fn event_windows(scenario: &ScenarioConfig) -> Vec<(f64, f64)> {
    let mut steps: Vec<usize> = scenario
        .events
        .iter()
        .map(|ev| ev.step_index(scenario.h))
        .filter(|&k| k < scenario.steps())
        .collect();
    steps.sort_unstable();
    steps.dedup();
    let times: Vec<f64> = steps.iter().map(|&k| k as f64 * scenario.h).collect();
    let end = scenario.steps() as f64 * scenario.h + 0.5 * scenario.h;
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, times.get(i + 1).copied().unwrap_or(end)))
        .collect()
}

/// Runs the scenario with and without tuning. With `parallel` the two legs
/// run on separate threads; results are identical either way.
pub fn compare_adaptive(
    scenario: &ScenarioConfig,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
    controller: &FuzzyPIConfig,
    tuner: &TunerConfig,
    parallel: bool,
) -> Result<Comparison, SimError> {
    let adaptive_cfg = ScenarioConfig {
        adaptive: true,
        ..scenario.clone()
    };
    let fixed_cfg = ScenarioConfig {
        adaptive: false,
        fixed_c: tuner.c1,
        ..scenario.clone()
    };
    let run = |cfg: &ScenarioConfig| run_closed_loop(cfg, params, net, controller, tuner);

    let (adaptive, fixed) = if parallel {
        std::thread::scope(|scope| {
            let handle = scope.spawn(|| run(&fixed_cfg));
            let adaptive = run(&adaptive_cfg);
            let fixed = handle.join().expect("fixed-c run panicked");
            (adaptive, fixed)
        })
    } else {
        (run(&adaptive_cfg), run(&fixed_cfg))
    };
    let (adaptive, fixed) = (adaptive?, fixed?);

    let windows = event_windows(scenario)
        .into_iter()
        .map(|(start, end)| {
            Ok(WindowMetrics {
                start,
                end,
                adaptive: compute_metrics(&adaptive, (start, end), tuner.alpha)?,
                fixed: compute_metrics(&fixed, (start, end), tuner.alpha)?,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    Ok(Comparison {
        adaptive,
        fixed,
        windows,
    })
}
