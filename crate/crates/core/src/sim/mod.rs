//! Closed-loop scenarios: nonlinear plant, sampled fuzzy PI controller and
//! the relay tuner, with additive step events.
//!
//! The plant is integrated by classic RK4 at step `h`. The controller runs
//! every `ts` (an integer multiple of `h`) and its output is held in
//! between. All logged signals except the rotor angle and the field voltage
//! are deviations from the initial equilibrium.

mod compare;
mod metrics;

pub use compare::{compare_adaptive, event_windows, Comparison, WindowMetrics};
pub use metrics::{compute_metrics, Metrics};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{find_equilibrium, Equilibrium};
use crate::error::{ensure, ModelError, ValidationError};
use crate::fuzzy::{controller_step, ControllerState, FuzzyPIConfig};
use crate::integrate::rk4_step;
use crate::machine::{GeneratorParams, MechanicalInput, ModelKind, PlantState};
use crate::network::{AlgebraicOutputs, NetworkAdmittance};
use crate::tuner::{tuner_step, TunerConfig, TunerState};

/// Any state beyond this magnitude (p.u.) is treated as divergence.
pub const UNSTABLE_BOUND: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("loss of synchronism at t = {t:.3} s (delta = {delta:.3} rad)")]
    LossOfSynchronism { t: f64, delta: f64 },
    #[error("simulation diverged at t = {t:.3} s")]
    Unstable { t: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(#[from] ValidationError),
    #[error("metrics window [{start}, {end}) contains no samples")]
    EmptyWindow { start: f64, end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ReferenceStep,
    TorqueStep,
    OwnConductanceStep,
    OwnSusceptanceStep,
    TransferConductanceStep,
    TransferSusceptanceStep,
}

/// An additive step applied at `time` (snapped to the integration grid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEvent {
    pub time: f64,
    pub kind: EventKind,
    pub magnitude: f64,
}

impl ScenarioEvent {
    /// Index of the integration step at which the event takes effect.
    pub fn step_index(&self, h: f64) -> usize {
        (self.time / h).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Simulated time (s).
    pub duration: f64,
    /// Integration step (s).
    pub h: f64,
    /// Controller sample period (s).
    pub ts: f64,
    pub model: ModelKind,
    pub adaptive: bool,
    /// Singleton scale used when `adaptive` is off.
    pub fixed_c: f64,
    pub target_vt: f64,
    pub target_te: f64,
    pub events: Vec<ScenarioEvent>,
    /// Log every integration step instead of every controller sample.
    pub full_rate_logging: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        study_scenario()
    }
}

/// The study case: +0.05 p.u. reference step at 20 s, +0.2 p.u. mechanical
/// torque at 40 s, +0.2 p.u. own conductance (local consumer) at 60 s.
pub fn study_scenario() -> ScenarioConfig {
    ScenarioConfig {
        duration: 80.0,
        h: 1e-3,
        ts: 0.02,
        model: ModelKind::Full,
        adaptive: true,
        fixed_c: TunerConfig::default().c1,
        target_vt: 1.0,
        target_te: 0.8,
        events: vec![
            ScenarioEvent {
                time: 20.0,
                kind: EventKind::ReferenceStep,
                magnitude: 0.05,
            },
            ScenarioEvent {
                time: 40.0,
                kind: EventKind::TorqueStep,
                magnitude: 0.2,
            },
            ScenarioEvent {
                time: 60.0,
                kind: EventKind::OwnConductanceStep,
                magnitude: 0.2,
            },
        ],
        full_rate_logging: false,
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(
            self.duration.is_finite() && self.duration > 0.0,
            "scenario: duration > 0",
        )?;
        ensure(self.h.is_finite() && self.h > 0.0, "scenario: h > 0")?;
        ensure(
            self.ts.is_finite() && self.h <= self.ts,
            "scenario: h <= ts",
        )?;
        let ratio = self.ts / self.h;
        ensure(
            (ratio - ratio.round()).abs() <= 1e-9 * ratio,
            "scenario: ts an integer multiple of h",
        )?;
        ensure(self.fixed_c.is_finite(), "scenario: fixed_c finite")?;
        ensure(
            self.target_vt.is_finite() && self.target_te.is_finite(),
            "scenario: operating point targets finite",
        )?;
        for ev in &self.events {
            ensure(
                ev.time.is_finite() && ev.time >= 0.0,
                "scenario: event time >= 0",
            )?;
            ensure(ev.magnitude.is_finite(), "scenario: event magnitude finite")?;
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.h).round() as usize
    }

    pub fn steps_per_sample(&self) -> usize {
        (self.ts / self.h).round() as usize
    }
}

/// One logged row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub reference: f64,
    pub vt_dev: f64,
    pub e: f64,
    pub u: f64,
    pub v_f: f64,
    pub delta: f64,
    pub slip: f64,
    pub te_dev: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Spacing between consecutive samples (s).
    pub spacing: f64,
    pub operating_point: Equilibrium,
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.e).collect()
    }

    pub fn scales(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.c).collect()
    }
}

/// What the observer sees at every logged sample.
#[derive(Debug, Clone, Copy)]
pub struct SampleView<'a> {
    pub t: f64,
    pub state: &'a PlantState,
    pub net: &'a NetworkAdmittance,
    pub input: &'a MechanicalInput,
    pub outputs: &'a AlgebraicOutputs,
}

pub fn run_closed_loop(
    scenario: &ScenarioConfig,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
    controller: &FuzzyPIConfig,
    tuner: &TunerConfig,
) -> Result<TimeSeries, SimError> {
    run_closed_loop_observed(scenario, params, net, controller, tuner, |_| {})
}

/// [`run_closed_loop`] with a callback at every logged sample.
pub fn run_closed_loop_observed<F>(
    scenario: &ScenarioConfig,
    params: &GeneratorParams,
    base_net: &NetworkAdmittance,
    controller: &FuzzyPIConfig,
    tuner: &TunerConfig,
    mut observe: F,
) -> Result<TimeSeries, SimError>
where
    F: FnMut(&SampleView<'_>),
{
    scenario.validate()?;
    let h = scenario.h;
    let steps = scenario.steps();
    let per_sample = scenario.steps_per_sample();

    let eq = find_equilibrium(
        scenario.target_vt,
        scenario.target_te,
        params,
        base_net,
        scenario.model,
    )?;
    let kind = eq.state.kind();
    let vt0 = eq.outputs.v_t;
    let te0 = eq.outputs.t_e;

    let mut events: Vec<(usize, ScenarioEvent)> = scenario
        .events
        .iter()
        .map(|ev| (ev.step_index(h), *ev))
        .collect();
    events.sort_by_key(|(k, _)| *k);
    let mut pending = events.into_iter().peekable();

    let mut x = eq.state.to_vec();
    let mut net = *base_net;
    let mut reference = 0.0;
    let mut t_m = eq.input.t_m;
    let mut ctrl = ControllerState::default();
    let mut relay = TunerState::default();
    let (mut e, mut u_dev, mut c) = (0.0, 0.0, 0.0);

    let capacity = if scenario.full_rate_logging {
        steps + 1
    } else {
        steps / per_sample + 1
    };
    let mut samples = Vec::with_capacity(capacity);

    for k in 0..=steps {
        while let Some((_, ev)) = pending.next_if(|(idx, _)| *idx == k) {
            match ev.kind {
                EventKind::ReferenceStep => reference += ev.magnitude,
                EventKind::TorqueStep => t_m += ev.magnitude,
                EventKind::OwnConductanceStep => net.g1 += ev.magnitude,
                EventKind::OwnSusceptanceStep => net.b1 += ev.magnitude,
                EventKind::TransferConductanceStep => net.g2 += ev.magnitude,
                EventKind::TransferSusceptanceStep => net.b2 += ev.magnitude,
            }
        }

        let controller_sample = k % per_sample == 0;
        let t = k as f64 * h;
        let state = PlantState::from_slice(kind, &x);
        if controller_sample || scenario.full_rate_logging {
            let out = state.outputs(params, &net)?;
            let vt_dev = out.v_t - vt0;
            if controller_sample {
                e = reference - vt_dev;
                c = if scenario.adaptive {
                    tuner_step(e, tuner, &mut relay)
                } else {
                    scenario.fixed_c
                };
                u_dev = controller_step(e, c, controller, &mut ctrl);
            }
            let input = MechanicalInput {
                t_m,
                u: eq.input.u + u_dev,
            };
            samples.push(Sample {
                t,
                reference,
                vt_dev,
                e,
                u: u_dev,
                v_f: state.v_f(),
                delta: state.delta(),
                slip: state.slip(),
                te_dev: out.t_e - te0,
                c,
            });
            observe(&SampleView {
                t,
                state: &state,
                net: &net,
                input: &input,
                outputs: &out,
            });
        }
        if k == steps {
            break;
        }

        let input = MechanicalInput {
            t_m,
            u: eq.input.u + u_dev,
        };
        x = rk4_step(&x, h, |y| {
            PlantState::from_slice(kind, y).derivatives(&input, params, &net)
        })?;
        check_bounds(&x, (k + 1) as f64 * h)?;
    }

    Ok(TimeSeries {
        spacing: if scenario.full_rate_logging {
            h
        } else {
            h * per_sample as f64
        },
        operating_point: eq,
        samples,
    })
}

fn check_bounds(x: &[f64], t: f64) -> Result<(), SimError> {
    if x.iter().any(|v| !v.is_finite() || v.abs() > UNSTABLE_BOUND) {
        return Err(SimError::Unstable { t });
    }
    let delta = x[0];
    if delta.abs() > std::f64::consts::PI {
        return Err(SimError::LossOfSynchronism { t, delta });
    }
    Ok(())
}

/// Integrates the plant with constant inputs and returns the largest
/// excursion of each state from its starting value.
pub fn open_loop_drift(
    start: &PlantState,
    input: &MechanicalInput,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
    h: f64,
    duration: f64,
) -> Result<Vec<f64>, SimError> {
    let kind = start.kind();
    let x0 = start.to_vec();
    let mut x = x0.clone();
    let mut drift = vec![0.0f64; x.len()];
    let steps = (duration / h).round() as usize;
    for k in 0..steps {
        x = rk4_step(&x, h, |y| {
            PlantState::from_slice(kind, y).derivatives(input, params, net)
        })?;
        check_bounds(&x, (k + 1) as f64 * h)?;
        for ((d, xi), x0i) in drift.iter_mut().zip(&x).zip(&x0) {
            *d = d.max((xi - x0i).abs());
        }
    }
    Ok(drift)
}
