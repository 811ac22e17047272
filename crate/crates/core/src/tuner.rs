//! Two-position self-tuning of the singleton scale `c`.
//!
//! The tuner behaves like a hysteresis relay on the control error: `c` rests
//! at `c1`, jumps to `c2` once `|e|` leaves `[-alpha, alpha]`, and only falls
//! back to `c1` when `|e|` drops below the much smaller `beta`. Both
//! comparisons are strict, and the mode transition is evaluated before the
//! value is emitted.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TunerConfig {
    /// Engage threshold (p.u.).
    pub alpha: f64,
    /// Release threshold (p.u.), close to but not zero.
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for TunerConfig {
    fn default() -> Self {
        TunerConfig {
            alpha: 0.01,
            beta: 0.001,
            c1: 1.0,
            c2: 2.5,
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(self.beta > 0.0, "tuner: beta > 0")?;
        ensure(self.beta < self.alpha, "tuner: beta < alpha")?;
        ensure(self.c1 > 0.0, "tuner: c1 > 0")?;
        ensure(self.c2 > 0.0, "tuner: c2 > 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TunerMode {
    #[default]
    Nominal,
    Retuned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TunerState {
    pub mode: TunerMode,
}

impl TunerState {
    pub fn value(&self, config: &TunerConfig) -> f64 {
        match self.mode {
            TunerMode::Nominal => config.c1,
            TunerMode::Retuned => config.c2,
        }
    }
}

/// Advances the relay by one error sample and returns the scale to use.
pub fn tuner_step(e: f64, config: &TunerConfig, state: &mut TunerState) -> f64 {
    let magnitude = e.abs();
    state.mode = match state.mode {
        TunerMode::Nominal if magnitude > config.alpha => TunerMode::Retuned,
        TunerMode::Retuned if magnitude < config.beta => TunerMode::Nominal,
        mode => mode,
    };
    state.value(config)
}

/// Scale sequence produced from the nominal mode for an error sequence.
pub fn tuner_trace(errors: &[f64], config: &TunerConfig) -> Vec<f64> {
    let mut state = TunerState::default();
    errors
        .iter()
        .map(|&e| tuner_step(e, config, &mut state))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> TunerConfig {
        TunerConfig {
            alpha: 0.01,
            beta: 0.001,
            c1: 1.0,
            c2: 2.5,
        }
    }

    #[test]
    fn stays_nominal_inside_band() {
        let mut st = TunerState::default();
        assert_eq!(tuner_step(0.005, &cfg(), &mut st), 1.0);
        assert_eq!(st.mode, TunerMode::Nominal);
    }

    #[test]
    fn holds_retuned_value_until_error_nearly_vanishes() {
        let mut st = TunerState::default();
        assert_eq!(tuner_step(0.02, &cfg(), &mut st), 2.5);
        assert_eq!(st.mode, TunerMode::Retuned);
        assert_eq!(tuner_step(0.005, &cfg(), &mut st), 2.5);
        assert_eq!(tuner_step(-0.0005, &cfg(), &mut st), 1.0);
        assert_eq!(st.mode, TunerMode::Nominal);
    }

    #[test]
    fn thresholds_are_strict() {
        let mut st = TunerState::default();
        assert_eq!(tuner_step(0.01, &cfg(), &mut st), 1.0);
        assert_eq!(tuner_step(-0.0100001, &cfg(), &mut st), 2.5);
        assert_eq!(tuner_step(0.001, &cfg(), &mut st), 2.5);
        assert_eq!(tuner_step(0.000999, &cfg(), &mut st), 1.0);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(tuner_trace(&[0.0; 8], &cfg()), vec![1.0; 8]);
        assert_eq!(
            tuner_trace(&[0.0, 0.02, 0.005, 0.0005, 0.02], &cfg()),
            vec![1.0, 2.5, 2.5, 1.0, 2.5]
        );
    }

    #[test]
    fn invalid_thresholds() {
        let bad = TunerConfig {
            alpha: 0.01,
            beta: 0.02,
            ..cfg()
        };
        assert_eq!(bad.validate().unwrap_err().0, "tuner: beta < alpha");
        let bad = TunerConfig { beta: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn output_is_two_valued_and_band_holds_mode(errors in proptest::collection::vec(-0.05f64..0.05, 0..300)) {
            let c = cfg();
            let mut st = TunerState::default();
            for e in errors {
                let before = st.mode;
                let out = tuner_step(e, &c, &mut st);
                prop_assert!(out == c.c1 || out == c.c2);
                if e.abs() >= c.beta && e.abs() <= c.alpha {
                    prop_assert_eq!(before, st.mode);
                }
            }
        }
    }
}
