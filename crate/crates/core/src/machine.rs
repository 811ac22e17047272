//! Synchronous generator dynamics in per-unit.
//!
//! The sixth-order model carries rotor angle, slip, the q-axis transient EMF,
//! both subtransient EMFs and the field voltage behind a first-order exciter.
//! The fourth-order model drops the stator transients and the damper
//! windings, keeping `(delta, s, e_q_t, v_f)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, ModelError, ValidationError};
use crate::network::{
    solve_network_full, solve_network_reduced, AlgebraicOutputs, NetworkAdmittance,
};

/// Machine constants (p.u. unless noted).
///
/// `x_q_t` is part of the usual data sheet but none of the model equations
/// reads it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorParams {
    pub x_d: f64,
    pub x_q: f64,
    pub x_d_t: f64,
    pub x_q_t: f64,
    pub x_d_st: f64,
    pub x_q_st: f64,
    /// d-axis open-circuit transient time constant (s).
    pub t_d0_t: f64,
    /// d-axis open-circuit subtransient time constant (s).
    pub t_d0_st: f64,
    /// q-axis open-circuit subtransient time constant (s).
    pub t_q0_st: f64,
    /// Exciter time constant (s).
    pub t_ex: f64,
    /// Inertia coefficient (s).
    pub inertia: f64,
    pub damping: f64,
    pub r_a: f64,
    /// Synchronous speed (rad/s).
    pub omega_0: f64,
    /// Infinite-bus voltage.
    pub v_b: f64,
}

impl Default for GeneratorParams {
    /// Typical round-rotor data. Illustrative only.
    fn default() -> Self {
        GeneratorParams {
            x_d: 1.81,
            x_q: 1.76,
            x_d_t: 0.3,
            x_q_t: 0.65,
            x_d_st: 0.23,
            x_q_st: 0.25,
            t_d0_t: 8.0,
            t_d0_st: 0.03,
            t_q0_st: 0.07,
            t_ex: 0.05,
            inertia: 7.0,
            damping: 10.0,
            r_a: 0.003,
            omega_0: 2.0 * PI * 50.0,
            v_b: 1.0,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let all = [
            self.x_d,
            self.x_q,
            self.x_d_t,
            self.x_q_t,
            self.x_d_st,
            self.x_q_st,
            self.t_d0_t,
            self.t_d0_st,
            self.t_q0_st,
            self.t_ex,
            self.inertia,
            self.damping,
            self.r_a,
            self.omega_0,
            self.v_b,
        ];
        ensure(
            all.iter().all(|v| v.is_finite()),
            "generator: all constants finite",
        )?;
        ensure(self.x_d_st > 0.0, "generator: x_d_st > 0")?;
        ensure(self.x_d_t >= self.x_d_st, "generator: x_d_t >= x_d_st")?;
        ensure(self.x_d >= self.x_d_t, "generator: x_d >= x_d_t")?;
        ensure(self.x_q_st > 0.0, "generator: x_q_st > 0")?;
        ensure(self.x_q >= self.x_q_st, "generator: x_q >= x_q_st")?;
        ensure(self.t_d0_st > 0.0, "generator: t_d0_st > 0")?;
        ensure(self.t_d0_t > self.t_d0_st, "generator: t_d0_t > t_d0_st")?;
        ensure(self.t_q0_st > 0.0, "generator: t_q0_st > 0")?;
        ensure(self.t_ex > 0.0, "generator: t_ex > 0")?;
        ensure(self.inertia > 0.0, "generator: inertia > 0")?;
        ensure(self.omega_0 > 0.0, "generator: omega_0 > 0")?;
        ensure(self.v_b > 0.0, "generator: v_b > 0")?;
        ensure(self.r_a >= 0.0, "generator: r_a >= 0")
    }
}

/// State of the sixth-order model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneratorState {
    pub delta: f64,
    pub s: f64,
    pub e_q_t: f64,
    pub e_q_st: f64,
    pub e_d_st: f64,
    pub v_f: f64,
}

impl GeneratorState {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.delta,
            self.s,
            self.e_q_t,
            self.e_q_st,
            self.e_d_st,
            self.v_f,
        ]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        GeneratorState {
            delta: x[0],
            s: x[1],
            e_q_t: x[2],
            e_q_st: x[3],
            e_d_st: x[4],
            v_f: x[5],
        }
    }
}

/// State of the fourth-order model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    pub delta: f64,
    pub s: f64,
    pub e_q_t: f64,
    pub v_f: f64,
}

impl ReducedState {
    pub fn to_array(&self) -> [f64; 4] {
        [self.delta, self.s, self.e_q_t, self.v_f]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        ReducedState {
            delta: x[0],
            s: x[1],
            e_q_t: x[2],
            v_f: x[3],
        }
    }
}

/// Mechanical torque and excitation control input.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MechanicalInput {
    pub t_m: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Full,
    Reduced,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(ModelKind::Full),
            "reduced" => Ok(ModelKind::Reduced),
            other => Err(format!("unknown model '{other}' (expected full|reduced)")),
        }
    }
}

pub fn derivatives_full(
    state: &GeneratorState,
    inp: &MechanicalInput,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
) -> Result<[f64; 6], ModelError> {
    let out = solve_network_full(state.delta, state.e_d_st, state.e_q_st, params, net)?;
    Ok(derivatives_full_with(state, inp, params, &out))
}

/// Sixth-order right-hand side for already solved algebraic outputs.
pub fn derivatives_full_with(
    state: &GeneratorState,
    inp: &MechanicalInput,
    p: &GeneratorParams,
    out: &AlgebraicOutputs,
) -> [f64; 6] {
    [
        p.omega_0 * state.s,
        (-p.damping * state.s + inp.t_m - out.t_e) / p.inertia,
        (state.v_f - (p.x_d - p.x_d_t) * out.i_d - state.e_q_t) / p.t_d0_t,
        (state.e_q_t - (p.x_d_t - p.x_d_st) * out.i_d - state.e_q_st) / p.t_d0_st,
        ((p.x_q - p.x_q_st) * out.i_q - state.e_d_st) / p.t_q0_st,
        (inp.u - state.v_f) / p.t_ex,
    ]
}

pub fn derivatives_reduced(
    state: &ReducedState,
    inp: &MechanicalInput,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
) -> Result<[f64; 4], ModelError> {
    let out = solve_network_reduced(state.delta, state.e_q_t, params, net)?;
    Ok(derivatives_reduced_with(state, inp, params, &out))
}

/// Fourth-order right-hand side for already solved algebraic outputs.
pub fn derivatives_reduced_with(
    state: &ReducedState,
    inp: &MechanicalInput,
    p: &GeneratorParams,
    out: &AlgebraicOutputs,
) -> [f64; 4] {
    [
        p.omega_0 * state.s,
        (-p.damping * state.s + inp.t_m - out.t_e) / p.inertia,
        (state.v_f - (p.x_d - p.x_d_t) * out.i_d - state.e_q_t) / p.t_d0_t,
        (inp.u - state.v_f) / p.t_ex,
    ]
}

/// State of either model, as driven by the scenario harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantState {
    Full(GeneratorState),
    Reduced(ReducedState),
}

impl PlantState {
    pub fn kind(&self) -> ModelKind {
        match self {
            PlantState::Full(_) => ModelKind::Full,
            PlantState::Reduced(_) => ModelKind::Reduced,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            PlantState::Full(x) => x.delta,
            PlantState::Reduced(x) => x.delta,
        }
    }

    pub fn slip(&self) -> f64 {
        match self {
            PlantState::Full(x) => x.s,
            PlantState::Reduced(x) => x.s,
        }
    }

    pub fn v_f(&self) -> f64 {
        match self {
            PlantState::Full(x) => x.v_f,
            PlantState::Reduced(x) => x.v_f,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            PlantState::Full(x) => x.to_array().to_vec(),
            PlantState::Reduced(x) => x.to_array().to_vec(),
        }
    }

    pub fn from_slice(kind: ModelKind, x: &[f64]) -> Self {
        match kind {
            ModelKind::Full => PlantState::Full(GeneratorState::from_slice(x)),
            ModelKind::Reduced => PlantState::Reduced(ReducedState::from_slice(x)),
        }
    }

    pub fn outputs(
        &self,
        params: &GeneratorParams,
        net: &NetworkAdmittance,
    ) -> Result<AlgebraicOutputs, ModelError> {
        match self {
            PlantState::Full(x) => solve_network_full(x.delta, x.e_d_st, x.e_q_st, params, net),
            PlantState::Reduced(x) => solve_network_reduced(x.delta, x.e_q_t, params, net),
        }
    }

    pub fn derivatives(
        &self,
        inp: &MechanicalInput,
        params: &GeneratorParams,
        net: &NetworkAdmittance,
    ) -> Result<Vec<f64>, ModelError> {
        Ok(match self {
            PlantState::Full(x) => derivatives_full(x, inp, params, net)?.to_vec(),
            PlantState::Reduced(x) => derivatives_reduced(x, inp, params, net)?.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{admittances_from_line_and_load, ComplexAdmittance, LineParams};
    use approx::assert_abs_diff_eq;

    fn default_net() -> NetworkAdmittance {
        admittances_from_line_and_load(LineParams::default().admittance(), ComplexAdmittance::ZERO)
    }

    #[test]
    fn defaults_are_valid() {
        GeneratorParams::default().validate().unwrap();
    }

    #[test]
    fn invalid_reactance_ordering_is_rejected() {
        let mut p = GeneratorParams::default();
        p.x_d_t = 2.0;
        assert_eq!(p.validate().unwrap_err().0, "generator: x_d >= x_d_t");
        let mut p = GeneratorParams::default();
        p.t_d0_st = 9.0;
        assert_eq!(p.validate().unwrap_err().0, "generator: t_d0_t > t_d0_st");
    }

    #[test]
    fn angle_rate_is_speed_times_slip() {
        let mut p = GeneratorParams::default();
        p.omega_0 = 314.159;
        let x = GeneratorState {
            delta: 0.5,
            s: 0.002,
            e_q_t: 1.0,
            e_q_st: 1.0,
            e_d_st: 0.0,
            v_f: 1.0,
        };
        let d = derivatives_full(
            &x,
            &MechanicalInput { t_m: 0.8, u: 1.0 },
            &p,
            &default_net(),
        )
        .unwrap();
        assert_abs_diff_eq!(d[0], 0.628318, epsilon = 1e-12);
    }

    #[test]
    fn exciter_rate() {
        let p = GeneratorParams::default();
        let x = GeneratorState {
            delta: 0.5,
            s: 0.0,
            e_q_t: 1.0,
            e_q_st: 1.0,
            e_d_st: 0.0,
            v_f: 1.0,
        };
        let d = derivatives_full(
            &x,
            &MechanicalInput { t_m: 0.0, u: 2.0 },
            &p,
            &default_net(),
        )
        .unwrap();
        assert_abs_diff_eq!(d[5], 20.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_swing_with_balanced_torque() {
        let mut p = GeneratorParams::default();
        p.damping = 10.0;
        let net = default_net();
        let x = ReducedState {
            delta: 0.6,
            s: 0.01,
            e_q_t: 1.1,
            v_f: 2.0,
        };
        let t_e = solve_network_reduced(x.delta, x.e_q_t, &p, &net)
            .unwrap()
            .t_e;
        let d = derivatives_reduced(&x, &MechanicalInput { t_m: t_e, u: 2.0 }, &p, &net).unwrap();
        assert_abs_diff_eq!(d[1], -0.1 / p.inertia, epsilon = 1e-15);

        let x = ReducedState { s: 0.0, ..x };
        let d = derivatives_reduced(&x, &MechanicalInput { t_m: t_e, u: 2.0 }, &p, &net).unwrap();
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn plant_state_slices_round_trip() {
        let x = PlantState::Full(GeneratorState {
            delta: 1.0,
            s: 2.0,
            e_q_t: 3.0,
            e_q_st: 4.0,
            e_d_st: 5.0,
            v_f: 6.0,
        });
        assert_eq!(PlantState::from_slice(ModelKind::Full, &x.to_vec()), x);
        let y = PlantState::Reduced(ReducedState {
            delta: 1.0,
            s: 2.0,
            e_q_t: 3.0,
            v_f: 4.0,
        });
        assert_eq!(PlantState::from_slice(ModelKind::Reduced, &y.to_vec()), y);
    }
}
