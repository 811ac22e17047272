//! Small-signal model of the fourth-order machine and its discrete
//! transfer function from excitation input to terminal-voltage deviation.
//!
//! The Jacobian is taken by central differences around an equilibrium,
//! discretized with a zero-order hold and turned into
//! `z^-1 (b0 + b1 z^-1 + b2 z^-2 + b3 z^-3) / (1 + a1 z^-1 + ... + a4 z^-4)`.

mod expm;
mod transfer;

pub use expm::{discretize_zoh, expm, SERIES_TOL};
pub use transfer::{leverrier_faddeev, tf_from_state_space, DiscreteTF};

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::equilibrium::find_equilibrium;
use crate::error::ModelError;
use crate::integrate::rk4_step;
use crate::machine::{
    derivatives_reduced, GeneratorParams, MechanicalInput, ModelKind, PlantState, ReducedState,
};
use crate::network::{solve_network_reduced, NetworkAdmittance};
use crate::sim::SimError;

/// Relative finite-difference step for the Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;

/// Default sample period of the discrete model and the controller (s).
pub const DEFAULT_TS: f64 = 0.02;

/// `x' = A x + B u`, `y = C x + D u` with states `(delta, s, e_q_t, v_f)`,
/// input `u` and output the terminal-voltage deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousLinearModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c_row: RowDVector<f64>,
    pub d: f64,
}

/// Power-of-two step near `rel * max(1, |x|)`, so that `x +- h` and the
/// divided difference introduce no rounding in the step itself.
fn fd_step(rel: f64, x: f64) -> f64 {
    let target = rel * x.abs().max(1.0);
    2f64.powi(target.log2().floor() as i32)
}

pub fn jacobian_reduced(
    eq_state: &ReducedState,
    eq_input: &MechanicalInput,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
) -> Result<ContinuousLinearModel, ModelError> {
    jacobian_reduced_with_step(eq_state, eq_input, params, net, JACOBIAN_STEP)
}

/// [`jacobian_reduced`] with an explicit relative step.
pub fn jacobian_reduced_with_step(
    eq_state: &ReducedState,
    eq_input: &MechanicalInput,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
    rel_step: f64,
) -> Result<ContinuousLinearModel, ModelError> {
    let x0 = eq_state.to_array();
    let mut a = DMatrix::zeros(4, 4);
    let mut c_row = RowDVector::zeros(4);
    for j in 0..4 {
        let h = fd_step(rel_step, x0[j]);
        let (mut xp, mut xm) = (x0, x0);
        xp[j] += h;
        xm[j] -= h;
        let (sp, sm) = (ReducedState::from_slice(&xp), ReducedState::from_slice(&xm));
        let fp = derivatives_reduced(&sp, eq_input, params, net)?;
        let fm = derivatives_reduced(&sm, eq_input, params, net)?;
        for i in 0..4 {
            a[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        let vp = solve_network_reduced(sp.delta, sp.e_q_t, params, net)?.v_t;
        let vm = solve_network_reduced(sm.delta, sm.e_q_t, params, net)?.v_t;
        c_row[j] = (vp - vm) / (2.0 * h);
    }
    let h = fd_step(rel_step, eq_input.u);
    let up = MechanicalInput {
        u: eq_input.u + h,
        ..*eq_input
    };
    let um = MechanicalInput {
        u: eq_input.u - h,
        ..*eq_input
    };
    let fp = derivatives_reduced(eq_state, &up, params, net)?;
    let fm = derivatives_reduced(eq_state, &um, params, net)?;
    let b = DVector::from_fn(4, |i, _| (fp[i] - fm[i]) / (2.0 * h));
    Ok(ContinuousLinearModel {
        a,
        b,
        c_row,
        d: 0.0,
    })
}

/// Discrete fourth-order transfer function of the linearized model.
pub fn discrete_tf(model: &ContinuousLinearModel, ts: f64) -> DiscreteTF {
    let (a_d, b_d) = discretize_zoh(&model.a, &model.b, ts);
    tf_from_state_space(&a_d, &b_d, &model.c_row, ts)
}

/// Operating point and excitation step used to check a linear model
/// against the nonlinear fourth-order plant.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallSignalSetup {
    pub params: GeneratorParams,
    pub net: NetworkAdmittance,
    pub target_vt: f64,
    pub target_te: f64,
    /// Size of the excitation step (p.u.).
    pub amplitude: f64,
    pub duration: f64,
    /// Integration step; the transfer function's `ts` must be a multiple.
    pub h: f64,
}

impl SmallSignalSetup {
    pub fn new(params: GeneratorParams, net: NetworkAdmittance) -> Self {
        SmallSignalSetup {
            params,
            net,
            target_vt: 1.0,
            target_te: 0.8,
            amplitude: 1e-3,
            duration: 10.0,
            h: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallSignalReport {
    pub max_abs: f64,
    pub rms: f64,
    /// Largest magnitude of the nonlinear response.
    pub peak: f64,
}

impl SmallSignalReport {
    /// `max_abs / peak`, zero for a zero response.
    pub fn relative(&self) -> f64 {
        if self.peak > 0.0 {
            self.max_abs / self.peak
        } else {
            0.0
        }
    }
}

/// Compares the transfer function's step response with the nonlinear
/// terminal-voltage response at the sample instants. The nonlinear response
/// is taken relative to an unperturbed run from the same point, which
/// removes any residual drift of the equilibrium.
pub fn validate_small_signal(
    tf: &DiscreteTF,
    setup: &SmallSignalSetup,
) -> Result<SmallSignalReport, SimError> {
    let eq = find_equilibrium(
        setup.target_vt,
        setup.target_te,
        &setup.params,
        &setup.net,
        ModelKind::Reduced,
    )?;
    let per_sample = (tf.ts / setup.h).round() as usize;
    let samples = (setup.duration / tf.ts).round() as usize + 1;

    let run = |u: f64| -> Result<Vec<f64>, SimError> {
        let input = MechanicalInput { u, ..eq.input };
        let mut x = eq.state.to_vec();
        let mut out = Vec::with_capacity(samples);
        for k in 0..samples {
            let st = PlantState::from_slice(ModelKind::Reduced, &x);
            out.push(st.outputs(&setup.params, &setup.net)?.v_t);
            if k + 1 == samples {
                break;
            }
            for _ in 0..per_sample {
                x = rk4_step(&x, setup.h, |y| {
                    PlantState::from_slice(ModelKind::Reduced, y).derivatives(
                        &input,
                        &setup.params,
                        &setup.net,
                    )
                })?;
            }
        }
        Ok(out)
    };
    let base = run(eq.input.u)?;
    let stepped = run(eq.input.u + setup.amplitude)?;
    let linear = tf.filter(&vec![setup.amplitude; samples]);

    let mut max_abs = 0.0f64;
    let mut sq = 0.0;
    let mut peak = 0.0f64;
    for k in 0..samples {
        let nonlinear = stepped[k] - base[k];
        let diff = nonlinear - linear[k];
        max_abs = max_abs.max(diff.abs());
        sq += diff * diff;
        peak = peak.max(nonlinear.abs());
    }
    Ok(SmallSignalReport {
        max_abs,
        rms: (sq / samples as f64).sqrt(),
        peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::find_equilibrium;
    use crate::network::{admittances_from_line_and_load, ComplexAdmittance, LineParams};

    fn setup() -> (
        GeneratorParams,
        NetworkAdmittance,
        ReducedState,
        MechanicalInput,
    ) {
        let p = GeneratorParams::default();
        let net = admittances_from_line_and_load(
            LineParams::default().admittance(),
            ComplexAdmittance::ZERO,
        );
        let eq = find_equilibrium(1.0, 0.8, &p, &net, ModelKind::Reduced).unwrap();
        let PlantState::Reduced(x) = eq.state else {
            unreachable!()
        };
        (p, net, x, eq.input)
    }

    #[test]
    fn linear_rows_are_exact() {
        let (p, net, x, u) = setup();
        let m = jacobian_reduced(&x, &u, &p, &net).unwrap();
        assert_eq!(
            m.a.row(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, p.omega_0, 0.0, 0.0]
        );
        assert!((m.a[(3, 3)] + 1.0 / p.t_ex).abs() < 1e-8 / p.t_ex);
        assert!((m.b[3] - 1.0 / p.t_ex).abs() < 1e-8 / p.t_ex);
        assert_eq!(m.c_row[1], 0.0);
        assert_eq!(m.c_row[3], 0.0);
        assert_eq!(m.d, 0.0);
    }

    #[test]
    fn step_halving_consistency() {
        let (p, net, x, u) = setup();
        let m1 = jacobian_reduced_with_step(&x, &u, &p, &net, JACOBIAN_STEP).unwrap();
        let m2 = jacobian_reduced_with_step(&x, &u, &p, &net, JACOBIAN_STEP / 2.0).unwrap();
        assert!((&m1.a - &m2.a).norm() / m1.a.norm() <= 1e-6);
        assert!((&m1.c_row - &m2.c_row).norm() / m1.c_row.norm() <= 1e-6);
    }

    #[test]
    fn linearized_plant_is_stable() {
        let (p, net, x, u) = setup();
        let m = jacobian_reduced(&x, &u, &p, &net).unwrap();
        for l in m.a.complex_eigenvalues().iter() {
            assert!(l.re < 0.0, "{l}");
        }
    }

    #[test]
    fn fourth_order_shape() {
        let (p, net, x, u) = setup();
        let tf = discrete_tf(&jacobian_reduced(&x, &u, &p, &net).unwrap(), DEFAULT_TS);
        assert_eq!(tf.numerator.len(), 4);
        assert_eq!(tf.denominator.len(), 4);
        assert_eq!(tf.delay, 1);
        assert!(tf
            .numerator
            .iter()
            .chain(&tf.denominator)
            .all(|v| v.is_finite()));
    }

    #[test]
    fn small_signal_agreement_and_growth() {
        let (p, net, x, u) = setup();
        let tf = discrete_tf(&jacobian_reduced(&x, &u, &p, &net).unwrap(), DEFAULT_TS);
        let mut s = SmallSignalSetup::new(p, net);
        s.amplitude = 0.0;
        let zero = validate_small_signal(&tf, &s).unwrap();
        assert_eq!(zero.max_abs, 0.0);

        s.amplitude = 1e-3;
        let small = validate_small_signal(&tf, &s).unwrap();
        assert!(small.relative() <= 0.05, "{small:?}");

        s.amplitude = 1e-1;
        let large = validate_small_signal(&tf, &s).unwrap();
        assert!(large.relative() > small.relative(), "{small:?} {large:?}");
    }
}
