//! Steady operating points.
//!
//! At equilibrium the slip is zero, the exciter sits at `v_f = u` and the
//! turbine torque balances the electric torque. The remaining unknowns are
//! found by damped Newton on the flux-decay equations plus the two targets
//! (terminal voltage and electric torque).

use nalgebra::{DMatrix, DVector};

use crate::error::ModelError;
use crate::machine::{
    derivatives_full, derivatives_reduced, GeneratorParams, GeneratorState, MechanicalInput,
    ModelKind, PlantState, ReducedState,
};
use crate::network::{
    solve_network_full, solve_network_reduced, AlgebraicOutputs, NetworkAdmittance,
};

pub const MAX_ITERATIONS: usize = 100;
pub const MAX_HALVINGS: usize = 8;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const FD_STEP: f64 = 1e-6;
/// Largest state derivative accepted at a returned equilibrium.
pub const DERIVATIVE_TOL: f64 = 1e-8;

const INITIAL_DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub state: PlantState,
    pub input: MechanicalInput,
    pub outputs: AlgebraicOutputs,
}

/// Solves `f(x) = 0` by Newton's method with a central-difference Jacobian
/// and step halving. A step is accepted once it reduces the residual
/// infinity-norm; after `MAX_HALVINGS` halvings the last trial is taken.
pub fn damped_newton<F>(x0: DVector<f64>, mut f: F) -> Result<DVector<f64>, ModelError>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>, ModelError>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut norm = r.amax();
    for iteration in 0..MAX_ITERATIONS {
        if norm <= RESIDUAL_TOL {
            return Ok(x);
        }
        let n = x.len();
        let mut jac = DMatrix::zeros(r.len(), n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += FD_STEP;
            xm[j] -= FD_STEP;
            let col = (f(&xp)? - f(&xm)?) / (2.0 * FD_STEP);
            jac.set_column(j, &col);
        }
        let step = jac.lu().solve(&(-&r)).ok_or(ModelError::SingularJacobian)?;
        if !step.iter().all(|v| v.is_finite()) {
            return Err(ModelError::SingularJacobian);
        }

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &x + &step * scale;
            match f(&trial) {
                Ok(rt) if rt.amax() < norm => {
                    accepted = Some((trial, rt));
                    break;
                }
                Ok(rt) => accepted = Some((trial, rt)),
                Err(_) => {}
            }
            scale *= 0.5;
        }
        let Some((xn, rn)) = accepted else {
            return Err(ModelError::NoConvergence {
                iterations: iteration + 1,
                residual: norm,
            });
        };
        x = xn;
        r = rn;
        norm = r.amax();
        if !norm.is_finite() {
            return Err(ModelError::NoConvergence {
                iterations: iteration + 1,
                residual: norm,
            });
        }
    }
    if norm <= RESIDUAL_TOL {
        Ok(x)
    } else {
        Err(ModelError::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: norm,
        })
    }
}

/// Finds the steady state delivering `target_vt` at the terminals and
/// `target_te` electric torque.
///
/// When the bus is not connected (`g2 = b2 = 0` or `v_b = 0`) the rotor angle
/// does not enter the network solve; it is pinned to zero and the torque is
/// whatever the local load draws, so the torque target must match it.
pub fn find_equilibrium(
    target_vt: f64,
    target_te: f64,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
    model: ModelKind,
) -> Result<Equilibrium, ModelError> {
    if !(target_vt > 0.0 && target_vt.is_finite()) {
        return Err(ModelError::InvalidTarget(format!(
            "terminal voltage {target_vt} must be > 0"
        )));
    }
    if !target_te.is_finite() {
        return Err(ModelError::InvalidTarget(
            "electric torque must be finite".into(),
        ));
    }
    let angle_free = net.is_decoupled_from_bus() || params.v_b == 0.0;

    let eq = match model {
        ModelKind::Full => full_equilibrium(target_vt, target_te, params, net, angle_free)?,
        ModelKind::Reduced => reduced_equilibrium(target_vt, target_te, params, net, angle_free)?,
    };

    if (eq.outputs.v_t - target_vt).abs() > DERIVATIVE_TOL
        || (eq.outputs.t_e - target_te).abs() > DERIVATIVE_TOL
    {
        let residual = (eq.outputs.v_t - target_vt)
            .abs()
            .max((eq.outputs.t_e - target_te).abs());
        return Err(ModelError::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual,
        });
    }
    let worst = max_derivative(&eq, params, net)?;
    if worst > DERIVATIVE_TOL {
        return Err(ModelError::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: worst,
        });
    }
    Ok(eq)
}

/// Largest absolute state derivative at the point.
pub fn max_derivative(
    eq: &Equilibrium,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
) -> Result<f64, ModelError> {
    let d = eq.state.derivatives(&eq.input, params, net)?;
    Ok(d.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn full_equilibrium(
    target_vt: f64,
    target_te: f64,
    p: &GeneratorParams,
    net: &NetworkAdmittance,
    angle_free: bool,
) -> Result<Equilibrium, ModelError> {
    // unknowns: [delta,] e_q_t, e_q_st, e_d_st, v_f
    let unpack = |x: &DVector<f64>| -> GeneratorState {
        let (delta, rest) = if angle_free {
            (0.0, x.as_slice())
        } else {
            (x[0], &x.as_slice()[1..])
        };
        GeneratorState {
            delta,
            s: 0.0,
            e_q_t: rest[0],
            e_q_st: rest[1],
            e_d_st: rest[2],
            v_f: rest[3],
        }
    };
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>, ModelError> {
        let st = unpack(x);
        let out = solve_network_full(st.delta, st.e_d_st, st.e_q_st, p, net)?;
        let mut r = vec![
            st.v_f - (p.x_d - p.x_d_t) * out.i_d - st.e_q_t,
            st.e_q_t - (p.x_d_t - p.x_d_st) * out.i_d - st.e_q_st,
            (p.x_q - p.x_q_st) * out.i_q - st.e_d_st,
            out.v_t - target_vt,
        ];
        if !angle_free {
            r.push(out.t_e - target_te);
        }
        Ok(DVector::from_vec(r))
    };
    let mut guess = vec![target_vt, target_vt, target_vt, target_vt];
    if !angle_free {
        guess.insert(0, INITIAL_DELTA);
    }
    // the d-axis subtransient EMF starts from zero rather than target_vt
    let ed_index = if angle_free { 2 } else { 3 };
    guess[ed_index] = 0.0;
    let x = damped_newton(DVector::from_vec(guess), residual)?;
    let state = unpack(&x);
    let outputs = solve_network_full(state.delta, state.e_d_st, state.e_q_st, p, net)?;
    let input = MechanicalInput {
        t_m: outputs.t_e + p.damping * state.s,
        u: state.v_f,
    };
    debug_assert!(derivatives_full(&state, &input, p, net).is_ok());
    Ok(Equilibrium {
        state: PlantState::Full(state),
        input,
        outputs,
    })
}

fn reduced_equilibrium(
    target_vt: f64,
    target_te: f64,
    p: &GeneratorParams,
    net: &NetworkAdmittance,
    angle_free: bool,
) -> Result<Equilibrium, ModelError> {
    // unknowns: [delta,] e_q_t, v_f
    let unpack = |x: &DVector<f64>| -> ReducedState {
        let (delta, rest) = if angle_free {
            (0.0, x.as_slice())
        } else {
            (x[0], &x.as_slice()[1..])
        };
        ReducedState {
            delta,
            s: 0.0,
            e_q_t: rest[0],
            v_f: rest[1],
        }
    };
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>, ModelError> {
        let st = unpack(x);
        let out = solve_network_reduced(st.delta, st.e_q_t, p, net)?;
        let mut r = vec![
            st.v_f - (p.x_d - p.x_d_t) * out.i_d - st.e_q_t,
            out.v_t - target_vt,
        ];
        if !angle_free {
            r.push(out.t_e - target_te);
        }
        Ok(DVector::from_vec(r))
    };
    let mut guess = vec![target_vt, target_vt];
    if !angle_free {
        guess.insert(0, INITIAL_DELTA);
    }
    let x = damped_newton(DVector::from_vec(guess), residual)?;
    let state = unpack(&x);
    let outputs = solve_network_reduced(state.delta, state.e_q_t, p, net)?;
    let input = MechanicalInput {
        t_m: outputs.t_e + p.damping * state.s,
        u: state.v_f,
    };
    debug_assert!(derivatives_reduced(&state, &input, p, net).is_ok());
    Ok(Equilibrium {
        state: PlantState::Reduced(state),
        input,
        outputs,
    })
}
