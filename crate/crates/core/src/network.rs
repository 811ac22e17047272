//! Connection network and the algebraic stator/network solve.
//!
//! The generator feeds a two-port: a transmission line `Y_L` towards the
//! infinite bus plus a local consumer `Y_C` at the terminals. Only the
//! generator-side current is needed,
//!
//! ```text
//! I = Y1 * V_t + Y2 * V_b,   Y1 = Y_L + Y_C,   Y2 = -Y_L
//! ```
//!
//! with phasors resolved on the rotor d-q axes, `V_t = v_d + j v_q` and
//! `V_b = v_b (sin δ + j cos δ)`. Currents are in generator convention
//! (positive out of the machine), consistent with the series-line relations
//! `v_d = v_b sin δ + r_e i_d - x_e i_q`, `v_q = v_b cos δ + r_e i_q + x_e i_d`.
//!
//! Stator and network equations are solved together as one 4x4 linear
//! system in `(i_d, i_q, v_d, v_q)`, so an open circuit (`g1 = b1 = 0`) needs
//! no special treatment.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, ModelError, ValidationError};
use crate::machine::GeneratorParams;

/// Determinant magnitude below which the stator/network system is rejected.
pub const SINGULAR_DET: f64 = 1e-12;

/// Threshold on `g1^2 + b1^2` for the closed-form voltage inversion.
pub const DEGENERATE_OWN_ADMITTANCE: f64 = 1e-12;

/// Complex admittance `g + j b` (p.u.).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexAdmittance {
    pub g: f64,
    pub b: f64,
}

impl ComplexAdmittance {
    pub const ZERO: ComplexAdmittance = ComplexAdmittance { g: 0.0, b: 0.0 };

    pub fn new(g: f64, b: f64) -> Self {
        ComplexAdmittance { g, b }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(
            self.g.is_finite() && self.b.is_finite(),
            "admittance: g and b finite",
        )
    }
}

/// Series impedance of the transmission line (p.u.).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineParams {
    pub r_e: f64,
    pub x_e: f64,
}

impl Default for LineParams {
    fn default() -> Self {
        LineParams {
            r_e: 0.02,
            x_e: 0.4,
        }
    }
}

impl LineParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(
            self.r_e.is_finite() && self.x_e.is_finite(),
            "line: r_e and x_e finite",
        )?;
        ensure(self.r_e >= 0.0, "line: r_e >= 0")?;
        ensure(
            self.r_e * self.r_e + self.x_e * self.x_e > 0.0,
            "line: r_e^2 + x_e^2 > 0",
        )
    }

    /// `1 / (r_e + j x_e)`.
    pub fn admittance(&self) -> ComplexAdmittance {
        let mag2 = self.r_e * self.r_e + self.x_e * self.x_e;
        ComplexAdmittance {
            g: self.r_e / mag2,
            b: -self.x_e / mag2,
        }
    }
}

/// Own (`g1 + j b1`) and transfer (`g2 + j b2`) admittances of the
/// connection two-port, seen from the generator terminals.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkAdmittance {
    pub g1: f64,
    pub b1: f64,
    pub g2: f64,
    pub b2: f64,
}

impl NetworkAdmittance {
    pub const OPEN: NetworkAdmittance = NetworkAdmittance {
        g1: 0.0,
        b1: 0.0,
        g2: 0.0,
        b2: 0.0,
    };

    /// True when the infinite bus does not reach the machine at all.
    pub fn is_decoupled_from_bus(&self) -> bool {
        self.g2 == 0.0 && self.b2 == 0.0
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(
            [self.g1, self.b1, self.g2, self.b2]
                .iter()
                .all(|v| v.is_finite()),
            "network: admittances finite",
        )
    }
}

/// Builds the two-port admittances from a line and a local consumer:
/// `Y1 = Y_L + Y_C`, `Y2 = -Y_L`.
pub fn admittances_from_line_and_load(
    y_line: ComplexAdmittance,
    y_load: ComplexAdmittance,
) -> NetworkAdmittance {
    NetworkAdmittance {
        g1: y_line.g + y_load.g,
        b1: y_line.b + y_load.b,
        g2: -y_line.g,
        b2: -y_line.b,
    }
}

/// Currents, voltages, torque and terminal voltage produced by the
/// algebraic solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraicOutputs {
    pub i_d: f64,
    pub i_q: f64,
    pub v_d: f64,
    pub v_q: f64,
    pub t_e: f64,
    pub v_t: f64,
}

/// Network currents for given terminal voltages.
pub fn network_currents(
    v_d: f64,
    v_q: f64,
    delta: f64,
    net: &NetworkAdmittance,
    v_b: f64,
) -> (f64, f64) {
    let (sin, cos) = delta.sin_cos();
    let i_d = net.g1 * v_d - net.b1 * v_q + net.g2 * v_b * sin - net.b2 * v_b * cos;
    let i_q = net.g1 * v_q + net.b1 * v_d + net.g2 * v_b * cos + net.b2 * v_b * sin;
    (i_d, i_q)
}

/// Terminal voltages that make the network carry `(i_d, i_q)`; the closed-form
/// inverse of [`network_currents`].
pub fn invert_network(
    i_d: f64,
    i_q: f64,
    delta: f64,
    net: &NetworkAdmittance,
    v_b: f64,
) -> Result<(f64, f64), ModelError> {
    let NetworkAdmittance { g1, b1, g2, b2 } = *net;
    let magnitude = g1 * g1 + b1 * b1;
    if magnitude <= DEGENERATE_OWN_ADMITTANCE {
        return Err(ModelError::DegenerateOwnAdmittance { magnitude });
    }
    let (sin, cos) = delta.sin_cos();
    let direct = g1 * g2 + b1 * b2;
    let cross = b1 * g2 - b2 * g1;
    let v_d = (i_d * g1 + i_q * b1 - direct * v_b * sin - cross * v_b * cos) / magnitude;
    let v_q = (i_q * g1 - i_d * b1 + cross * v_b * sin - direct * v_b * cos) / magnitude;
    Ok((v_d, v_q))
}

/// Stator behind an internal EMF: `v_d + r_a i_d - x_q_eff i_q = e_d` and
/// `v_q + r_a i_q + x_d_eff i_d = e_q`.
#[derive(Debug, Clone, Copy)]
struct Stator {
    r_a: f64,
    x_d_eff: f64,
    x_q_eff: f64,
    e_d: f64,
    e_q: f64,
}

impl Stator {
    fn full(params: &GeneratorParams, e_d_st: f64, e_q_st: f64) -> Self {
        Stator {
            r_a: params.r_a,
            x_d_eff: params.x_d_st,
            x_q_eff: params.x_q_st,
            e_d: e_d_st,
            e_q: e_q_st,
        }
    }

    fn reduced(params: &GeneratorParams, e_q_t: f64) -> Self {
        Stator {
            r_a: params.r_a,
            x_d_eff: params.x_d_t,
            x_q_eff: params.x_q,
            e_d: 0.0,
            e_q: e_q_t,
        }
    }

    /// Solves for `(i_d, i_q, v_d, v_q)`.
    fn solve(&self, delta: f64, v_b: f64, net: &NetworkAdmittance) -> Result<[f64; 4], ModelError> {
        let (sin, cos) = delta.sin_cos();
        #[rustfmt::skip]
        let a = Matrix4::new(
            self.r_a,     -self.x_q_eff, 1.0,      0.0,
            self.x_d_eff,  self.r_a,     0.0,      1.0,
            1.0,           0.0,         -net.g1,   net.b1,
            0.0,           1.0,         -net.b1,  -net.g1,
        );
        let rhs = Vector4::new(
            self.e_d,
            self.e_q,
            net.g2 * v_b * sin - net.b2 * v_b * cos,
            net.g2 * v_b * cos + net.b2 * v_b * sin,
        );
        let lu = a.lu();
        let det = lu.determinant();
        if det.is_nan() || det.abs() < SINGULAR_DET {
            return Err(ModelError::SingularNetwork { det });
        }
        let x = lu.solve(&rhs).ok_or(ModelError::SingularNetwork { det })?;
        Ok([x[0], x[1], x[2], x[3]])
    }

    fn residuals(
        &self,
        delta: f64,
        v_b: f64,
        net: &NetworkAdmittance,
        out: &AlgebraicOutputs,
    ) -> [f64; 4] {
        let (i_d_net, i_q_net) = network_currents(out.v_d, out.v_q, delta, net, v_b);
        [
            out.v_d + self.r_a * out.i_d - self.x_q_eff * out.i_q - self.e_d,
            out.v_q + self.r_a * out.i_q + self.x_d_eff * out.i_d - self.e_q,
            out.i_d - i_d_net,
            out.i_q - i_q_net,
        ]
    }
}

/// Algebraic solve for the sixth-order model: subtransient stator equations
/// plus the network, electric torque from the subtransient EMFs.
pub fn solve_network_full(
    delta: f64,
    e_d_st: f64,
    e_q_st: f64,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
) -> Result<AlgebraicOutputs, ModelError> {
    let stator = Stator::full(params, e_d_st, e_q_st);
    let [i_d, i_q, v_d, v_q] = stator.solve(delta, params.v_b, net)?;
    let t_e = e_d_st * i_d + e_q_st * i_q - (params.x_d_st - params.x_q_st) * i_d * i_q;
    Ok(AlgebraicOutputs {
        i_d,
        i_q,
        v_d,
        v_q,
        t_e,
        v_t: v_d.hypot(v_q),
    })
}

/// Algebraic solve for the fourth-order model: transient stator equations
/// (no d-axis EMF) plus the network.
pub fn solve_network_reduced(
    delta: f64,
    e_q_t: f64,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
) -> Result<AlgebraicOutputs, ModelError> {
    let stator = Stator::reduced(params, e_q_t);
    let [i_d, i_q, v_d, v_q] = stator.solve(delta, params.v_b, net)?;
    let t_e = e_q_t * i_q - (params.x_d_t - params.x_q) * i_d * i_q;
    Ok(AlgebraicOutputs {
        i_d,
        i_q,
        v_d,
        v_q,
        t_e,
        v_t: v_d.hypot(v_q),
    })
}

/// Residuals of the two subtransient stator equations and the two network
/// equations at a solved point.
pub fn residuals_full(
    delta: f64,
    e_d_st: f64,
    e_q_st: f64,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
    out: &AlgebraicOutputs,
) -> [f64; 4] {
    Stator::full(params, e_d_st, e_q_st).residuals(delta, params.v_b, net, out)
}

/// Residuals of the two transient stator equations and the two network
/// equations at a solved point.
pub fn residuals_reduced(
    delta: f64,
    e_q_t: f64,
    params: &GeneratorParams,
    net: &NetworkAdmittance,
    out: &AlgebraicOutputs,
) -> [f64; 4] {
    Stator::reduced(params, e_q_t).residuals(delta, params.v_b, net, out)
}
