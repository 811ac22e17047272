//! PI fuzzy controller with integration on the controller output.
//!
//! Error and error difference are scaled onto `[-1, 1]`, fuzzified by five
//! triangular sets each, combined through a 5x5 rule table (AND = min,
//! aggregation = max) onto five output singletons and defuzzified by the
//! weighted average. The singleton positions are multiplied by the tunable
//! scale `c`. The resulting increment is accumulated into the output, which
//! is clamped to `[u_min, u_max]`; the clamp on the stored value is also the
//! anti-windup.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{ensure, ValidationError};

pub const SETS: usize = 5;

pub type Memberships = [f64; SETS];

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FuzzyError {
    #[error("no rule fired (all singleton activations are zero)")]
    ZeroActivation,
}

/// Five triangular sets on `[-1, 1]`; each set's feet are the neighbouring
/// peaks and the end sets are shouldered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TriangularPartition {
    pub peaks: [f64; SETS],
}

impl Default for TriangularPartition {
    fn default() -> Self {
        TriangularPartition {
            peaks: [-1.0, -0.5, 0.0, 0.5, 1.0],
        }
    }
}

impl TriangularPartition {
    pub fn validate(&self, what: &str) -> Result<(), ValidationError> {
        ensure(
            self.peaks[0] == -1.0 && self.peaks[SETS - 1] == 1.0,
            &format!("{what}: first peak = -1 and last peak = +1"),
        )?;
        ensure(
            self.peaks.windows(2).all(|w| w[0] < w[1]),
            &format!("{what}: peaks strictly increasing"),
        )
    }
}

/// Membership degrees of `x` (clamped to `[-1, 1]`).
///
/// The two active degrees are computed from their own distances rather than
/// as `1 - mu`, which keeps mirrored partitions exactly mirrored.
pub fn fuzzify(x: f64, partition: &TriangularPartition) -> Memberships {
    let p = &partition.peaks;
    let x = x.clamp(-1.0, 1.0);
    let mut mu = [0.0; SETS];
    let i = (0..SETS - 1).find(|&i| x <= p[i + 1]).unwrap_or(SETS - 2);
    let width = p[i + 1] - p[i];
    mu[i] = (p[i + 1] - x) / width;
    mu[i + 1] = (x - p[i]) / width;
    mu
}

/// Rule consequents: `cells[i][j]` indexes the output singleton fired by
/// error set `i` and error-difference set `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleTable {
    pub cells: [[usize; SETS]; SETS],
}

impl Default for RuleTable {
    /// The usual anti-diagonal PI table, NB..PB.
    fn default() -> Self {
        let mut cells = [[0; SETS]; SETS];
        for (i, row) in cells.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (((i + j) as isize - 4).clamp(-2, 2) + 2) as usize;
            }
        }
        RuleTable { cells }
    }
}

impl RuleTable {
    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(
            self.cells.iter().flatten().all(|&k| k < SETS),
            "rules: every cell indexes a singleton 0..4",
        )?;
        let odd = (0..SETS).all(|i| {
            (0..SETS).all(|j| self.cells[i][j] == SETS - 1 - self.cells[SETS - 1 - i][SETS - 1 - j])
        });
        ensure(odd, "rules: table anti-symmetric about its centre")
    }
}

/// Max–min inference: activation of singleton `k` is the strongest
/// `min(mu_e[i], mu_de[j])` over the cells pointing at `k`.
pub fn infer(mu_e: &Memberships, mu_de: &Memberships, rules: &RuleTable) -> Memberships {
    let mut act = [0.0f64; SETS];
    for (i, row) in rules.cells.iter().enumerate() {
        if mu_e[i] == 0.0 {
            continue;
        }
        for (j, &k) in row.iter().enumerate() {
            act[k] = act[k].max(mu_e[i].min(mu_de[j]));
        }
    }
    act
}

/// Weighted average of the singletons scaled by `c`, i.e.
/// `c * sum(w_k s_k) / sum(w_k)`.
///
/// Sums run over mirrored pairs `(k, 4 - k)` so that mirrored activations on
/// odd-symmetric singletons give exactly the negated result.
pub fn defuzzify(
    activations: &Memberships,
    singletons: &[f64; SETS],
    c: f64,
) -> Result<f64, FuzzyError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..SETS / 2 {
        let m = SETS - 1 - k;
        num += activations[k] * singletons[k] + activations[m] * singletons[m];
        den += activations[k] + activations[m];
    }
    let mid = SETS / 2;
    num += activations[mid] * singletons[mid];
    den += activations[mid];
    if den <= 0.0 {
        return Err(FuzzyError::ZeroActivation);
    }
    Ok(c * (num / den))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuzzyPIConfig {
    /// Error gain (1/p.u.).
    pub k_e: f64,
    /// Gain on the per-sample error difference; absorbs the sample period.
    pub k_de: f64,
    /// Output increment gain (p.u.).
    pub k_u: f64,
    pub e_partition: TriangularPartition,
    pub de_partition: TriangularPartition,
    pub rules: RuleTable,
    pub base_singletons: [f64; SETS],
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for FuzzyPIConfig {
    fn default() -> Self {
        FuzzyPIConfig {
            k_e: 10.0,
            k_de: 200.0,
            k_u: 0.05,
            e_partition: TriangularPartition::default(),
            de_partition: TriangularPartition::default(),
            rules: RuleTable::default(),
            base_singletons: [-1.0, -0.5, 0.0, 0.5, 1.0],
            u_min: -5.0,
            u_max: 5.0,
        }
    }
}

impl FuzzyPIConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(self.k_e > 0.0, "controller: k_e > 0")?;
        ensure(self.k_de > 0.0, "controller: k_de > 0")?;
        ensure(self.k_u > 0.0, "controller: k_u > 0")?;
        self.e_partition.validate("controller: e_partition")?;
        self.de_partition.validate("controller: de_partition")?;
        self.rules.validate()?;
        let s = &self.base_singletons;
        ensure(
            s.iter().all(|v| v.is_finite()),
            "controller: base_singletons finite",
        )?;
        ensure(
            s.windows(2).all(|w| w[0] <= w[1]),
            "controller: base_singletons ordered",
        )?;
        ensure(
            (0..SETS).all(|k| s[k] == -s[SETS - 1 - k]),
            "controller: base_singletons odd-symmetric",
        )?;
        ensure(
            s.iter().all(|v| (-1.0..=1.0).contains(v)),
            "controller: base_singletons within [-1, 1]",
        )?;
        ensure(self.u_min < self.u_max, "controller: u_min < u_max")
    }

    /// Output increment for already normalized inputs, before accumulation:
    /// `c * (k_u * defuzzify(.., 1))`.
    pub fn increment(&self, e_norm: f64, de_norm: f64, c: f64) -> Result<f64, FuzzyError> {
        let mu_e = fuzzify(e_norm, &self.e_partition);
        let mu_de = fuzzify(de_norm, &self.de_partition);
        let act = infer(&mu_e, &mu_de, &self.rules);
        let unit = defuzzify(&act, &self.base_singletons, 1.0)?;
        Ok(c * (self.k_u * unit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    pub e_prev: f64,
    pub u: f64,
    pub initialized: bool,
}

impl ControllerState {
    pub fn reset(&mut self) {
        *self = ControllerState::default();
    }
}

/// One controller sample. Returns the new (clamped) output.
pub fn controller_step(e: f64, c: f64, config: &FuzzyPIConfig, state: &mut ControllerState) -> f64 {
    let de = if state.initialized {
        e - state.e_prev
    } else {
        0.0
    };
    let e_norm = (config.k_e * e).clamp(-1.0, 1.0);
    let de_norm = (config.k_de * de).clamp(-1.0, 1.0);
    // partitions cover [-1, 1], so some rule always fires
    let du = config
        .increment(e_norm, de_norm, c)
        .expect("partition of unity");
    state.u = (state.u + du).clamp(config.u_min, config.u_max);
    state.e_prev = e;
    state.initialized = true;
    state.u
}
