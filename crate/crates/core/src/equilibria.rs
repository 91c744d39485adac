//! Closed-form equilibria of the unforced system, their biological
//! viability, and the dimensionless indices `A1..A5` that partition the
//! parameter space.
//!
//! All functions take the oviposition rate `r` explicitly: with seasonal
//! forcing there are no fixed points, so callers pick the constant rate
//! (normally `r0`) at which the autonomous system is analysed.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParameters, StateVector};
use crate::stability;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    /// Total extinction.
    E1,
    /// Borer only; both parasitoids extinct.
    E2,
    /// Borer and larval parasitoid; egg parasitoid extinct.
    E3,
    /// Borer and egg parasitoid; larval parasitoid extinct.
    E4,
    /// Coexistence of all populations.
    E5,
}

impl EquilibriumLabel {
    pub const ALL: [EquilibriumLabel; 5] = [
        EquilibriumLabel::E1,
        EquilibriumLabel::E2,
        EquilibriumLabel::E3,
        EquilibriumLabel::E4,
        EquilibriumLabel::E5,
    ];

    /// Compartments that are populated (nonzero) at this equilibrium.
    fn populated(self) -> &'static [usize] {
        match self {
            EquilibriumLabel::E1 => &[],
            EquilibriumLabel::E2 => &[0, 3],
            EquilibriumLabel::E3 => &[0, 3, 4, 5],
            EquilibriumLabel::E4 => &[0, 1, 2, 3],
            EquilibriumLabel::E5 => &[0, 1, 2, 3, 4, 5],
        }
    }
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    /// The equilibrium is not biologically viable.
    NotApplicable,
}

/// One governing inequality `value >= threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

impl Condition {
    fn at_least_one(name: &str, value: f64) -> Self {
        Condition {
            name: name.to_string(),
            value,
            threshold: 1.0,
            satisfied: value >= 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub label: EquilibriumLabel,
    pub coordinates: StateVector,
    /// All coordinates nonnegative.
    pub viable: bool,
    /// Viable, but a compartment that is normally populated sits at zero.
    pub degenerate: bool,
    pub viability_conditions: Vec<Condition>,
    pub stable: Stability,
    /// Jacobian eigenvalues (empty when not viable).
    pub eigenvalues: Vec<Complex64>,
}

/// Dimensionless ratios whose crossing of 1 changes the equilibrium
/// structure, plus the auxiliary quantities `z`, `h1`, `h2` of the Hopf
/// condition. `A2..A5` and `z` are `None` when `r <= m1 + n1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessIndices {
    pub a1: f64,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub a5: Option<f64>,
    pub z: Option<f64>,
    pub h1: f64,
    pub h2: f64,
}

/// Indices evaluated without the applicability cut-off.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RawIndices {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub z: f64,
    pub h1: f64,
    pub h2: f64,
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::DegenerateParameters(what.to_string()))
    }
}

/// `a - b`, snapped to zero when the difference is at rounding level.
fn diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 1e-12 * a.abs().max(b.abs()) {
        0.0
    } else {
        d
    }
}

/// `h1`, `h2` and the positive root `z` of `u^2 + h1 u - h2 = 0`.
pub(crate) fn hopf_aux(p: &ModelParameters, r: f64) -> (f64, f64, f64) {
    let s = p.m2 + p.m3 + p.n2;
    let m = p.m3 * (p.m2 + p.n2);
    let h1 = s + m / s;
    let h2 = m * (r - p.m1 - p.n1) / s;
    let root = (h1 * h1 / 4.0 + h2).sqrt();
    // Rationalised form of -h1/2 + sqrt(h1^2/4 + h2); no cancellation.
    let z = h2 / (h1 / 2.0 + root);
    (h1, h2, z)
}

pub(crate) fn raw_indices(p: &ModelParameters, r: f64) -> Result<RawIndices> {
    require(r > 0.0, "r must be positive")?;
    require(p.m1 + p.n1 > 0.0, "m1 + n1 = 0")?;
    require(p.m4 + p.n3 > 0.0, "m4 + n3 = 0")?;
    require(p.m5 + p.n4 > 0.0, "m5 + n4 = 0")?;
    let growth = r - p.m1 - p.n1;
    let egg_cost = r * p.m3 * (p.m2 + p.n2);
    let larva_cost = r * p.m6 * (p.m4 + p.n3) * (p.m5 + p.n4);
    let (h1, h2, z) = hopf_aux(p, r);
    let a2 = p.alpha * p.gamma1 * p.n2 * p.k * growth / egg_cost;
    let a3 = p.beta * p.gamma2 * p.n1 * p.n4 * p.k * growth / larva_cost;
    let a4_den = p.alpha * p.gamma1 * p.n2 * p.m6 * (p.m4 + p.n3) * (p.m5 + p.n4);
    let a4 = p.beta * p.gamma2 * p.n1 * p.n4 * p.m3 * (p.m2 + p.n2) / a4_den;
    let a5 = p.alpha * p.gamma1 * p.n2 * z * p.k / egg_cost;
    Ok(RawIndices {
        a1: r / (p.m1 + p.n1),
        a2,
        a3,
        a4,
        a5,
        z,
        h1,
        h2,
    })
}

/// Dimensionless indices at constant rate `r`.
pub fn indices(params: &ModelParameters, r: f64) -> Result<DimensionlessIndices> {
    require(params.alpha > 0.0, "alpha = 0 (A4 undefined)")?;
    let raw = raw_indices(params, r)?;
    let applicable = r > params.m1 + params.n1;
    let gate = |v: f64| applicable.then_some(v);
    Ok(DimensionlessIndices {
        a1: raw.a1,
        a2: gate(raw.a2),
        a3: gate(raw.a3),
        a4: gate(raw.a4),
        a5: gate(raw.a5),
        z: gate(raw.z),
        h1: raw.h1,
        h2: raw.h2,
    })
}

/// Closed-form coordinates of an equilibrium at constant rate `r`.
pub fn coordinates(
    label: EquilibriumLabel,
    p: &ModelParameters,
    r: f64,
) -> Result<StateVector> {
    require(r > 0.0, "r must be positive")?;
    let egg_loss = p.m1 + p.n1;
    let borer_only_x1 = p.k / r * diff(r, egg_loss);
    let larva_out = p.m4 + p.n3;
    let para_larva_out = p.m5 + p.n4;
    let x = match label {
        EquilibriumLabel::E1 => [0.0; 6],
        EquilibriumLabel::E2 => {
            require(larva_out > 0.0, "m4 + n3 = 0")?;
            let x4 = p.k * p.n1 * diff(r, egg_loss) / (r * larva_out);
            [borer_only_x1, 0.0, 0.0, x4, 0.0, 0.0]
        }
        EquilibriumLabel::E3 => {
            require(p.beta > 0.0, "beta = 0")?;
            let host = p.m6 * para_larva_out / (p.beta * p.gamma2 * p.n4);
            let p5 = diff(
                p.n1 / para_larva_out * borer_only_x1,
                p.m6 * larva_out / (p.beta * p.gamma2 * p.n4),
            );
            let p6 = p.gamma2 * p.n4 / p.m6 * p5;
            [borer_only_x1, 0.0, 0.0, host, p5, p6]
        }
        EquilibriumLabel::E4 | EquilibriumLabel::E5 => {
            require(p.alpha > 0.0, "alpha = 0")?;
            let x1 = p.m3 * (p.m2 + p.n2) / (p.alpha * p.gamma1 * p.n2);
            let x3 = diff(r * (1.0 - x1 / p.k), egg_loss) / p.alpha;
            let x2 = p.m3 / (p.gamma1 * p.n2) * x3;
            if label == EquilibriumLabel::E4 {
                require(larva_out > 0.0, "m4 + n3 = 0")?;
                let q = p.n1 / larva_out * x1;
                [x1, x2, x3, q, 0.0, 0.0]
            } else {
                require(p.beta > 0.0, "beta = 0")?;
                let x4 = p.m6 * para_larva_out / (p.beta * p.gamma2 * p.n4);
                let x5 = diff(
                    p.n1 * x1 / para_larva_out,
                    p.m6 * larva_out / (p.beta * p.gamma2 * p.n4),
                );
                let x6 = p.gamma2 * p.n4 / p.m6 * x5;
                [x1, x2, x3, x4, x5, x6]
            }
        }
    };
    Ok(StateVector(x))
}

fn conditions(label: EquilibriumLabel, raw: Option<&RawIndices>) -> Vec<Condition> {
    let Some(raw) = raw else {
        return Vec::new();
    };
    let names: &[(&str, f64)] = match label {
        EquilibriumLabel::E1 => &[],
        EquilibriumLabel::E2 => &[("A1", raw.a1)],
        EquilibriumLabel::E3 => &[("A1", raw.a1), ("A3", raw.a3)],
        EquilibriumLabel::E4 => &[("A1", raw.a1), ("A2", raw.a2)],
        EquilibriumLabel::E5 => &[("A1", raw.a1), ("A2", raw.a2), ("A4", raw.a4)],
    };
    names
        .iter()
        .map(|(n, v)| Condition::at_least_one(n, *v))
        .collect()
}

/// Coordinates, viability and local stability of one equilibrium.
pub fn equilibrium(
    label: EquilibriumLabel,
    params: &ModelParameters,
    r: f64,
) -> Result<EquilibriumReport> {
    let coordinates = coordinates(label, params, r)?;
    let raw = raw_indices(params, r).ok();
    let viable = coordinates.is_nonnegative();
    let degenerate = viable && label.populated().iter().any(|&i| coordinates[i] == 0.0);
    let (stable, eigenvalues) = if viable {
        let local = stability::local_stability(&coordinates, params, r);
        let verdict = if local.stable {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        (verdict, local.eigenvalues.to_vec())
    } else {
        (Stability::NotApplicable, Vec::new())
    };
    Ok(EquilibriumReport {
        label,
        coordinates,
        viable,
        degenerate,
        viability_conditions: conditions(label, raw.as_ref()),
        stable,
        eigenvalues,
    })
}

/// Viability of E1..E5. Equilibria whose formulas are undefined for these
/// parameters (e.g. `alpha = 0` for E4, E5) are reported as not viable.
pub fn viability_table(params: &ModelParameters, r: f64) -> Vec<(EquilibriumLabel, bool)> {
    EquilibriumLabel::ALL
        .iter()
        .map(|&label| {
            let viable = coordinates(label, params, r)
                .map(|x| x.is_nonnegative())
                .unwrap_or(false);
            (label, viable)
        })
        .collect()
}

/// The six regions of the index space that are tabulated, each with a
/// fixed viability / stability pattern over E1..E5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableRow {
    /// `A1 < 1`.
    ExtinctionOnly,
    /// `A1 > 1, A2 < 1, A3 < 1`.
    BorerOnly,
    /// `A1 > 1, A2 < 1, A3 > 1`.
    LarvalParasitoid,
    /// `A1 > 1, A2 > 1, A5 < 1, A4 < 1`.
    EggParasitoid,
    /// `A1 > 1, A2 > 1, A5 < 1, A4 > 1`.
    CoexistenceStable,
    /// `A1 > 1, A2 > 1, A5 > 1, A4 > 1`.
    CoexistenceUnstable,
}

impl TableRow {
    pub const ALL: [TableRow; 6] = [
        TableRow::ExtinctionOnly,
        TableRow::BorerOnly,
        TableRow::LarvalParasitoid,
        TableRow::EggParasitoid,
        TableRow::CoexistenceStable,
        TableRow::CoexistenceUnstable,
    ];

    /// Tabulated `(viable, stable)` pattern for E1..E5.
    pub fn pattern(self) -> [Stability; 5] {
        use Stability::{NotApplicable as N, Stable as S, Unstable as U};
        match self {
            TableRow::ExtinctionOnly => [S, N, N, N, N],
            TableRow::BorerOnly => [U, S, N, N, N],
            TableRow::LarvalParasitoid => [U, U, S, N, N],
            TableRow::EggParasitoid => [U, U, U, S, N],
            TableRow::CoexistenceStable => [U, U, U, U, S],
            TableRow::CoexistenceUnstable => [U, U, U, U, U],
        }
    }

    /// Locate the indices in the table; `None` for untabulated regions.
    pub fn locate(ix: &DimensionlessIndices) -> Option<TableRow> {
        if ix.a1 < 1.0 {
            return Some(TableRow::ExtinctionOnly);
        }
        let (a2, a3, a4, a5) = (ix.a2?, ix.a3?, ix.a4?, ix.a5?);
        if a2 < 1.0 {
            return Some(if a3 < 1.0 {
                TableRow::BorerOnly
            } else {
                TableRow::LarvalParasitoid
            });
        }
        match (a5 < 1.0, a4 < 1.0) {
            (true, true) => Some(TableRow::EggParasitoid),
            (true, false) => Some(TableRow::CoexistenceStable),
            (false, false) => Some(TableRow::CoexistenceUnstable),
            (false, true) => None,
        }
    }
}
