//! Local stability of the equilibria through the block-lower-triangular
//! Jacobian, Hopf detection in the egg parasitism rate `alpha`, and the
//! quadratic-form check behind the global stability argument for E5.
//!
//! The Jacobian has the shape
//!
//! ```text
//! | A 0 |
//! | C B |
//! ```
//!
//! with 3x3 diagonal blocks, so its spectrum is the union of the roots of
//! two monic cubics, one per block. Roots come from the closed-form
//! solver in [`crate::linalg`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    self, hopf_aux, DimensionlessIndices, EquilibriumLabel, EquilibriumReport, TableRow,
};
use crate::error::{Error, Result};
use crate::linalg::{cubic_roots, jacobi_eigenvalues};
use crate::model::{ModelParameters, StateVector};

/// Positions allowed to be nonzero, row-major.
const PATTERN: [(usize, usize); 15] = [
    (0, 0),
    (0, 2),
    (1, 0),
    (1, 1),
    (1, 2),
    (2, 1),
    (2, 2),
    (3, 0),
    (3, 3),
    (3, 5),
    (4, 3),
    (4, 4),
    (4, 5),
    (5, 4),
    (5, 5),
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianMatrix(pub [[f64; 6]; 6]);

impl JacobianMatrix {
    /// Build from raw entries, zeroing everything outside the sparsity pattern.
    pub fn from_entries(m: [[f64; 6]; 6]) -> Self {
        let mut out = [[0.0; 6]; 6];
        for &(i, j) in PATTERN.iter() {
            out[i][j] = m[i][j];
        }
        JacobianMatrix(out)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// Upper-left block (egg subsystem x1, x2, x3).
    pub fn block_a(&self) -> [[f64; 3]; 3] {
        let mut b = [[0.0; 3]; 3];
        for (i, row) in b.iter_mut().enumerate() {
            row.copy_from_slice(&self.0[i][0..3]);
        }
        b
    }

    /// Lower-right block (larval subsystem x4, x5, x6).
    pub fn block_b(&self) -> [[f64; 3]; 3] {
        let mut b = [[0.0; 3]; 3];
        for (i, row) in b.iter_mut().enumerate() {
            row.copy_from_slice(&self.0[i + 3][3..6]);
        }
        b
    }

    /// True if every entry outside the sparsity pattern is exactly zero.
    pub fn has_block_pattern(&self) -> bool {
        (0..6).all(|i| (0..6).all(|j| PATTERN.contains(&(i, j)) || self.0[i][j] == 0.0))
    }

    /// Spectrum via the two block cubics.
    pub fn eigenvalues(&self) -> [Complex64; 6] {
        let (a, b) = characteristic_blocks(self);
        let ra = a.roots();
        let rb = b.roots();
        [ra[0], ra[1], ra[2], rb[0], rb[1], rb[2]]
    }
}

/// Linearisation of the right-hand side at `x` with oviposition rate `r`.
pub fn jacobian(x: &StateVector, p: &ModelParameters, r: f64) -> JacobianMatrix {
    let [x1, _x2, x3, x4, _x5, x6] = x.0;
    let mut m = [[0.0; 6]; 6];
    m[0][0] = r - 2.0 * r * x1 / p.k - p.m1 - p.n1 - p.alpha * x3;
    m[0][2] = -p.alpha * x1;
    m[1][0] = p.alpha * x3;
    m[1][1] = -p.m2 - p.n2;
    m[1][2] = p.alpha * x1;
    m[2][1] = p.gamma1 * p.n2;
    m[2][2] = -p.m3;
    m[3][0] = p.n1;
    m[3][3] = -p.m4 - p.n3 - p.beta * x6;
    m[3][5] = -p.beta * x4;
    m[4][3] = p.beta * x6;
    m[4][4] = -p.m5 - p.n4;
    m[4][5] = p.beta * x4;
    m[5][4] = p.gamma2 * p.n4;
    m[5][5] = -p.m6;
    JacobianMatrix(m)
}

/// Coefficients of the monic cubic `l^3 + p1 l^2 + p2 l + p3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl CubicCoefficients {
    /// `det(l I - M)` for a 3x3 block.
    pub fn of_block(m: &[[f64; 3]; 3]) -> Self {
        let trace = m[0][0] + m[1][1] + m[2][2];
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2]
            - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        CubicCoefficients {
            p1: -trace,
            p2: minors,
            p3: -det,
        }
    }

    pub fn roots(&self) -> [Complex64; 3] {
        cubic_roots(self.p1, self.p2, self.p3)
    }

    /// `p1 p2 - p3`; its sign decides stability once `p1, p3 > 0`.
    pub fn hurwitz_determinant(&self) -> f64 {
        self.p1 * self.p2 - self.p3
    }
}

/// Characteristic cubics of the two diagonal blocks.
pub fn characteristic_blocks(j: &JacobianMatrix) -> (CubicCoefficients, CubicCoefficients) {
    (
        CubicCoefficients::of_block(&j.block_a()),
        CubicCoefficients::of_block(&j.block_b()),
    )
}

/// Routh-Hurwitz for a monic cubic: all roots in the open left half-plane
/// iff `p1 > 0`, `p3 > 0` and `p1 p2 > p3`.
pub fn routh_hurwitz_cubic(c: &CubicCoefficients) -> bool {
    c.p1 > 0.0 && c.p3 > 0.0 && c.hurwitz_determinant() > 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalStability {
    pub jacobian: JacobianMatrix,
    pub block_a: CubicCoefficients,
    pub block_b: CubicCoefficients,
    pub eigenvalues: [Complex64; 6],
    pub stable: bool,
}

/// Routh-Hurwitz verdict at an arbitrary state, with the spectrum.
pub fn local_stability(x: &StateVector, p: &ModelParameters, r: f64) -> LocalStability {
    let jacobian = jacobian(x, p, r);
    let (block_a, block_b) = characteristic_blocks(&jacobian);
    let stable = routh_hurwitz_cubic(&block_a) && routh_hurwitz_cubic(&block_b);
    LocalStability {
        jacobian,
        block_a,
        block_b,
        eigenvalues: jacobian.eigenvalues(),
        stable,
    }
}

/// Viability and stability of all five equilibria at rate `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityTable {
    pub r: f64,
    pub indices: Option<DimensionlessIndices>,
    /// Tabulated region the indices fall into, if any.
    pub table_row: Option<TableRow>,
    pub equilibria: Vec<EquilibriumReport>,
}

impl StabilityTable {
    pub fn get(&self, label: EquilibriumLabel) -> Option<&EquilibriumReport> {
        self.equilibria.iter().find(|e| e.label == label)
    }

    /// Verdict pattern over E1..E5; undefined equilibria count as not viable.
    pub fn pattern(&self) -> [equilibria::Stability; 5] {
        EquilibriumLabel::ALL.map(|l| {
            self.get(l)
                .map(|e| e.stable)
                .unwrap_or(equilibria::Stability::NotApplicable)
        })
    }
}

/// Full viability / stability row for the unforced system at rate `r`.
pub fn classify(params: &ModelParameters, r: f64) -> StabilityTable {
    let indices = equilibria::indices(params, r).ok();
    let equilibria = EquilibriumLabel::ALL
        .iter()
        .filter_map(|&l| equilibria::equilibrium(l, params, r).ok())
        .collect();
    StabilityTable {
        r,
        indices,
        table_row: indices.as_ref().and_then(TableRow::locate),
        equilibria,
    }
}

/// Coefficients `c1, c2, c3` of the egg-block cubic at E4/E5 as functions
/// of `alpha`.
pub fn egg_block_coefficients(p: &ModelParameters, r: f64, alpha: f64) -> CubicCoefficients {
    let s = p.m2 + p.m3 + p.n2;
    let m = p.m3 * (p.m2 + p.n2);
    let x1 = m / (alpha * p.gamma1 * p.n2);
    let u = r * x1 / p.k;
    CubicCoefficients {
        p1: s + u,
        p2: s * u,
        // alpha m3 (m2 + n2) x3*, with alpha x3* = r (1 - x1/K) - m1 - n1
        p3: m * (r - u - p.m1 - p.n1),
    }
}

/// `Delta(alpha) = c1 c2 - c3` for the egg-block cubic.
pub fn hopf_delta(p: &ModelParameters, r: f64, alpha: f64) -> f64 {
    egg_block_coefficients(p, r, alpha).hurwitz_determinant()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub alpha_c: f64,
    pub z: f64,
    pub h1: f64,
    pub h2: f64,
    /// Egg-block cubic at `alpha_c`.
    pub coefficients: CubicCoefficients,
    pub delta_at_alpha_c: f64,
    /// `|Delta(alpha_c)| / (c1 c2)`.
    pub delta_relative: f64,
    pub b1: f64,
    pub b2: f64,
    /// `-B1/alpha_c^2 - 2 B2/alpha_c^3`.
    pub d_delta_analytic: f64,
    /// Centred difference of `Delta` with step `alpha_c * 1e-6`.
    pub d_delta_finite_difference: f64,
    /// `c1 > 0`, `c3 > 0`, `Delta(alpha_c) = 0`.
    pub condition_a: bool,
    /// Nonzero derivative, both estimates agreeing in sign.
    pub condition_b: bool,
    pub bifurcation_confirmed: bool,
}

/// Critical egg-parasitism rate at which E5 loses stability, checked
/// against the transversality conditions of the `Delta(alpha)` test.
pub fn hopf_alpha_c(params: &ModelParameters, r: f64) -> Result<HopfReport> {
    let p = params;
    if r <= p.m1 + p.n1 {
        return Err(Error::NotApplicable(format!(
            "r = {r} does not exceed m1 + n1 = {}",
            p.m1 + p.n1
        )));
    }
    let (h1, h2, z) = hopf_aux(p, r);
    let m = p.m3 * (p.m2 + p.n2);
    let s = p.m2 + p.m3 + p.n2;
    let alpha_c = r * m / (p.gamma1 * p.n2 * z * p.k);

    let coefficients = egg_block_coefficients(p, r, alpha_c);
    let delta = coefficients.hurwitz_determinant();
    let delta_relative = delta.abs() / (coefficients.p1 * coefficients.p2).abs();

    // With u = C / alpha, Delta = s u^2 + (s^2 + m) u - m (r - m1 - n1).
    let c = r * m / (p.gamma1 * p.n2 * p.k);
    let b1 = (s * s + m) * c;
    let b2 = s * c * c;
    let d_delta_analytic = -b1 / alpha_c.powi(2) - 2.0 * b2 / alpha_c.powi(3);

    let step = alpha_c * 1e-6;
    let d_delta_finite_difference =
        (hopf_delta(p, r, alpha_c + step) - hopf_delta(p, r, alpha_c - step)) / (2.0 * step);

    let condition_a = coefficients.p1 > 0.0 && coefficients.p3 > 0.0 && delta_relative <= 1e-10;
    let condition_b = d_delta_analytic != 0.0
        && d_delta_finite_difference != 0.0
        && d_delta_analytic.signum() == d_delta_finite_difference.signum();
    Ok(HopfReport {
        alpha_c,
        z,
        h1,
        h2,
        coefficients,
        delta_at_alpha_c: delta,
        delta_relative,
        b1,
        b2,
        d_delta_analytic,
        d_delta_finite_difference,
        condition_a,
        condition_b,
        bifurcation_confirmed: condition_a && condition_b,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCheck {
    /// The quadratic-form matrix with `V' = e^T P e`, `e = x - E5`.
    pub p: [[f64; 6]; 6],
    /// Eigenvalues of `(P + P^T) / 2`, ascending.
    pub symmetric_eigenvalues: [f64; 6],
    pub negative_definite: bool,
    /// State used for the non-equilibrium entries `x3`, `x6`.
    pub evaluated_at: StateVector,
}

/// Build the matrix `P` of the Lyapunov derivative around E5 and test the
/// definiteness of its symmetric part.
///
/// Entries carrying the equilibrium values are taken at E5; the remaining
/// state-dependent entries (`alpha x3`, `beta x6`) are evaluated at `at`,
/// or at E5 when `at` is `None`.
pub fn lyapunov_global_check(
    params: &ModelParameters,
    r: f64,
    alpha: f64,
    at: Option<&StateVector>,
) -> Result<LyapunovCheck> {
    let p = params.with_alpha(alpha);
    let e5 = equilibria::coordinates(EquilibriumLabel::E5, &p, r)?;
    if !e5.is_nonnegative() {
        return Err(Error::NotApplicable("E5 is not biologically viable".into()));
    }
    let x = at.copied().unwrap_or(e5);
    let mut m = [[0.0; 6]; 6];
    m[0][0] = -r / p.k;
    m[0][2] = -p.alpha;
    m[1][0] = p.alpha * x[2];
    m[1][1] = -p.m2 - p.n2;
    m[1][2] = p.alpha * e5[0];
    m[2][1] = p.gamma1 * p.n2;
    m[2][2] = -p.m3;
    m[3][0] = p.n1;
    m[3][3] = -p.m4 - p.n3 - p.beta * x[5];
    m[3][5] = -p.beta * e5[3];
    m[4][3] = p.beta * x[5];
    m[4][4] = -p.m5 - p.n4;
    m[4][5] = p.beta * e5[3];
    m[5][4] = p.gamma2 * p.n4;
    m[5][5] = -p.m6;

    let mut sym = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            sym[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    let ev = jacobi_eigenvalues(&sym, 1e-12);
    Ok(LyapunovCheck {
        p: m,
        symmetric_eigenvalues: ev,
        negative_definite: ev.iter().all(|&v| v < 0.0),
        evaluated_at: x,
    })
}
