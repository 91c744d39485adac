//! Parameters, state and right-hand side of the six-compartment
//! borer / egg-parasitoid / larval-parasitoid model.
//!
//! Compartments:
//!
//! | index | symbol | meaning                          |
//! |-------|--------|----------------------------------|
//! | 0     | x1     | unparasitized borer eggs         |
//! | 1     | x2     | parasitized eggs                 |
//! | 2     | x3     | adult egg parasitoids            |
//! | 3     | x4     | unparasitized borer larvae       |
//! | 4     | x5     | parasitized larvae               |
//! | 5     | x6     | adult larval parasitoids         |
//!
//! Time is measured in days. The oviposition rate is modulated with a
//! 365-day period, `r(t) = r0 (1 + r1 sin(2 pi t / 365))`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Length of the forcing period in days.
pub const YEAR: f64 = 365.0;

/// Number of compartments.
pub const DIM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParameters {
    /// Average intrinsic oviposition rate (1/day).
    pub r0: f64,
    /// Degree of seasonality, in `[0, 1]`.
    pub r1: f64,
    /// Oviposition capacity.
    #[serde(rename = "K")]
    pub k: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    pub m6: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    /// Egg parasitism rate.
    pub alpha: f64,
    /// Larval parasitism rate.
    pub beta: f64,
    /// Egg parasitoids emerging per parasitized egg.
    pub gamma1: f64,
    /// Larval parasitoids emerging per parasitized larva.
    pub gamma2: f64,
}

impl Default for ModelParameters {
    /// The field-calibrated parameter set, unforced, with
    /// `alpha = 0.6e-4` (coexistence equilibrium regime).
    fn default() -> Self {
        ModelParameters {
            r0: 0.19,
            r1: 0.0,
            k: 25000.0,
            m1: 0.0,
            m2: 0.03566,
            m3: 1.0 / 4.0,
            m4: 0.00257,
            m5: 0.00257,
            m6: 1.0 / 5.0,
            n1: 1.0 / 8.0,
            n2: 1.0 / 9.0,
            n3: 1.0 / 50.0,
            n4: 1.0 / 16.0,
            alpha: 0.6e-4,
            beta: 0.000009,
            gamma1: 2.29,
            gamma2: 40.0,
        }
    }
}

/// Field names in declaration order, as they appear in config files.
pub const PARAMETER_NAMES: [&str; 17] = [
    "r0", "r1", "K", "m1", "m2", "m3", "m4", "m5", "m6", "n1", "n2", "n3", "n4", "alpha", "beta",
    "gamma1", "gamma2",
];

impl ModelParameters {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_r1(mut self, r1: f64) -> Self {
        self.r1 = r1;
        self
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Look up a parameter by its config name.
    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.field_mut(name).map(|f| *f)
    }

    /// Set a parameter by its config name. Returns false for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match self.field_mut(name) {
            Some(f) => {
                *f = value;
                true
            }
            None => false,
        }
    }

    fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "r0" => &mut self.r0,
            "r1" => &mut self.r1,
            "K" => &mut self.k,
            "m1" => &mut self.m1,
            "m2" => &mut self.m2,
            "m3" => &mut self.m3,
            "m4" => &mut self.m4,
            "m5" => &mut self.m5,
            "m6" => &mut self.m6,
            "n1" => &mut self.n1,
            "n2" => &mut self.n2,
            "n3" => &mut self.n3,
            "n4" => &mut self.n4,
            "alpha" => &mut self.alpha,
            "beta" => &mut self.beta,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            _ => return None,
        })
    }

    /// Unforced copy: `r1 = 0`.
    pub fn autonomous(mut self) -> Self {
        self.r1 = 0.0;
        self
    }

    /// Net egg growth threshold `m1 + n1`.
    pub fn egg_loss(&self) -> f64 {
        self.m1 + self.n1
    }
}

/// A broken parameter invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub constraint: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: violates \"{}\"", self.field, self.constraint)
    }
}

/// Check every parameter invariant. An empty list means the set is valid.
pub fn validate(params: &ModelParameters) -> Vec<Violation> {
    const POSITIVE: [&str; 6] = ["n2", "n4", "gamma1", "gamma2", "m3", "m6"];
    let mut out = Vec::new();
    for name in PARAMETER_NAMES {
        let v = params.get(name).expect("known parameter");
        match name {
            "r1" => {
                if !(0.0..=1.0).contains(&v) {
                    out.push(Violation {
                        field: "r1",
                        constraint: "r1 ∈ [0,1]",
                    });
                }
            }
            "K" => {
                if !(v > 0.0 && v.is_finite()) {
                    out.push(Violation {
                        field: "K",
                        constraint: "K > 0",
                    });
                }
            }
            _ if POSITIVE.contains(&name) => {
                if !(v > 0.0 && v.is_finite()) {
                    out.push(Violation {
                        field: name,
                        constraint: "> 0",
                    });
                }
            }
            _ => {
                if !(v >= 0.0 && v.is_finite()) {
                    out.push(Violation {
                        field: name,
                        constraint: ">= 0",
                    });
                }
            }
        }
    }
    out
}

/// Population densities `x1..x6` at one instant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateVector(pub [f64; DIM]);

impl StateVector {
    pub const ZERO: StateVector = StateVector([0.0; DIM]);

    pub fn new(x: [f64; DIM]) -> Self {
        StateVector(x)
    }

    pub fn as_array(&self) -> &[f64; DIM] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        StateVector(self.0.map(|v| v * s))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl From<[f64; DIM]> for StateVector {
    fn from(x: [f64; DIM]) -> Self {
        StateVector(x)
    }
}

impl Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Seasonal oviposition rate `r0 (1 + r1 sin(2 pi t / 365))`.
pub fn intrinsic_rate(t: f64, params: &ModelParameters) -> f64 {
    if params.r1 == 0.0 {
        return params.r0;
    }
    // Reduce the phase first so that t and t + 365 agree to the last bit.
    let phase = t.rem_euclid(YEAR) / YEAR;
    params.r0 * (1.0 + params.r1 * (2.0 * PI * phase).sin())
}

/// Right-hand side with the oviposition rate frozen at `r`.
pub fn rhs_with_rate(r: f64, x: &StateVector, p: &ModelParameters) -> StateVector {
    let [x1, x2, x3, x4, x5, x6] = x.0;
    let egg_hits = p.alpha * x1 * x3;
    let larva_hits = p.beta * x4 * x6;
    StateVector([
        r * x1 * (1.0 - x1 / p.k) - p.m1 * x1 - p.n1 * x1 - egg_hits,
        egg_hits - (p.m2 + p.n2) * x2,
        p.gamma1 * p.n2 * x2 - p.m3 * x3,
        p.n1 * x1 - (p.m4 + p.n3) * x4 - larva_hits,
        larva_hits - (p.m5 + p.n4) * x5,
        p.gamma2 * p.n4 * x5 - p.m6 * x6,
    ])
}

/// Time derivative of the seasonally forced system.
pub fn rhs(t: f64, x: &StateVector, params: &ModelParameters) -> StateVector {
    rhs_with_rate(intrinsic_rate(t, params), x, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rate_without_forcing_is_constant() {
        let p = ModelParameters::default();
        for t in [0.0, 12.3, 91.25, 400.0, 3650.0] {
            assert_eq!(intrinsic_rate(t, &p), p.r0);
        }
    }

    #[test]
    fn rate_extrema() {
        let p = ModelParameters::default().with_r1(0.35);
        assert!((intrinsic_rate(0.0, &p) - 0.19).abs() < 1e-15);
        let peak = intrinsic_rate(YEAR / 4.0, &p);
        assert!((peak - 0.19 * 1.35).abs() < 1e-14);
        // hand evaluation: 0.19 * 1.35
        assert!((peak - 0.2565).abs() < 1e-12);
    }

    #[test]
    fn rhs_at_unit_egg_density() {
        let p = ModelParameters::default();
        let d = rhs(0.0, &StateVector([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), &p);
        // 0.19 * (1 - 1/25000) - 0.125
        assert!((d[0] - 0.0649924).abs() < 1e-12);
        assert!((d[3] - 0.125).abs() < 1e-15);
        for i in [1, 2, 4, 5] {
            assert_eq!(d[i], 0.0);
        }
    }

    #[test]
    fn extinction_is_fixed() {
        let p = ModelParameters::default().with_r1(0.3);
        for t in [0.0, 50.0, 200.0] {
            assert_eq!(rhs(t, &StateVector::ZERO, &p), StateVector::ZERO);
        }
    }

    #[test]
    fn default_parameters_are_valid() {
        assert!(validate(&ModelParameters::default()).is_empty());
    }

    #[test]
    fn zero_capacity_rejected() {
        let mut p = ModelParameters::default();
        p.k = 0.0;
        let v = validate(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, "K > 0");
    }

    #[test]
    fn negative_seasonality_rejected() {
        let p = ModelParameters::default().with_r1(-0.1);
        let v = validate(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "r1");
        assert_eq!(v[0].constraint, "r1 ∈ [0,1]");
    }

    #[test]
    fn denominators_must_be_positive() {
        let mut p = ModelParameters::default();
        p.m6 = 0.0;
        p.beta = -1.0;
        p.alpha = f64::NAN;
        let fields: Vec<_> = validate(&p).iter().map(|v| v.field).collect();
        assert_eq!(fields, vec!["m6", "alpha", "beta"]);
    }

    #[test]
    fn get_set_by_name() {
        let mut p = ModelParameters::default();
        for name in PARAMETER_NAMES {
            assert!(p.get(name).is_some());
        }
        assert!(p.set("alpha", 1e-4));
        assert_eq!(p.alpha, 1e-4);
        assert!(!p.set("zeta", 1.0));
        assert_eq!(p.get("K"), Some(25000.0));
    }

    fn state() -> impl Strategy<Value = StateVector> {
        prop::array::uniform6(0.0..1e5f64).prop_map(StateVector)
    }

    proptest! {
        #[test]
        fn rate_is_365_periodic(t in 0.0..3650.0f64, r1 in 0.0..1.0f64) {
            let p = ModelParameters::default().with_r1(r1);
            let a = intrinsic_rate(t, &p);
            let b = intrinsic_rate(t + YEAR, &p);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }

        #[test]
        fn orthant_is_forward_invariant(x in state(), i in 0usize..6, t in 0.0..730.0f64) {
            let p = ModelParameters::default().with_r1(0.35);
            let mut x = x;
            x[i] = 0.0;
            let d = rhs(t, &x, &p);
            prop_assert!(d[i] >= 0.0);
        }

        #[test]
        fn unforced_rhs_is_autonomous(x in state(), t1 in 0.0..1000.0f64, t2 in 0.0..1000.0f64) {
            let p = ModelParameters::default();
            prop_assert_eq!(rhs(t1, &x, &p), rhs(t2, &x, &p));
        }
    }
}
