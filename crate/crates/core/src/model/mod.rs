//! Fleet charging and allocation instances.
//!
//! An [`Instance`] is the continuous description read from disk: battery
//! energies in kWh, prices per timestep, a fleet and a list of reservations.
//! [`discretize`] maps every energy onto the integer level grid once; all
//! downstream code works on [`DiscretizedInstance`] and never touches kWh
//! values again except to price them.

mod generate;

pub use generate::{generate, generate_with, GeneratorConfig, PriceProfile};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when comparing currency values.
pub const COST_TOL: f64 = 1e-9;

/// Relative tolerance for deciding that a kWh value sits on the level grid.
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed instance JSON: {0}")]
    Syntax(#[source] serde_json::Error),
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid instance at `{path}`: {message}")]
    Invariant { path: String, message: String },
    #[error("invalid generator parameter `{param}`: {message}")]
    Generator { param: &'static str, message: String },
}

impl ModelError {
    fn invariant(path: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Invariant {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Field path the error refers to, if any.
    pub fn path(&self) -> Option<&str> {
        match self {
            ModelError::Schema { path, .. } | ModelError::Invariant { path, .. } => Some(path),
            ModelError::Generator { param, .. } => Some(param),
            ModelError::Syntax(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vehicle {
    pub id: usize,
    /// Initial state of charge in kWh.
    pub e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reservation {
    pub id: usize,
    pub t_start: usize,
    pub t_end: usize,
    /// Expected energy consumption in kWh.
    pub e_res: f64,
}

impl Reservation {
    pub fn overlaps(&self, other: &Reservation) -> bool {
        self.t_start < other.t_end && other.t_start < self.t_end
    }
}

/// A fleet charging and allocation instance in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub t_max: usize,
    pub dt_hours: f64,
    pub e_cap: f64,
    pub delta_e: f64,
    pub p_max: f64,
    pub alpha: f64,
    pub c_uncov: f64,
    pub prices: Vec<f64>,
    pub vehicles: Vec<Vehicle>,
    pub reservations: Vec<Reservation>,
}

/// Returns `Some(k)` when `x` is within tolerance of the positive integer `k`.
fn positive_integer(x: f64) -> Option<usize> {
    let r = x.round();
    if r >= 1.0 && (x - r).abs() <= GRID_TOL * x.abs().max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

fn require_positive(path: &str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::invariant(path, format!("must be finite and > 0, got {v}")))
    }
}

fn require_non_negative(path: &str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::invariant(path, format!("must be finite and >= 0, got {v}")))
    }
}

impl Instance {
    /// Number of energy levels above zero, so that `i_max * delta_e == e_cap`.
    pub fn i_max(&self) -> Result<usize, ModelError> {
        positive_integer(self.e_cap / self.delta_e).ok_or_else(|| {
            ModelError::invariant(
                "delta_e",
                format!(
                    "e_cap ({}) is not an integer multiple of delta_e ({})",
                    self.e_cap, self.delta_e
                ),
            )
        })
    }

    /// Levels gained by one timestep of charging at `p_max`.
    pub fn charge_step(&self) -> Result<usize, ModelError> {
        positive_integer(self.p_max * self.dt_hours / self.delta_e).ok_or_else(|| {
            ModelError::invariant(
                "p_max",
                format!(
                    "p_max * dt_hours ({}) is not a positive integer multiple of delta_e ({})",
                    self.p_max * self.dt_hours,
                    self.delta_e
                ),
            )
        })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.t_max == 0 {
            return Err(ModelError::invariant("t_max", "must be >= 1"));
        }
        require_positive("dt_hours", self.dt_hours)?;
        require_positive("e_cap", self.e_cap)?;
        require_positive("delta_e", self.delta_e)?;
        require_positive("p_max", self.p_max)?;
        require_non_negative("alpha", self.alpha)?;
        require_non_negative("c_uncov", self.c_uncov)?;
        self.i_max()?;
        self.charge_step()?;

        if self.prices.len() != self.t_max {
            return Err(ModelError::Schema {
                path: "prices".into(),
                message: format!("expected {} entries (t_max), found {}", self.t_max, self.prices.len()),
            });
        }
        for (t, &c) in self.prices.iter().enumerate() {
            require_non_negative(&format!("prices[{t}]"), c)?;
        }

        if self.vehicles.is_empty() {
            return Err(ModelError::invariant(
                "vehicles",
                "fleet must contain at least one vehicle",
            ));
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            if v.id != i {
                return Err(ModelError::invariant(
                    format!("vehicles[{i}].id"),
                    format!("ids must be contiguous from 0, expected {i}, found {}", v.id),
                ));
            }
            if !(v.e0.is_finite() && (0.0..=self.e_cap).contains(&v.e0)) {
                return Err(ModelError::invariant(
                    format!("vehicles[{i}].e0"),
                    format!("must lie in [0, e_cap = {}], got {}", self.e_cap, v.e0),
                ));
            }
        }

        for (i, r) in self.reservations.iter().enumerate() {
            if r.id != i {
                return Err(ModelError::invariant(
                    format!("reservations[{i}].id"),
                    format!("ids must be contiguous from 0, expected {i}, found {}", r.id),
                ));
            }
            if r.t_start >= r.t_end {
                return Err(ModelError::invariant(
                    format!("reservations[{i}].t_start"),
                    format!("t_start ({}) must be < t_end ({})", r.t_start, r.t_end),
                ));
            }
            if r.t_end > self.t_max {
                return Err(ModelError::invariant(
                    format!("reservations[{i}].t_end"),
                    format!("t_end ({}) exceeds t_max ({})", r.t_end, self.t_max),
                ));
            }
            if !(r.e_res.is_finite() && r.e_res > 0.0 && r.e_res <= self.e_cap) {
                return Err(ModelError::invariant(
                    format!("reservations[{i}].e_res"),
                    format!("must lie in (0, e_cap = {}], got {}", self.e_cap, r.e_res),
                ));
            }
        }
        Ok(())
    }
}

/// Parses and validates an instance file.
pub fn load_instance(bytes: &[u8]) -> Result<Instance, ModelError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(ModelError::Syntax)?;
    let inst: Instance = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ModelError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    inst.validate()?;
    Ok(inst)
}

/// Serializes an instance as pretty-printed JSON with a trailing newline.
pub fn save_instance(inst: &Instance) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(inst).expect("instance serialization is infallible");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscreteVehicle {
    pub id: usize,
    pub level_e0: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscreteReservation {
    pub id: usize,
    pub t_start: usize,
    pub t_end: usize,
    pub level_res: usize,
}

impl DiscreteReservation {
    pub fn overlaps(&self, other: &DiscreteReservation) -> bool {
        self.t_start < other.t_end && other.t_start < self.t_end
    }
}

/// Instance with every energy expressed as an integer number of levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizedInstance {
    pub t_max: usize,
    pub dt_hours: f64,
    pub e_cap: f64,
    pub delta_e: f64,
    pub i_max: usize,
    pub p_max: f64,
    /// Levels gained per timestep of charging.
    pub charge_step: usize,
    pub alpha: f64,
    pub c_uncov: f64,
    pub prices: Vec<f64>,
    pub vehicles: Vec<DiscreteVehicle>,
    pub reservations: Vec<DiscreteReservation>,
}

impl DiscretizedInstance {
    pub fn n_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn n_reservations(&self) -> usize {
        self.reservations.len()
    }

    /// Grid energy bought by charging at `p_max` during timestep `t`.
    pub fn charge_cost(&self, t: usize) -> f64 {
        self.prices[t] * self.p_max * self.dt_hours
    }

    /// Future-cost penalty for ending the horizon at `level`.
    pub fn terminal_cost(&self, level: usize) -> f64 {
        self.alpha * (self.i_max - level) as f64 * self.delta_e
    }

    /// Cost of serving reservation `r` with a fuel car.
    pub fn uncovered_cost(&self, r: usize) -> f64 {
        self.c_uncov * self.reservations[r].level_res as f64 * self.delta_e
    }

    /// Cost of the plan in which every vehicle idles and every reservation is
    /// left to a fuel car.
    pub fn all_trivial_cost(&self) -> f64 {
        let vehicles: f64 = self.vehicles.iter().map(|v| self.terminal_cost(v.level_e0)).sum();
        let uncovered: f64 = (0..self.n_reservations()).map(|r| self.uncovered_cost(r)).sum();
        vehicles + uncovered
    }
}

/// Maps initial charges down and reservation energies up onto the level grid.
pub fn discretize(inst: &Instance) -> Result<DiscretizedInstance, ModelError> {
    inst.validate()?;
    let i_max = inst.i_max()?;
    let charge_step = inst.charge_step()?;
    let vehicles = inst
        .vehicles
        .iter()
        .map(|v| {
            let level = (v.e0 / inst.delta_e + GRID_TOL).floor().max(0.0) as usize;
            DiscreteVehicle {
                id: v.id,
                level_e0: level.min(i_max),
            }
        })
        .collect();
    let reservations = inst
        .reservations
        .iter()
        .map(|r| {
            let level = (r.e_res / inst.delta_e - GRID_TOL).ceil().max(1.0) as usize;
            DiscreteReservation {
                id: r.id,
                t_start: r.t_start,
                t_end: r.t_end,
                level_res: level.min(i_max),
            }
        })
        .collect();
    Ok(DiscretizedInstance {
        t_max: inst.t_max,
        dt_hours: inst.dt_hours,
        e_cap: inst.e_cap,
        delta_e: inst.delta_e,
        i_max,
        p_max: inst.p_max,
        charge_step,
        alpha: inst.alpha,
        c_uncov: inst.c_uncov,
        prices: inst.prices.clone(),
        vehicles,
        reservations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minimal() -> Instance {
        Instance {
            t_max: 2,
            dt_hours: 0.25,
            e_cap: 10.0,
            delta_e: 1.0,
            p_max: 4.0,
            alpha: 0.5,
            c_uncov: 1.0,
            prices: vec![0.3, 0.2],
            vehicles: vec![Vehicle { id: 0, e0: 3.7 }],
            reservations: vec![],
        }
    }

    #[test]
    fn rounding_directions() {
        let mut inst = minimal();
        inst.t_max = 4;
        inst.prices = vec![0.3; 4];
        inst.reservations.push(Reservation {
            id: 0,
            t_start: 0,
            t_end: 2,
            e_res: 3.2,
        });
        let d = discretize(&inst).unwrap();
        assert_eq!(d.i_max, 10);
        assert_eq!(d.charge_step, 1);
        assert_eq!(d.vehicles[0].level_e0, 3);
        assert_eq!(d.reservations[0].level_res, 4);
    }

    #[test]
    fn full_battery_maps_to_top_level() {
        let mut inst = minimal();
        inst.vehicles[0].e0 = inst.e_cap;
        let d = discretize(&inst).unwrap();
        assert_eq!(d.vehicles[0].level_e0, d.i_max);
        assert_eq!(d.terminal_cost(d.i_max), 0.0);
    }

    #[test]
    fn grid_aligned_decimal_values_survive_float_noise() {
        let mut inst = minimal();
        inst.e_cap = 3.0;
        inst.delta_e = 0.1;
        inst.p_max = 0.8;
        inst.vehicles[0].e0 = 0.3;
        inst.reservations.push(Reservation {
            id: 0,
            t_start: 0,
            t_end: 1,
            e_res: 0.7,
        });
        let d = discretize(&inst).unwrap();
        assert_eq!(d.i_max, 30);
        assert_eq!(d.charge_step, 2);
        assert_eq!(d.vehicles[0].level_e0, 3);
        assert_eq!(d.reservations[0].level_res, 7);
    }

    #[test]
    fn off_grid_charging_power_is_rejected() {
        let mut inst = minimal();
        inst.p_max = 5.0; // 1.25 kWh per step on a 1 kWh grid
        let err = discretize(&inst).unwrap_err();
        assert_eq!(err.path(), Some("p_max"));
    }

    #[test]
    fn minimal_instance_round_trips() {
        let inst = minimal();
        let bytes = save_instance(&inst);
        let back = load_instance(&bytes).unwrap();
        assert_eq!(back, inst);
        assert_eq!(save_instance(&back), bytes);
    }

    #[test]
    fn price_count_mismatch_names_prices() {
        let mut inst = minimal();
        inst.prices.pop();
        let bytes = serde_json::to_vec(&inst).unwrap();
        match load_instance(&bytes) {
            Err(ModelError::Schema { path, .. }) => assert_eq!(path, "prices"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_and_missing_keys_are_schema_errors() {
        let mut v = serde_json::to_value(minimal()).unwrap();
        v["colour"] = serde_json::json!("red");
        let err = load_instance(v.to_string().as_bytes()).unwrap_err();
        assert!(matches!(err, ModelError::Schema { .. }), "{err}");

        let mut v = serde_json::to_value(minimal()).unwrap();
        v.as_object_mut().unwrap().remove("alpha");
        let err = load_instance(v.to_string().as_bytes()).unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");

        let mut v = serde_json::to_value(minimal()).unwrap();
        v["vehicles"][0]["e0"] = serde_json::json!("full");
        let err = load_instance(v.to_string().as_bytes()).unwrap_err();
        assert_eq!(err.path(), Some("vehicles[0].e0"));
    }

    #[test]
    fn malformed_syntax() {
        assert!(matches!(load_instance(b"{\"t_max\": 3,"), Err(ModelError::Syntax(_))));
    }

    #[test]
    fn invariant_violations_carry_field_paths() {
        let mut inst = minimal();
        inst.reservations.push(Reservation {
            id: 0,
            t_start: 1,
            t_end: 3,
            e_res: 2.0,
        });
        assert_eq!(inst.validate().unwrap_err().path(), Some("reservations[0].t_end"));

        let mut inst = minimal();
        inst.reservations.push(Reservation {
            id: 0,
            t_start: 0,
            t_end: 1,
            e_res: 11.0,
        });
        assert_eq!(inst.validate().unwrap_err().path(), Some("reservations[0].e_res"));

        let mut inst = minimal();
        inst.vehicles.push(Vehicle { id: 5, e0: 1.0 });
        assert_eq!(inst.validate().unwrap_err().path(), Some("vehicles[1].id"));

        let mut inst = minimal();
        inst.delta_e = 3.0;
        assert_eq!(inst.validate().unwrap_err().path(), Some("delta_e"));
    }

    proptest! {
        #[test]
        fn discretize_is_idempotent_on_grid_values(
            levels in 1usize..20,
            e0_levels in proptest::collection::vec(0usize..20, 1..4),
            res in proptest::collection::vec((0usize..6, 1usize..4, 1usize..20), 0..4),
        ) {
            let delta_e = 2.5;
            let mut inst = minimal();
            inst.t_max = 10;
            inst.prices = vec![0.25; 10];
            inst.delta_e = delta_e;
            inst.e_cap = levels as f64 * delta_e;
            inst.p_max = 10.0;
            inst.vehicles = e0_levels.iter().enumerate()
                .map(|(id, &l)| Vehicle { id, e0: l.min(levels) as f64 * delta_e })
                .collect();
            inst.reservations = res.iter().enumerate()
                .map(|(id, &(s, d, l))| Reservation { id, t_start: s, t_end: s + d, e_res: l.min(levels) as f64 * delta_e })
                .collect();
            let d = discretize(&inst).unwrap();
            for (v, dv) in inst.vehicles.iter().zip(&d.vehicles) {
                prop_assert_eq!(dv.level_e0 as f64 * delta_e, v.e0);
            }
            for (r, dr) in inst.reservations.iter().zip(&d.reservations) {
                prop_assert_eq!(dr.level_res as f64 * delta_e, r.e_res);
            }
        }

        #[test]
        fn rounding_never_favours_the_fleet(
            e0 in 0.0f64..40.0,
            e_res in 0.001f64..40.0,
        ) {
            let mut inst = minimal();
            inst.e_cap = 40.0;
            inst.delta_e = 4.0;
            inst.p_max = 16.0;
            inst.vehicles[0].e0 = e0;
            inst.reservations.push(Reservation { id: 0, t_start: 0, t_end: 1, e_res });
            let d = discretize(&inst).unwrap();
            prop_assert!(d.vehicles[0].level_e0 as f64 * 4.0 <= e0 + 1e-9);
            prop_assert!(d.reservations[0].level_res as f64 * 4.0 >= e_res - 1e-9);
            prop_assert!(d.reservations[0].level_res >= 1);
        }
    }
}
