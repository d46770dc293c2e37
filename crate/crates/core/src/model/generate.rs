use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{Instance, ModelError, Reservation, Vehicle};
use crate::seed::{self, Component};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceProfile {
    #[default]
    Flat,
    /// 24-hour sinusoid, cheapest around midnight.
    DayNight,
}

impl FromStr for PriceProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flat" => Ok(PriceProfile::Flat),
            "day-night" => Ok(PriceProfile::DayNight),
            other => Err(format!("unknown price profile `{other}` (expected flat | day-night)")),
        }
    }
}

impl fmt::Display for PriceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriceProfile::Flat => "flat",
            PriceProfile::DayNight => "day-night",
        })
    }
}

/// Knobs of the synthetic instance family. `e_cap = levels * delta_e` and
/// `p_max = charge_step * delta_e / dt_hours`, so generated instances always
/// sit on the level grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub profile: PriceProfile,
    pub dt_hours: f64,
    pub delta_e: f64,
    pub levels: usize,
    pub charge_step: usize,
    pub alpha: f64,
    pub c_uncov: f64,
    pub base_price: f64,
    pub price_amplitude: f64,
    /// Longest reservation in timesteps; `None` means `max(1, t_max / 4)`.
    pub max_duration: Option<usize>,
    /// Range of the average power drawn during a reservation, in kW.
    pub min_power_kw: f64,
    pub max_power_kw: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            profile: PriceProfile::Flat,
            dt_hours: 0.25,
            delta_e: 4.0,
            levels: 10,
            charge_step: 1,
            alpha: 0.28,
            c_uncov: 0.6,
            base_price: 0.30,
            price_amplitude: 0.12,
            max_duration: None,
            min_power_kw: 4.0,
            max_power_kw: 12.0,
        }
    }
}

/// False for NaN as well as for non-positive values.
fn positive(x: f64) -> bool {
    x > 0.0
}

impl GeneratorConfig {
    pub fn with_profile(profile: PriceProfile) -> Self {
        GeneratorConfig {
            profile,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |param, message: &str| {
            Err(ModelError::Generator {
                param,
                message: message.to_string(),
            })
        };
        if !positive(self.dt_hours) {
            return bad("dt_hours", "must be > 0");
        }
        if !positive(self.delta_e) {
            return bad("delta_e", "must be > 0");
        }
        if self.levels == 0 {
            return bad("levels", "must be >= 1");
        }
        if self.charge_step == 0 || self.charge_step > self.levels {
            return bad("charge_step", "must lie in 1..=levels");
        }
        if !positive(self.alpha) {
            return bad("alpha", "must be > 0");
        }
        if !positive(self.c_uncov) {
            return bad("c_uncov", "must be > 0");
        }
        if !(self.base_price >= self.price_amplitude && self.price_amplitude >= 0.0) {
            return bad("price_amplitude", "must lie in [0, base_price]");
        }
        if !(self.min_power_kw > 0.0 && self.max_power_kw >= self.min_power_kw) {
            return bad("max_power_kw", "power range must be positive and non-empty");
        }
        Ok(())
    }
}

/// Rounds to `decimals` places so that values print as short decimals.
fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// Seeded instance with the default configuration for `profile`.
pub fn generate(
    seed: u64,
    n_vehicles: usize,
    n_reservations: usize,
    t_max: usize,
    profile: PriceProfile,
) -> Result<Instance, ModelError> {
    generate_with(
        seed,
        n_vehicles,
        n_reservations,
        t_max,
        &GeneratorConfig::with_profile(profile),
    )
}

pub fn generate_with(
    seed: u64,
    n_vehicles: usize,
    n_reservations: usize,
    t_max: usize,
    cfg: &GeneratorConfig,
) -> Result<Instance, ModelError> {
    if n_vehicles == 0 {
        return Err(ModelError::Generator {
            param: "vehicles",
            message: "must be >= 1".into(),
        });
    }
    if t_max == 0 {
        return Err(ModelError::Generator {
            param: "t_max",
            message: "must be >= 1".into(),
        });
    }
    cfg.validate()?;

    let mut rng = seed::rng(seed, Component::Generator);
    let e_cap = cfg.levels as f64 * cfg.delta_e;
    let p_max = cfg.charge_step as f64 * cfg.delta_e / cfg.dt_hours;

    let prices = (0..t_max)
        .map(|t| match cfg.profile {
            PriceProfile::Flat => cfg.base_price,
            PriceProfile::DayNight => {
                let hour = t as f64 * cfg.dt_hours;
                let phase = 2.0 * PI * hour / 24.0;
                round_to(cfg.base_price - cfg.price_amplitude * phase.cos(), 4)
            }
        })
        .collect();

    let vehicles = (0..n_vehicles)
        .map(|id| Vehicle {
            id,
            e0: round_to(rng.gen_range(0.0..=e_cap), 2).clamp(0.0, e_cap),
        })
        .collect();

    let max_duration = cfg.max_duration.unwrap_or((t_max / 4).max(1)).max(1);
    let reservations = (0..n_reservations)
        .map(|id| {
            let t_start = rng.gen_range(0..t_max);
            let duration = rng.gen_range(1..=max_duration);
            let t_end = (t_start + duration).min(t_max);
            let power = rng.gen_range(cfg.min_power_kw..=cfg.max_power_kw);
            let hours = (t_end - t_start) as f64 * cfg.dt_hours;
            let e_res = round_to(hours * power, 2).clamp(0.01, e_cap);
            Reservation {
                id,
                t_start,
                t_end,
                e_res,
            }
        })
        .collect();

    let inst = Instance {
        t_max,
        dt_hours: cfg.dt_hours,
        e_cap,
        delta_e: cfg.delta_e,
        p_max,
        alpha: cfg.alpha,
        c_uncov: cfg.c_uncov,
        prices,
        vehicles,
        reservations,
    };
    inst.validate()?;
    Ok(inst)
}
