//! Random two-cell scenarios: user placement, power-law path gains and
//! noise-normalized transmit powers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelGains, NormalizedPowers};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangular deployment area in meters with base stations inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub area_width: f64,
    pub area_height: f64,
    pub bs_positions: Vec<Position>,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            area_width: 1000.0,
            area_height: 500.0,
            bs_positions: vec![Position::new(250.0, 250.0), Position::new(750.0, 250.0)],
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_width > 0.0 && self.area_height > 0.0)
            || !self.area_width.is_finite()
            || !self.area_height.is_finite()
        {
            return Err(Error::InvalidConfig(format!(
                "area {} x {} m must be positive and finite",
                self.area_width, self.area_height
            )));
        }
        if self.bs_positions.len() < 2 {
            return Err(Error::InvalidConfig(
                "at least two base stations are required".into(),
            ));
        }
        if let Some(p) = self.bs_positions.iter().find(|p| !self.contains(p)) {
            return Err(Error::InvalidConfig(format!(
                "base station ({}, {}) outside the area",
                p.x, p.y
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0.0..=self.area_width).contains(&p.x) && (0.0..=self.area_height).contains(&p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    #[default]
    None,
    /// Unit-mean exponential power gain on top of path loss.
    Rayleigh,
}

/// How the gain at the 1 m reference distance is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceGain {
    /// `(lambda / (4 pi d))^n`: the Friis amplitude factor raised to the path loss exponent,
    /// i.e. `(lambda / 4 pi)^n` at 1 m.
    #[default]
    FriisPowerLaw,
    /// Free-space gain at 1 m, `(lambda / 4 pi)^2`, followed by `d^-n`.
    FreeSpace,
    /// Explicit gain at 1 m.
    Value(f64),
}

impl ReferenceGain {
    pub fn resolve(self, carrier_hz: f64, exponent: f64) -> f64 {
        let scale = SPEED_OF_LIGHT / carrier_hz / (4.0 * std::f64::consts::PI);
        match self {
            ReferenceGain::FriisPowerLaw => scale.powf(exponent),
            ReferenceGain::FreeSpace => scale * scale,
            ReferenceGain::Value(v) => v,
        }
    }
}

/// Path loss configuration as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossConfig {
    pub exponent: f64,
    pub reference_gain: ReferenceGain,
    pub fading: Fading,
}

impl Default for PathLossConfig {
    fn default() -> Self {
        Self {
            exponent: 3.0,
            reference_gain: ReferenceGain::default(),
            fading: Fading::None,
        }
    }
}

/// Resolved path loss model, `gain(d) = reference_gain * d^-exponent` (times fading).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub exponent: f64,
    pub reference_gain: f64,
    pub fading: Fading,
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "path loss exponent {} must be positive",
                self.exponent
            )));
        }
        if !(self.reference_gain > 0.0 && self.reference_gain.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "reference gain {} must be positive",
                self.reference_gain
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub tx_power_per_bs_w: f64,
    pub noise_power_w: f64,
    /// Recorded for documentation only.
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            tx_power_per_bs_w: 10.0,
            noise_power_w: 5e-11,
            bandwidth_hz: 20e6,
            carrier_hz: 1e9,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tx_power_per_bs_w", self.tx_power_per_bs_w),
            ("noise_power_w", self.noise_power_w),
            ("bandwidth_hz", self.bandwidth_hz),
            ("carrier_hz", self.carrier_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} must be positive and finite"
                )));
            }
        }
        Ok(())
    }
}

/// Everything needed to draw one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_users: usize,
    pub geometry: Geometry,
    pub path_loss: PathLossConfig,
    pub radio: RadioParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_users: 2,
            geometry: Geometry::default(),
            path_loss: PathLossConfig::default(),
            radio: RadioParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn path_loss_params(&self) -> PathLossParams {
        PathLossParams {
            exponent: self.path_loss.exponent,
            reference_gain: self
                .path_loss
                .reference_gain
                .resolve(self.radio.carrier_hz, self.path_loss.exponent),
            fading: self.path_loss.fading,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::InvalidConfig("n_users must be at least 1".into()));
        }
        self.geometry.validate()?;
        self.radio.validate()?;
        self.path_loss_params().validate()
    }

    pub fn with_noise(&self, noise_power_w: f64) -> Self {
        let mut c = self.clone();
        c.radio.noise_power_w = noise_power_w;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInstance {
    pub user_positions: Vec<Position>,
    pub gains: ChannelGains<f64>,
    pub powers: NormalizedPowers<f64>,
    pub seed_record: u64,
}

/// Random source for instance `index` of a run seeded with `base_seed`.
///
/// Each index gets its own ChaCha stream, so instances can be drawn in any
/// order and on any worker.
pub fn instance_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

/// Draws `n_users` positions uniformly over the area.
pub fn place_users<R: Rng + ?Sized>(
    rng: &mut R,
    geometry: &Geometry,
    n_users: usize,
) -> Vec<Position> {
    (0..n_users)
        .map(|_| {
            let x = rng.gen::<f64>() * geometry.area_width;
            let y = rng.gen::<f64>() * geometry.area_height;
            Position::new(x, y)
        })
        .collect()
}

/// Squared channel magnitude between a user and a base station.
pub fn path_gain<R: Rng + ?Sized>(
    user: &Position,
    bs: &Position,
    params: &PathLossParams,
    rng: &mut R,
) -> Result<f64> {
    let d = user.distance(bs);
    if d <= 0.0 {
        return Err(Error::CoincidentPositions);
    }
    let mean = params.reference_gain * d.powf(-params.exponent);
    Ok(match params.fading {
        Fading::None => mean,
        Fading::Rayleigh => {
            let draw: f64 = Exp1.sample(rng);
            mean * draw
        }
    })
}

/// Draws positions, then gains user by user and BS by BS, from `rng`.
pub fn generate_instance<R: Rng + ?Sized>(
    rng: &mut R,
    config: &ScenarioConfig,
    seed_record: u64,
) -> Result<ScenarioInstance> {
    let params = config.path_loss_params();
    let user_positions = place_users(rng, &config.geometry, config.n_users);
    let mut rows = Vec::with_capacity(user_positions.len());
    for u in &user_positions {
        let row = config
            .geometry
            .bs_positions
            .iter()
            .map(|bs| path_gain(u, bs, &params, rng))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let gains = ChannelGains::new(rows)?;
    let n_bs = config.geometry.bs_positions.len();
    let powers = NormalizedPowers::from_watts(
        &vec![config.radio.tx_power_per_bs_w; n_bs],
        config.radio.noise_power_w,
    )?;
    Ok(ScenarioInstance {
        user_positions,
        gains,
        powers,
        seed_record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_params() -> PathLossParams {
        PathLossParams {
            exponent: 3.0,
            reference_gain: 1.0,
            fading: Fading::None,
        }
    }

    #[test]
    fn degenerate_area_places_at_origin() {
        let g = Geometry {
            area_width: 0.0,
            area_height: 0.0,
            ..Geometry::default()
        };
        let mut rng = instance_rng(1, 0);
        for p in place_users(&mut rng, &g, 5) {
            assert_eq!(p, Position::new(0.0, 0.0));
        }
    }

    #[test]
    fn users_stay_inside_default_area() {
        let g = Geometry::default();
        let mut rng = instance_rng(3, 9);
        for p in place_users(&mut rng, &g, 1000) {
            assert!(g.contains(&p));
        }
    }

    #[test]
    fn placement_mean_is_area_center() {
        let g = Geometry::default();
        let mut rng = instance_rng(11, 0);
        let pts = place_users(&mut rng, &g, 100_000);
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
        assert!((mx - 500.0).abs() < 5.0, "{mx}");
        assert!((my - 250.0).abs() < 2.5, "{my}");
    }

    #[test]
    fn path_gain_power_law() {
        let mut rng = instance_rng(0, 0);
        let o = Position::new(0.0, 0.0);
        let p = unit_params();
        assert_eq!(
            path_gain(&Position::new(1.0, 0.0), &o, &p, &mut rng).unwrap(),
            1.0
        );
        assert_relative_eq!(
            path_gain(&Position::new(0.0, 10.0), &o, &p, &mut rng).unwrap(),
            1e-3,
            max_relative = 1e-15
        );

        // 250 m at K = 2: 2 / 15_625_000 = 1.28e-7.
        let k = PathLossParams {
            reference_gain: 2.0,
            ..p
        };
        assert_relative_eq!(
            path_gain(&Position::new(250.0, 0.0), &o, &k, &mut rng).unwrap(),
            1.28e-7,
            max_relative = 1e-14
        );
    }

    #[test]
    fn coincident_positions_rejected() {
        let mut rng = instance_rng(0, 0);
        let o = Position::new(5.0, 5.0);
        assert!(matches!(
            path_gain(&o, &o, &unit_params(), &mut rng),
            Err(Error::CoincidentPositions)
        ));
    }

    #[test]
    fn gain_decreases_with_distance() {
        let mut rng = instance_rng(0, 0);
        let o = Position::new(0.0, 0.0);
        let p = unit_params();
        let gains: Vec<f64> = (1..200)
            .map(|d| path_gain(&Position::new(d as f64 * 3.7, 0.0), &o, &p, &mut rng).unwrap())
            .collect();
        assert!(gains.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rayleigh_fading_has_unit_mean() {
        let mut rng = instance_rng(5, 1);
        let p = PathLossParams {
            fading: Fading::Rayleigh,
            ..unit_params()
        };
        let o = Position::new(0.0, 0.0);
        let u = Position::new(1.0, 0.0);
        let n = 200_000;
        let mean = (0..n)
            .map(|_| path_gain(&u, &o, &p, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn reference_gains_at_one_ghz() {
        let lambda_over_4pi = SPEED_OF_LIGHT / 1e9 / (4.0 * std::f64::consts::PI);
        assert_relative_eq!(
            ReferenceGain::FreeSpace.resolve(1e9, 3.0),
            5.691e-4,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            ReferenceGain::FriisPowerLaw.resolve(1e9, 3.0),
            lambda_over_4pi * lambda_over_4pi * lambda_over_4pi,
            max_relative = 1e-12
        );
        assert_eq!(ReferenceGain::Value(1.0).resolve(1e9, 3.0), 1.0);
    }

    #[test]
    fn default_powers_and_noise_scaling() {
        let cfg = ScenarioConfig::default();
        let inst = generate_instance(&mut instance_rng(7, 3), &cfg, 7).unwrap();
        assert_relative_eq!(inst.powers.get(0), 2e11, max_relative = 1e-15);
        assert_eq!(inst.gains.n_users(), 2);
        assert_eq!(inst.gains.n_bs(), 2);

        let halved = cfg.with_noise(2.5e-11);
        let inst2 = generate_instance(&mut instance_rng(7, 3), &halved, 7).unwrap();
        assert_eq!(inst.gains, inst2.gains);
        assert_eq!(inst2.powers.get(1), 2.0 * inst.powers.get(1));
    }

    #[test]
    fn powers_invariant_under_joint_scaling() {
        let mut cfg = ScenarioConfig::default();
        let base = generate_instance(&mut instance_rng(1, 1), &cfg, 1).unwrap();
        cfg.radio.tx_power_per_bs_w *= 8.0;
        cfg.radio.noise_power_w *= 8.0;
        let scaled = generate_instance(&mut instance_rng(1, 1), &cfg, 1).unwrap();
        assert_relative_eq!(
            base.powers.get(0),
            scaled.powers.get(0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn replay_is_deterministic() {
        let cfg = ScenarioConfig::default();
        let a = generate_instance(&mut instance_rng(42, 17), &cfg, 42).unwrap();
        let b = generate_instance(&mut instance_rng(42, 17), &cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&mut instance_rng(42, 18), &cfg, 42).unwrap();
        assert_ne!(a.user_positions, c.user_positions);
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::default().validate().is_ok());
        let mut g = Geometry::default();
        g.bs_positions.pop();
        assert!(g.validate().is_err());
        let g = Geometry {
            bs_positions: vec![Position::new(0.0, 0.0), Position::new(2000.0, 0.0)],
            ..Geometry::default()
        };
        assert!(g.validate().is_err());
    }
}
