//! Closed twist loops on the parameter torus.

use std::fmt;

use crate::error::{Error, Result};
use crate::models::{ModelSpec, TwistVector};
use crate::scalar::{lit, Real};

/// Shape of the angle ramp `φ(t) = ±2π·s(t/T)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RampProfile {
    /// `s(u) = u`.
    #[default]
    Linear,
    /// `s(u) = u − sin(4πu)/(4π)`: zero angular velocity at `t = 0, T/2, T`.
    Smooth,
}

impl RampProfile {
    fn fraction<T: Real>(self, u: T) -> T {
        match self {
            RampProfile::Linear => u,
            RampProfile::Smooth => {
                let four_pi = T::PI() * lit(4.0);
                u - (four_pi * u).sin() / four_pi
            }
        }
    }
}

impl fmt::Display for RampProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RampProfile::Linear => "linear",
            RampProfile::Smooth => "smooth",
        })
    }
}

impl std::str::FromStr for RampProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RampProfile::Linear),
            "smooth" => Ok(RampProfile::Smooth),
            other => Err(Error::InvalidSchedule(format!(
                "unknown ramp profile '{other}'"
            ))),
        }
    }
}

/// A driven twist slot and its winding direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DrivenSlot {
    /// Slot in `1..=4`.
    pub slot: u8,
    /// `+1` or `-1`.
    pub sign: i8,
}

/// Twist angles as a function of time; every driven slot winds once by `±2π`
/// over `[0, T]`, static slots stay at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistSchedule<T: Real> {
    driven: Vec<DrivenSlot>,
    total_time: T,
    profile: RampProfile,
}

impl<T: Real> TwistSchedule<T> {
    /// General constructor; slots must be distinct and in `1..=4`.
    pub fn new(driven: Vec<DrivenSlot>, total_time: T, profile: RampProfile) -> Result<Self> {
        if total_time <= T::zero() || !total_time.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        if driven.is_empty() {
            return Err(Error::InvalidSchedule("no driven slots".into()));
        }
        for (k, d) in driven.iter().enumerate() {
            if !(1..=4).contains(&d.slot) {
                return Err(Error::InvalidSchedule(format!(
                    "slot {} not in 1..=4",
                    d.slot
                )));
            }
            if d.sign != 1 && d.sign != -1 {
                return Err(Error::InvalidSchedule(format!("sign {} is not ±1", d.sign)));
            }
            if driven[..k].iter().any(|e| e.slot == d.slot) {
                return Err(Error::InvalidSchedule(format!(
                    "slot {} driven twice",
                    d.slot
                )));
            }
        }
        Ok(Self {
            driven,
            total_time,
            profile,
        })
    }

    /// Single twist on slot 1 (the chain's twisted bond).
    pub fn single(total_time: T) -> Result<Self> {
        Self::new(
            vec![DrivenSlot { slot: 1, sign: 1 }],
            total_time,
            RampProfile::Linear,
        )
    }

    /// Opposite-sign pair: `φ_a = 2πt/T`, `φ_b = −2πt/T`; the twist sum stays 0.
    pub fn pair(slot_a: u8, slot_b: u8, total_time: T) -> Result<Self> {
        if slot_a == slot_b {
            return Err(Error::InvalidSchedule(format!("duplicate slot {slot_a}")));
        }
        Self::new(
            vec![
                DrivenSlot {
                    slot: slot_a,
                    sign: 1,
                },
                DrivenSlot {
                    slot: slot_b,
                    sign: -1,
                },
            ],
            total_time,
            RampProfile::Linear,
        )
    }

    /// All four plaquette slots with sign +1. The twist sum sweeps through π.
    pub fn uniform(total_time: T) -> Result<Self> {
        Self::new(
            (1..=4).map(|slot| DrivenSlot { slot, sign: 1 }).collect(),
            total_time,
            RampProfile::Linear,
        )
    }

    pub fn with_profile(mut self, profile: RampProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn driven(&self) -> &[DrivenSlot] {
        &self.driven
    }

    pub fn total_time(&self) -> T {
        self.total_time
    }

    pub fn profile(&self) -> RampProfile {
        self.profile
    }

    /// Twist angles at time `t`.
    pub fn twists_at(&self, t: T) -> TwistVector<T> {
        let winding = T::two_pi() * self.profile.fraction(t / self.total_time);
        let mut out = [T::zero(); 4];
        for d in &self.driven {
            let sign: T = lit(f64::from(d.sign));
            out[usize::from(d.slot) - 1] = sign * winding;
        }
        out
    }

    /// `Σ_j φ_j(t)`.
    pub fn twist_sum(&self, t: T) -> T {
        self.twists_at(t).iter().fold(T::zero(), |acc, &x| acc + x)
    }

    /// True when the twist sum is identically zero (opposite-sign pairs).
    pub fn is_sum_free(&self) -> bool {
        self.driven.iter().map(|d| i32::from(d.sign)).sum::<i32>() == 0
    }

    /// Compact label such as `+1-2`.
    pub fn path_label(&self) -> String {
        self.driven
            .iter()
            .map(|d| format!("{}{}", if d.sign > 0 { '+' } else { '-' }, d.slot))
            .collect()
    }

    /// Checks that every driven slot exists on `model`.
    pub fn validate_for(&self, model: &ModelSpec<T>) -> Result<()> {
        let n = model.n_slots();
        match self.driven.iter().find(|d| usize::from(d.slot) > n) {
            Some(d) => Err(Error::InvalidSchedule(format!(
                "slot {} not available: model has {n} twist slot(s)",
                d.slot
            ))),
            None => Ok(()),
        }
    }
}

/// Parses labels like `+1-2` or `1,-2` into driven slots.
pub fn parse_path(s: &str) -> Result<Vec<DrivenSlot>> {
    let bad = || Error::InvalidSchedule(format!("cannot parse path '{s}'"));
    let mut out = Vec::new();
    let mut sign = 1i8;
    let mut explicit = false;
    for ch in s.chars() {
        match ch {
            '+' => {
                sign = 1;
                explicit = true;
            }
            '-' => {
                sign = -1;
                explicit = true;
            }
            '1'..='4' => {
                out.push(DrivenSlot {
                    slot: ch as u8 - b'0',
                    sign,
                });
                sign = 1;
                explicit = false;
            }
            ',' | ' ' if !explicit => {}
            _ => return Err(bad()),
        }
    }
    if out.is_empty() || explicit {
        return Err(bad());
    }
    Ok(out)
}
