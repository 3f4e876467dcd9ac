//! Semiclassical Bloch-oscillation kinematics of emitted wavepackets and the
//! tree of times at which they revisit the qubit.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::lattice::{resonant_momentum, wrap_to_fbz};
use crate::{Error, Result};

/// Wavepacket launched at `t_i` from site `x_i` with quasi-momentum `k_i`,
/// driven by a force `F`: `k(t) = k_i - F (t - t_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub t_i: f64,
    pub k_i: f64,
    pub x_i: f64,
    pub hopping: f64,
    pub force: f64,
}

impl Trajectory {
    pub fn new(hopping: f64, force: f64, t_i: f64, k_i: f64, x_i: f64) -> Result<Self> {
        if !(force > 0.0) {
            return Err(Error::ZeroForce("Bloch trajectory"));
        }
        if !(hopping > 0.0) {
            return Err(Error::Config(format!("hopping must be positive, got {hopping}")));
        }
        Ok(Trajectory { t_i, k_i: wrap_to_fbz(k_i), x_i, hopping, force })
    }

    pub fn xi(&self) -> f64 {
        2.0 * self.hopping / self.force
    }

    pub fn t_bloch(&self) -> f64 {
        2.0 * PI / self.force
    }

    /// Unwrapped phase `k_i - 2 pi (t - t_i) / T_B`.
    fn phase(&self, t: f64) -> f64 {
        self.k_i - 2.0 * PI * (t - self.t_i) / self.t_bloch()
    }

    pub fn k_at(&self, t: f64) -> f64 {
        wrap_to_fbz(self.phase(t))
    }

    /// Position from integrating the group velocity `2J sin k(t)`:
    /// `x_i - xi cos k_i + xi cos(k(t))`.
    pub fn x_at(&self, t: f64) -> f64 {
        self.x_i - self.xi() * self.k_i.cos() + self.xi() * self.phase(t).cos()
    }

    pub fn velocity(&self, t: f64) -> f64 {
        2.0 * self.hopping * self.phase(t).sin()
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        -2.0 * self.hopping * self.phase(t).cos()
    }
}

/// Earliest `t > t_i` at which a packet launched with momentum `k_i` is back
/// at its launch site: `t_i + (1 + k_i/pi) T_B` for `k_i < 0`,
/// `t_i + (k_i/pi) T_B` for `k_i > 0`.
///
/// `k_i = 0` and `k_i = pi` are band edges with zero velocity and are
/// rejected.
pub fn return_time(t_i: f64, k_i: f64, t_bloch: f64) -> Result<f64> {
    let k = wrap_to_fbz(k_i);
    if k == 0.0 || k == PI {
        return Err(Error::DegenerateMomentum(k));
    }
    let frac = if k < 0.0 { 1.0 + k / PI } else { k / PI };
    Ok(t_i + frac * t_bloch)
}

/// One branch of the return tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnEvent {
    pub parent_time: f64,
    /// `+1` for the `+k0` branch, `-1` for `-k0`.
    pub sign: i8,
    pub time: f64,
    /// Generation, starting at 1 for packets emitted at `t = 0`.
    pub depth: u32,
}

/// Return events grouped by coincident time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergedReturn {
    pub time: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTree {
    /// Every branch, sorted by time.
    pub events: Vec<ReturnEvent>,
    /// Distinct times (within `MERGE_TOLERANCE * T_B`).
    pub merged: Vec<MergedReturn>,
}

pub const MERGE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_DEPTH: u32 = 4;
/// Default horizon in Bloch periods.
pub const DEFAULT_HORIZON: f64 = 3.0;
/// Hard cap on the number of branches expanded.
pub const MAX_EVENTS: usize = 1 << 20;

/// Breadth-first expansion: every emission (the root at `t = 0` and every
/// return) launches a `+k0` and a `-k0` packet. Events after `t_max` are
/// pruned.
pub fn return_tree(hopping: f64, t_bloch: f64, omega0: f64, depth: u32, t_max: f64) -> Result<ReturnTree> {
    if depth == 0 {
        return Err(Error::Config("return tree depth must be at least 1".into()));
    }
    if !(t_bloch > 0.0) || !t_bloch.is_finite() {
        return Err(Error::Config(format!("Bloch period must be positive and finite, got {t_bloch}")));
    }
    let k0 = resonant_momentum(hopping, omega0)?;
    if k0 == 0.0 || k0 == PI {
        return Err(Error::DegenerateMomentum(k0));
    }

    let mut events = Vec::new();
    let mut frontier: Vec<f64> = alloc::vec![0.0];
    for gen in 1..=depth {
        let mut next = Vec::with_capacity(2 * frontier.len());
        for &t_i in &frontier {
            for (sign, k) in [(1i8, k0), (-1i8, -k0)] {
                let t_r = return_time(t_i, k, t_bloch)?;
                if t_r <= t_max {
                    events.push(ReturnEvent { parent_time: t_i, sign, time: t_r, depth: gen });
                    next.push(t_r);
                }
            }
        }
        if events.len() > MAX_EVENTS {
            return Err(Error::Config(format!("return tree exceeds {MAX_EVENTS} branches; lower depth or t_max")));
        }
        frontier = next;
    }
    events.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap_or(core::cmp::Ordering::Equal));

    let tol = MERGE_TOLERANCE * t_bloch;
    let mut merged: Vec<MergedReturn> = Vec::new();
    for e in &events {
        match merged.last_mut() {
            Some(m) if (e.time - m.time).abs() <= tol => m.multiplicity += 1,
            _ => merged.push(MergedReturn { time: e.time, multiplicity: 1 }),
        }
    }
    Ok(ReturnTree { events, merged })
}
