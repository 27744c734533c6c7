//! Hardware time constants, exact rationals in nanoseconds.

use crate::error::{Error, Result};
use crate::rational::{qi, Q};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingParams {
    pub t_loop: Q,
    pub t_1q: Q,
    pub t_2q: Q,
    pub t_meas: Q,
    pub t_int: Q,
    pub meas_devices: u32,
    /// Additive slack before rounding T_cyc* up to whole microseconds.
    pub slack: Q,
    /// Code cycle of the standard (non-pipelined) architecture.
    pub t_cyc_std: Q,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self::silicon()
    }
}

impl TimingParams {
    pub fn silicon() -> Self {
        TimingParams {
            t_loop: qi(400),
            t_1q: qi(200),
            t_2q: qi(100),
            t_meas: qi(1000),
            t_int: qi(200),
            meas_devices: 3,
            slack: qi(500),
            t_cyc_std: qi(3000),
        }
    }

    /// Shuttle-only limit used by linearity tests.
    pub fn shuttle_only(t_loop: Q) -> Self {
        TimingParams {
            t_loop,
            t_1q: Q::zero(),
            t_2q: Q::zero(),
            t_meas: Q::zero(),
            t_int: t_loop / 2,
            ..Self::silicon()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_loop <= Q::zero() {
            return Err(Error::Precondition("t_loop must be positive".into()));
        }
        for (name, v) in [
            ("t_1q", &self.t_1q),
            ("t_2q", &self.t_2q),
            ("t_meas", &self.t_meas),
            ("t_int", &self.t_int),
            ("slack", &self.slack),
            ("t_cyc_std", &self.t_cyc_std),
        ] {
            if *v < Q::zero() {
                return Err(Error::Precondition(format!("{name} must be non-negative")));
            }
        }
        if self.meas_devices == 0 {
            return Err(Error::Precondition("meas_devices must be at least 1".into()));
        }
        Ok(())
    }

    /// Lap time of a loop; diagonal loops run twice as fast.
    pub fn lap(&self, double_speed: bool) -> Q {
        if double_speed {
            self.t_loop / 2
        } else {
            self.t_loop
        }
    }
}
