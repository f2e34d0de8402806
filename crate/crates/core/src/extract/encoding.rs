// SPDX-License-Identifier: Apache-2.0

use crate::vcd::{Bit, Value};
use serde::{Deserialize, Serialize};

/// Numeric encoding of four-state values. Defined vectors read as unsigned
/// integers; a vector holding any x or z bit reads as `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueEncoding {
    pub x: f64,
    pub z: f64,
}

impl Default for ValueEncoding {
    fn default() -> Self {
        ValueEncoding { x: -1.0, z: -2.0 }
    }
}

impl ValueEncoding {
    /// Value of a signal not yet assigned.
    pub fn uninitialized(&self) -> f64 {
        self.x
    }

    pub fn bit(&self, b: Bit) -> f64 {
        match b {
            Bit::Zero => 0.0,
            Bit::One => 1.0,
            Bit::X => self.x,
            Bit::Z => self.z,
        }
    }

    pub fn encode(&self, v: &Value) -> f64 {
        match v {
            Value::Scalar(b) => self.bit(*b),
            Value::Vector(bits) => {
                let mut acc = 0.0f64;
                for b in bits {
                    acc = match b {
                        Bit::Zero => acc * 2.0,
                        Bit::One => acc * 2.0 + 1.0,
                        Bit::X | Bit::Z => return self.x,
                    };
                }
                acc
            }
            Value::Real(r) => *r,
        }
    }
}
