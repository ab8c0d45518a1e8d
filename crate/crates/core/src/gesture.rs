use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six social touch gestures. Integer codes follow declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GestureClass {
    Hit,
    Poke,
    Grab,
    Rub,
    Shake,
    Tap,
}

impl GestureClass {
    pub const COUNT: usize = 6;

    pub const ALL: [GestureClass; 6] = [
        GestureClass::Hit,
        GestureClass::Poke,
        GestureClass::Grab,
        GestureClass::Rub,
        GestureClass::Shake,
        GestureClass::Tap,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            GestureClass::Hit => "hit",
            GestureClass::Poke => "poke",
            GestureClass::Grab => "grab",
            GestureClass::Rub => "rub",
            GestureClass::Shake => "shake",
            GestureClass::Tap => "tap",
        }
    }
}

impl fmt::Display for GestureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GestureClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown gesture class '{s}'"))
    }
}
