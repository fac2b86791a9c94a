//! Bundled example systems.

use super::{parse_model, ContinuousSystem};

pub const BUILTIN_NAMES: [&str; 3] = ["rotation", "lorenz", "timer"];

const ROTATION: &str = "\
# Anticlockwise rotation, stable for u1 <= 0 and unstable for u1 > 0.
[params] u1 in [-0.1, 0.1]
[vars]   x1 in [-10, 10]
         x2 in [-10, 10]
[init]   x1 = 1
         x2 = 0
[flow]   x1' = u1*x1 - x2
         x2' = x1 + u1*x2
";

const LORENZ: &str = "\
# Lorenz equations around (u1, u2, u3) = (10, 28, 2.5).
[params] u1 in [9, 11]
         u2 in [27, 29]
         u3 in [1.5, 3.5]
[vars]   x1 in [-50, 50]
         x2 in [-50, 50]
         x3 in [-50, 50]
[init]   x1 = 15
         x2 = 15
         x3 = 36
[flow]   x1' = u1*(x2 - x1)
         x2' = x1*(u2 - x3) - x2
         x3' = x1*x2 - u3*x3
";

const TIMER: &str = "\
# The identity signal x(t) = t.
[vars] x in [0, 10]
[init] x = 0
[flow] x' = 1
";

/// Source text of a bundled model.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "rotation" => Some(ROTATION),
        "lorenz" => Some(LORENZ),
        "timer" => Some(TIMER),
        _ => None,
    }
}

/// A bundled model by name.
pub fn builtin(name: &str) -> Option<ContinuousSystem> {
    builtin_source(name).map(|src| parse_model(src).expect("bundled model parses"))
}

pub fn rotation() -> ContinuousSystem {
    builtin("rotation").unwrap()
}

pub fn lorenz() -> ContinuousSystem {
    builtin("lorenz").unwrap()
}

pub fn timer() -> ContinuousSystem {
    builtin("timer").unwrap()
}
