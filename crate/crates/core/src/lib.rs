//! Interval-certified monitoring of signal temporal logic properties over
//! solutions of parameterized ODE systems.

pub mod batch;
pub mod integrator;
pub mod interval;
pub mod model;
pub mod monitor;
pub mod stl;
pub mod syntax;
pub mod timesets;
