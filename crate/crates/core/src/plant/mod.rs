//! Plants, closed-loop simulation, trace metrics and shipped scenarios.

pub mod metrics;
pub mod rcci;
pub mod scenarios;
pub mod sim;
