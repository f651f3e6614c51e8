pub mod budget;
pub mod cocycle;
pub mod directions;
pub mod error;
pub mod geometry;
pub mod map;

pub mod leaf;
pub mod fixedpoint;
pub mod report;
pub mod cli;
