pub mod cli;
pub mod control;
pub mod properties;
pub mod kernel;
pub mod perception;
pub mod scenario;
pub mod testgen;
