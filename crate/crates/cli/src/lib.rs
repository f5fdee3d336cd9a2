//! Command-line driver: single solves, partition sweeps and benchmark tables.

pub mod app;
pub mod record;
pub mod run;
