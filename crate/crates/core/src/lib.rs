//! Exact solving, dataset generation and difficulty analysis for integer
//! arithmetic puzzles: reach a three-digit target from a bag of six numbers
//! using `+ - * /` where every intermediate value is a positive integer.

pub mod engine;
pub mod solver;
pub mod dataset;
pub mod analysis;
pub mod verify;
