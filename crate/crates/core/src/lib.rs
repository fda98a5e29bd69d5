//! Simulation of PT-symmetric non-Hermitian qubit chains under quantum annealing.

pub mod annealing;
pub mod dynamics;
pub mod effective;
pub mod lzs;
pub mod model;
pub mod operator;
pub mod spectrum;
pub mod sweep_io;
