//! Numerical laboratory for the large-parameter standard map and its
//! slow-fast relative.

pub mod geometry;
pub mod maps;
pub mod numerics;
pub mod pairs;
pub mod stats;
