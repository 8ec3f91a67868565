//! Exact degree computations and random walks in the plane Cremona group.

pub mod cremona;
pub mod dyndeg;
pub mod exactpoly;
pub mod families;
pub mod fast;
pub mod limitlaw;
pub mod numeric;
pub mod parse;
pub mod ratpoly;
pub mod walk;
