//! Enumeration pipeline for arithmetic Kleinian groups generated by two
//! elliptic elements of orders `p, q >= 6`.

pub mod dense;
pub mod exact;
pub mod field;
pub mod numtheory;
pub mod geometry;
pub mod sieve;
pub mod coeffsearch;
pub mod polyfilter;
pub mod roots;
pub mod linked;
pub mod invariants;
pub mod pipeline;
