pub mod catalog;
pub mod certificates;
pub mod chart;
pub mod exact;
pub mod grassmann;
pub mod lie;
pub mod limits;
pub mod linalg;
pub mod selftest;
