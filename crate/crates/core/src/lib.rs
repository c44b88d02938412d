pub mod dice;
pub mod homeo;
pub mod partition;
pub mod poly;
pub mod rational;
pub mod rng;
pub mod synth;
pub mod tournament;
