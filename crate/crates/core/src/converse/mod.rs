pub mod aligned;
pub mod rank;
