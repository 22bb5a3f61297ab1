pub mod distribution;
pub mod error;
pub mod observable;
pub mod rules;
pub mod state;
pub mod random;
pub mod pointer;
pub mod signaling;
pub mod cli;
