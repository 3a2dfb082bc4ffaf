//! A laboratory for concurrent and resettable zero-knowledge proofs.
//!
//! The protocol is a commitment preamble followed by a constant-round
//! 3-coloring proof body. Around it sit a multi-session adversary model, a
//! black-box rewinding simulator with a fixed recursive schedule, and tools
//! that check the combinatorial and probabilistic facts the simulator relies
//! on.

pub mod analysis;
pub mod bits;
pub mod body;
pub mod cli;
pub mod commitments;
pub mod compiler;
pub mod graph;
pub mod message;
pub mod preamble;
pub mod resettable;
pub mod scheduler;
pub mod seed;
pub mod simulator;
