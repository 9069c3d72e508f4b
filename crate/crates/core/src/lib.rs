pub mod cli;
pub mod linalg;
pub mod metrics;
pub mod mlp;
pub mod separation;
pub mod signal;
pub mod source_model;
pub mod stft;
