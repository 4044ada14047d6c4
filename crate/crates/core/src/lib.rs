pub mod assumptions;
pub mod diagnostics;
pub mod discretization;
pub mod kernels;
pub mod volterra;
pub mod profile;
pub mod quad;
pub mod special;
pub mod stepper;
pub mod cli;
pub mod config;
