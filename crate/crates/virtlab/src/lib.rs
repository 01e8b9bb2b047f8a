//! The virtual laboratory: a deterministic synthetic g-factor surrogate
//! exposed both in-process and over HTTP, with a matching blocking client.

pub mod client;
pub mod server;

pub use client::{LabClient, LabClientError};
pub use helixlab_core::surrogate::{evaluate_g_factor, PropertyValue, Surrogate, SurrogateConfig};
pub use server::{serve, LabServerHandle, ServeError};
