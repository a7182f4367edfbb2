//! HTTP API and command-line plumbing around [`vidseek_core::Engine`].

pub mod api;
pub mod dto;
pub mod error;
pub mod params;
pub mod render;

pub use api::{router, AppState, ADMIN_HEADER};
pub use error::ApiError;
