use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use thiserror::Error;
use vidseek_core::range_index::IndexError;
use vidseek_core::retrieval::RetrievalError;
use vidseek_core::{CatalogError, EngineError};

use crate::dto::ErrorBody;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("missing or invalid admin token")]
    Unauthorized,
    #[error("admin endpoints are disabled: no admin token is configured")]
    AdminDisabled,
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        Self::Engine(e.into())
    }
}

impl ApiError {
    pub fn status_and_kind(&self) -> (StatusCode, &'static str) {
        use StatusCode as S;
        match self {
            Self::Unauthorized => (S::UNAUTHORIZED, "Unauthorized"),
            Self::AdminDisabled => (S::FORBIDDEN, "AdminDisabled"),
            Self::BadRequest(_) => (S::BAD_REQUEST, "BadRequest"),
            Self::Internal(_) => (S::INTERNAL_SERVER_ERROR, "Internal"),
            Self::Engine(e) => engine_status(e),
        }
    }
}

fn engine_status(e: &EngineError) -> (StatusCode, &'static str) {
    use StatusCode as S;
    match e {
        EngineError::EmptyVideo => (S::BAD_REQUEST, "EmptyVideo"),
        EngineError::EmptyCatalog => (S::CONFLICT, "EmptyCatalog"),
        EngineError::CorruptImage { .. } => (S::BAD_REQUEST, "CorruptImage"),
        EngineError::Texture { .. } => (S::BAD_REQUEST, "ImageTooSmall"),
        EngineError::MissingQuery(_) => (S::BAD_REQUEST, "MissingQuery"),
        EngineError::Labels { .. } => (S::BAD_REQUEST, "Labels"),
        EngineError::ZeroK => (S::BAD_REQUEST, "ZeroK"),
        EngineError::Io { .. } => (S::INTERNAL_SERVER_ERROR, "Io"),
        EngineError::Aborted { .. } => (S::INTERNAL_SERVER_ERROR, "Aborted"),
        EngineError::Catalog(c) => match c {
            CatalogError::UnknownVideo(_) => (S::NOT_FOUND, "UnknownVideo"),
            CatalogError::UnknownFrame(_) => (S::NOT_FOUND, "UnknownFrame"),
            CatalogError::EmptyVideo => (S::BAD_REQUEST, "EmptyVideo"),
            CatalogError::NameRequired => (S::BAD_REQUEST, "NameRequired"),
            CatalogError::InvalidName => (S::BAD_REQUEST, "InvalidName"),
            CatalogError::Index(IndexError::DuplicateFrame(_)) => (S::CONFLICT, "DuplicateFrame"),
            CatalogError::Index(_) => (S::INTERNAL_SERVER_ERROR, "Index"),
            CatalogError::Io { .. } => (S::INTERNAL_SERVER_ERROR, "Io"),
            CatalogError::Corrupt { .. } => (S::INTERNAL_SERVER_ERROR, "Corrupt"),
            CatalogError::Aborted { .. } => (S::INTERNAL_SERVER_ERROR, "Aborted"),
        },
        EngineError::Retrieval(r) => match r {
            RetrievalError::ZeroK => (S::BAD_REQUEST, "ZeroK"),
            RetrievalError::NoQueries => (S::BAD_REQUEST, "NoQueries"),
            RetrievalError::InvalidWeights(_) => (S::BAD_REQUEST, "InvalidWeights"),
            RetrievalError::NoCandidates => (S::CONFLICT, "EmptyCatalog"),
            RetrievalError::DimensionMismatch { .. } => (S::INTERNAL_SERVER_ERROR, "DimensionMismatch"),
        },
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = self.status_and_kind();
        let body = ErrorBody {
            error: kind,
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}
