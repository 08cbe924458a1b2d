use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use xenakis_core::ingest::{FetchError, ParseError};
use xenakis_core::pipeline::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub retry_after_s: Option<u64>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            retry_after_s: None,
        }
    }

    pub fn bad_params(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_params", message)
    }

    pub fn bad_bbox(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_bbox", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub(crate) fn malformed(e: &ParseError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_document", e.to_string())
    }
}

impl From<FetchError> for ApiError {
    fn from(e: FetchError) -> Self {
        match e {
            FetchError::InvalidBoundingBox(g) => Self::bad_bbox(g.to_string()),
            FetchError::RateLimited { retry_after } => Self {
                retry_after_s: retry_after.map(|d| d.as_secs()),
                ..Self::new(StatusCode::TOO_MANY_REQUESTS, "rate_limited", "map data provider rate limited the request")
            },
            FetchError::CacheCorrupt { refetch, .. } => Self::from(*refetch),
            FetchError::Io(io) => Self::internal(format!("region cache: {io}")),
            FetchError::Network(_) => Self::new(StatusCode::BAD_GATEWAY, "provider_unreachable", e.to_string()),
            FetchError::InvalidEndpoint(_) | FetchError::Provider { .. } => {
                Self::new(StatusCode::BAD_GATEWAY, "provider_error", e.to_string())
            }
        }
    }
}

/// Pipeline failures on a document that came from the provider.
pub(crate) fn from_provider_doc(e: PipelineError) -> ApiError {
    match e {
        PipelineError::Parse(p) => ApiError::new(
            StatusCode::BAD_GATEWAY,
            "provider_error",
            format!("provider sent an unusable document: {p}"),
        ),
        other => from_pipeline(other),
    }
}

pub(crate) fn from_pipeline(e: PipelineError) -> ApiError {
    match e {
        PipelineError::Parse(p) => ApiError::malformed(&p),
        PipelineError::Histogram(_) | PipelineError::Rhythm(_) | PipelineError::Synth(_) => {
            ApiError::bad_params(e.to_string())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let Some(s) = self.retry_after_s {
            body["retry_after_s"] = s.into();
        }
        let mut resp = (self.status, Json(body)).into_response();
        if let Some(s) = self.retry_after_s {
            resp.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(s));
        }
        resp
    }
}
