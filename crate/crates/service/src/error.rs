use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use fsit_core::io::FormatError;
use fsit_core::sit::SitError;
use serde::Serialize;

/// An error response: status code, message and the request field at fault.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub field: Option<String>,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

impl ApiError {
    pub fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            field: Some(field.into()),
            message: message.to_string(),
        }
    }

    pub fn unknown_session(id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            field: None,
            message: format!("no session `{id}`"),
        }
    }

    pub fn busy() -> Self {
        Self {
            status: StatusCode::CONFLICT,
            field: None,
            message: "another request is modifying this session".into(),
        }
    }

    /// A format error raised while reading the body member `prefix`.
    pub fn format(prefix: &str, e: FormatError) -> Self {
        let field = match e.field() {
            Some(f) if prefix.is_empty() => f.to_string(),
            Some(".") | None => prefix.to_string(),
            Some(f) => format!("{prefix}.{f}"),
        };
        Self::invalid(field, e)
    }

    pub fn sit(field: &str, e: SitError) -> Self {
        Self::invalid(field, e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            error: &self.message,
            field: self.field.as_deref(),
        };
        (self.status, Json(body)).into_response()
    }
}
