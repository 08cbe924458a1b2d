use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use xenakis_core::ingest::{provider_reachable, BoundingBox};
use xenakis_core::orientation::{HistogramDocument, DEFAULT_BIN_COUNT};
use xenakis_core::pipeline::{histogram_from_geojson, sonify_geojson, PipelineConfig};
use xenakis_core::synth::encode_wav;

use crate::api::{check_bins, loop_id, loop_url, SonifyRequest, SonifyResult};
use crate::error::{from_pipeline, from_provider_doc, ApiError};
use crate::store::StoredLoop;
use crate::AppState;

type Shared = State<Arc<AppState>>;

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn fetch_document(state: &Arc<AppState>, bbox: BoundingBox) -> Result<String, ApiError> {
    let state = state.clone();
    blocking(move || {
        state
            .fetcher
            .fetch(&bbox, &state.config.provider_url)
            .map_err(ApiError::from)
    })
    .await
}

pub async fn histogram(State(state): Shared, Query(q): Query<HashMap<String, String>>) -> Result<Response, ApiError> {
    let coord = |name: &str| -> Result<f64, ApiError> {
        let v = q
            .get(name)
            .ok_or_else(|| ApiError::bad_bbox(format!("missing query parameter {name}")))?;
        v.trim()
            .parse::<f64>()
            .map_err(|_| ApiError::bad_bbox(format!("{name}={v:?} is not a number")))
    };
    let bbox = BoundingBox {
        min_lon: coord("min_lon")?,
        min_lat: coord("min_lat")?,
        max_lon: coord("max_lon")?,
        max_lat: coord("max_lat")?,
    };
    bbox.validate().map_err(|e| ApiError::bad_bbox(e.to_string()))?;
    let bins = match q.get("bins") {
        None => DEFAULT_BIN_COUNT,
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| ApiError::bad_params(format!("bins={v:?} is not an integer")))?,
    };
    check_bins(bins)?;

    let doc = fetch_document(&state, bbox).await?;
    let body = blocking(move || {
        let cfg = PipelineConfig {
            bins,
            ..PipelineConfig::default()
        };
        let (hist, _) = histogram_from_geojson(&doc, &cfg).map_err(from_provider_doc)?;
        Ok(HistogramDocument::new(&hist).to_json())
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

pub async fn sonify(State(state): Shared, body: Result<Bytes, BytesRejection>) -> Result<Json<SonifyResult>, ApiError> {
    let body = body.map_err(|e| {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "payload_too_large",
                format!("request body exceeds {} bytes", state.config.max_body_bytes),
            )
        } else {
            ApiError::bad_params(e.body_text())
        }
    })?;
    let req: SonifyRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_params(format!("request body: {e}")))?;
    let cfg = req.pipeline_config()?;
    let inline = req.inline_document()?;

    let (doc, from_provider) = match (req.bbox, inline) {
        (Some(_), Some(_)) => return Err(ApiError::bad_params("give either bbox or geojson, not both")),
        (None, None) => return Err(ApiError::bad_params("one of bbox or geojson is required")),
        (None, Some(doc)) => (doc, false),
        (Some(b), None) => (fetch_document(&state, b.to_bbox()?).await?, true),
    };

    let id = loop_id(&cfg, &doc);
    if let Some(hit) = state.loops.get(&id) {
        return Ok(Json(hit.result.clone()));
    }

    let state2 = state.clone();
    let stored = blocking(move || {
        let s = sonify_geojson(&doc, &cfg).map_err(|e| {
            if from_provider {
                from_provider_doc(e)
            } else {
                from_pipeline(e)
            }
        })?;
        let wav = Bytes::from(encode_wav(&s.audio));
        state2.loops.count_render();
        let result = SonifyResult {
            histogram: HistogramDocument::new(&s.histogram),
            pattern_text: s.pattern.text(),
            pattern: s.pattern,
            loop_url: loop_url(&id),
            loop_id: id.clone(),
            timing: s.timing,
            summary: s.summary,
        };
        Ok(state2.loops.insert(id, StoredLoop { wav, result }))
    })
    .await?;
    Ok(Json(stored.result.clone()))
}

pub async fn loop_wav(State(state): Shared, Path(file): Path<String>) -> Result<Response, ApiError> {
    let id = file.strip_suffix(".wav").unwrap_or(&file);
    let entry = state
        .loops
        .get(id)
        .ok_or_else(|| ApiError::not_found(format!("no loop with id {id:?} (unknown or evicted)")))?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], entry.wav.clone()).into_response())
}

pub async fn healthz(State(state): Shared) -> Json<serde_json::Value> {
    let url = state.config.provider_url.clone();
    let reachable = tokio::task::spawn_blocking(move || provider_reachable(&url, Duration::from_millis(500)))
        .await
        .unwrap_or(false);
    let cache = state.fetcher.cache().stats();
    Json(json!({
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "cache_stats": cache,
        "loop_store": {
            "entries": state.loops.len(),
            "capacity": state.loops.capacity(),
            "renders": state.loops.renders(),
        },
        "provider_reachable": reachable,
    }))
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}
