use std::collections::BTreeMap;

use serde_json::{Map, Value};
use thiserror::Error;

use super::{GeoPoint, StreetFeature};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    /// The input is not a GeoJSON document we can read. `line`/`column` come
    /// from the JSON tokenizer, `path` locates structural problems.
    #[error("malformed GeoJSON at {}: {message}", location(.line, .column, .path))]
    MalformedDocument {
        message: String,
        line: Option<usize>,
        column: Option<usize>,
        path: String,
    },
}

fn location(line: &Option<usize>, column: &Option<usize>, path: &str) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!("line {l}, column {c}"),
        _ => path.to_string(),
    }
}

impl ParseError {
    fn at(path: &str, message: impl Into<String>) -> Self {
        ParseError::MalformedDocument {
            message: message.into(),
            line: None,
            column: None,
            path: path.to_string(),
        }
    }
}

/// Streets extracted from one document plus what was left behind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseReport {
    pub features: Vec<StreetFeature>,
    /// Features or member lines that did not become a street.
    pub skipped: usize,
    /// Skip tally keyed by geometry type (`"Point"`, `"null"`, `"degenerate"`, ...).
    pub skipped_by_type: BTreeMap<String, usize>,
}

impl ParseReport {
    fn skip(&mut self, what: &str) {
        self.skipped += 1;
        *self.skipped_by_type.entry(what.to_string()).or_default() += 1;
    }
}

/// Parses raw bytes, rejecting invalid UTF-8 with the offending byte offset.
pub fn parse_feature_collection_bytes(bytes: &[u8]) -> Result<ParseReport, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::MalformedDocument {
        message: format!("invalid UTF-8 at byte offset {}", e.valid_up_to()),
        line: None,
        column: None,
        path: format!("byte {}", e.valid_up_to()),
    })?;
    parse_feature_collection(text)
}

/// Parses a FeatureCollection, a single Feature or a bare geometry.
pub fn parse_feature_collection(text: &str) -> Result<ParseReport, ParseError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ParseError::MalformedDocument {
        message: e.to_string(),
        line: Some(e.line()),
        column: Some(e.column()),
        path: "$".into(),
    })?;
    let mut report = ParseReport::default();
    let obj = as_object(&root, "$")?;
    match type_of(obj, "$")? {
        "FeatureCollection" => {
            let features = obj
                .get("features")
                .ok_or_else(|| ParseError::at("$", "FeatureCollection without \"features\""))?
                .as_array()
                .ok_or_else(|| ParseError::at("$.features", "\"features\" must be an array"))?;
            for (i, f) in features.iter().enumerate() {
                feature(f, &format!("$.features[{i}]"), i, &mut report)?;
            }
        }
        "Feature" => feature(&root, "$", 0, &mut report)?,
        _ => geometry(obj, "$", "geometry-0", "unknown", &mut report)?,
    }
    Ok(report)
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ParseError> {
    v.as_object()
        .ok_or_else(|| ParseError::at(path, "expected a JSON object"))
}

fn type_of<'a>(obj: &'a Map<String, Value>, path: &str) -> Result<&'a str, ParseError> {
    obj.get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| ParseError::at(path, "missing string member \"type\""))
}

fn feature(v: &Value, path: &str, index: usize, report: &mut ParseReport) -> Result<(), ParseError> {
    let obj = as_object(v, path)?;
    let ty = type_of(obj, path)?;
    if ty != "Feature" {
        return Err(ParseError::at(path, format!("expected a Feature, found {ty:?}")));
    }
    let properties = match obj.get("properties") {
        None | Some(Value::Null) => None,
        Some(Value::Object(p)) => Some(p),
        Some(_) => {
            return Err(ParseError::at(
                &format!("{path}.properties"),
                "\"properties\" must be an object or null",
            ))
        }
    };
    let id = feature_id(obj, properties).unwrap_or_else(|| format!("feature-{index}"));
    let kind = properties
        .and_then(|p| p.get("highway"))
        .and_then(Value::as_str)
        .unwrap_or("unknown");
    match obj.get("geometry") {
        None => Err(ParseError::at(path, "Feature without \"geometry\" member")),
        Some(Value::Null) => {
            report.skip("null");
            Ok(())
        }
        Some(g) => {
            let gpath = format!("{path}.geometry");
            geometry(as_object(g, &gpath)?, &gpath, &id, kind, report)
        }
    }
}

fn feature_id(obj: &Map<String, Value>, properties: Option<&Map<String, Value>>) -> Option<String> {
    let from_props = properties.and_then(|p| p.get("@id").or_else(|| p.get("id")));
    match obj.get("id").or(from_props)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn geometry(
    obj: &Map<String, Value>,
    path: &str,
    id: &str,
    kind: &str,
    report: &mut ParseReport,
) -> Result<(), ParseError> {
    let ty = type_of(obj, path)?;
    let coords = || {
        obj.get("coordinates")
            .ok_or_else(|| ParseError::at(path, format!("{ty} without \"coordinates\"")))
    };
    let cpath = format!("{path}.coordinates");
    match ty {
        "LineString" => {
            let line = line_string(coords()?, &cpath)?;
            push_line(report, id.to_string(), kind, line);
        }
        "MultiLineString" => {
            let members = array(coords()?, &cpath)?;
            for (j, member) in members.iter().enumerate() {
                let line = line_string(member, &format!("{cpath}[{j}]"))?;
                push_line(report, format!("{id}#{j}"), kind, line);
            }
        }
        "GeometryCollection" => {
            let members = obj
                .get("geometries")
                .ok_or_else(|| ParseError::at(path, "GeometryCollection without \"geometries\""))?;
            let gpath = format!("{path}.geometries");
            for (j, g) in array(members, &gpath)?.iter().enumerate() {
                let mpath = format!("{gpath}[{j}]");
                geometry(as_object(g, &mpath)?, &mpath, &format!("{id}#{j}"), kind, report)?;
            }
        }
        "Point" | "MultiPoint" | "Polygon" | "MultiPolygon" => {
            let depth = match ty {
                "Point" => 0,
                "MultiPoint" => 1,
                "Polygon" => 2,
                _ => 3,
            };
            nested_positions(coords()?, depth, &cpath)?;
            report.skip(ty);
        }
        other => return Err(ParseError::at(path, format!("unknown geometry type {other:?}"))),
    }
    Ok(())
}

fn push_line(report: &mut ParseReport, id: String, kind: &str, mut path: Vec<GeoPoint>) {
    path.dedup();
    if path.len() < 2 {
        report.skip("degenerate");
        return;
    }
    report.features.push(StreetFeature {
        id,
        kind: kind.to_string(),
        path,
    });
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ParseError> {
    v.as_array()
        .ok_or_else(|| ParseError::at(path, "expected an array"))
}

fn line_string(v: &Value, path: &str) -> Result<Vec<GeoPoint>, ParseError> {
    let positions = array(v, path)?;
    if positions.len() < 2 {
        return Err(ParseError::at(path, "a LineString needs at least two positions"));
    }
    positions
        .iter()
        .enumerate()
        .map(|(i, p)| position(p, &format!("{path}[{i}]")))
        .collect()
}

/// `[lon, lat, (alt)]`
fn position(v: &Value, path: &str) -> Result<GeoPoint, ParseError> {
    let items = array(v, path)?;
    if items.len() < 2 {
        return Err(ParseError::at(path, "a position needs longitude and latitude"));
    }
    let num = |i: usize| {
        items[i]
            .as_f64()
            .ok_or_else(|| ParseError::at(path, "position members must be numbers"))
    };
    let (lon, lat) = (num(0)?, num(1)?);
    GeoPoint::new(lat, lon).map_err(|e| ParseError::at(path, e.to_string()))
}

fn nested_positions(v: &Value, depth: usize, path: &str) -> Result<(), ParseError> {
    if depth == 0 {
        return position(v, path).map(|_| ());
    }
    for (i, item) in array(v, path)?.iter().enumerate() {
        nested_positions(item, depth - 1, &format!("{path}[{i}]"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_doc(coords: &str) -> String {
        format!(
            r#"{{"type":"FeatureCollection","features":[{{"type":"Feature","properties":{{"highway":"residential"}},"geometry":{{"type":"LineString","coordinates":{coords}}}}}]}}"#
        )
    }

    #[test]
    fn single_linestring() {
        let r = parse_feature_collection(&line_doc("[[0,0],[0,0.001],[0.001,0.001]]")).unwrap();
        assert_eq!(r.features.len(), 1);
        assert_eq!(r.features[0].path.len(), 3);
        assert_eq!(r.features[0].kind, "residential");
        assert_eq!(r.skipped, 0);
    }

    #[test]
    fn point_skipped_multiline_split() {
        let doc = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[1,2]}},
            {"type":"Feature","id":7,"properties":{"highway":"primary"},"geometry":{"type":"MultiLineString","coordinates":[[[0,0],[0,1]],[[1,1],[2,2]]]}}
        ]}"#;
        let r = parse_feature_collection(doc).unwrap();
        assert_eq!(r.features.len(), 2);
        assert_eq!(r.skipped, 1);
        assert_eq!(r.skipped_by_type["Point"], 1);
        assert_eq!(r.features[0].id, "7#0");
        assert_eq!(r.features[1].id, "7#1");
    }

    /// Reference dedup: keep a point only when it differs from the last kept one.
    fn oracle_dedup(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &p in points {
            if out.last() != Some(&p) {
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn consecutive_duplicates_removed() {
        let raw = [(0.0, 0.0), (0.0, 0.001), (0.0, 0.001), (0.001, 0.001)];
        let expected = oracle_dedup(&raw);
        assert_eq!(expected.len(), raw.len() - 1);
        let r = parse_feature_collection(&line_doc("[[0,0],[0.001,0],[0.001,0],[0.001,0.001]]")).unwrap();
        let got: Vec<(f64, f64)> = r.features[0].path.iter().map(|p| (p.lat, p.lon)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn all_identical_points_is_degenerate() {
        let r = parse_feature_collection(&line_doc("[[1,1],[1,1],[1,1]]")).unwrap();
        assert!(r.features.is_empty());
        assert_eq!(r.skipped_by_type["degenerate"], 1);
    }

    #[test]
    fn missing_highway_is_unknown_and_ids_default() {
        let doc = r#"{"type":"Feature","properties":null,"geometry":{"type":"LineString","coordinates":[[0,0],[1,1]]}}"#;
        let r = parse_feature_collection(doc).unwrap();
        assert_eq!(r.features[0].kind, "unknown");
        assert_eq!(r.features[0].id, "feature-0");
    }

    #[test]
    fn bare_geometry_and_collection() {
        let r = parse_feature_collection(r#"{"type":"LineString","coordinates":[[0,0],[1,1]]}"#).unwrap();
        assert_eq!(r.features.len(), 1);
        let doc = r#"{"type":"GeometryCollection","geometries":[
            {"type":"LineString","coordinates":[[0,0],[1,1]]},
            {"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}]}"#;
        let r = parse_feature_collection(doc).unwrap();
        assert_eq!(r.features.len(), 1);
        assert_eq!(r.skipped_by_type["Polygon"], 1);
    }

    #[test]
    fn empty_collection_is_fine() {
        let r = parse_feature_collection(r#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        assert!(r.features.is_empty());
    }

    #[test]
    fn syntax_error_has_line_context() {
        let err = parse_feature_collection("{\n  \"type\": \"FeatureCollection\",\n  \"features\": [\n").unwrap_err();
        let ParseError::MalformedDocument { line, .. } = err;
        assert_eq!(line, Some(4));
    }

    #[test]
    fn structural_error_has_path() {
        let err = parse_feature_collection(&line_doc("[[0,0],[\"x\",1]]")).unwrap_err();
        let ParseError::MalformedDocument { path, .. } = err;
        assert_eq!(path, "$.features[0].geometry.coordinates[1]");
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let err = parse_feature_collection_bytes(b"{\"type\":\xff}").unwrap_err();
        assert!(err.to_string().contains("offset 8"), "{err}");
    }
}
