use serde_json::{json, Map, Value};

/// Converts an Overpass `[out:json]` response produced with `out geom` into a
/// GeoJSON FeatureCollection. Ways become LineStrings carrying their tags as
/// properties; nodes and relations are dropped.
///
/// Returns `None` when `doc` has no `elements` array.
pub fn overpass_to_geojson(doc: &Value) -> Option<Value> {
    let elements = doc.get("elements")?.as_array()?;
    let features: Vec<Value> = elements
        .iter()
        .filter(|e| e.get("type").and_then(Value::as_str) == Some("way"))
        .filter_map(|way| {
            let coords: Vec<Value> = way
                .get("geometry")?
                .as_array()?
                .iter()
                .filter_map(|p| Some(json!([p.get("lon")?.as_f64()?, p.get("lat")?.as_f64()?])))
                .collect();
            if coords.len() < 2 {
                return None;
            }
            let id = way.get("id").map(|v| format!("way/{v}")).unwrap_or_default();
            let props = way
                .get("tags")
                .and_then(Value::as_object)
                .cloned()
                .unwrap_or_else(Map::new);
            Some(json!({
                "type": "Feature",
                "id": id,
                "properties": props,
                "geometry": {"type": "LineString", "coordinates": coords},
            }))
        })
        .collect();
    Some(json!({"type": "FeatureCollection", "features": features}))
}
