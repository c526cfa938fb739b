//! Scene and annotation files (JSON).
//!
//! A scene holds the probe and phantom models and, optionally, the
//! generative parameters of a synthetic session and the annotations of one
//! trial. Errors point into the document with JSON-pointer paths.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{LabeledPointSet, Point3, RigidTransform, Vec3};
use crate::io::{check_schema_version, json_error_to_schema, parse_json, to_json_string, SCHEMA_VERSION};
use crate::metrics::AnnotationSet;
use crate::probe::{
    PhantomModel, ProbeModel, DEFAULT_PHANTOM_FIDUCIALS, DEFAULT_PHANTOM_MARKERS, DEFAULT_PROBE_MARKERS,
};
use crate::synth::scene::{SceneConfig, SurfaceSphere};

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub config: SceneConfig,
    pub annotations: Option<AnnotationSet>,
}

pub fn read_scene(path: impl AsRef<Path>) -> Result<Scene> {
    parse_scene(&std::fs::read_to_string(path)?)
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let doc = parse_json(text)?;
    check_schema_version(&doc)?;
    let root = object(&doc, "")?;

    let probe_v = required(root, "probe", "")?;
    let probe_obj = object(probe_v, "/probe")?;
    let probe_markers = point_set(required(probe_obj, "markers", "/probe")?, "/probe/markers")?;
    let tip = point(required(probe_obj, "tip", "/probe")?, "/probe/tip")?;
    let expected = count(probe_obj, "expected_markers", "/probe", DEFAULT_PROBE_MARKERS)?;
    let probe = ProbeModel::new(probe_markers, tip, expected).map_err(|e| prefix(e, "/probe"))?;

    let phantom_v = required(root, "phantom", "")?;
    let ph = object(phantom_v, "/phantom")?;
    let markers = point_set(required(ph, "markers", "/phantom")?, "/phantom/markers")?;
    let fiducials = point_set(required(ph, "fiducials", "/phantom")?, "/phantom/fiducials")?;
    let phantom = PhantomModel::new(
        markers,
        fiducials,
        count(ph, "expected_markers", "/phantom", DEFAULT_PHANTOM_MARKERS)?,
        count(ph, "expected_fiducials", "/phantom", DEFAULT_PHANTOM_FIDUCIALS)?,
    )
    .map_err(|e| prefix(e, "/phantom"))?;

    let mut config = SceneConfig::with_models(probe, phantom);
    if let Some(v) = root.get("marker_noise_sd") {
        config.marker_noise_sd = non_negative(v, "/marker_noise_sd")?;
    }
    if let Some(v) = root.get("tip_window_length") {
        config.tip_window_length = positive_count(v, "/tip_window_length")?;
    }
    if let Some(v) = root.get("transit_frames") {
        config.transit_frames = as_count(v, "/transit_frames")?;
    }
    if let Some(v) = root.get("seed") {
        config.seed = v.as_u64().ok_or_else(|| Error::schema("/seed", "expected an unsigned integer"))?;
    }
    if let Some(v) = root.get("frame_rate_hz") {
        let rate = non_negative(v, "/frame_rate_hz")?;
        if rate == 0.0 {
            return Err(Error::schema("/frame_rate_hz", "must be positive"));
        }
        config.frame_rate_hz = rate;
    }
    if let Some(v) = root.get("hand_tremor_sd") {
        config.hand_tremor_sd = non_negative(v, "/hand_tremor_sd")?;
    }
    if let Some(v) = root.get("hologram_displacement") {
        config.hologram_displacement = transform(v, "/hologram_displacement")?;
    }
    if let Some(v) = root.get("phantom_in_lab") {
        config.phantom_in_lab = transform(v, "/phantom_in_lab")?;
    }
    if let Some(v) = root.get("surface") {
        let s: SurfaceSphere = serde_json::from_value(v.clone()).map_err(|e| json_error_to_schema("/surface", e))?;
        if s.radius.is_nan() || s.radius <= 0.0 {
            return Err(Error::schema("/surface/radius", "must be positive"));
        }
        config.surface = s;
    }
    if let Some(v) = root.get("view_direction") {
        let d = point(v, "/view_direction")?.coords;
        if d.norm() == 0.0 {
            return Err(Error::schema("/view_direction", "must be non-zero"));
        }
        config.view_direction = d;
    }

    let annotations = match root.get("annotations") {
        Some(v) => Some(annotation_set(v, "/annotations")?),
        None => None,
    };
    Ok(Scene { config, annotations })
}

/// Canonical scene document, every generative parameter spelled out.
pub fn scene_to_json(scene: &Scene) -> Result<String> {
    let c = &scene.config;
    let points = |set: &LabeledPointSet| serde_json::to_value(set).expect("serializable");
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "probe": {
            "expected_markers": c.probe.markers_ct().len(),
            "markers": points(c.probe.markers_ct()),
            "tip": coords(c.probe.tip_ct()),
        },
        "phantom": {
            "expected_markers": c.phantom.markers_ct().len(),
            "expected_fiducials": c.phantom.fiducials_ct().len(),
            "markers": points(c.phantom.markers_ct()),
            "fiducials": points(c.phantom.fiducials_ct()),
        },
        "marker_noise_sd": c.marker_noise_sd,
        "tip_window_length": c.tip_window_length,
        "transit_frames": c.transit_frames,
        "frame_rate_hz": c.frame_rate_hz,
        "hand_tremor_sd": c.hand_tremor_sd,
        "seed": c.seed,
        "hologram_displacement": c.hologram_displacement,
        "phantom_in_lab": c.phantom_in_lab,
        "surface": c.surface,
        "view_direction": [c.view_direction.x, c.view_direction.y, c.view_direction.z],
    });
    if let Some(a) = &scene.annotations {
        doc["annotations"] = serde_json::to_value(a).expect("serializable");
    }
    to_json_string(&doc)
}

pub fn write_scene_file(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scene_to_json(scene)?)?;
    Ok(())
}

#[derive(Serialize)]
struct AnnotationDocument<'a> {
    schema_version: u32,
    #[serde(flatten)]
    set: &'a AnnotationSet,
}

pub fn annotations_to_json(set: &AnnotationSet) -> Result<String> {
    to_json_string(&AnnotationDocument {
        schema_version: SCHEMA_VERSION,
        set,
    })
}

pub fn write_annotations_file(set: &AnnotationSet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, annotations_to_json(set)?)?;
    Ok(())
}

/// Reads an annotation file, or the `annotations` member of a scene file.
pub fn read_annotations(path: impl AsRef<Path>) -> Result<AnnotationSet> {
    parse_annotations(&std::fs::read_to_string(path)?)
}

pub fn parse_annotations(text: &str) -> Result<AnnotationSet> {
    let doc = parse_json(text)?;
    check_schema_version(&doc)?;
    let root = object(&doc, "")?;
    match root.get("annotations") {
        Some(Value::Object(_)) => annotation_set(&root["annotations"], "/annotations"),
        Some(Value::Array(_)) => annotation_set(&doc, ""),
        Some(_) => Err(Error::schema("/annotations", "expected an array or object")),
        None => Err(Error::schema("/annotations", "missing")),
    }
}

fn annotation_set(v: &Value, path: &str) -> Result<AnnotationSet> {
    let set: AnnotationSet = serde_json::from_value(v.clone()).map_err(|e| json_error_to_schema(path, e))?;
    set.validate().map_err(|e| prefix(e, path))?;
    Ok(set)
}

fn prefix(e: Error, parent: &str) -> Error {
    match e {
        Error::Schema { path, reason } => Error::Schema {
            path: format!("{parent}{path}"),
            reason,
        },
        other => other,
    }
}

fn coords(p: &Point3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::schema(if path.is_empty() { "/" } else { path }, "expected an object"))
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, parent: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::schema(format!("{parent}/{key}"), "missing"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::schema(path, "expected a finite number"))
}

fn non_negative(v: &Value, path: &str) -> Result<f64> {
    let x = number(v, path)?;
    if x < 0.0 {
        return Err(Error::schema(path, "must be non-negative"));
    }
    Ok(x)
}

fn as_count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::schema(path, "expected a non-negative integer"))
}

fn positive_count(v: &Value, path: &str) -> Result<usize> {
    match as_count(v, path)? {
        0 => Err(Error::schema(path, "must be positive")),
        n => Ok(n),
    }
}

fn count(obj: &Map<String, Value>, key: &str, parent: &str, default: usize) -> Result<usize> {
    match obj.get(key) {
        Some(v) => as_count(v, &format!("{parent}/{key}")),
        None => Ok(default),
    }
}

fn point(v: &Value, path: &str) -> Result<Point3> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::schema(path, "expected [x, y, z]"))?;
    let mut c = [0.0; 3];
    for (i, x) in arr.iter().enumerate() {
        c[i] = number(x, &format!("{path}/{i}"))?;
    }
    Ok(Point3::from(c))
}

fn point_set(v: &Value, path: &str) -> Result<LabeledPointSet> {
    let arr = v.as_array().ok_or_else(|| Error::schema(path, "expected an array"))?;
    if arr.is_empty() {
        return Err(Error::schema(path, "empty"));
    }
    let mut entries: Vec<(String, Point3)> = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let here = format!("{path}/{i}");
        let obj = object(item, &here)?;
        let label = required(obj, "label", &here)?
            .as_str()
            .ok_or_else(|| Error::schema(format!("{here}/label"), "expected a string"))?;
        if entries.iter().any(|(l, _)| l == label) {
            return Err(Error::schema(format!("{here}/label"), format!("duplicate label {label:?}")));
        }
        let position = point(required(obj, "position", &here)?, &format!("{here}/position"))?;
        entries.push((label.to_string(), position));
    }
    LabeledPointSet::new(entries).map_err(|e| Error::schema(path, e.to_string()))
}

fn transform(v: &Value, path: &str) -> Result<RigidTransform> {
    let obj = object(v, path)?;
    let rot = required(obj, "rotation", path)?
        .as_array()
        .filter(|a| a.len() == 9)
        .ok_or_else(|| Error::schema(format!("{path}/rotation"), "expected 9 numbers, row-major"))?;
    let mut r = [0.0; 9];
    for (i, x) in rot.iter().enumerate() {
        r[i] = number(x, &format!("{path}/rotation/{i}"))?;
    }
    let t = point(required(obj, "translation", path)?, &format!("{path}/translation"))?;
    RigidTransform::new(nalgebra::Matrix3::from_row_slice(&r), Vec3::from(t.coords))
        .map_err(|e| Error::schema(path, e.to_string()))
}
