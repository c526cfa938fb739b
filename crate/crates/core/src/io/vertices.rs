//! Whitespace-separated `x y z` vertex lists; `#` starts a comment.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;

pub fn read_vertices(path: impl AsRef<Path>) -> Result<Vec<Point3>> {
    parse_vertices(&std::fs::read_to_string(path)?)
}

pub fn parse_vertices(text: &str) -> Result<Vec<Point3>> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<(usize, &str)> = content
            .split_whitespace()
            .map(|f| (f.as_ptr() as usize - raw.as_ptr() as usize + 1, f))
            .collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            let column = fields.get(3).map_or(content.trim_end().len() + 1, |f| f.0);
            return Err(Error::parse(line, column, format!("expected 3 coordinates, found {}", fields.len())));
        }
        let mut c = [0.0; 3];
        for (k, (column, field)) in fields.iter().enumerate() {
            c[k] = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, *column, format!("invalid coordinate {field:?}")))?;
        }
        points.push(Point3::from(c));
    }
    Ok(points)
}

pub fn write_vertices(points: &[Point3]) -> String {
    points.iter().map(|p| format!("{} {} {}\n", p.x, p.y, p.z)).collect()
}
