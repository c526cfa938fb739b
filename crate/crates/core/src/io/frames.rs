//! Marker-frame streams and their CSV form.
//!
//! One observation per row, header `frame,time,label,x,y,z`, millimeters.
//! Dropped markers are simply absent rows.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LabeledPoint, LabeledPointSet, Point3};

pub const FRAMES_HEADER: [&str; 6] = ["frame", "time", "label", "x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerFrame {
    pub frame_id: i64,
    /// Seconds.
    pub time: f64,
    pub observations: Vec<LabeledPoint>,
}

impl MarkerFrame {
    pub fn get(&self, label: &str) -> Option<&Point3> {
        self.observations
            .iter()
            .find(|o| o.label == label)
            .map(|o| &o.position)
    }

    /// Observations restricted to `labels`, or `None` if none are present.
    pub fn subset<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Option<LabeledPointSet> {
        let wanted: HashSet<&str> = labels.into_iter().collect();
        let entries: Vec<LabeledPoint> = self
            .observations
            .iter()
            .filter(|o| wanted.contains(o.label.as_str()))
            .cloned()
            .collect();
        LabeledPointSet::try_from(entries).ok()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkerFrameStream {
    pub frames: Vec<MarkerFrame>,
}

impl MarkerFrameStream {
    /// Validates strictly increasing frame ids and unique labels per frame.
    pub fn new(frames: Vec<MarkerFrame>) -> Result<Self> {
        for w in frames.windows(2) {
            if w[1].frame_id <= w[0].frame_id {
                return Err(Error::NonMonotonicFrames {
                    line: 0,
                    frame_id: w[1].frame_id,
                    previous: w[0].frame_id,
                });
            }
        }
        for f in &frames {
            let mut seen = HashSet::new();
            for o in &f.observations {
                if !seen.insert(o.label.as_str()) {
                    return Err(Error::InvalidPointSet(format!(
                        "duplicate label {:?} in frame {}",
                        o.label, f.frame_id
                    )));
                }
            }
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MarkerFrame> {
        self.frames.iter()
    }

    /// Frames whose id lies in `start..=end`.
    pub fn window(&self, start: i64, end: i64) -> impl Iterator<Item = &MarkerFrame> {
        self.frames
            .iter()
            .filter(move |f| f.frame_id >= start && f.frame_id <= end)
    }
}

/// A malformed row skipped in lenient mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Skip malformed rows and report them as diagnostics.
    #[default]
    Lenient,
    /// Fail on the first malformed row.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedFrames {
    pub stream: MarkerFrameStream,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn read_frames(path: impl AsRef<Path>, mode: ParseMode) -> Result<ParsedFrames> {
    let file = std::fs::File::open(path)?;
    parse_frames(file, mode)
}

pub fn parse_frames<R: Read>(reader: R, mode: ParseMode) -> Result<ParsedFrames> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::parse(0, 0, "no frames")),
        Some(r) => r.map_err(csv_error)?,
    };
    if header.iter().map(str::trim).ne(FRAMES_HEADER.iter().copied()) {
        return Err(Error::parse(
            1,
            1,
            format!("expected header `{}`", FRAMES_HEADER.join(",")),
        ));
    }

    let mut frames: Vec<MarkerFrame> = Vec::new();
    let mut labels_in_frame: HashSet<String> = HashSet::new();
    let mut diagnostics = Vec::new();

    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = match parse_row(&record) {
            Ok(row) => row,
            Err((column, reason)) => {
                if mode == ParseMode::Strict {
                    return Err(Error::parse(line, column, reason));
                }
                log::debug!("skipping line {line}: {reason}");
                diagnostics.push(Diagnostic { line, column, reason });
                continue;
            }
        };

        let starts_frame = frames.last().is_none_or(|f| f.frame_id != row.frame_id);
        if starts_frame {
            if let Some(prev) = frames.last() {
                if row.frame_id < prev.frame_id {
                    return Err(Error::NonMonotonicFrames {
                        line,
                        frame_id: row.frame_id,
                        previous: prev.frame_id,
                    });
                }
            }
            frames.push(MarkerFrame {
                frame_id: row.frame_id,
                time: row.time,
                observations: Vec::new(),
            });
            labels_in_frame.clear();
        }
        let frame = frames.last_mut().expect("pushed above");
        let problem = if frame.time != row.time {
            Some((2, format!("time {} differs from frame time {}", row.time, frame.time)))
        } else if labels_in_frame.contains(&row.label) {
            Some((3, format!("duplicate label {:?} in frame {}", row.label, row.frame_id)))
        } else {
            None
        };
        if let Some((column, reason)) = problem {
            if mode == ParseMode::Strict {
                return Err(Error::parse(line, column, reason));
            }
            diagnostics.push(Diagnostic { line, column, reason });
            continue;
        }
        labels_in_frame.insert(row.label.clone());
        frame.observations.push(LabeledPoint {
            label: row.label,
            position: row.position,
        });
    }

    if frames.is_empty() {
        return Err(Error::parse(0, 0, "no frames"));
    }
    Ok(ParsedFrames {
        stream: MarkerFrameStream { frames },
        diagnostics,
    })
}

struct Row {
    frame_id: i64,
    time: f64,
    label: String,
    position: Point3,
}

fn parse_row(record: &csv::StringRecord) -> std::result::Result<Row, (usize, String)> {
    if record.len() != FRAMES_HEADER.len() {
        return Err((
            record.len().min(FRAMES_HEADER.len()) + 1,
            format!("expected 6 fields, found {}", record.len()),
        ));
    }
    let field = |i: usize| record.get(i).unwrap_or("").trim();
    let frame_id: i64 = field(0)
        .parse()
        .map_err(|_| (1, format!("invalid frame id {:?}", field(0))))?;
    let number = |i: usize| -> std::result::Result<f64, (usize, String)> {
        match field(i).parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err((i + 1, format!("invalid {} value {:?}", FRAMES_HEADER[i], field(i)))),
        }
    };
    let time = number(1)?;
    let label = field(2);
    if label.is_empty() {
        return Err((3, "empty label".into()));
    }
    Ok(Row {
        frame_id,
        time,
        label: label.to_string(),
        position: Point3::new(number(3)?, number(4)?, number(5)?),
    })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, 0, e.to_string())
}

/// Canonical CSV: shortest round-trip float formatting, LF line endings.
pub fn write_frames<W: Write>(stream: &MarkerFrameStream, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(FRAMES_HEADER).map_err(csv_write_error)?;
    for frame in &stream.frames {
        let id = frame.frame_id.to_string();
        let time = frame.time.to_string();
        for o in &frame.observations {
            w.write_record([
                id.as_str(),
                time.as_str(),
                o.label.as_str(),
                &o.position.x.to_string(),
                &o.position.y.to_string(),
                &o.position.z.to_string(),
            ])
            .map_err(csv_write_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_frames_file(stream: &MarkerFrameStream, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_frames(stream, file)
}

fn csv_write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("{other:?}")),
    }
}
