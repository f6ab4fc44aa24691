//! Original-to-transformed line mapping.
//!
//! Each rewriting phase yields a `SegmentMap` relating its input lines to
//! its output lines. Composing them in phase order gives one `LineMap`
//! from original source lines to final transformed lines. Inside a
//! transformed region line granularity is lost; a lookup there answers
//! with the first original line of the outermost enclosing region.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::syntax::edit::{Feature, Segment, SegmentMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Identity,
    Region,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSegment {
    pub kind: SegmentKind,
    /// Inclusive original line range.
    pub original: (u32, u32),
    /// Inclusive transformed line range.
    pub transformed: (u32, u32),
    pub feature: Option<Feature>,
    pub outermost: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LineMap {
    pub original_path: String,
    pub transformed_path: String,
    pub segments: Vec<MapSegment>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line} is out of range (file has {len} lines)")]
    LineOutOfRange { line: u32, len: u32 },
    #[error("cannot access trace sidecar {path}: {reason}")]
    SidecarIo { path: String, reason: String },
    #[error("malformed trace sidecar line {line}: {text}")]
    SidecarFormat { line: usize, text: String },
}

fn from_phase(map: &SegmentMap) -> Vec<MapSegment> {
    map.segments
        .iter()
        .map(|s| match *s {
            Segment::Identity { original, new } => MapSegment {
                kind: SegmentKind::Identity,
                original,
                transformed: new,
                feature: None,
                outermost: true,
            },
            Segment::Edited { original, new, feature } => MapSegment {
                kind: SegmentKind::Region,
                original,
                transformed: new,
                feature,
                outermost: true,
            },
        })
        .collect()
}

/// Compose the per-phase maps of one file into a single map from original
/// lines to final lines. A later-phase edit landing inside an earlier
/// region stays attributed to that outer region.
pub fn build_linemap(original_path: &str, transformed_path: &str, phases: &[SegmentMap]) -> LineMap {
    let mut acc: Option<Vec<MapSegment>> = None;
    for phase in phases {
        let next = from_phase(phase);
        acc = Some(match acc {
            None => next,
            Some(prev) => compose(&prev, &next),
        });
    }
    LineMap {
        original_path: original_path.to_string(),
        transformed_path: transformed_path.to_string(),
        segments: merge_adjacent(acc.unwrap_or_default()),
    }
}

/// `a` maps original lines to an intermediate text; `b` maps that text to
/// the next one. The result maps original lines to the next text.
fn compose(a: &[MapSegment], b: &[MapSegment]) -> Vec<MapSegment> {
    let mut out = Vec::new();
    for bs in b {
        let (m0, m1) = match bs.kind {
            SegmentKind::Identity => bs.original,
            SegmentKind::Region => bs.original,
        };
        let overlapping: Vec<&MapSegment> = a
            .iter()
            .filter(|s| s.transformed.0 <= m1 && s.transformed.1 >= m0)
            .collect();
        match bs.kind {
            SegmentKind::Identity => {
                // Final lines track intermediate lines one for one, so
                // split by the underlying segments.
                let shift = bs.transformed.0 as i64 - m0 as i64;
                for s in overlapping {
                    let lo = s.transformed.0.max(m0);
                    let hi = s.transformed.1.min(m1);
                    let t = ((lo as i64 + shift) as u32, (hi as i64 + shift) as u32);
                    match s.kind {
                        SegmentKind::Identity => {
                            let o0 = s.original.0 + (lo - s.transformed.0);
                            out.push(MapSegment {
                                kind: SegmentKind::Identity,
                                original: (o0, o0 + (hi - lo)),
                                transformed: t,
                                feature: None,
                                outermost: true,
                            });
                        }
                        SegmentKind::Region => out.push(MapSegment {
                            kind: SegmentKind::Region,
                            original: s.original,
                            transformed: t,
                            feature: s.feature,
                            outermost: s.outermost,
                        }),
                    }
                }
            }
            SegmentKind::Region => {
                let mut o_min = u32::MAX;
                let mut o_max = 0;
                let mut feature = None;
                for s in &overlapping {
                    match s.kind {
                        SegmentKind::Identity => {
                            let lo = s.transformed.0.max(m0);
                            let hi = s.transformed.1.min(m1);
                            let o0 = s.original.0 + (lo - s.transformed.0);
                            o_min = o_min.min(o0);
                            o_max = o_max.max(o0 + (hi - lo));
                        }
                        SegmentKind::Region => {
                            // The earlier region encloses this edit, so it
                            // is the outermost transformation here.
                            o_min = o_min.min(s.original.0);
                            o_max = o_max.max(s.original.1);
                            if feature.is_none() {
                                feature = s.feature;
                            }
                        }
                    }
                }
                if o_min == u32::MAX {
                    let anchor = out
                        .last()
                        .map(|s: &MapSegment| s.original.1 + 1)
                        .unwrap_or(1);
                    o_min = anchor;
                    o_max = anchor;
                }
                out.push(MapSegment {
                    kind: SegmentKind::Region,
                    original: (o_min, o_max),
                    transformed: bs.transformed,
                    feature: feature.or(bs.feature),
                    outermost: true,
                });
            }
        }
    }
    out
}

/// Collapse neighbours: identity runs with consecutive lines, and region
/// runs whose original ranges overlap (one region split by a later phase).
fn merge_adjacent(segments: Vec<MapSegment>) -> Vec<MapSegment> {
    let mut out: Vec<MapSegment> = Vec::new();
    for s in segments {
        if let Some(last) = out.last_mut() {
            let contiguous = last.transformed.1 + 1 == s.transformed.0;
            let both_identity = last.kind == SegmentKind::Identity
                && s.kind == SegmentKind::Identity
                && last.original.1 + 1 == s.original.0;
            let both_region = last.kind == SegmentKind::Region
                && s.kind == SegmentKind::Region
                && last.original.1 + 1 >= s.original.0;
            if contiguous && (both_identity || both_region) {
                last.original.1 = last.original.1.max(s.original.1);
                last.transformed.1 = s.transformed.1;
                if last.feature.is_none() {
                    last.feature = s.feature;
                }
                continue;
            }
        }
        out.push(s);
    }
    out
}

/// Answer "which original line does transformed line `line` come from".
/// Inside a region the answer degrades to the region's first original
/// line, flagged inexact.
pub fn lookup(map: &LineMap, line: u32) -> Result<(String, u32, bool), TraceError> {
    let len = map.segments.last().map(|s| s.transformed.1).unwrap_or(0);
    let seg = map
        .segments
        .iter()
        .find(|s| s.transformed.0 <= line && line <= s.transformed.1)
        .ok_or(TraceError::LineOutOfRange { line, len })?;
    match seg.kind {
        SegmentKind::Identity => {
            let orig = seg.original.0 + (line - seg.transformed.0);
            Ok((map.original_path.clone(), orig, true))
        }
        SegmentKind::Region => Ok((map.original_path.clone(), seg.original.0, false)),
    }
}

pub fn sidecar_path(transformed: &Path) -> std::path::PathBuf {
    let mut s = transformed.as_os_str().to_os_string();
    s.push(".trace");
    std::path::PathBuf::from(s)
}

/// Serialize the map. The first line names the original file; each
/// following line is one segment, `O <ostart> <oend> T <tstart> <tend>`
/// with a trailing `X <feature>` marking a transformed region.
pub fn write_sidecar(map: &LineMap, path: &Path) -> Result<(), TraceError> {
    let mut text = format!("F {}\n", map.original_path);
    for s in &map.segments {
        text.push_str(&format!(
            "O {} {} T {} {}",
            s.original.0, s.original.1, s.transformed.0, s.transformed.1
        ));
        if s.kind == SegmentKind::Region {
            let name = s.feature.map(Feature::name).unwrap_or("unknown");
            text.push_str(&format!(" X {}", name));
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| TraceError::SidecarIo {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn read_sidecar(path: &Path) -> Result<LineMap, TraceError> {
    let text = fs::read_to_string(path).map_err(|e| TraceError::SidecarIo {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let transformed = path
        .to_string_lossy()
        .trim_end_matches(".trace")
        .to_string();
    let mut map = LineMap {
        transformed_path: transformed,
        ..Default::default()
    };
    for (i, line) in text.lines().enumerate() {
        let bad = || TraceError::SidecarFormat { line: i + 1, text: line.to_string() };
        if let Some(orig) = line.strip_prefix("F ") {
            map.original_path = orig.to_string();
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 6 || fields[0] != "O" || fields[3] != "T" {
            return Err(bad());
        }
        let num = |f: &str| f.parse::<u32>().map_err(|_| bad());
        let original = (num(fields[1])?, num(fields[2])?);
        let transformed = (num(fields[4])?, num(fields[5])?);
        let (kind, feature) = match fields.get(6) {
            Some(&"X") => {
                let name = fields.get(7).ok_or_else(bad)?;
                (SegmentKind::Region, Feature::from_name(name))
            }
            Some(_) => return Err(bad()),
            None => (SegmentKind::Identity, None),
        };
        map.segments.push(MapSegment {
            kind,
            original,
            transformed,
            feature,
            outermost: true,
        });
    }
    Ok(map)
}
