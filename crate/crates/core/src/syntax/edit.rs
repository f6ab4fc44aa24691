//! Span-replacement edits and the line-level segment maps they induce.

use serde::{Deserialize, Serialize};

/// The eight backported language features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    MemberInit,
    Auto,
    Lambda,
    Attribute,
    FinalOverride,
    RangeFor,
    CtorDelegation,
    TypeAlias,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::MemberInit,
        Feature::Auto,
        Feature::Lambda,
        Feature::Attribute,
        Feature::FinalOverride,
        Feature::RangeFor,
        Feature::CtorDelegation,
        Feature::TypeAlias,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::MemberInit => "member-init",
            Feature::Auto => "auto",
            Feature::Lambda => "lambda",
            Feature::Attribute => "attribute",
            Feature::FinalOverride => "final-override",
            Feature::RangeFor => "range-for",
            Feature::CtorDelegation => "ctor-delegation",
            Feature::TypeAlias => "type-alias",
        }
    }

    pub fn from_name(s: &str) -> Option<Feature> {
        Feature::ALL.iter().copied().find(|f| f.name() == s)
    }
}

/// A single span replacement against the original bytes of one file.
/// An insertion has `span.0 == span.1`.
#[derive(Debug, Clone)]
pub struct Edit {
    pub span: (usize, usize),
    pub replacement: String,
    pub feature: Feature,
    pub note: String,
}

impl Edit {
    pub fn new(span: (usize, usize), replacement: impl Into<String>, feature: Feature) -> Edit {
        Edit {
            span,
            replacement: replacement.into(),
            feature,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Edit {
        self.note = note.into();
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EditError {
    #[error("overlapping edits at indices {0} and {1}")]
    OverlappingEdits(usize, usize),
    #[error("edit span {0}..{1} out of bounds (file is {2} bytes)")]
    SpanOutOfBounds(usize, usize, usize),
}

/// One line-range correspondence produced by a round of edits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    /// `original` and `new` have the same length and identical text.
    Identity {
        original: (u32, u32),
        new: (u32, u32),
    },
    /// Lines rewritten by one or more edits.
    Edited {
        original: (u32, u32),
        new: (u32, u32),
        feature: Option<Feature>,
    },
}

impl Segment {
    pub fn new_range(&self) -> (u32, u32) {
        match self {
            Segment::Identity { new, .. } | Segment::Edited { new, .. } => *new,
        }
    }

    pub fn original_range(&self) -> (u32, u32) {
        match self {
            Segment::Identity { original, .. } | Segment::Edited { original, .. } => *original,
        }
    }
}

/// Line map for one round of `apply_edits`: ordered, covering the new file.
#[derive(Debug, Clone, Default)]
pub struct SegmentMap {
    pub segments: Vec<Segment>,
}

pub fn line_starts(bytes: &[u8]) -> Vec<usize> {
    let mut starts = vec![0];
    for (i, b) in bytes.iter().enumerate() {
        if *b == b'\n' {
            starts.push(i + 1);
        }
    }
    starts
}

fn line_of(offset: usize, starts: &[usize]) -> u32 {
    match starts.binary_search(&offset) {
        Ok(i) => i as u32 + 1,
        Err(i) => i as u32,
    }
}

/// Number of lines for mapping purposes; a trailing newline does not open
/// a new, empty last line.
pub fn line_count(bytes: &[u8]) -> u32 {
    let starts = line_starts(bytes);
    if starts.len() > 1 && *starts.last().unwrap() == bytes.len() {
        (starts.len() - 1) as u32
    } else {
        starts.len() as u32
    }
}

#[derive(Clone, Copy)]
enum ChunkSource {
    Orig { orig_start: usize },
    Edit { index: usize },
}

struct Chunk {
    new_start: usize,
    len: usize,
    source: ChunkSource,
}

/// Apply non-overlapping edits in ascending span order and record the
/// resulting original-to-new line correspondence.
pub fn apply_edits(bytes: &[u8], edits: &[Edit]) -> Result<(Vec<u8>, SegmentMap), EditError> {
    let mut order: Vec<usize> = (0..edits.len()).collect();
    order.sort_by_key(|&i| (edits[i].span.0, edits[i].span.1));
    for w in order.windows(2) {
        if edits[w[0]].span.1 > edits[w[1]].span.0 {
            return Err(EditError::OverlappingEdits(w[0], w[1]));
        }
    }
    for e in edits {
        if e.span.0 > e.span.1 || e.span.1 > bytes.len() {
            return Err(EditError::SpanOutOfBounds(e.span.0, e.span.1, bytes.len()));
        }
    }

    let mut out: Vec<u8> = Vec::with_capacity(bytes.len());
    let mut chunks: Vec<Chunk> = Vec::new();
    let mut cursor = 0usize;
    for &i in &order {
        let e = &edits[i];
        if e.span.0 > cursor {
            chunks.push(Chunk {
                new_start: out.len(),
                len: e.span.0 - cursor,
                source: ChunkSource::Orig { orig_start: cursor },
            });
            out.extend_from_slice(&bytes[cursor..e.span.0]);
        }
        chunks.push(Chunk {
            new_start: out.len(),
            len: e.replacement.len(),
            source: ChunkSource::Edit { index: i },
        });
        out.extend_from_slice(e.replacement.as_bytes());
        cursor = e.span.1;
    }
    if cursor < bytes.len() {
        chunks.push(Chunk {
            new_start: out.len(),
            len: bytes.len() - cursor,
            source: ChunkSource::Orig { orig_start: cursor },
        });
        out.extend_from_slice(&bytes[cursor..]);
    }

    let map = build_segment_map(bytes, &out, &chunks, edits);
    Ok((out, map))
}

#[derive(Clone)]
enum LineClass {
    Identity { orig_line: u32 },
    Edited { orig: Option<(u32, u32)>, feature: Option<Feature> },
}

fn build_segment_map(orig: &[u8], new: &[u8], chunks: &[Chunk], edits: &[Edit]) -> SegmentMap {
    let orig_starts = line_starts(orig);
    let new_starts = line_starts(new);
    let n_new = line_count(new) as usize;
    let n_old = line_count(orig);

    if chunks.len() <= 1 && edits.is_empty() {
        return SegmentMap {
            segments: vec![Segment::Identity {
                original: (1, n_old),
                new: (1, n_new as u32),
            }],
        };
    }

    // Full byte range (including trailing newline) of each original line.
    let orig_line_range = |line: u32| -> (usize, usize) {
        let i = (line - 1) as usize;
        let start = orig_starts[i];
        let end = orig_starts.get(i + 1).copied().unwrap_or(orig.len());
        (start, end)
    };

    let mut classes: Vec<LineClass> = Vec::with_capacity(n_new);
    for li in 0..n_new {
        let ls = new_starts[li];
        let le = new_starts.get(li + 1).copied().unwrap_or(new.len());

        // Chunks overlapping this line; zero-length edit chunks count when
        // their junction point sits inside (or at the very end of) the line.
        let mut touching: Vec<&Chunk> = Vec::new();
        for c in chunks {
            let cs = c.new_start;
            let ce = c.new_start + c.len;
            let overlaps = if c.len == 0 {
                cs >= ls && (cs < le || (cs == le && le == new.len()))
            } else {
                cs < le && ce > ls
            };
            if overlaps {
                touching.push(c);
            }
        }

        let is_identity = touching.len() == 1
            && touching[0].len > 0
            && matches!(touching[0].source, ChunkSource::Orig { .. })
            && {
                let c = touching[0];
                if let ChunkSource::Orig { orig_start } = c.source {
                    let off_in_chunk = ls - c.new_start;
                    let o_ls = orig_start + off_in_chunk;
                    let o_le = o_ls + (le - ls);
                    let oline = line_of(o_ls, &orig_starts);
                    let (r_s, r_e) = orig_line_range(oline);
                    // Whole original line, fully inside the chunk.
                    o_ls == r_s && o_le == r_e && o_le <= orig_start + c.len
                } else {
                    false
                }
            };

        if is_identity {
            let c = touching[0];
            if let ChunkSource::Orig { orig_start } = c.source {
                let o_ls = orig_start + (ls - c.new_start);
                classes.push(LineClass::Identity {
                    orig_line: line_of(o_ls, &orig_starts),
                });
                continue;
            }
        }

        // Edited line: original lines touched by any contributing chunk.
        let mut o_min = u32::MAX;
        let mut o_max = 0u32;
        let mut feature = None;
        for c in &touching {
            match c.source {
                ChunkSource::Orig { orig_start } => {
                    let from = orig_start + ls.saturating_sub(c.new_start);
                    let upto = (orig_start + c.len).min(orig_start + (le - c.new_start).min(c.len));
                    let l0 = line_of(from, &orig_starts);
                    let l1 = line_of(upto.max(from + 1) - 1, &orig_starts);
                    o_min = o_min.min(l0);
                    o_max = o_max.max(l1);
                }
                ChunkSource::Edit { index } => {
                    let e = &edits[index];
                    let l0 = line_of(e.span.0, &orig_starts);
                    let l1 = if e.span.1 > e.span.0 {
                        line_of(e.span.1 - 1, &orig_starts)
                    } else {
                        l0
                    };
                    o_min = o_min.min(l0);
                    o_max = o_max.max(l1);
                    if feature.is_none() {
                        feature = Some(e.feature);
                    }
                }
            }
        }
        let orig_range = if o_min == u32::MAX { None } else { Some((o_min, o_max)) };
        classes.push(LineClass::Edited { orig: orig_range, feature });
    }

    // Group consecutive lines of the same class into segments.
    let mut segments: Vec<Segment> = Vec::new();
    let mut i = 0usize;
    while i < classes.len() {
        match classes[i].clone() {
            LineClass::Identity { orig_line } => {
                let start = i;
                let mut expect = orig_line;
                while i < classes.len() {
                    if let LineClass::Identity { orig_line: ol } = classes[i] {
                        if ol == expect {
                            expect += 1;
                            i += 1;
                            continue;
                        }
                    }
                    break;
                }
                segments.push(Segment::Identity {
                    original: (orig_line, expect - 1),
                    new: (start as u32 + 1, i as u32),
                });
            }
            LineClass::Edited { .. } => {
                let start = i;
                let mut o_min = u32::MAX;
                let mut o_max = 0u32;
                let mut feature = None;
                while i < classes.len() {
                    if let LineClass::Edited { orig, feature: f } = &classes[i] {
                        if let Some((a, b)) = orig {
                            o_min = o_min.min(*a);
                            o_max = o_max.max(*b);
                        }
                        if feature.is_none() {
                            feature = *f;
                        }
                        i += 1;
                        continue;
                    }
                    break;
                }
                // Pure-insertion regions inherit the nearest following
                // original line as their anchor.
                if o_min == u32::MAX {
                    let anchor = segments
                        .last()
                        .map(|s| s.original_range().1 + 1)
                        .unwrap_or(1);
                    o_min = anchor;
                    o_max = anchor;
                }
                segments.push(Segment::Edited {
                    original: (o_min, o_max),
                    new: (start as u32 + 1, i as u32),
                    feature,
                });
            }
        }
    }

    if segments.is_empty() {
        segments.push(Segment::Identity {
            original: (1, n_old),
            new: (1, n_new as u32),
        });
    }
    SegmentMap { segments }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_edit_list_is_identity() {
        let src = b"line one\nline two\n";
        let (out, map) = apply_edits(src, &[]).unwrap();
        assert_eq!(out, src);
        assert_eq!(
            map.segments,
            vec![Segment::Identity {
                original: (1, 2),
                new: (1, 2)
            }]
        );
    }

    #[test]
    fn single_deletion_keeps_line_alignment() {
        // Delete " override final" on line 6.
        let src = "class A {\nint x;\nint y;\nint z;\npublic:\nvoid b() override final;\nint w;\n};\n";
        let pos = src.find(" override final").unwrap();
        let edit = Edit::new((pos, pos + " override final".len()), "", Feature::FinalOverride);
        let (out, map) = apply_edits(src.as_bytes(), &[edit]).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("void b();"));
        assert_eq!(
            map.segments,
            vec![
                Segment::Identity { original: (1, 5), new: (1, 5) },
                Segment::Edited { original: (6, 6), new: (6, 6), feature: Some(Feature::FinalOverride) },
                Segment::Identity { original: (7, 8), new: (7, 8) },
            ]
        );
    }

    #[test]
    fn insertion_shifts_following_lines() {
        // Insert a 9-line block before line 3; original line 3 maps to 12.
        let src = "a\nb\nc\nd\n";
        let pos = src.find('c').unwrap();
        let block = "l1\nl2\nl3\nl4\nl5\nl6\nl7\nl8\nl9\n";
        let edit = Edit::new((pos, pos), block, Feature::Lambda);
        let (_, map) = apply_edits(src.as_bytes(), &[edit]).unwrap();
        // Oracle: diff of original vs rewritten text says lines 1-2 match,
        // 9 new lines appear, then lines 3-4 continue at 12-13.
        let last = map.segments.last().unwrap();
        assert!(matches!(last, Segment::Identity { .. }));
        assert_eq!(last.original_range(), (3, 4));
        assert_eq!(last.new_range(), (12, 13));
        let region = &map.segments[1];
        assert_eq!(region.new_range(), (3, 11));
    }

    #[test]
    fn overlapping_edits_are_rejected() {
        let src = b"abcdef";
        let edits = vec![
            Edit::new((0, 3), "x", Feature::Auto),
            Edit::new((2, 5), "y", Feature::Auto),
        ];
        assert!(matches!(
            apply_edits(src, &edits),
            Err(EditError::OverlappingEdits(0, 1))
        ));
    }

    #[test]
    fn segments_cover_new_file() {
        let src = "one\ntwo\nthree\nfour\n";
        let pos = src.find("two").unwrap();
        let edit = Edit::new((pos, pos + 3), "TWO\nTWO-bis", Feature::Auto);
        let (out, map) = apply_edits(src.as_bytes(), &[edit]).unwrap();
        let total = line_count(&out);
        let mut next = 1;
        for seg in &map.segments {
            let (s, e) = seg.new_range();
            assert_eq!(s, next);
            next = e + 1;
        }
        assert_eq!(next, total + 1);
    }

    #[test]
    fn mid_line_replacement_marks_single_line() {
        let src = "int a = 1;\nauto b = a;\nint c = 2;\n";
        let pos = src.find("auto").unwrap();
        let edit = Edit::new((pos, pos + 4), "int", Feature::Auto);
        let (_, map) = apply_edits(src.as_bytes(), &[edit]).unwrap();
        assert_eq!(
            map.segments,
            vec![
                Segment::Identity { original: (1, 1), new: (1, 1) },
                Segment::Edited { original: (2, 2), new: (2, 2), feature: Some(Feature::Auto) },
                Segment::Identity { original: (3, 3), new: (3, 3) },
            ]
        );
    }
}
