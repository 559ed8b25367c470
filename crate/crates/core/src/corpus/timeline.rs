use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scheme::{Level, LevelA};
use crate::error::{Error, Result};

/// Length of one Level B2 segment in seconds.
pub const B2_SEGMENT_SECONDS: f64 = 60.0;

/// Tolerance used when comparing segment boundaries read from text.
pub(crate) const TIME_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Video,
    AudioVideo,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Video => "video",
            Modality::AudioVideo => "audio_video",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "video" => Ok(Modality::Video),
            "audio_video" => Ok(Modality::AudioVideo),
            other => Err(format!("unknown modality {other:?} (expected video or audio_video)")),
        }
    }
}

/// A coded span `[start, end)` of one student's timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub coder_id: String,
    pub student_id: String,
    /// Index into the code scheme of the segment's level.
    pub code: usize,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// One group's coded task under one modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecording {
    pub group_id: String,
    pub task_id: String,
    pub modality: Modality,
    /// Seconds; the latest segment end across both levels.
    pub duration: f64,
    pub b2_segments: Vec<Segment>,
    pub c_segments: Vec<Segment>,
    /// Level A judgement of each coder.
    pub level_a_codes: BTreeMap<String, LevelA>,
}

impl TaskRecording {
    pub fn segments(&self, level: Level) -> &[Segment] {
        match level {
            Level::B2 => &self.b2_segments,
            Level::C => &self.c_segments,
        }
    }

    /// Coders that produced B2 segments, in sorted order.
    pub fn b2_coders(&self) -> Vec<&str> {
        let mut coders: Vec<&str> = self.b2_segments.iter().map(|s| s.coder_id.as_str()).collect();
        coders.sort_unstable();
        coders.dedup();
        coders
    }

    /// Ground-truth label adjudicated across coders.
    ///
    /// Three coders are resolved with [`majority_label`]; a single coder's
    /// judgement is taken as is.
    pub fn adjudicated_label(&self) -> Result<LevelA> {
        let codes: Vec<LevelA> = self.level_a_codes.values().copied().collect();
        match codes.as_slice() {
            [only] => Ok(*only),
            [a, b, c] => Ok(majority_label([*a, *b, *c])),
            _ => Err(Error::InvalidDataset(format!(
                "task {}/{}: expected 1 or 3 Level A judgements, found {}",
                self.group_id,
                self.task_id,
                codes.len()
            ))),
        }
    }

    /// Recomputes `duration` from the segments.
    pub fn refresh_duration(&mut self) {
        self.duration = self
            .b2_segments
            .iter()
            .chain(&self.c_segments)
            .map(|s| s.end)
            .fold(0.0, f64::max);
    }

    /// Checks the timeline invariants: segments inside `[0, duration]`,
    /// B2 segments per (coder, student) contiguous one-minute tiles starting
    /// at zero (the final tile may be shorter), and no overlapping C segments
    /// per (coder, student).
    pub fn validate(&self) -> Result<()> {
        let tag = format!("{}/{}/{}", self.group_id, self.task_id, self.modality);
        for s in self.b2_segments.iter().chain(&self.c_segments) {
            if !(s.start >= 0.0 && s.end > s.start && s.end <= self.duration + TIME_EPS) {
                return Err(Error::InvalidTimeline(format!(
                    "{tag}: segment [{}, {}) of student {} outside task duration {}",
                    s.start, s.end, s.student_id, self.duration
                )));
            }
        }

        for ((coder, student), mut segs) in by_coder_student(&self.b2_segments) {
            segs.sort_by(|a, b| a.start.total_cmp(&b.start));
            let mut cursor = 0.0;
            for (i, s) in segs.iter().enumerate() {
                let last = i + 1 == segs.len();
                if (s.start - cursor).abs() > TIME_EPS {
                    return Err(Error::InvalidTimeline(format!(
                        "{tag}: B2 timeline of coder {coder}, student {student} has a gap or overlap at {}s",
                        s.start
                    )));
                }
                let len = s.duration();
                let ok = if last {
                    len <= B2_SEGMENT_SECONDS + TIME_EPS
                } else {
                    (len - B2_SEGMENT_SECONDS).abs() <= TIME_EPS
                };
                if !ok {
                    return Err(Error::InvalidTimeline(format!(
                        "{tag}: B2 segment [{}, {}) of coder {coder}, student {student} is not a one-minute tile",
                        s.start, s.end
                    )));
                }
                cursor = s.end;
            }
        }

        for ((coder, student), mut segs) in by_coder_student(&self.c_segments) {
            segs.sort_by(|a, b| a.start.total_cmp(&b.start));
            for pair in segs.windows(2) {
                if pair[1].start < pair[0].end - TIME_EPS {
                    return Err(Error::InvalidTimeline(format!(
                        "{tag}: C segments of coder {coder}, student {student} overlap at {}s",
                        pair[1].start
                    )));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn by_coder_student(segments: &[Segment]) -> BTreeMap<(&str, &str), Vec<&Segment>> {
    let mut map: BTreeMap<(&str, &str), Vec<&Segment>> = BTreeMap::new();
    for s in segments {
        map.entry((s.coder_id.as_str(), s.student_id.as_str()))
            .or_default()
            .push(s);
    }
    map
}

/// Adjudicates three coder judgements: a code given at least twice wins,
/// otherwise the median on the ordinal scale.
pub fn majority_label(codes: [LevelA; 3]) -> LevelA {
    let [a, b, c] = codes;
    if a == b || a == c {
        return a;
    }
    if b == c {
        return b;
    }
    let mut sorted = codes;
    sorted.sort_unstable();
    sorted[1]
}
