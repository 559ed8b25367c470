//! Segment and adjudication CSV files.
//!
//! A corpus directory holds two files:
//!
//! * `segments.csv`: `group_id,task_id,modality,coder_id,student_id,level,code,start_s,end_s`
//! * `adjudication.csv`: `group_id,task_id,modality,coder_id,level_a_code`
//!
//! Codes are resolved by full name or abbreviation against the level's code
//! scheme. Level A codes are class names (`Needs Improvement`) or indices.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use csv::StringRecord;

use super::scheme::{Level, LevelA};
use super::timeline::{Modality, Segment, TaskRecording};
use crate::error::{Error, Result};

pub const SEGMENTS_FILE: &str = "segments.csv";
pub const ADJUDICATION_FILE: &str = "adjudication.csv";

const SEGMENT_COLUMNS: [&str; 9] = [
    "group_id",
    "task_id",
    "modality",
    "coder_id",
    "student_id",
    "level",
    "code",
    "start_s",
    "end_s",
];
const ADJUDICATION_COLUMNS: [&str; 5] = ["group_id", "task_id", "modality", "coder_id", "level_a_code"];

type TaskKey = (String, String, Modality);

/// Parses the corpus stored in `dir`.
pub fn parse_corpus(dir: impl AsRef<Path>) -> Result<Vec<TaskRecording>> {
    let dir = dir.as_ref();
    parse_corpus_files(dir.join(SEGMENTS_FILE), dir.join(ADJUDICATION_FILE))
}

/// Parses a segment file and its adjudication file into task recordings,
/// sorted by `(group_id, task_id, modality)`.
pub fn parse_corpus_files(segments: impl AsRef<Path>, adjudication: impl AsRef<Path>) -> Result<Vec<TaskRecording>> {
    let segments = segments.as_ref();
    let adjudication = adjudication.as_ref();
    let mut tasks: BTreeMap<TaskKey, TaskRecording> = BTreeMap::new();

    let mut reader = open(segments)?;
    let cols = columns(segments, reader.headers()?, &SEGMENT_COLUMNS)?;
    for record in reader.records() {
        let record = record?;
        let line = line_of(&record);
        let err = |message: String| Error::Parse {
            path: segments.to_path_buf(),
            line,
            message,
        };
        let field = |i: usize| record.get(cols[i]).unwrap_or("").trim();

        let modality: Modality = field(2).parse().map_err(err)?;
        let level: Level = field(5).parse().map_err(err)?;
        let code = level.scheme().resolve(field(6)).ok_or_else(|| {
            err(format!(
                "unknown code at line {line}: {:?} is not a Level {level} code",
                field(6)
            ))
        })?;
        let start = parse_seconds(field(7)).map_err(err)?;
        let end = parse_seconds(field(8)).map_err(err)?;
        if start < 0.0 {
            return Err(err(format!("negative start time {start}")));
        }
        if end <= start {
            return Err(err(format!("segment end {end} is not after start {start}")));
        }

        let key = (field(0).to_string(), field(1).to_string(), modality);
        let task = tasks.entry(key).or_insert_with(|| TaskRecording {
            group_id: field(0).to_string(),
            task_id: field(1).to_string(),
            modality,
            duration: 0.0,
            b2_segments: Vec::new(),
            c_segments: Vec::new(),
            level_a_codes: BTreeMap::new(),
        });
        let segment = Segment {
            coder_id: field(3).to_string(),
            student_id: field(4).to_string(),
            code,
            start,
            end,
        };
        match level {
            Level::B2 => task.b2_segments.push(segment),
            Level::C => task.c_segments.push(segment),
        }
    }

    let mut reader = open(adjudication)?;
    let cols = columns(adjudication, reader.headers()?, &ADJUDICATION_COLUMNS)?;
    for record in reader.records() {
        let record = record?;
        let line = line_of(&record);
        let err = |message: String| Error::Parse {
            path: adjudication.to_path_buf(),
            line,
            message,
        };
        let field = |i: usize| record.get(cols[i]).unwrap_or("").trim();
        let modality: Modality = field(2).parse().map_err(err)?;
        let label: LevelA = field(4).parse().map_err(err)?;
        let key = (field(0).to_string(), field(1).to_string(), modality);
        let task = tasks.get_mut(&key).ok_or_else(|| {
            err(format!(
                "adjudication for task {}/{}/{modality} which has no segments",
                key.0, key.1
            ))
        })?;
        if task.level_a_codes.insert(field(3).to_string(), label).is_some() {
            return Err(err(format!("duplicate Level A judgement from coder {}", field(3))));
        }
    }

    let mut out = Vec::with_capacity(tasks.len());
    for (_, mut task) in tasks {
        if task.level_a_codes.is_empty() {
            return Err(Error::Parse {
                path: adjudication.to_path_buf(),
                line: 0,
                message: format!(
                    "task {}/{}/{} has no Level A adjudication rows",
                    task.group_id, task.task_id, task.modality
                ),
            });
        }
        task.refresh_duration();
        task.validate()?;
        out.push(task);
    }
    Ok(out)
}

/// Writes `tasks` as `segments.csv` and `adjudication.csv` inside `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, tasks: &[TaskRecording]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;

    let mut w = csv::Writer::from_path(dir.join(SEGMENTS_FILE))?;
    w.write_record(SEGMENT_COLUMNS)?;
    for t in tasks {
        for level in [Level::B2, Level::C] {
            for s in t.segments(level) {
                w.write_record([
                    t.group_id.as_str(),
                    t.task_id.as_str(),
                    t.modality.as_str(),
                    s.coder_id.as_str(),
                    s.student_id.as_str(),
                    &level.to_string(),
                    level.scheme().label(s.code),
                    &s.start.to_string(),
                    &s.end.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("writing segments", e))?;

    let mut w = csv::Writer::from_path(dir.join(ADJUDICATION_FILE))?;
    w.write_record(ADJUDICATION_COLUMNS)?;
    for t in tasks {
        for (coder, label) in &t.level_a_codes {
            w.write_record([
                t.group_id.as_str(),
                t.task_id.as_str(),
                t.modality.as_str(),
                coder.as_str(),
                label.name(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("writing adjudication", e))?;
    Ok(())
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn columns<const N: usize>(path: &Path, headers: &StringRecord, wanted: &[&str; N]) -> Result<[usize; N]> {
    let mut idx = [0usize; N];
    for (slot, name) in idx.iter_mut().zip(wanted) {
        *slot = headers.iter().position(|h| h == *name).ok_or_else(|| Error::Parse {
            path: PathBuf::from(path),
            line: 1,
            message: format!("missing column {name:?}"),
        })?;
    }
    Ok(idx)
}

fn line_of(record: &StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn parse_seconds(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid time {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("invalid time {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        let mut f = File::create(dir.join(name)).unwrap();
        f.write_all(body.as_bytes()).unwrap();
    }

    const SEG_HEADER: &str = "group_id,task_id,modality,coder_id,student_id,level,code,start_s,end_s\n";
    const ADJ_HEADER: &str = "group_id,task_id,modality,coder_id,level_a_code\n";

    #[test]
    fn header_only_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), SEGMENTS_FILE, SEG_HEADER);
        write(dir.path(), ADJUDICATION_FILE, ADJ_HEADER);
        assert!(parse_corpus(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn ten_b2_rows_make_one_task() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = SEG_HEADER.to_string();
        for i in 0..10 {
            body.push_str(&format!("g1,t1,video,k1,s1,B2,GG,{},{}\n", 60 * i, 60 * (i + 1)));
        }
        write(dir.path(), SEGMENTS_FILE, &body);
        write(
            dir.path(),
            ADJUDICATION_FILE,
            &format!("{ADJ_HEADER}g1,t1,video,k1,Progressing\n"),
        );
        let tasks = parse_corpus(dir.path()).unwrap();
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].b2_segments.len(), 10);
        assert_eq!(tasks[0].duration, 600.0);
        assert_eq!(tasks[0].level_a_codes["k1"], LevelA::Progressing);
    }

    #[test]
    fn unknown_code_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            SEGMENTS_FILE,
            &format!("{SEG_HEADER}g1,t1,video,k1,s1,C,Talking,0,1\ng1,t1,video,k1,s1,C,Dancing,1,2\n"),
        );
        write(dir.path(), ADJUDICATION_FILE, ADJ_HEADER);
        let err = parse_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains("unknown code at line 3"), "{err}");
    }

    #[test]
    fn inverted_interval_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            SEGMENTS_FILE,
            &format!("{SEG_HEADER}g1,t1,video,k1,s1,C,Talking,2,2\n"),
        );
        write(dir.path(), ADJUDICATION_FILE, ADJ_HEADER);
        let err = parse_corpus(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_adjudication_column() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), SEGMENTS_FILE, SEG_HEADER);
        write(dir.path(), ADJUDICATION_FILE, "group_id,task_id,modality,coder_id\n");
        let err = parse_corpus(dir.path()).unwrap_err().to_string();
        assert!(err.contains("level_a_code"), "{err}");
    }

    #[test]
    fn task_without_adjudication_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            SEGMENTS_FILE,
            &format!("{SEG_HEADER}g1,t1,video,k1,s1,C,Talking,0,1\n"),
        );
        write(dir.path(), ADJUDICATION_FILE, ADJ_HEADER);
        assert!(parse_corpus(dir.path()).is_err());
    }

    #[test]
    fn quoted_code_with_comma() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            SEGMENTS_FILE,
            &format!("{SEG_HEADER}g1,t1,audio_video,k1,s1,C,\"Comforting, encouraging others/Coralling\",0,1.5\n"),
        );
        write(
            dir.path(),
            ADJUDICATION_FILE,
            &format!("{ADJ_HEADER}g1,t1,audio_video,k1,2\n"),
        );
        let tasks = parse_corpus(dir.path()).unwrap();
        assert_eq!(tasks[0].c_segments[0].code, 10);
        assert_eq!(tasks[0].modality, Modality::AudioVideo);
    }
}
