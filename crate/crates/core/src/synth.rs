//! Seeded synthetic corpora with a planted link between Level A labels and
//! the distributions of B2 and C codes.
//!
//! Each class has a prototype distribution over B2 codes and over C codes,
//! ordered so that classes further apart on the ordinal scale have more
//! dissimilar prototypes. A task of class `c` draws its own code
//! distributions from `Dirichlet(κ · prototype_c)`; larger `κ` means tasks
//! sit closer to their prototype. Coders report the true label with
//! probability `coder_agreement`, otherwise an ordinal neighbour.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};

use crate::corpus::{write_corpus, LevelA, Modality, Segment, TaskRecording, B2_SEGMENT_SECONDS, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::util::rng_stream;

pub const TRUTH_FILE: &str = "truth.csv";

const B2_CODES: usize = 7;
const C_CODES: usize = 23;
const CODERS: [&str; 3] = ["c1", "c2", "c3"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_groups: usize,
    /// Students in each group; length `n_groups`.
    pub students_per_group: Vec<usize>,
    /// Upper bound on tasks any one group performs.
    pub tasks_per_group: usize,
    /// Tasks over all groups, spread as evenly as possible.
    pub total_tasks: usize,
    /// Share of each Level A class among tasks.
    pub label_proportions: [f64; NUM_CLASSES],
    pub b2_prototypes: [[f64; B2_CODES]; NUM_CLASSES],
    pub c_prototypes: [[f64; C_CODES]; NUM_CLASSES],
    /// Dirichlet concentration κ around the prototype; `null` puts every
    /// task exactly on its prototype.
    pub concentration: Option<f64>,
    pub coder_agreement: f64,
    /// Task length bounds in whole seconds, inclusive.
    pub duration_range: [u32; 2],
    /// Every task is emitted once per listed modality, with independent
    /// annotations.
    pub modalities: Vec<Modality>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let mut students = vec![4; 15];
        students[6] = 3;
        students[11] = 5;
        SynthConfig {
            n_groups: 15,
            students_per_group: students,
            tasks_per_group: 12,
            total_tasks: 117,
            label_proportions: [0.08, 0.24, 0.38, 0.20, 0.10],
            b2_prototypes: default_b2_prototypes(),
            c_prototypes: default_c_prototypes(),
            concentration: Some(40.0),
            coder_agreement: 0.85,
            duration_range: [300, 600],
            modalities: vec![Modality::AudioVideo],
            seed: 0,
        }
    }
}

/// Columns: GG, C, F, CR, CI, OT, LS.
fn default_b2_prototypes() -> [[f64; B2_CODES]; NUM_CLASSES] {
    [
        [0.25, 0.35, 0.10, 0.15, 0.03, 0.04, 0.08],
        [0.18, 0.30, 0.20, 0.10, 0.06, 0.06, 0.10],
        [0.10, 0.22, 0.28, 0.06, 0.10, 0.10, 0.14],
        [0.05, 0.12, 0.25, 0.03, 0.15, 0.18, 0.22],
        [0.03, 0.06, 0.15, 0.02, 0.10, 0.14, 0.50],
    ]
}

/// Mixtures of a shared base with collaborative, disruptive and solitary
/// code families; the weights move monotonically along the scale.
fn default_c_prototypes() -> [[f64; C_CODES]; NUM_CLASSES] {
    const BASE: [usize; 6] = [0, 1, 2, 3, 4, 5];
    const COLLAB: [usize; 6] = [6, 7, 8, 9, 10, 11];
    const DISRUPT: [usize; 8] = [12, 13, 14, 15, 16, 17, 18, 19];
    const SOLO: [usize; 3] = [20, 21, 22];
    let collab = [3.0, 2.0, 1.0, 0.5, 0.3];
    let disrupt = [0.2, 0.4, 0.8, 1.6, 0.8];
    let solo = [0.2, 0.4, 0.8, 1.6, 4.0];
    let mut out = [[0.0; C_CODES]; NUM_CLASSES];
    for (k, row) in out.iter_mut().enumerate() {
        for &i in &BASE {
            row[i] = 1.0;
        }
        for &i in &COLLAB {
            row[i] = collab[k];
        }
        for &i in &DISRUPT {
            row[i] = disrupt[k];
        }
        for &i in &SOLO {
            row[i] = solo[k];
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
    }
    out
}

fn check_simplex(name: &str, v: &[f64], strictly_positive: bool) -> Result<()> {
    let ok = v
        .iter()
        .all(|&x| x.is_finite() && if strictly_positive { x > 0.0 } else { x >= 0.0 });
    let sum: f64 = v.iter().sum();
    if !ok || (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "{name} must be a probability vector{}, got {v:?}",
            if strictly_positive {
                " with positive entries"
            } else {
                ""
            }
        )));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_groups < 2 {
            return bad("n_groups must be at least 2".into());
        }
        if self.students_per_group.len() != self.n_groups {
            return bad(format!(
                "students_per_group lists {} groups, n_groups is {}",
                self.students_per_group.len(),
                self.n_groups
            ));
        }
        if self.students_per_group.contains(&0) {
            return bad("every group needs at least one student".into());
        }
        if self.total_tasks < self.n_groups || self.total_tasks > self.n_groups * self.tasks_per_group {
            return bad(format!(
                "total_tasks {} must lie between n_groups ({}) and n_groups × tasks_per_group ({})",
                self.total_tasks,
                self.n_groups,
                self.n_groups * self.tasks_per_group
            ));
        }
        check_simplex("label_proportions", &self.label_proportions, false)?;
        if let Some(c) = self.label_proportions.iter().position(|&p| p == 0.0) {
            return bad(format!(
                "label proportion of {} is zero; every class must be able to occur",
                LevelA::ALL[c]
            ));
        }
        for (k, p) in self.b2_prototypes.iter().enumerate() {
            check_simplex(&format!("b2_prototypes[{k}]"), p, true)?;
        }
        for (k, p) in self.c_prototypes.iter().enumerate() {
            check_simplex(&format!("c_prototypes[{k}]"), p, true)?;
        }
        if let Some(k) = self.concentration {
            if !(k > 0.0 && k.is_finite()) {
                return bad(format!("concentration must be > 0, got {k}"));
            }
        }
        if !(0.0..=1.0).contains(&self.coder_agreement) {
            return bad(format!(
                "coder_agreement must lie in [0, 1], got {}",
                self.coder_agreement
            ));
        }
        let [lo, hi] = self.duration_range;
        if lo < 1 || lo > hi {
            return bad(format!("duration_range [{lo}, {hi}] is empty or starts below 1 s"));
        }
        if self.modalities.is_empty() {
            return bad("at least one modality is required".into());
        }
        let mut m = self.modalities.clone();
        m.sort();
        m.dedup();
        if m.len() != self.modalities.len() {
            return bad("modalities must not repeat".into());
        }
        Ok(())
    }

    /// Number of tasks each group performs: the total split as evenly as
    /// possible, earlier groups taking the remainder.
    pub fn tasks_by_group(&self) -> Vec<usize> {
        let base = self.total_tasks / self.n_groups;
        let extra = self.total_tasks % self.n_groups;
        (0..self.n_groups).map(|g| base + usize::from(g < extra)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub group_id: String,
    pub task_id: String,
    pub true_label: LevelA,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub tasks: Vec<TaskRecording>,
    pub truth: Vec<TruthRow>,
}

/// Splits `total` into integer parts proportional to `weights` by largest
/// remainder; ties go to the lower index.
pub fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let short = total.saturating_sub(counts.iter().sum());
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

// Independent stream families so that changing κ only changes the
// code distributions, not labels, durations or segment boundaries.
const STREAM_LABELS: u64 = 0;
const STREAM_TASK: u64 = 1;
const STREAM_DIRICHLET: u64 = 2;
const STREAMS_PER_TASK: u64 = 4;

fn task_stream(seed: u64, task: usize, family: u64) -> ChaCha8Rng {
    rng_stream(seed, 1 + task as u64 * STREAMS_PER_TASK + family)
}

fn draw_distribution<const N: usize>(proto: &[f64; N], kappa: Option<f64>, rng: &mut ChaCha8Rng) -> Result<[f64; N]> {
    match kappa {
        None => Ok(*proto),
        Some(k) => {
            let alpha = proto.map(|p| k * p);
            let d = Dirichlet::new(alpha).map_err(|e| Error::InvalidConfig(format!("dirichlet: {e}")))?;
            Ok(d.sample(rng))
        }
    }
}

fn coder_label(truth: LevelA, agreement: f64, rng: &mut ChaCha8Rng) -> LevelA {
    if rng.random_bool(agreement) {
        return truth;
    }
    let i = truth.index();
    let neighbours: Vec<usize> = [i.checked_sub(1), Some(i + 1).filter(|&j| j < NUM_CLASSES)]
        .into_iter()
        .flatten()
        .collect();
    LevelA::ALL[neighbours[rng.random_range(0..neighbours.len())]]
}

fn b2_segments(coder: &str, students: &[String], duration: f64, q: &[f64], rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let tiles = (duration / B2_SEGMENT_SECONDS).ceil() as usize;
    let counts = apportion(q, tiles * students.len());
    let mut codes: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
        .collect();
    codes.shuffle(rng);
    let mut out = Vec::with_capacity(codes.len());
    let mut next = codes.into_iter();
    for student in students {
        for t in 0..tiles {
            let start = t as f64 * B2_SEGMENT_SECONDS;
            out.push(Segment {
                coder_id: coder.into(),
                student_id: student.clone(),
                code: next.next().expect("one code per tile"),
                start,
                end: (start + B2_SEGMENT_SECONDS).min(duration),
            });
        }
    }
    out
}

/// Back-to-back segments of 1 to 30 s (in 0.1 s steps) covering the task.
fn c_segments(coder: &str, students: &[String], duration_s: u32, q: &[f64], rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let code_dist = rand::distr::weighted::WeightedIndex::new(q).expect("validated prototype");
    let horizon = duration_s as u64 * 10;
    let mut out = Vec::new();
    for student in students {
        let mut t = 0u64;
        while t < horizon {
            let end = (t + rng.random_range(10..=300u64)).min(horizon);
            out.push(Segment {
                coder_id: coder.into(),
                student_id: student.clone(),
                code: code_dist.sample(rng),
                start: t as f64 / 10.0,
                end: end as f64 / 10.0,
            });
            t = end;
        }
    }
    out
}

/// Generates the corpus described by `cfg`; identical configs give
/// identical corpora.
pub fn generate_corpus(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let per_group = cfg.tasks_by_group();

    let mut label_rng = rng_stream(cfg.seed, STREAM_LABELS);
    let quota = apportion(&cfg.label_proportions, cfg.total_tasks);
    let mut labels: Vec<LevelA> = quota
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(LevelA::ALL[c], n))
        .collect();
    labels.shuffle(&mut label_rng);

    let width = cfg.n_groups.to_string().len().max(2);
    let task_width = cfg.tasks_per_group.to_string().len().max(2);
    let mut tasks = Vec::new();
    let mut truth = Vec::new();
    let mut task_index = 0;
    for (g, (&n_tasks, &n_students)) in per_group.iter().zip(&cfg.students_per_group).enumerate() {
        let group_id = format!("g{:0width$}", g + 1);
        let students: Vec<String> = (1..=n_students).map(|s| format!("s{s}")).collect();
        let mut chosen = index::sample(&mut label_rng, cfg.tasks_per_group, n_tasks).into_vec();
        chosen.sort_unstable();
        for t in chosen {
            let task_id = format!("t{:0task_width$}", t + 1);
            let label = labels[task_index];
            truth.push(TruthRow {
                group_id: group_id.clone(),
                task_id: task_id.clone(),
                true_label: label,
            });
            let mut task_rng = task_stream(cfg.seed, task_index, STREAM_TASK);
            let mut dir_rng = task_stream(cfg.seed, task_index, STREAM_DIRICHLET);
            let duration_s = task_rng.random_range(cfg.duration_range[0]..=cfg.duration_range[1]);
            let duration = duration_s as f64;
            for &modality in &cfg.modalities {
                let q_b2 = draw_distribution(&cfg.b2_prototypes[label.index()], cfg.concentration, &mut dir_rng)?;
                let q_c = draw_distribution(&cfg.c_prototypes[label.index()], cfg.concentration, &mut dir_rng)?;
                let mut level_a_codes = BTreeMap::new();
                let mut b2 = Vec::new();
                for coder in CODERS {
                    level_a_codes.insert(
                        coder.to_string(),
                        coder_label(label, cfg.coder_agreement, &mut task_rng),
                    );
                    b2.extend(b2_segments(coder, &students, duration, &q_b2, &mut task_rng));
                }
                let c = c_segments(CODERS[0], &students, duration_s, &q_c, &mut task_rng);
                let rec = TaskRecording {
                    group_id: group_id.clone(),
                    task_id: task_id.clone(),
                    modality,
                    duration,
                    b2_segments: b2,
                    c_segments: c,
                    level_a_codes,
                };
                rec.validate()?;
                tasks.push(rec);
            }
            task_index += 1;
        }
    }
    tasks.sort_by(|a, b| (&a.group_id, &a.task_id, a.modality).cmp(&(&b.group_id, &b.task_id, b.modality)));
    Ok(SynthCorpus { tasks, truth })
}

/// Writes the corpus files plus `truth.csv` into `dir`.
pub fn write_synth_corpus(dir: impl AsRef<Path>, corpus: &SynthCorpus) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    write_corpus(dir, &corpus.tasks)?;
    let mut w = csv::Writer::from_path(dir.join(TRUTH_FILE))?;
    w.write_record(["group_id", "task_id", "true_label"])?;
    for r in &corpus.truth {
        w.write_record([r.group_id.as_str(), r.task_id.as_str(), r.true_label.name()])?;
    }
    w.flush().map_err(|e| Error::io("writing truth.csv", e))?;
    Ok(())
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<TruthRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 2,
            message,
        };
        if rec.len() != 3 {
            return Err(parse_err(format!("expected 3 fields, found {}", rec.len())));
        }
        out.push(TruthRow {
            group_id: rec[0].to_string(),
            task_id: rec[1].to_string(),
            true_label: rec[2].parse().map_err(parse_err)?,
        });
    }
    Ok(out)
}

/// Index of the prototype closest (in L1) to `hist`; ties to the lower index.
pub fn nearest_prototype(hist: &[f64], prototypes: &[[f64; B2_CODES]; NUM_CLASSES]) -> LevelA {
    let dist: Vec<f64> = prototypes
        .iter()
        .map(|p| p.iter().zip(hist).map(|(a, b)| (a - b).abs()).sum())
        .collect();
    let best = (0..NUM_CLASSES).fold(0, |b, i| if dist[i] < dist[b] { i } else { b });
    LevelA::ALL[best]
}
