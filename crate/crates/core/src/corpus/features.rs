//! Histogram features of coded timelines.

use super::scheme::{B2_SCHEME, C_SCHEME};
use super::timeline::{by_coder_student, TaskRecording, TIME_EPS};
use crate::error::{Error, Result};

/// Sampling period of the Level C timeline, in seconds.
pub const C_GRID_STEP: f64 = 0.1;

/// Number of grid points `k` with `k * step` in `[from, to)`.
///
/// Boundaries are snapped to the grid within [`TIME_EPS`] so that a segment
/// ending at 0.5 s does not claim the grid point at 0.5 s.
fn grid_index(t: f64) -> i64 {
    (t / C_GRID_STEP - TIME_EPS).ceil() as i64
}

/// Number of grid points strictly before `duration`.
pub fn grid_points(duration: f64) -> u64 {
    grid_index(duration).max(0) as u64
}

/// Raw B2 code counts of one coder, accumulated over all students.
pub fn b2_counts(task: &TaskRecording, coder_id: &str) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; B2_SCHEME.len()];
    let mut seen = false;
    for s in task.b2_segments.iter().filter(|s| s.coder_id == coder_id) {
        counts[s.code] += 1;
        seen = true;
    }
    if !seen {
        return Err(Error::EmptyTimeline(format!(
            "task {}/{} has no B2 segments for coder {coder_id}",
            task.group_id, task.task_id
        )));
    }
    Ok(counts)
}

/// Normalized B2 histogram (length 7) of one coder.
pub fn b2_histogram(task: &TaskRecording, coder_id: &str) -> Result<Vec<f64>> {
    Ok(normalize(&b2_counts(task, coder_id)?))
}

/// B2 histogram pooling the segments of every coder.
pub fn b2_histogram_pooled(task: &TaskRecording) -> Result<Vec<f64>> {
    let mut counts = vec![0u64; B2_SCHEME.len()];
    for s in &task.b2_segments {
        counts[s.code] += 1;
    }
    if task.b2_segments.is_empty() {
        return Err(Error::EmptyTimeline(format!(
            "task {}/{} has no B2 segments",
            task.group_id, task.task_id
        )));
    }
    Ok(normalize(&counts))
}

/// Raw C code counts: the timeline is sampled every 0.1 s on
/// `0.0, 0.1, ...` strictly below the task duration and each grid point inside
/// a segment `[start, end)` counts once for that segment's code. Grid points
/// in uncoded gaps contribute nothing.
pub fn c_counts(task: &TaskRecording) -> Result<Vec<u64>> {
    if task.c_segments.is_empty() {
        return Err(Error::EmptyTimeline(format!(
            "task {}/{} has no C segments",
            task.group_id, task.task_id
        )));
    }
    let horizon = grid_index(task.duration).max(0);
    let mut counts = vec![0u64; C_SCHEME.len()];
    for ((coder, student), mut segs) in by_coder_student(&task.c_segments) {
        segs.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut last_end = i64::MIN;
        for s in segs {
            let lo = grid_index(s.start).max(0);
            let hi = grid_index(s.end).min(horizon);
            if lo < last_end {
                return Err(Error::InvalidTimeline(format!(
                    "task {}/{}: C segments of coder {coder}, student {student} overlap at {}s",
                    task.group_id, task.task_id, s.start
                )));
            }
            if hi > lo {
                counts[s.code] += (hi - lo) as u64;
            }
            last_end = last_end.max(hi);
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyTimeline(format!(
            "task {}/{}: C segments cover no grid points",
            task.group_id, task.task_id
        )));
    }
    Ok(counts)
}

/// Normalized C histogram (length 23).
pub fn c_histogram(task: &TaskRecording) -> Result<Vec<f64>> {
    Ok(normalize(&c_counts(task)?))
}

/// Divides counts by their total. The caller guarantees a non-zero total.
pub fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    debug_assert!(total > 0);
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;
    use crate::corpus::timeline::{Modality, Segment};

    fn seg(coder: &str, student: &str, code: usize, start: f64, end: f64) -> Segment {
        Segment {
            coder_id: coder.into(),
            student_id: student.into(),
            code,
            start,
            end,
        }
    }

    fn task(b2: Vec<Segment>, c: Vec<Segment>) -> TaskRecording {
        let mut t = TaskRecording {
            group_id: "g1".into(),
            task_id: "t1".into(),
            modality: Modality::AudioVideo,
            duration: 0.0,
            b2_segments: b2,
            c_segments: c,
            level_a_codes: BTreeMap::new(),
        };
        t.refresh_duration();
        t
    }

    fn b2_tiles(coder: &str, student: &str, codes: &[usize]) -> Vec<Segment> {
        codes
            .iter()
            .enumerate()
            .map(|(i, &c)| seg(coder, student, c, 60.0 * i as f64, 60.0 * (i + 1) as f64))
            .collect()
    }

    #[test]
    fn b2_single_code() {
        let mut segs = Vec::new();
        for s in ["a", "b", "c", "d"] {
            segs.extend(b2_tiles("k1", s, &[1; 10]));
        }
        let h = b2_histogram(&task(segs, vec![]), "k1").unwrap();
        assert_eq!(h, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn b2_mixed_students() {
        let mut segs = b2_tiles("k1", "a", &[0; 10]);
        for s in ["b", "c", "d"] {
            segs.extend(b2_tiles("k1", s, &[2; 10]));
        }
        let h = b2_histogram(&task(segs, vec![]), "k1").unwrap();
        assert_eq!(h[0], 0.25);
        assert_eq!(h[2], 0.75);
    }

    #[test]
    fn b2_other_coder_is_empty() {
        let t = task(b2_tiles("k1", "a", &[0; 3]), vec![]);
        assert!(matches!(b2_histogram(&t, "k2"), Err(Error::EmptyTimeline(_))));
    }

    #[test]
    fn c_single_segment_counts_ten_grid_points() {
        let t = task(vec![], vec![seg("k", "a", 0, 0.0, 1.0)]);
        let counts = c_counts(&t).unwrap();
        assert_eq!(counts[0], 10);
        assert_eq!(counts.iter().sum::<u64>(), 10);
        assert_eq!(c_histogram(&t).unwrap()[0], 1.0);
    }

    #[test]
    fn c_equal_halves() {
        let t = task(vec![], vec![seg("k", "a", 0, 0.0, 2.0), seg("k", "a", 1, 2.0, 4.0)]);
        let h = c_histogram(&t).unwrap();
        assert_eq!(h[0], 0.5);
        assert_eq!(h[1], 0.5);
    }

    #[test]
    fn c_boundary_grid_point_goes_to_later_segment() {
        let t = task(vec![], vec![seg("k", "a", 0, 0.0, 0.5), seg("k", "a", 1, 0.5, 1.0)]);
        let counts = c_counts(&t).unwrap();
        assert_eq!(counts[0], 5);
        assert_eq!(counts[1], 5);
    }

    #[test]
    fn c_gaps_contribute_nothing() {
        let t = task(vec![], vec![seg("k", "a", 3, 0.0, 1.0), seg("k", "a", 4, 2.0, 2.5)]);
        let counts = c_counts(&t).unwrap();
        assert_eq!(counts[3], 10);
        assert_eq!(counts[4], 5);
        assert_eq!(counts.iter().sum::<u64>(), 15);
    }

    #[test]
    fn c_overlap_is_rejected() {
        let t = task(vec![], vec![seg("k", "a", 0, 0.0, 1.0), seg("k", "a", 1, 0.5, 2.0)]);
        assert!(matches!(c_counts(&t), Err(Error::InvalidTimeline(_))));
    }

    #[test]
    fn c_empty_timeline() {
        let t = task(b2_tiles("k", "a", &[0]), vec![]);
        assert!(matches!(c_histogram(&t), Err(Error::EmptyTimeline(_))));
    }

    #[test]
    fn grid_point_count_with_full_coverage() {
        // 12.34 s -> grid points 0.0 .. 12.3, i.e. 124 of them
        let t = task(vec![], vec![seg("k", "a", 0, 0.0, 5.0), seg("k", "a", 2, 5.0, 12.34)]);
        assert_eq!(c_counts(&t).unwrap().iter().sum::<u64>(), 124);
        assert_eq!(grid_points(12.34), 124);
        assert_eq!(grid_points(1.0), 10);
    }

    fn arb_b2_task() -> impl Strategy<Value = Vec<Vec<usize>>> {
        prop::collection::vec(prop::collection::vec(0usize..7, 1..15), 1..6)
    }

    proptest! {
        #[test]
        fn b2_sums_to_one_and_ignores_student_order(students in arb_b2_task(), seed in any::<u64>()) {
            let mut segs = Vec::new();
            for (i, codes) in students.iter().enumerate() {
                segs.extend(b2_tiles("k", &format!("s{i}"), codes));
            }
            let h = b2_histogram(&task(segs.clone(), vec![]), "k").unwrap();
            prop_assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(h.iter().all(|&v| v >= 0.0));

            // reorder the segment list and relabel students
            let mut shuffled = segs;
            let n = shuffled.len();
            for i in 0..n {
                let j = ((seed as usize).wrapping_mul(31).wrapping_add(i * 17)) % n;
                shuffled.swap(i, j);
            }
            for s in &mut shuffled {
                s.student_id = format!("x{}", s.student_id);
            }
            let h2 = b2_histogram(&task(shuffled, vec![]), "k").unwrap();
            prop_assert_eq!(h, h2);
        }

        #[test]
        fn b2_invariant_to_repeating_timeline(students in arb_b2_task()) {
            let mut once = Vec::new();
            let mut twice = Vec::new();
            for (i, codes) in students.iter().enumerate() {
                let name = format!("s{i}");
                once.extend(b2_tiles("k", &name, codes));
                let doubled: Vec<usize> = codes.iter().chain(codes).copied().collect();
                twice.extend(b2_tiles("k", &name, &doubled));
            }
            let h1 = b2_histogram(&task(once, vec![]), "k").unwrap();
            let h2 = b2_histogram(&task(twice, vec![]), "k").unwrap();
            for (a, b) in h1.iter().zip(&h2) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn c_full_coverage_counts_every_grid_point(lengths in prop::collection::vec(1u32..300, 1..20), codes in prop::collection::vec(0usize..23, 20)) {
            // segment lengths in tenths of a second
            let mut segs = Vec::new();
            let mut t = 0u32;
            for (i, len) in lengths.iter().enumerate() {
                segs.push(seg("k", "a", codes[i], t as f64 / 10.0, (t + len) as f64 / 10.0));
                t += len;
            }
            let task = task(vec![], segs);
            let counts = c_counts(&task).unwrap();
            prop_assert_eq!(counts.iter().sum::<u64>(), t as u64);
            let h = c_histogram(&task).unwrap();
            prop_assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
