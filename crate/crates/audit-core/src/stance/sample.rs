//! Sampling estimator for a video's stance composition.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{collapse_stance, StanceClassifier, StanceLabel5};
use crate::data_model::{CommentRecord, VideoRecord};
use crate::error::{Error, Result};
use crate::features::StanceCounts;
use crate::seed::derive_rng;

const SAMPLE_TAG: u64 = 0x534d_504c; // "SMPL"

/// Outcome of sampling and classifying one video's comments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StanceSample {
    /// Collapsed counts over successfully classified comments.
    pub counts: StanceCounts,
    /// Sample size asked for (capped by the comment count).
    pub n_requested: usize,
    /// Comments actually classified.
    pub n_classified: usize,
    /// Classifier failures; these reduce the effective sample.
    pub n_failed: usize,
    /// Five-way label per classified comment, in comment order.
    pub labels: Vec<(String, StanceLabel5)>,
}

/// Uniformly sample up to `n` comments without replacement (all of them when
/// the video has fewer), classify each, and report collapsed stance counts.
/// Membership is deterministic given `seed`.
pub fn sample_and_estimate(
    video: &VideoRecord,
    n: usize,
    seed: u64,
    classifier: &dyn StanceClassifier,
    concurrency: usize,
) -> Result<StanceSample> {
    if video.comments.is_empty() {
        return Err(Error::InvalidInput(format!("video {} has no comments", video.video_id)));
    }
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let total = video.comments.len();
    let mut picked: Vec<usize> = if n >= total {
        (0..total).collect()
    } else {
        let mut rng = derive_rng(seed, &[SAMPLE_TAG]);
        rand::seq::index::sample(&mut rng, total, n).into_vec()
    };
    picked.sort_unstable();

    let jobs: Vec<(&CommentRecord, &str)> = picked
        .iter()
        .map(|&idx| (&video.comments[idx], video.description.as_str()))
        .collect();
    let results = classify_all(classifier, &jobs, concurrency);

    let mut counts = StanceCounts::default();
    let mut labels = Vec::new();
    let mut failed = 0usize;
    for (&idx, result) in picked.iter().zip(results) {
        match result {
            Ok(label) => {
                counts.add(collapse_stance(label));
                labels.push((video.comments[idx].comment_id.clone(), label));
            }
            Err(_) => failed += 1,
        }
    }
    Ok(StanceSample {
        counts,
        n_requested: n.min(total),
        n_classified: picked.len() - failed,
        n_failed: failed,
        labels,
    })
}

/// Classify a batch with at most `concurrency` requests in flight. Results
/// come back in job order regardless of scheduling.
pub fn classify_all(
    classifier: &dyn StanceClassifier,
    jobs: &[(&CommentRecord, &str)],
    concurrency: usize,
) -> Vec<Result<StanceLabel5>> {
    let workers = concurrency.max(1).min(jobs.len().max(1));
    if workers <= 1 || jobs.len() <= 1 {
        return jobs
            .iter()
            .map(|(comment, description)| classifier.classify_comment(comment, description))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<StanceLabel5>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= jobs.len() {
                    break;
                }
                let (comment, description) = jobs[idx];
                let result = classifier.classify_comment(comment, description);
                *slots[idx].lock().expect("result slot") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("result slot").expect("worker wrote result"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stance::StubClassifier;

    fn video_with_texts(texts: &[&str]) -> VideoRecord {
        VideoRecord {
            video_id: "v1".into(),
            description: "election talk".into(),
            channel_id: "ch".into(),
            comments: texts
                .iter()
                .enumerate()
                .map(|(i, text)| CommentRecord {
                    comment_id: format!("c{i}"),
                    video_id: "v1".into(),
                    text: Some(text.to_string()),
                    like_count: 0,
                    reply_count: 0,
                    stance: None,
                })
                .collect(),
            exposures: vec![],
        }
    }

    #[test]
    fn counts_follow_the_stub_lexicon() {
        let video = video_with_texts(&[
            "vote blue 💙",
            "kamala all the way",
            "maga forever",
            "trump2024",
            "orange man bad",
            "nice video",
        ]);
        let sample = sample_and_estimate(&video, 50, 1, &StubClassifier, 2).unwrap();
        // 2 pro-dem + 1 anti-rep collapse Left; 2 pro-rep collapse Right.
        assert_eq!(sample.counts.n_left, 3);
        assert_eq!(sample.counts.n_right, 2);
        assert_eq!(sample.counts.n_neutral, 1);
        assert_eq!(sample.n_failed, 0);
        assert_eq!(sample.counts.total(), sample.n_classified as u64);
    }

    #[test]
    fn oversized_request_classifies_everything_once() {
        let video = video_with_texts(&["a", "b", "c"]);
        let sample = sample_and_estimate(&video, 50, 9, &StubClassifier, 1).unwrap();
        assert_eq!(sample.n_requested, 3);
        assert_eq!(sample.n_classified, 3);
    }

    #[test]
    fn same_seed_same_membership() {
        let texts: Vec<String> = (0..40)
            .map(|i| if i % 3 == 0 { format!("maga {i}") } else { format!("hello {i}") })
            .collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let video = video_with_texts(&refs);
        let a = sample_and_estimate(&video, 10, 77, &StubClassifier, 1).unwrap();
        let b = sample_and_estimate(&video, 10, 77, &StubClassifier, 4).unwrap();
        assert_eq!(a, b);
        let c = sample_and_estimate(&video, 10, 78, &StubClassifier, 1).unwrap();
        // Different seed usually picks a different subset; counts may differ.
        assert_eq!(c.n_requested, 10);
    }

    #[test]
    fn failures_reduce_effective_sample() {
        struct Flaky;
        impl StanceClassifier for Flaky {
            fn classify_comment(&self, comment: &CommentRecord, _d: &str) -> Result<StanceLabel5> {
                if comment.comment_id.ends_with('0') {
                    Err(Error::Classifier("boom".into()))
                } else {
                    Ok(StanceLabel5::Neutral)
                }
            }
        }
        let video = video_with_texts(&["a"; 10]);
        let sample = sample_and_estimate(&video, 10, 1, &Flaky, 3).unwrap();
        assert_eq!(sample.n_failed, 1);
        assert_eq!(sample.n_classified, 9);
        assert_eq!(sample.counts.total(), 9);
    }

    #[test]
    fn empty_video_is_an_error() {
        let video = video_with_texts(&[]);
        assert!(sample_and_estimate(&video, 10, 1, &StubClassifier, 1).is_err());
    }
}
