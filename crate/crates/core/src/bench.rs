//! Per-stage timing statistics over many frames.

use std::fmt;

use crate::error::{Error, Result};
use crate::instance::BinaryMask;
use crate::pipeline::{Pipeline, StageTimings};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            mean,
            stddev: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub frames: usize,
    pub repetitions: usize,
    pub threads: usize,
    /// One entry per (frame, repetition), warm-up excluded.
    pub samples: Vec<StageTimings>,
    /// Indexed like [`StageTimings::STAGE_NAMES`].
    pub stages: [Stat; 4],
    pub total: Stat,
}

impl BenchReport {
    pub fn from_samples(
        frames: usize,
        repetitions: usize,
        threads: usize,
        samples: Vec<StageTimings>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("no timing samples"));
        }
        let stages =
            std::array::from_fn(|s| Stat::of(samples.iter().map(move |t| t.as_array()[s])));
        let total = Stat::of(samples.iter().map(StageTimings::total_ms));
        Ok(Self {
            frames,
            repetitions,
            threads,
            samples,
            stages,
            total,
        })
    }

    /// Frames per second implied by the mean total post-processing time.
    pub fn fps(&self) -> f64 {
        1000.0 / self.total.mean
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "frames={} repetitions={} threads={} samples={}",
            self.frames,
            self.repetitions,
            self.threads,
            self.samples.len()
        )?;
        for (name, s) in StageTimings::STAGE_NAMES.iter().zip(&self.stages) {
            writeln!(f, "{name:<8} mean={:.4} ms  std={:.4} ms", s.mean, s.stddev)?;
        }
        writeln!(
            f,
            "{:<8} mean={:.4} ms  std={:.4} ms",
            "total", self.total.mean, self.total.stddev
        )?;
        write!(f, "fps={:.2}", self.fps())
    }
}

/// Times `pipeline` on every frame `repetitions` times after one warm-up run.
///
/// With `threads > 1` frames are spread over worker threads; each frame still
/// runs single-threaded. Samples come back in (repetition, frame) order.
pub fn benchmark(
    pipeline: &Pipeline,
    frames: &[BinaryMask],
    repetitions: usize,
    threads: usize,
) -> Result<BenchReport> {
    if frames.is_empty() {
        return Err(Error::validation("benchmark needs at least one frame"));
    }
    if repetitions == 0 || threads == 0 {
        return Err(Error::validation("repetitions and threads must be >= 1"));
    }
    pipeline.run_frame(&frames[0])?;

    let jobs: Vec<&BinaryMask> = (0..repetitions).flat_map(|_| frames.iter()).collect();
    let samples = if threads == 1 {
        jobs.iter()
            .map(|m| pipeline.run_frame(m).map(|r| r.timings))
            .collect::<Result<Vec<_>>>()?
    } else {
        let chunk = jobs.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|m| pipeline.run_frame(m).map(|r| r.timings))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut all = Vec::with_capacity(jobs.len());
            for h in handles {
                all.extend(h.join().expect("benchmark worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };
    BenchReport::from_samples(frames.len(), repetitions, threads, samples)
}
