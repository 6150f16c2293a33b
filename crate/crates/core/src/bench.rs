//! Per-step controller timing over repeated scenario runs.

use serde::Serialize;

use crate::scenario::ScenarioConfig;
use crate::sim::run_scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct StepTiming {
    pub step: usize,
    pub t: f64,
    /// Mean over repetitions (ms).
    pub mean_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub repetitions: usize,
    pub steps: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub per_step: Vec<StepTiming>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Runs the scenario `repetitions` times back to back. Statistics are over
/// every step of every repetition.
pub fn bench_scenario(cfg: &ScenarioConfig, repetitions: usize) -> Result<TimingReport> {
    if repetitions == 0 {
        return Err(Error::Scenario("repetitions must be at least 1".into()));
    }
    let mut all = Vec::new();
    let mut per_step: Vec<StepTiming> = Vec::new();
    for _ in 0..repetitions {
        let log = run_scenario(cfg)?;
        if per_step.is_empty() {
            per_step = log
                .records
                .iter()
                .enumerate()
                .map(|(k, r)| StepTiming {
                    step: k,
                    t: r.t,
                    mean_ms: 0.0,
                })
                .collect();
        }
        for (slot, r) in per_step.iter_mut().zip(&log.records) {
            let ms = r.solve_time * 1e3;
            slot.mean_ms += ms / repetitions as f64;
            all.push(ms);
        }
    }
    all.sort_by(f64::total_cmp);
    let mean = all.iter().sum::<f64>() / all.len().max(1) as f64;
    Ok(TimingReport {
        repetitions,
        steps: per_step.len(),
        mean_ms: mean,
        median_ms: percentile(&all, 0.5),
        p95_ms: percentile(&all, 0.95),
        max_ms: all.last().copied().unwrap_or(0.0),
        per_step,
    })
}

impl TimingReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "repetitions {}\nsteps {}\nmean_ms {:.4}\nmedian_ms {:.4}\np95_ms {:.4}\nmax_ms {:.4}\nstep,t,mean_ms\n",
            self.repetitions, self.steps, self.mean_ms, self.median_ms, self.p95_ms, self.max_ms
        );
        for r in &self.per_step {
            s.push_str(&format!("{},{:.3},{:.4}\n", r.step, r.t, r.mean_ms));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
