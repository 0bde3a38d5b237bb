use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use super::{generate, Backend, GatewayError, GeneratedScenario, ModelSpec};
use crate::catalog::{render_prompt, PromptTemplate, ScenarioInput, ScenarioParams};

/// A generation that failed inside a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub model_name: String,
    pub preset_id: Option<u8>,
    pub params: ScenarioParams,
    pub round: u32,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchOutcome {
    /// Successful generations in (spec, input, round) order.
    pub scenarios: Vec<GeneratedScenario>,
    /// Failed generations in the same order.
    pub failures: Vec<BatchFailure>,
}

impl BatchOutcome {
    pub fn attempted(&self) -> usize {
        self.scenarios.len() + self.failures.len()
    }
}

type Slot = Mutex<Option<Result<GeneratedScenario, GatewayError>>>;

struct Job<'a> {
    spec: &'a ModelSpec,
    input: &'a ScenarioInput,
    round: u32,
    prompt: String,
}

/// Runs every spec against every input for `rounds` rounds.
///
/// Each spec gets its own pool of `parallelism` workers, so at most that
/// many requests are in flight per endpoint. Results come back in
/// (spec, input, round) order whatever order they complete in, and a
/// failed generation is recorded without stopping the others.
pub fn run_batch(
    backend: &dyn Backend,
    specs: &[ModelSpec],
    inputs: &[ScenarioInput],
    template: &PromptTemplate,
    rounds: u32,
) -> Result<BatchOutcome, GatewayError> {
    if specs.is_empty() || inputs.is_empty() {
        return Err(GatewayError::InvalidRequest("batch needs at least one model and one input".into()));
    }
    if rounds == 0 {
        return Err(GatewayError::InvalidRequest("batch needs at least one round".into()));
    }
    for spec in specs {
        spec.validate()?;
    }

    // One job list per spec; job order inside a list is (input, round).
    let per_spec: Vec<Vec<Job<'_>>> = specs
        .iter()
        .map(|spec| {
            inputs
                .iter()
                .flat_map(|input| {
                    let prompt = render_prompt(template, &input.params);
                    (1..=rounds).map(move |round| Job { spec, input, round, prompt: prompt.clone() })
                })
                .collect()
        })
        .collect();

    let results: Vec<Vec<Slot>> = per_spec
        .iter()
        .map(|jobs| jobs.iter().map(|_| Mutex::new(None)).collect())
        .collect();

    let cursors: Vec<AtomicUsize> = per_spec.iter().map(|_| AtomicUsize::new(0)).collect();
    thread::scope(|scope| {
        for ((jobs, slots), next) in per_spec.iter().zip(&results).zip(&cursors) {
            let workers = jobs[0].spec.parallelism.min(jobs.len());
            for _ in 0..workers {
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(job) = jobs.get(i) else { break };
                    let result = generate(backend, job.spec, job.input, job.round, &job.prompt);
                    *slots[i].lock().unwrap() = Some(result);
                });
            }
        }
    });

    let mut outcome = BatchOutcome::default();
    for (jobs, slots) in per_spec.iter().zip(results) {
        for (job, slot) in jobs.iter().zip(slots) {
            match slot.into_inner().unwrap().expect("every job ran") {
                Ok(scenario) => outcome.scenarios.push(scenario),
                Err(e) => outcome.failures.push(BatchFailure {
                    model_name: job.spec.name.clone(),
                    preset_id: job.input.preset_id,
                    params: job.input.params.clone(),
                    round: job.round,
                    error: e.to_string(),
                }),
            }
        }
    }
    Ok(outcome)
}
