use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use cubetto_core::blocklang::{
    execute, extract_programs, parse_program, shortest_program, Cell, GridWorld, Heading, Outcome, Pose,
    Program, SimulationResult,
};
use cubetto_core::catalog::{render_prompt, LengthVariant, ScenarioInput, ScenarioParams};
use cubetto_core::gateway::{
    generate as generate_one, run_batch, Backend, FinishReason, HttpBackend, ModelSpec, ReplayBackend,
};
use cubetto_core::lint::{LintInput, LintReport, Linter, ScenarioRef};
use cubetto_core::report::{
    comparison_matrix, matrix_legend, parse_scenario_markdown, read_reports, write_archive, write_matrix,
    write_teacher_doc,
};
use serde_json::json;

use crate::config::Config;
use crate::{CliError, VariantArgs};

pub struct Context {
    pub config: Config,
    pub replay: Option<PathBuf>,
    pub json: bool,
}

impl Context {
    fn linter(&self) -> Result<Linter, CliError> {
        Ok(Linter::new(self.config.lexicon()?, self.config.length_limit))
    }

    fn backend(&self) -> Box<dyn Backend> {
        match &self.replay {
            Some(dir) => Box::new(ReplayBackend::new(dir)),
            None => {
                let mut http = HttpBackend::new(Duration::from_secs(self.config.timeout_secs));
                if let Some(key) = self.config.api_key_env.as_ref().and_then(|v| std::env::var(v).ok()) {
                    http = http.with_api_key(key);
                }
                Box::new(http)
            }
        }
    }

    /// Configured models, or the model directories of the replay corpus.
    fn models(&self) -> Result<Vec<ModelSpec>, CliError> {
        let configured = self.config.models();
        if !configured.is_empty() {
            return Ok(configured);
        }
        let Some(dir) = &self.replay else {
            return Err(CliError::Usage("no models configured; add [[models]] to the config".into()));
        };
        let names = ReplayBackend::new(dir)
            .discover_models()
            .map_err(|e| CliError::Usage(format!("cannot read replay directory {}: {e}", dir.display())))?;
        if names.is_empty() {
            return Err(CliError::Usage(format!("no model directories under {}", dir.display())));
        }
        Ok(names.into_iter().map(|n| ModelSpec::new(n, "replay")).collect())
    }
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Preset id.
    #[arg(long, conflicts_with_all = ["world", "subjects", "task"])]
    preset: Option<u8>,
    /// Narrative world of a custom scenario.
    #[arg(long)]
    world: Option<String>,
    /// Toys acting as subjects of a custom scenario.
    #[arg(long)]
    subjects: Option<String>,
    /// Task of a custom scenario.
    #[arg(long)]
    task: Option<String>,
}

fn scenario_input(ctx: &Context, args: &ScenarioArgs) -> Result<ScenarioInput, CliError> {
    if let Some(id) = args.preset {
        return find_preset(ctx, id).map(ScenarioInput::from);
    }
    match (&args.world, &args.subjects, &args.task) {
        (Some(w), Some(s), Some(t)) => ScenarioParams::new(w.as_str(), s.as_str(), t.as_str())
            .map(ScenarioInput::from)
            .map_err(|e| CliError::Usage(e.to_string())),
        (None, None, None) => Err(CliError::Usage("give --preset or all of --world, --subjects and --task".into())),
        _ => Err(CliError::Usage("a custom scenario needs all of --world, --subjects and --task".into())),
    }
}

fn find_preset(ctx: &Context, id: u8) -> Result<cubetto_core::catalog::PresetRow, CliError> {
    let presets = ctx.config.presets()?;
    let known: Vec<String> = presets.iter().map(|p| p.id.to_string()).collect();
    presets
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| CliError::Usage(format!("unknown preset {id}; known presets: {}", known.join(", "))))
}

fn variant(args: &VariantArgs) -> LengthVariant {
    match (args.half_page, args.char_limit) {
        (_, Some(n)) => LengthVariant::CharLimit(n),
        (true, None) => LengthVariant::HalfPage,
        (false, None) => LengthVariant::Standard,
    }
}

pub fn presets(ctx: &Context) -> Result<(), CliError> {
    let presets = ctx.config.presets()?;
    if ctx.json {
        print_json(&presets);
        return Ok(());
    }
    for p in &presets {
        println!(
            "{}  {} | {} | {}",
            p.id,
            p.params.narrative_world(),
            p.params.subjects(),
            p.params.task()
        );
    }
    Ok(())
}

pub fn prompt(ctx: &Context, scenario: &ScenarioArgs, variant_args: &VariantArgs) -> Result<(), CliError> {
    let input = scenario_input(ctx, scenario)?;
    let template = ctx.config.template(variant(variant_args))?;
    let text = render_prompt(&template, &input.params);
    if ctx.json {
        print_json(&json!({ "key": input.key(), "prompt": text }));
    } else {
        println!("{text}");
    }
    Ok(())
}

fn pick_model(ctx: &Context, name: Option<&str>) -> Result<ModelSpec, CliError> {
    let models = ctx.models()?;
    match name {
        Some(name) => models
            .into_iter()
            .find(|m| m.name == name)
            .or_else(|| ctx.replay.as_ref().map(|_| ModelSpec::new(name, "replay")))
            .ok_or_else(|| CliError::Usage(format!("model {name} is not configured"))),
        None if models.len() == 1 => Ok(models.into_iter().next().expect("one model")),
        None => {
            let names: Vec<&str> = models.iter().map(|m| m.name.as_str()).collect();
            Err(CliError::Usage(format!("choose a model with --model ({})", names.join(", "))))
        }
    }
}

pub fn generate(
    ctx: &Context,
    scenario: &ScenarioArgs,
    variant_args: &VariantArgs,
    model: Option<&str>,
    round: u32,
) -> Result<(), CliError> {
    let input = scenario_input(ctx, scenario)?;
    let template = ctx.config.template(variant(variant_args))?;
    let spec = pick_model(ctx, model)?;
    let linter = ctx.linter()?;
    let backend = ctx.backend();

    let prompt = render_prompt(&template, &input.params);
    let scenario = generate_one(backend.as_ref(), &spec, &input, round, &prompt).map_err(failure)?;
    let report = linter.lint(&scenario);
    let root = &ctx.config.archive;
    let layout = write_archive(std::slice::from_ref(&scenario), std::slice::from_ref(&report), root)
        .map_err(failure)?;
    let teacher = write_teacher_doc(root, &scenario, &report).map_err(failure)?;
    let (markdown, lint_json) = &layout.entries[0];

    if ctx.json {
        print_json(&json!({
            "scenario": scenario,
            "lint": report,
            "files": { "markdown": markdown, "lint": lint_json, "teacher": teacher },
        }));
        return Ok(());
    }
    println!(
        "{} / {} / round {}: finish {}, {} completion tokens",
        scenario.model_name,
        scenario.key(),
        scenario.round,
        scenario.finish_reason,
        scenario.completion_tokens
    );
    let set = report.flags.set();
    println!("flags: {}", if set.is_empty() { "none".to_string() } else { set.join(", ") });
    println!("archive: {}", markdown.display());
    println!("teacher: {}", teacher.display());
    Ok(())
}

/// Always prints the report as JSON.
pub fn lint(ctx: &Context, file: &Path, preset: Option<u8>, finish_reason: &str) -> Result<(), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
    let linter = ctx.linter()?;
    let report = match parse_scenario_markdown(&text) {
        Ok(scenario) if preset.is_none() => linter.lint(&scenario),
        _ => {
            let row = preset.map(|id| find_preset(ctx, id)).transpose()?;
            let params = row.as_ref().map(|r| r.params.clone());
            let finish = FinishReason::from(finish_reason.to_string());
            let body = parse_scenario_markdown(&text).map(|s| s.response_text).unwrap_or(text);
            let input = LintInput { text: &body, finish_reason: &finish, params: params.as_ref() };
            let scenario_ref = ScenarioRef { model_name: String::new(), preset_id: preset, params: params.clone(), round: 0 };
            linter.report(&input, scenario_ref)
        }
    };
    println!("{}", report.to_json());
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Board description (JSON). Missing width or height keys take the
    /// configured board size; `null` makes that axis unbounded.
    #[arg(long)]
    world: Option<PathBuf>,
    /// Target cell as `x,y`, overriding the world file.
    #[arg(long, value_parser = parse_cell)]
    target: Option<Cell>,
    /// Program text, for example "forward, turn right, forward".
    #[arg(long, conflicts_with = "from_scenario")]
    program: Option<String>,
    /// Run every program found in a scenario text.
    #[arg(long)]
    from_scenario: Option<PathBuf>,
    /// Also print a shortest program to the target.
    #[arg(long)]
    shortest: bool,
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let n = |v: &str| v.trim().parse::<i64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Cell::new(n(x)?, n(y)?))
}

fn load_world(ctx: &Context, args: &SimulateArgs) -> Result<GridWorld, CliError> {
    let (w, h) = (ctx.config.board_width, ctx.config.board_height);
    let world = match &args.world {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            if let Some(obj) = value.as_object_mut() {
                obj.entry("width").or_insert(json!(w));
                obj.entry("height").or_insert(json!(h));
            }
            GridWorld::from_json(&value.to_string())
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => GridWorld::bounded(w, h, Pose::new(0, 0, Heading::N), None)
            .map_err(|e| CliError::Usage(e.to_string()))?,
    };
    match args.target {
        Some(t) => world.with_target(Some(t)).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(world),
    }
}

fn describe(outcome: &Outcome) -> String {
    match outcome {
        Outcome::ReachedTarget { steps } => format!("reached the target after {steps} commands"),
        Outcome::Finished => "finished without reaching a target".into(),
        Outcome::OutOfBounds { step } => format!("command {} would leave the board", step + 1),
        Outcome::HitObstacle { step } => format!("command {} would hit an obstacle", step + 1),
    }
}

fn print_run(program: &Program, result: &SimulationResult) {
    println!("program: {}", if program.is_empty() { "(empty)".to_string() } else { program.canonical() });
    println!("  start  {}", result.trace[0]);
    for (i, (cmd, pose)) in program.commands().iter().zip(&result.trace[1..]).enumerate() {
        println!("  {:>2} {:<10} {}", i + 1, cmd.name(), pose);
    }
    println!("  outcome: {}", describe(&result.outcome));
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let world = load_world(ctx, args)?;
    let capacity = ctx.config.capacity;

    let mut runs: Vec<(Program, Option<std::ops::Range<usize>>)> = Vec::new();
    let mut skipped = Vec::new();
    if let Some(text) = &args.program {
        let program = parse_program(text, capacity).map_err(|e| CliError::Usage(e.to_string()))?;
        runs.push((program, None));
    } else if let Some(path) = &args.from_scenario {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let body = parse_scenario_markdown(&text).map(|s| s.response_text).unwrap_or(text);
        let extraction = extract_programs(&body, &ctx.config.lexicon()?, capacity);
        runs.extend(extraction.programs.into_iter().map(|p| (p.program, Some(p.span))));
        skipped = extraction.skipped;
    } else if !args.shortest {
        return Err(CliError::Usage("give --program, --from-scenario or --shortest".into()));
    }

    let results: Vec<SimulationResult> = runs.iter().map(|(p, _)| execute(p, &world)).collect();
    let shortest = if args.shortest {
        Some(shortest_program(&world).map_err(|e| CliError::Usage(e.to_string())))
    } else {
        None
    }
    .transpose()?;

    if ctx.json {
        let runs: Vec<_> = runs
            .iter()
            .zip(&results)
            .map(|((p, span), r)| json!({ "program": p, "span": span, "result": r }))
            .collect();
        print_json(&json!({ "runs": runs, "skipped": skipped, "shortest": shortest }));
        return Ok(());
    }
    if args.from_scenario.is_some() && runs.is_empty() {
        println!("no programs found");
    }
    for ((program, _), result) in runs.iter().zip(&results) {
        print_run(program, result);
    }
    for s in &skipped {
        println!("skipped {:?}: {:?}", s.text, s.reason);
    }
    if let Some(p) = shortest {
        println!("shortest: {} ({} commands)", if p.is_empty() { "(empty)".into() } else { p.canonical() }, p.len());
    }
    Ok(())
}

pub fn batch(
    ctx: &Context,
    rounds: u32,
    model_filter: &[String],
    preset_filter: &[u8],
    teacher: bool,
    variant_args: &VariantArgs,
) -> Result<(), CliError> {
    let template = ctx.config.template(variant(variant_args))?;
    let mut specs = ctx.models()?;
    if !model_filter.is_empty() {
        if let Some(missing) = model_filter.iter().find(|m| !specs.iter().any(|s| &s.name == *m)) {
            return Err(CliError::Usage(format!("model {missing} is not configured")));
        }
        specs.retain(|s| model_filter.contains(&s.name));
    }
    let inputs: Vec<ScenarioInput> = if preset_filter.is_empty() {
        ctx.config.presets()?.into_iter().map(ScenarioInput::from).collect()
    } else {
        preset_filter
            .iter()
            .map(|id| find_preset(ctx, *id).map(ScenarioInput::from))
            .collect::<Result<_, _>>()?
    };
    let linter = ctx.linter()?;
    let backend = ctx.backend();

    let outcome = run_batch(backend.as_ref(), &specs, &inputs, &template, rounds)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let reports: Vec<LintReport> = outcome.scenarios.iter().map(|s| linter.lint(s)).collect();
    let root = &ctx.config.archive;
    write_archive(&outcome.scenarios, &reports, root).map_err(failure)?;
    if teacher {
        for (s, r) in outcome.scenarios.iter().zip(&reports) {
            write_teacher_doc(root, s, r).map_err(failure)?;
        }
    }
    let all_reports = read_reports(root).map_err(failure)?;
    let matrix_path = write_matrix(root, &all_reports).map_err(failure)?;
    let failures_path = root.join("failures.json");
    let failures_json = format!(
        "{}\n",
        serde_json::to_string_pretty(&outcome.failures).expect("failures serialize")
    );
    if std::fs::read_to_string(&failures_path).ok().as_deref() != Some(failures_json.as_str()) {
        std::fs::write(&failures_path, failures_json).map_err(failure)?;
    }

    if ctx.json {
        print_json(&json!({
            "attempted": outcome.attempted(),
            "scenarios": outcome.scenarios.len(),
            "failures": outcome.failures,
            "archive": root,
            "comparison": matrix_path,
        }));
    } else {
        println!(
            "{} of {} generations succeeded; archive at {}",
            outcome.scenarios.len(),
            outcome.attempted(),
            root.display()
        );
        println!();
        print!("{}", comparison_matrix(&all_reports));
    }
    for f in &outcome.failures {
        let key = ScenarioInput { preset_id: f.preset_id, params: f.params.clone() }.key();
        eprintln!("failed: {} / {} / round {}: {}", f.model_name, key, f.round, f.error);
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "{} generations failed; see {}",
            outcome.failures.len(),
            failures_path.display()
        )))
    }
}

pub fn report(ctx: &Context) -> Result<(), CliError> {
    let root = &ctx.config.archive;
    let reports = read_reports(root).map_err(failure)?;
    if ctx.json {
        print_json(&reports);
        return Ok(());
    }
    if !reports.is_empty() {
        write_matrix(root, &reports).map_err(failure)?;
    }
    print!("{}\n{}", comparison_matrix(&reports), matrix_legend());
    Ok(())
}
