use cubetto_core::blocklang::{
    execute, extract_programs, feasible, parse_program, shortest_program, step, Cell, Command, GridWorld,
    Heading, Lexicon, OracleError, Outcome, ParseError, Pose, Program, SkipReason, DEFAULT_CAPACITY,
};
use proptest::prelude::*;

fn command() -> impl Strategy<Value = Command> {
    prop::sample::select(Command::ALL.to_vec())
}

fn program(max: usize) -> impl Strategy<Value = Program> {
    prop::collection::vec(command(), 0..=max).prop_map(Program::new)
}

fn heading() -> impl Strategy<Value = Heading> {
    prop::sample::select(Heading::ALL.to_vec())
}

fn run_free(p: &Program, start: Pose) -> Pose {
    p.commands().iter().fold(start, |pose, c| step(pose, *c))
}

proptest! {
    #[test]
    fn canonical_text_round_trips(p in program(DEFAULT_CAPACITY)) {
        prop_assert_eq!(parse_program(&p.canonical(), DEFAULT_CAPACITY).unwrap(), p.clone());
        let colours: Vec<&str> = p.commands().iter().map(|c| match c {
            Command::Forward => "GREEN",
            Command::TurnLeft => "yellow",
            Command::TurnRight => "Red",
        }).collect();
        prop_assert_eq!(parse_program(&colours.join(" ; "), DEFAULT_CAPACITY).unwrap(), p);
    }

    #[test]
    fn over_capacity_is_rejected(p in program(30)) {
        match parse_program(&p.canonical(), 12) {
            Ok(parsed) => { prop_assert!(p.len() <= 12); prop_assert_eq!(parsed, p); }
            Err(e) => prop_assert_eq!(e, ParseError::OverCapacity { len: p.len(), capacity: 12 }),
        }
    }

    #[test]
    fn turns_form_a_rotation_group(h in heading(), x in -5i64..5, y in -5i64..5) {
        let start = Pose::new(x, y, h);
        let four_left = Program::new(vec![Command::TurnLeft; 4]);
        let four_right = Program::new(vec![Command::TurnRight; 4]);
        let left_right = Program::new(vec![Command::TurnLeft, Command::TurnRight]);
        prop_assert_eq!(run_free(&four_left, start), start);
        prop_assert_eq!(run_free(&four_right, start), start);
        prop_assert_eq!(run_free(&left_right, start), start);
    }

    #[test]
    fn mirrored_program_mirrors_the_path(p in program(20), h in heading()) {
        // Reflect across the start heading's axis: forward component kept,
        // sideways component negated.
        let start = Pose::new(0, 0, h);
        let a = run_free(&p, start);
        let b = run_free(&p.mirrored(), start);
        let (fx, fy) = h.delta();
        let (sx, sy) = (fy, -fx);
        let along = |q: Pose| q.x * fx + q.y * fy;
        let across = |q: Pose| q.x * sx + q.y * sy;
        prop_assert_eq!(along(a), along(b));
        prop_assert_eq!(across(a), -across(b));
    }

    #[test]
    fn world_rotation_commutes(p in program(20)) {
        // Start facing E instead of N: displacement rotates clockwise.
        let a = run_free(&p, Pose::new(0, 0, Heading::N));
        let b = run_free(&p, Pose::new(0, 0, Heading::E));
        prop_assert_eq!((b.x, b.y), (a.y, -a.x));
        prop_assert_eq!(b.heading, a.heading.right());
    }

    #[test]
    fn oracle_is_sound_and_no_longer_than_any_witness(
        w in 2u32..6, h in 2u32..6,
        obstacles in prop::collection::vec((0i64..6, 0i64..6), 0..8),
        sx in 0i64..6, sy in 0i64..6, sh in heading(),
        witness in program(10),
    ) {
        let (sx, sy) = (sx % w as i64, sy % h as i64);
        let obstacles: Vec<Cell> = obstacles.into_iter()
            .map(|(x, y)| Cell::new(x % w as i64, y % h as i64))
            .filter(|c| *c != Cell::new(sx, sy))
            .collect();
        let base = GridWorld::new(Some(w), Some(h), obstacles, Pose::new(sx, sy, sh), None).unwrap();
        // Use the witness's end cell as target when the witness stays on the board.
        let free = execute(&witness, &base);
        prop_assume!(free.outcome == Outcome::Finished);
        let target = free.final_pose().cell();
        let world = base.with_target(Some(target)).unwrap();
        let best = shortest_program(&world).unwrap();
        let run = execute(&best, &world);
        prop_assert_eq!(run.outcome, Outcome::ReachedTarget { steps: best.len() });
        prop_assert!(feasible(&world, &best));
        prop_assert!(best.len() <= witness.len());
    }
}

#[test]
fn errors_report_the_failing_step() {
    let world = GridWorld::new(
        Some(3),
        Some(3),
        [Cell::new(1, 1)],
        Pose::new(0, 0, Heading::N),
        Some(Cell::new(2, 2)),
    )
    .unwrap();
    let p = parse_program("right forward left forward", 12).unwrap();
    let r = execute(&p, &world);
    assert_eq!(r.outcome, Outcome::HitObstacle { step: 3 });
    assert_eq!(r.executed_steps(), 3);
    assert_eq!(r.final_pose(), Pose::new(1, 0, Heading::N));

    let p = parse_program("left forward", 12).unwrap();
    assert_eq!(execute(&p, &world).outcome, Outcome::OutOfBounds { step: 1 });
    assert!(!feasible(&world, &p));
}

#[test]
fn target_stops_the_run_early() {
    let world = GridWorld::bounded(4, 4, Pose::new(0, 0, Heading::N), Some(Cell::new(0, 2))).unwrap();
    let p = parse_program("forward forward forward forward forward", 12).unwrap();
    let r = execute(&p, &world);
    assert_eq!(r.outcome, Outcome::ReachedTarget { steps: 2 });
    assert_eq!(r.trace.len(), 3);

    let here = world.with_target(Some(Cell::new(0, 0))).unwrap();
    assert_eq!(execute(&p, &here).outcome, Outcome::ReachedTarget { steps: 0 });
    assert_eq!(shortest_program(&here).unwrap(), Program::new(vec![]));
}

#[test]
fn oracle_preconditions() {
    let start = Pose::new(0, 0, Heading::N);
    assert_eq!(shortest_program(&GridWorld::unbounded(start)), Err(OracleError::Unbounded));
    let world = GridWorld::bounded(2, 2, start, None).unwrap();
    assert_eq!(shortest_program(&world), Err(OracleError::NoTarget));
    let walled =
        GridWorld::new(Some(3), Some(1), [Cell::new(1, 0)], start, Some(Cell::new(2, 0))).unwrap();
    assert_eq!(shortest_program(&walled), Err(OracleError::Infeasible));
}

#[test]
fn unknown_tokens_carry_position_and_offset() {
    assert_eq!(
        parse_program("forward, turn left, jump", 12),
        Err(ParseError::UnknownToken { token: "jump".into(), position: 2, offset: 20 })
    );
    assert_eq!(
        parse_program("move left", 12),
        Err(ParseError::UnknownToken { token: "move left".into(), position: 0, offset: 0 })
    );
}

#[test]
fn programs_are_extracted_from_prose() {
    let text = "First the children lay out: forward, forward, turn right, forward.\n\
                Later someone suggests forward then backward, forward.";
    let ex = extract_programs(text, &Lexicon::default(), 12);
    assert_eq!(ex.programs.len(), 1);
    assert_eq!(ex.programs[0].program.canonical(), "forward, forward, turn right, forward");
    assert_eq!(&text[ex.programs[0].span.clone()], "forward, forward, turn right, forward");
    assert_eq!(ex.skipped.len(), 1);
    assert_eq!(ex.skipped[0].reason, SkipReason::IllegalToken { token: "backward".into() });
}

#[test]
fn world_files_round_trip() {
    let json = r#"{"width": 4, "height": 3, "start": {"x": 0, "y": 0, "heading": "E"},
                   "target": {"x": 3, "y": 2}, "obstacles": [{"x": 1, "y": 0}]}"#;
    let world = GridWorld::from_json(json).unwrap();
    assert_eq!(world.start(), Pose::new(0, 0, Heading::E));
    assert!(world.is_obstacle(Cell::new(1, 0)));
    assert_eq!(GridWorld::from_json(&world.to_json()).unwrap(), world);
    assert!(GridWorld::from_json(r#"{"width": 0, "height": 3, "start": {"x":0,"y":0,"heading":"N"}}"#).is_err());
}
