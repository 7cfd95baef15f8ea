//! Command-line workbench: analyze games, build and verify commitment plans,
//! replay sessions and rerun the worked examples.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use commitment_games::equilibria::{enumerate_pure_nash, is_non_degenerate, solve_on_support, SolveOutcome};
use commitment_games::io::{self, Meta, PlanFile, ReportFile, TranscriptFile};
use commitment_games::protocol::ProtocolPlan;
use commitment_games::verify::{choose_delta, verify_plan, PlanRequest, VerificationReport, VerifyOptions};
use commitment_games::{catalog, Error, Execution, Game, Mode, Recipient, SessionState, Vote};
use sha2::{Digest, Sha256};

pub mod notation;
pub mod reproduce;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "commitment-games", version, about = "Staged side-payment commitment games")]
pub struct Cli {
    /// Worker threads for the data-parallel checks (1 runs sequentially).
    #[arg(long, global = true, env = "COMMITMENT_GAMES_THREADS")]
    pub threads: Option<usize>,
    /// Seed recorded in every artifact written.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Transfers,
    Burn,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pure equilibria, welfare maximum, and support solves.
    Analyze {
        game: PathBuf,
        /// Support to solve on, e.g. `1,2x1,2` (repeatable).
        #[arg(long)]
        support: Vec<String>,
    },
    /// Build a commitment plan and verify it.
    Plan {
        game: PathBuf,
        /// Baseline equilibrium: `A,B`, `uniform:1,2/1,2`, `probs:..`, `solve:..`.
        #[arg(long)]
        sigma: String,
        /// Outcome to make an equilibrium.
        #[arg(long, conflicts_with = "payoffs", required_unless_present = "payoffs")]
        target: Option<String>,
        /// Payoffs to deliver at the welfare-maximizing outcome.
        #[arg(long, allow_hyphen_values = true)]
        payoffs: Option<String>,
        /// Per-round cap, or `auto` to halve from 1% of the utility range.
        #[arg(long, default_value = "auto")]
        delta: String,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the verification report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Play a plan (or a scripted transcript) through a session.
    Simulate {
        game: PathBuf,
        #[arg(required_unless_present = "script", conflicts_with = "script")]
        plan: Option<PathBuf>,
        /// Transcript whose rounds, votes and actions are replayed.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a plan against the deviation grid.
    Verify {
        game: PathBuf,
        plan: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Directory receiving one transcript per failing check.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the worked examples; exit 0 iff every row passes.
    Reproduce {
        #[arg(default_value = "all")]
        id: String,
    },
    /// Print a built-in game as JSON (lists the names without an argument).
    Catalog { name: Option<String> },
}

#[derive(Debug, Clone, clap::Args)]
pub struct GridArgs {
    /// Pledge amounts as fractions of the cap.
    #[arg(long, default_value = "0.5,1")]
    pub grid: String,
    /// Prefixes probed with commitment deviations (default: all).
    #[arg(long)]
    pub budget: Option<usize>,
}

impl GridArgs {
    fn options(&self, exec: Execution) -> Result<VerifyOptions> {
        let amounts = notation::reals(&self.grid)?;
        if amounts.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            bail!("grid amounts must lie in (0, 1], got {}", self.grid);
        }
        Ok(VerifyOptions { amounts, budget: self.budget, exec, ..VerifyOptions::default() })
    }
}

/// A built-in game by name.
pub type CatalogEntry = (&'static str, fn() -> Game);

pub const CATALOG: [CatalogEntry; 9] = [
    ("prisoners_dilemma", catalog::prisoners_dilemma),
    ("prisoners_dilemma_after_pledges", catalog::prisoners_dilemma_after_pledges),
    ("chicken", catalog::chicken),
    ("unfair_split", catalog::unfair_split),
    ("three_action_coordination", catalog::three_action_coordination),
    ("first_mover_trap", catalog::first_mover_trap),
    ("three_player_full_support", catalog::three_player_full_support),
    ("rps_with_exit", catalog::rps_with_exit),
    ("rps_with_exit_variant", catalog::rps_with_exit_variant),
];

/// Exit code for an error: unmet construction hypotheses map to 3, everything
/// else (files, syntax, shapes) to 2.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let mut lib = err.chain().find_map(|e| e.downcast_ref::<Error>());
    while let Some(Error::Replay { source, .. }) = lib {
        lib = Some(source);
    }
    match lib {
        Some(Error::Hypothesis(_) | Error::Infeasible(_) | Error::Degenerate(_) | Error::NotEquilibrium { .. }) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

fn load_game(path: &Path) -> Result<Game> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::read_game(&text).with_context(|| format!("in {}", path.display()))
}

fn load_plan(path: &Path, game: &Game) -> Result<ProtocolPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let plan = io::read_plan(&text).with_context(|| format!("in {}", path.display()))?;
    if plan.base_hash != game.content_hash() {
        bail!("plan {} was built for game {} but the given game hashes to {}", path.display(), plan.base_hash, game.content_hash());
    }
    Ok(plan)
}

fn save(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn pledge_line(game: &Game, p: &commitment_games::Pledge) -> String {
    let to = match p.recipient {
        Recipient::Burn => "burns".to_string(),
        Recipient::Player(j) => format!("pays player {}", j + 1),
    };
    format!("player {} {to} {} at {}", p.payer + 1, p.amount, game.profile_label(&p.outcome))
}

/// Human-readable schedule of a plan.
pub fn schedule(game: &Game, plan: &ProtocolPlan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case        {}", plan.case_tag.as_str());
    let _ = writeln!(s, "cap         {}", plan.delta);
    let _ = writeln!(s, "mode        {:?}", plan.mode);
    let _ = writeln!(s, "rounds      {}", plan.num_rounds());
    let _ = writeln!(s, "target      {} ({:?})", game.profile_label(&plan.target.profile), plan.target.role);
    let _ = writeln!(s, "terminal    {:?}", plan.expected_terminal_payoffs);
    for st in &plan.stages {
        let _ = writeln!(s, "stage {} rounds {}..{} punishment ceiling {:?}", st.label, st.from_round + 1, st.to_round, st.ceiling);
    }
    for (k, r) in plan.rounds.iter().enumerate() {
        let _ = writeln!(s, "round {}: {} pledges", k + 1, r.pledges.len());
        for p in &r.pledges {
            let _ = writeln!(s, "  {}", pledge_line(game, p));
        }
    }
    s
}

/// One-screen summary of a verification report.
pub fn report_summary(report: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} grid {:?} budget {:?}", report.grid.certification, report.grid.amounts, report.grid.budget);
    for (k, p) in &report.properties {
        let _ = writeln!(s, "  {k:<32} {:?} {}", p.status, p.detail.as_deref().unwrap_or(""));
    }
    for c in &report.deviation_results.classes {
        let _ = writeln!(s, "  {:<32} cases {:<6} worst gain {:.3e}", format!("{:?}", c.class), c.cases, c.worst_gain);
    }
    let rb = &report.round_bound;
    let _ = writeln!(s, "  round bound {} <= {:.1}: {}", rb.rounds, rb.bound, rb.passed);
    let _ = writeln!(s, "accepted {}", report.accepted);
    s
}

fn report_json(report: &VerificationReport, game: &Game, plan: &ProtocolPlan, inputs: &[(&str, String)], seed: u64) -> ReportFile {
    let mut file = ReportFile::new(report, game, plan);
    file.meta = Meta::new(inputs, Some(seed));
    file
}

fn plan_json(plan: &ProtocolPlan, inputs: &[(&str, String)], seed: u64) -> String {
    let mut file = PlanFile::new(plan);
    file.meta = Meta::new(inputs, Some(seed));
    io::to_json(&file)
}

struct Ctx {
    exec: Execution,
    seed: u64,
}

fn analyze(game_path: &Path, supports: &[String], out: &mut dyn Write) -> Result<i32> {
    let game = load_game(game_path)?;
    let ne = enumerate_pure_nash(&game);
    let labels: Vec<String> = ne.iter().map(|a| game.profile_label(a)).collect();
    writeln!(out, "players     {}", game.num_players())?;
    writeln!(out, "actions     {:?}", game.action_counts())?;
    writeln!(out, "pure nash   [{}]", labels.join(", "))?;
    let (w, at) = game.welfare_max();
    writeln!(out, "welfare max {w} at {}", game.profile_label(&at))?;
    for text in supports {
        let sup = notation::supports(&game, text)?;
        write!(out, "support {text}: ")?;
        match solve_on_support(&game, &sup, None)? {
            SolveOutcome::Solved(p) => {
                let d = is_non_degenerate(&game, &p)?;
                writeln!(out, "sigma {:?}", p.probs())?;
                writeln!(out, "  payoffs        {:?}", game.expected_utilities(&p)?)?;
                writeln!(out, "  non-degenerate {}", d.non_degenerate)?;
                writeln!(out, "  det            {:e} (threshold {:e})", d.det, d.det_threshold)?;
                writeln!(out, "  min residual   {}", d.min_residual)?;
            }
            other => writeln!(out, "no equilibrium: {other:?}")?,
        }
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn plan_cmd(
    ctx: &Ctx,
    game_path: &Path,
    sigma: &str,
    target: Option<&str>,
    payoffs: Option<&str>,
    delta: &str,
    mode: Option<ModeArg>,
    grid: &GridArgs,
    out_path: Option<&Path>,
    report_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let game = load_game(game_path)?;
    let sigma_p = notation::mixed(&game, sigma)?;
    let request = match (target, payoffs) {
        (Some(t), _) => PlanRequest::Improve { sigma: sigma_p, target: notation::profile(&game, t)? },
        (None, Some(x)) => {
            if mode == Some(ModeArg::Burn) {
                return Err(
                    Error::Hypothesis("delivering chosen payoffs needs transfers; burning alone cannot move utility between players".into()).into()
                );
            }
            PlanRequest::Welfare { sigma: sigma_p, payoffs: notation::reals(x)? }
        }
        (None, None) => bail!("give --target or --payoffs"),
    };
    let opts = grid.options(ctx.exec)?;
    let widen = |mut plan: ProtocolPlan| -> Result<ProtocolPlan> {
        if mode == Some(ModeArg::Transfers) && plan.mode == Mode::BurnOnly {
            plan.mode = Mode::Transfers;
            plan.seal(&game)?;
        }
        Ok(plan)
    };
    let (plan, report, tried) = if delta == "auto" {
        if mode == Some(ModeArg::Transfers) && matches!(request, PlanRequest::Improve { .. }) {
            // the search verifies in the builder's mode; redo the winner under transfers
            let choice = choose_delta(&game, &request, &opts)?;
            let plan = widen(choice.plan)?;
            let report = verify_plan(&game, &plan, &opts)?;
            (plan, report, choice.tried)
        } else {
            let choice = choose_delta(&game, &request, &opts)?;
            (choice.plan, choice.report, choice.tried)
        }
    } else {
        let d: f64 = delta.parse().with_context(|| format!("--delta `{delta}` is neither `auto` nor a number"))?;
        let plan = widen(request.build(&game, d)?)?;
        let report = verify_plan(&game, &plan, &opts)?;
        (plan, report, vec![(d, true)])
    };
    if tried.len() > 1 {
        let caps: Vec<String> = tried.iter().map(|(d, ok)| format!("{d}{}", if *ok { "" } else { " (rejected)" })).collect();
        writeln!(out, "caps tried  {}", caps.join(", "))?;
    }
    write!(out, "{}", schedule(&game, &plan))?;
    write!(out, "{}", report_summary(&report))?;
    let inputs = [("game", game.content_hash()), ("sigma", sigma.to_string()), ("delta", delta.to_string())];
    if let Some(p) = out_path {
        save(p, &plan_json(&plan, &inputs, ctx.seed))?;
    }
    if let Some(p) = report_path {
        let mut inputs = inputs.to_vec();
        inputs.push(("plan", io::plan_hash(&plan)));
        save(p, &io::to_json(&report_json(&report, &game, &plan, &inputs, ctx.seed)))?;
    }
    Ok(if report.accepted { EXIT_OK } else { EXIT_REJECTED })
}

/// Runs every plan round with unanimous continue votes, stops after the last
/// one and plays the target.
pub fn simulate_plan(game: &Game, plan: &ProtocolPlan) -> Result<SessionState> {
    let n = game.num_players();
    let mut s = SessionState::open(game.clone(), plan.delta, plan.mode)?;
    for (k, round) in plan.rounds.iter().enumerate() {
        s = s.submit_round(round.clone())?;
        let vote = if k + 1 == plan.rounds.len() { Vote::Stop } else { Vote::Continue };
        s = s.cast_votes(vec![vote; n])?;
    }
    if plan.rounds.is_empty() {
        s = s.cast_votes(vec![Vote::Stop; n])?;
    }
    Ok(s.play_terminal(plan.target.profile.clone())?)
}

fn simulate(
    ctx: &Ctx,
    game_path: &Path,
    plan_path: Option<&Path>,
    script: Option<&Path>,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let game = load_game(game_path)?;
    let (state, source) = match (plan_path, script) {
        (Some(p), _) => {
            let plan = load_plan(p, &game)?;
            (simulate_plan(&game, &plan)?, ("plan", io::plan_hash(&plan)))
        }
        (None, Some(p)) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let file: TranscriptFile = io::read_transcript(&text)?;
            if let Some(g) = &file.game {
                if g.to_game()?.content_hash() != game.content_hash() {
                    bail!("script {} carries a different game", p.display());
                }
            }
            let state = SessionState::replay(game.clone(), &file.to_transcript()?)?;
            (state, ("script", hex::encode(Sha256::digest(text.as_bytes()))))
        }
        (None, None) => bail!("give a plan file or --script"),
    };
    let mut file = TranscriptFile::new(state.transcript(), &game, false, Some(ctx.seed));
    file.meta = Meta::new(&[("game", game.content_hash()), source], Some(ctx.seed));
    let text = io::to_json(&file);
    match out_path {
        Some(p) => {
            save(p, &text)?;
            let t = state.transcript();
            writeln!(out, "{} rounds, phase {:?}, final payoffs {:?}", t.rounds.len(), state.phase(), t.final_payoffs)?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

fn verify(
    ctx: &Ctx,
    game_path: &Path,
    plan_path: &Path,
    grid: &GridArgs,
    witness: Option<&Path>,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let game = load_game(game_path)?;
    let plan = load_plan(plan_path, &game)?;
    let report = verify_plan(&game, &plan, &grid.options(ctx.exec)?)?;
    write!(out, "{}", report_summary(&report))?;
    let inputs = [("game", game.content_hash()), ("plan", io::plan_hash(&plan)), ("grid", grid.grid.clone())];
    let file = report_json(&report, &game, &plan, &inputs, ctx.seed);
    if let Some(dir) = witness {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (label, t) in file.witnesses() {
            save(&dir.join(format!("{label}.json")), &io::to_json(t))?;
        }
    }
    if let Some(p) = out_path {
        save(p, &io::to_json(&file))?;
    }
    Ok(if report.accepted { EXIT_OK } else { EXIT_REJECTED })
}

fn reproduce(ctx: &Ctx, id: &str, out: &mut dyn Write) -> Result<i32> {
    let ids: Vec<&str> = if id == "all" { reproduce::IDS.to_vec() } else { vec![id] };
    let mut ok = true;
    for id in ids {
        for r in reproduce::run(id, ctx.exec)? {
            ok &= r.passed;
            writeln!(out, "{} {:<20} {:<46} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.check, r.detail)?;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
}

fn catalog_cmd(name: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    match name {
        None => {
            for (n, _) in CATALOG {
                writeln!(out, "{n}")?;
            }
        }
        Some(n) => {
            let Some((_, make)) = CATALOG.iter().find(|(k, _)| *k == n) else {
                bail!("no built-in game `{n}`");
            };
            write!(out, "{}", io::write_game(&make()))?;
        }
    }
    Ok(EXIT_OK)
}

fn execution(threads: Option<usize>) -> Execution {
    match threads {
        Some(0) | None => Execution::Parallel,
        Some(1) => Execution::Sequential,
        Some(n) => {
            // a pool built earlier in the process stays in place
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Execution::Parallel
        }
    }
}

/// Executes a parsed command and returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let ctx = Ctx { exec: execution(cli.threads), seed: cli.seed };
    match &cli.command {
        Command::Analyze { game, support } => analyze(game, support, out),
        Command::Plan { game, sigma, target, payoffs, delta, mode, grid, out: out_path, report } => {
            plan_cmd(&ctx, game, sigma, target.as_deref(), payoffs.as_deref(), delta, *mode, grid, out_path.as_deref(), report.as_deref(), out)
        }
        Command::Simulate { game, plan, script, out: out_path } => simulate(&ctx, game, plan.as_deref(), script.as_deref(), out_path.as_deref(), out),
        Command::Verify { game, plan, grid, witness, out: out_path } => verify(&ctx, game, plan, grid, witness.as_deref(), out_path.as_deref(), out),
        Command::Reproduce { id } => reproduce(&ctx, id, out),
        Command::Catalog { name } => catalog_cmd(name.as_deref(), out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypothesis_errors_map_to_three() {
        let e: anyhow::Error = Error::Hypothesis("x".into()).into();
        assert_eq!(exit_code(&e), EXIT_INFEASIBLE);
        let e: anyhow::Error = Error::Replay { step: 2, source: Box::new(Error::Infeasible("y".into())) }.into();
        assert_eq!(exit_code(&e.context("while planning")), EXIT_INFEASIBLE);
        let e: anyhow::Error = Error::Parse("line 2".into()).into();
        assert_eq!(exit_code(&e), EXIT_INPUT);
        assert_eq!(exit_code(&anyhow::anyhow!("missing file")), EXIT_INPUT);
    }

    #[test]
    fn catalog_games_round_trip() {
        for (_, make) in CATALOG {
            let g = make();
            assert_eq!(io::read_game(&io::write_game(&g)).unwrap(), g);
        }
    }
}
