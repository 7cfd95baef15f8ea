use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use commitment_games::protocol::{build_partial_unchecked, shape_case};
use commitment_games::{catalog, io, MixedProfile};
use commitment_games_cli::CATALOG;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_commitment-games"));
    c.env_remove("COMMITMENT_GAMES_THREADS");
    c
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../games").join(format!("{name}.json"))
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cg-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(c: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = c.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn corpus_matches_the_catalog() {
    for (name, make) in CATALOG {
        let text = fs::read_to_string(corpus(name)).unwrap();
        assert_eq!(io::read_game(&text).unwrap(), make(), "{name}");
        assert_eq!(text, io::write_game(&make()), "{name} is not in canonical form");
    }
}

#[test]
fn analyze_reports_equilibria_and_supports() {
    let (code, out, _) = run(bin().arg("analyze").arg(corpus("unfair_split")));
    assert_eq!(code, 0);
    assert!(out.contains("pure nash   [(A,A)]"), "{out}");
    assert!(out.contains("welfare max 7 at (B,B)"), "{out}");
    let (code, out, _) = run(bin().arg("analyze").arg(corpus("three_action_coordination")).args(["--support", "1,2x1,2"]));
    assert_eq!(code, 0);
    assert!(out.contains("sigma [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]]"), "{out}");
    assert!(out.contains("non-degenerate true"), "{out}");
}

#[test]
fn malformed_input_exits_two() {
    let d = scratch("bad");
    let bad = d.join("bad.json");
    fs::write(&bad, "{\"players\": 2,\n  oops\n}").unwrap();
    let (code, _, err) = run(bin().arg("analyze").arg(&bad));
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
    let (code, _, _) = run(bin().arg("analyze").arg(d.join("missing.json")));
    assert_eq!(code, 2);
}

#[test]
fn unmet_hypothesis_exits_three() {
    let (code, _, err) = run(bin().arg("plan").arg(corpus("unfair_split")).args(["--sigma", "A,A", "--payoffs", "8,-1", "--delta", "1"]));
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("does not improve"), "{err}");
}

#[test]
fn plan_then_verify_then_simulate() {
    let d = scratch("plan");
    let game = corpus("unfair_split");
    let plan = d.join("plan.json");
    let report = d.join("report.json");
    let (code, out, err) = run(bin()
        .arg("plan")
        .arg(&game)
        .args(["--sigma", "A,A", "--payoffs", "4,3", "--delta", "1", "--seed", "5", "--out"])
        .arg(&plan)
        .arg("--report")
        .arg(&report));
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("rounds      6"), "{out}");
    let rep = fs::read_to_string(&report).unwrap();
    assert!(rep.contains("\"tool_version\"") && rep.contains("\"rng_seed\": 5") && rep.contains("grid-certified"));

    let (code, out, _) = run(bin().arg("verify").arg(&game).arg(&plan));
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("accepted true"));

    let t = d.join("t.json");
    let (code, out, _) = run(bin().arg("simulate").arg(&game).arg(&plan).arg("--out").arg(&t));
    assert_eq!(code, 0);
    assert!(out.contains("final payoffs Some([4.0, 3.0])"), "{out}");
    let (code, _, _) = run(bin().arg("simulate").arg(&game).arg("--script").arg(&t));
    assert_eq!(code, 0);

    // a plan for another game is refused
    let (code, _, err) = run(bin().arg("verify").arg(corpus("chicken")).arg(&plan));
    assert_eq!(code, 2);
    assert!(err.contains("was built for game"), "{err}");
}

#[test]
fn identical_inputs_give_identical_artifacts() {
    let d = scratch("det");
    let game = corpus("rps_with_exit");
    let mut outs = Vec::new();
    for (k, threads) in ["1", "2"].iter().enumerate() {
        let plan = d.join(format!("plan{k}.json"));
        let report = d.join(format!("report{k}.json"));
        let (code, stdout, _) = run(bin()
            .env("COMMITMENT_GAMES_THREADS", threads)
            .arg("plan")
            .arg(&game)
            .args(["--sigma", "uniform:1,2,3/1,2,3", "--target", "a4,a4", "--budget", "8", "--out"])
            .arg(&plan)
            .arg("--report")
            .arg(&report));
        assert_eq!(code, 0);
        outs.push((stdout, fs::read(&plan).unwrap(), fs::read(&report).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn rejected_plan_exits_one_with_replayable_witnesses() {
    let d = scratch("reject");
    let g = catalog::first_mover_trap();
    let aa = MixedProfile::pure(&[3, 3], &[0, 0]);
    let naive = build_partial_unchecked(&g, &aa, &[2, 2], 0.5, shape_case(&g, &aa, &[2, 2])).unwrap();
    let plan = d.join("naive.json");
    fs::write(&plan, io::write_plan(&naive)).unwrap();
    let game = corpus("first_mover_trap");
    let wdir = d.join("witness");
    let (code, out, _) = run(bin().arg("verify").arg(&game).arg(&plan).arg("--witness").arg(&wdir));
    assert_eq!(code, 1, "{out}");
    let witnesses: Vec<_> = fs::read_dir(&wdir).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!witnesses.is_empty());
    for w in witnesses {
        let (code, _, err) = run(bin().arg("simulate").arg(&game).arg("--script").arg(&w));
        assert_eq!(code, 0, "{}: {err}", w.display());
    }
}

#[test]
fn reproduce_passes_every_row() {
    let (code, out, _) = run(bin().arg("reproduce"));
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));
    assert!(out.lines().count() >= 20);
    let (code, _, _) = run(bin().args(["reproduce", "no-such-row"]));
    assert_eq!(code, 2);
}
