use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;
use teamplan::oracle::{exact_plan, CandidateClass};
use teamplan::planner::{objective, plan_mission, validate};
use teamplan::simulator::{execute, generate_instance, inject_unknown_obstacles, ExecutionOptions, AREA_SIDE, CEILING};
use teamplan::{Bounds, Point3, Scenario, Team, VehicleParams};

use crate::args::{BenchArgs, Cli, Command, GenArgs, PlanArgs, Preset, SimulateArgs, ValidateArgs};
use crate::files::{read_plan, read_scenario, write_csv, write_text, PlanFile};
use crate::CliError;

pub fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("starting worker pool")?;
    pool.install(|| match &cli.command {
        Command::Gen(a) => gen(cli, a),
        Command::Plan(a) => plan(cli, a),
        Command::Validate(a) => check(a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Bench(a) => bench(cli, a),
    })
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    CliError::Parse(msg.into()).into()
}

fn preset_name(p: Preset) -> &'static str {
    match p {
        Preset::Table3 => "table3",
        Preset::Table4 => "table4",
        Preset::Custom => "custom",
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
}

fn table4_team() -> Team {
    Team {
        index: 1,
        start: Point3::new(0.0, 0.0, 0.0),
        finish: Point3::new(AREA_SIDE, AREA_SIDE, 0.0),
    }
}

fn parse_anchor(index: usize, text: &str) -> anyhow::Result<Team> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("anchor {text:?}: {e}")))?;
    if v.len() != 4 {
        return Err(usage(format!("anchor {text:?} needs four numbers x0,y0,x1,y1")));
    }
    Ok(Team {
        index,
        start: Point3::new(v[0], v[1], 0.0),
        finish: Point3::new(v[2], v[3], 0.0),
    })
}

/// Scenario for one preset cell.
pub fn preset_scenario(
    preset: Preset,
    seed: u64,
    n: usize,
    m: usize,
    side: f64,
    anchors: &[String],
    params: VehicleParams,
) -> anyhow::Result<Scenario> {
    if m == 0 || n < m {
        return Err(usage(format!("need n >= m >= 1, got n = {n}, m = {m}")));
    }
    let (bounds, teams) = match preset {
        Preset::Table3 => (Bounds::new(AREA_SIDE, AREA_SIDE, CEILING), None),
        Preset::Table4 => {
            if m != 1 {
                return Err(usage("the table4 preset has exactly one team"));
            }
            (Bounds::new(AREA_SIDE, AREA_SIDE, CEILING), Some(vec![table4_team()]))
        }
        Preset::Custom => {
            let teams = if anchors.is_empty() {
                None
            } else {
                Some(
                    anchors
                        .iter()
                        .enumerate()
                        .map(|(k, a)| parse_anchor(k + 1, a))
                        .collect::<anyhow::Result<Vec<_>>>()?,
                )
            };
            (Bounds::new(side, side, CEILING), teams)
        }
    };
    Ok(generate_instance(seed, n, m, bounds, teams, params)?)
}

fn gen(cli: &Cli, a: &GenArgs) -> anyhow::Result<()> {
    let params = a.overrides.apply(VehicleParams::default());
    let s = preset_scenario(a.preset, a.seed, a.n, a.m, a.side, &a.anchor, params)?;
    let path = a.output.clone().unwrap_or_else(|| {
        cli.out_dir
            .join(format!("scenario-{}-n{}-m{}-seed{}.json", preset_name(a.preset), a.n, a.m, a.seed))
    });
    write_text(&path, &s.to_json())?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct RoutePoint {
    team: usize,
    row: usize,
    step: usize,
    kind: &'static str,
    x: f64,
    y: f64,
    z: f64,
}

fn plan(cli: &Cli, a: &PlanArgs) -> anyhow::Result<()> {
    let mut s = read_scenario(&a.scenario)?;
    s.params = a.overrides.apply(s.params);
    let started = Instant::now();
    let mission = plan_mission(&s)?;
    let wall = started.elapsed().as_secs_f64();
    let file = PlanFile::from_mission(&mission, &s)?;
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| cli.out_dir.join(format!("{}.plan.json", stem(&a.scenario))));
    write_text(&path, &file.to_json())?;
    println!(
        "objective={:.3} s tours={} teams={} wall={wall:.4} s plan={}",
        file.objective,
        mission.tour_count(),
        mission.team_plans.len(),
        path.display()
    );

    if cli.emit_plot_data {
        let mut rows = Vec::new();
        for tp in &mission.team_plans {
            for (i, r) in tp.tours() {
                let steps = std::iter::once(("release", r.release))
                    .chain(r.visits.iter().map(|v| ("visit", *v)))
                    .chain(std::iter::once(("collect", r.collect)));
                for (step, (kind, p)) in steps.enumerate() {
                    rows.push(RoutePoint {
                        team: tp.team.index,
                        row: i,
                        step,
                        kind,
                        x: p.x,
                        y: p.y,
                        z: p.z,
                    });
                }
            }
        }
        let out = cli.out_dir.join(format!("{}-routes.csv", stem(&a.scenario)));
        write_csv(&out, &rows)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn check(a: &ValidateArgs) -> anyhow::Result<()> {
    let s = read_scenario(&a.scenario)?;
    let plan = read_plan(&a.plan)?;
    let report = validate(&plan.to_mission(), &s);
    println!("checks={} violations={}", report.checks, report.violations.len());
    for v in &report.violations {
        println!(
            "  {:?} team={:?} row={:?} column={:?} slack={:?}: {}",
            v.constraint, v.team, v.row, v.column, v.slack, v.detail
        );
    }
    if report.passed() {
        println!("plan is valid");
        Ok(())
    } else {
        Err(CliError::ValidationFailed(format!("{} violations", report.violations.len())).into())
    }
}

#[derive(Serialize)]
struct SimulationRow {
    seed: u64,
    team: usize,
    row: usize,
    planned_tau_a: f64,
    planned_tau_g: f64,
    realized_tau_a: f64,
    realized_tau_g: f64,
    release_x: f64,
    release_y: f64,
    collect_x: f64,
    collect_y: f64,
    release_shift: f64,
    collect_shift: f64,
    within_budget: bool,
    flight_violation: bool,
    ground_violation: bool,
    search: &'static str,
}

const SEARCH_LABEL: &str = "ring16x20";

fn simulate(cli: &Cli, a: &SimulateArgs) -> anyhow::Result<()> {
    let s = read_scenario(&a.scenario)?;
    let mission = read_plan(&a.plan)?.to_mission();
    let opts = ExecutionOptions {
        wind_slowdown: a.wind,
        budget_scale: a.budget_scale,
    };
    let runs: Vec<(u64, teamplan::simulator::ExecutionReport)> = (0..a.runs as u64)
        .into_par_iter()
        .map(|k| {
            let seed = a.seed + k;
            let world = inject_unknown_obstacles(&s.environment, &s.teams, seed, a.obstacles, a.max_size)?;
            Ok((seed, execute(&mission, &world, &s.params, &opts)?))
        })
        .collect::<teamplan::Result<_>>()?;

    let mut rows = Vec::new();
    for (seed, report) in &runs {
        for t in &report.tours {
            rows.push(SimulationRow {
                seed: *seed,
                team: t.team,
                row: t.row,
                planned_tau_a: t.planned_tau_a,
                planned_tau_g: t.planned_tau_g,
                realized_tau_a: t.realized_tau_a,
                realized_tau_g: t.realized_tau_g,
                release_x: t.release.x,
                release_y: t.release.y,
                collect_x: t.collect.x,
                collect_y: t.collect.y,
                release_shift: t.release_shift,
                collect_shift: t.collect_shift,
                within_budget: t.within_budget,
                flight_violation: t.flight_violation,
                ground_violation: t.ground_violation,
                search: SEARCH_LABEL,
            });
        }
    }
    let path = a
        .output
        .clone()
        .unwrap_or_else(|| cli.out_dir.join(format!("{}-simulation.csv", stem(&a.plan))));
    write_csv(&path, &rows)?;

    let violations: usize = runs.iter().map(|(_, r)| r.energy_violations()).sum();
    let over_budget: usize = runs.iter().map(|(_, r)| r.over_budget()).sum();
    let adjustments: usize = runs.iter().map(|(_, r)| r.adjustments()).sum();
    let successes = runs.iter().filter(|(_, r)| r.success).count();
    println!(
        "runs={} successes={successes} adjustments={adjustments} over_budget={over_budget} energy_violations={violations} report={}",
        runs.len(),
        path.display()
    );

    if cli.emit_plot_data {
        #[derive(Serialize)]
        struct Objective {
            seed: u64,
            objective: f64,
            success: bool,
        }
        let series: Vec<Objective> = runs
            .iter()
            .map(|(seed, r)| Objective {
                seed: *seed,
                objective: r.objective,
                success: r.success,
            })
            .collect();
        let out = cli.out_dir.join(format!("{}-realized-objective.csv", stem(&a.plan)));
        write_csv(&out, &series)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub planning_time_s: f64,
    pub objective_s: f64,
    /// Per-team mission times separated by ';'.
    pub team_times_s: String,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub seed: u64,
    pub n: usize,
    pub heuristic_objective_s: f64,
    pub oracle_objective_s: f64,
    pub ratio: f64,
    pub heuristic_time_s: f64,
    pub oracle_time_s: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn table3_run(seed: u64, n: usize, m: usize, params: VehicleParams) -> anyhow::Result<MetricsRow> {
    let s = preset_scenario(Preset::Table3, seed, n, m, AREA_SIDE, &[], params)?;
    let started = Instant::now();
    let mission = plan_mission(&s)?;
    let planning_time_s = started.elapsed().as_secs_f64();
    let times = mission
        .team_plans
        .iter()
        .map(|p| teamplan::planner::mission_time(p, &s.params, &s.environment))
        .collect::<teamplan::Result<Vec<f64>>>()?;
    Ok(MetricsRow {
        seed,
        n,
        m,
        gamma: s.params.gamma,
        planning_time_s,
        objective_s: objective(&mission, &s.params, &s.environment)?,
        team_times_s: times.iter().map(|t| format!("{t:.3}")).collect::<Vec<_>>().join(";"),
        violations: validate(&mission, &s).violations.len(),
    })
}

pub fn table4_run(seed: u64, n: usize, params: VehicleParams) -> anyhow::Result<OracleRow> {
    let s = preset_scenario(Preset::Table4, seed, n, 1, AREA_SIDE, &[], params)?;
    let started = Instant::now();
    let mission = plan_mission(&s)?;
    let heuristic_time_s = started.elapsed().as_secs_f64();
    let heuristic = objective(&mission, &s.params, &s.environment)?;
    let started = Instant::now();
    let (_, oracle) = exact_plan(&s, &CandidateClass::standard(&s))?;
    let oracle_time_s = started.elapsed().as_secs_f64();
    Ok(OracleRow {
        seed,
        n,
        heuristic_objective_s: heuristic,
        oracle_objective_s: oracle,
        ratio: heuristic / oracle,
        heuristic_time_s,
        oracle_time_s,
    })
}

fn bench(cli: &Cli, a: &BenchArgs) -> anyhow::Result<()> {
    let params = a.overrides.apply(VehicleParams::default());
    let seeds: Vec<u64> = (a.seed..a.seed + a.repeats as u64).collect();
    let out: PathBuf = a
        .output
        .clone()
        .unwrap_or_else(|| cli.out_dir.join(format!("bench-{}.csv", preset_name(a.preset))));
    match a.preset {
        Preset::Table4 => {
            let ns = if a.n.is_empty() { vec![2, 3, 4, 5] } else { a.n.clone() };
            let jobs: Vec<(usize, u64)> = ns.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
            let rows = jobs
                .par_iter()
                .map(|&(n, seed)| table4_run(seed, n, params))
                .collect::<anyhow::Result<Vec<_>>>()?;
            write_csv(&out, &rows)?;
            #[derive(Serialize)]
            struct Cell {
                n: usize,
                heuristic_mean_s: f64,
                oracle_mean_s: f64,
                ratio_mean: f64,
                ratio_max: f64,
            }
            let cells: Vec<Cell> = ns
                .iter()
                .map(|&n| {
                    let sel: Vec<&OracleRow> = rows.iter().filter(|r| r.n == n).collect();
                    let h: Vec<f64> = sel.iter().map(|r| r.heuristic_objective_s).collect();
                    let o: Vec<f64> = sel.iter().map(|r| r.oracle_objective_s).collect();
                    let q: Vec<f64> = sel.iter().map(|r| r.ratio).collect();
                    Cell {
                        n,
                        heuristic_mean_s: mean_std(&h).0,
                        oracle_mean_s: mean_std(&o).0,
                        ratio_mean: mean_std(&q).0,
                        ratio_max: q.iter().cloned().fold(f64::NAN, f64::max),
                    }
                })
                .collect();
            for c in &cells {
                println!(
                    "n={} heuristic={:.0} s oracle={:.0} s ratio_mean={:.3} ratio_max={:.3}",
                    c.n, c.heuristic_mean_s, c.oracle_mean_s, c.ratio_mean, c.ratio_max
                );
            }
            if cli.emit_plot_data {
                let p = cli.out_dir.join("plot-oracle-gap.csv");
                write_csv(&p, &cells)?;
                println!("wrote {}", p.display());
            }
        }
        Preset::Table3 | Preset::Custom => {
            if a.preset == Preset::Custom {
                return Err(usage("bench supports the table3 and table4 presets"));
            }
            let ns = if a.n.is_empty() { vec![25, 50, 75, 100] } else { a.n.clone() };
            let ms = if a.m.is_empty() { vec![1, 2, 3, 4, 7, 10] } else { a.m.clone() };
            let mut jobs = Vec::new();
            for &m in &ms {
                for &n in &ns {
                    jobs.extend(seeds.iter().map(|&s| (m, n, s)));
                }
            }
            let rows = jobs
                .par_iter()
                .map(|&(m, n, seed)| table3_run(seed, n, m, params))
                .collect::<anyhow::Result<Vec<_>>>()?;
            write_csv(&out, &rows)?;
            #[derive(Serialize)]
            struct Cell {
                m: usize,
                n: usize,
                time_mean_s: f64,
                time_std_s: f64,
                objective_mean_s: f64,
                objective_std_s: f64,
            }
            let mut cells = Vec::new();
            for &m in &ms {
                for &n in &ns {
                    let sel: Vec<&MetricsRow> = rows.iter().filter(|r| r.m == m && r.n == n).collect();
                    let (tm, ts) = mean_std(&sel.iter().map(|r| r.planning_time_s).collect::<Vec<_>>());
                    let (om, os) = mean_std(&sel.iter().map(|r| r.objective_s).collect::<Vec<_>>());
                    println!("m={m} n={n} time={tm:.4}±{ts:.4} s objective={om:.0}±{os:.0} s");
                    cells.push(Cell {
                        m,
                        n,
                        time_mean_s: tm,
                        time_std_s: ts,
                        objective_mean_s: om,
                        objective_std_s: os,
                    });
                }
            }
            if cli.emit_plot_data {
                let p = cli.out_dir.join("plot-scaling.csv");
                write_csv(&p, &cells)?;
                println!("wrote {}", p.display());
            }
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
