use std::path::{Path, PathBuf};

use teamplan::Scenario;
use teamplan_cli::exit;
use teamplan_cli::files::PlanFile;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.to_str().unwrap();
    let mut argv = vec!["teamplan", "--out-dir", out, "--jobs", "2"];
    argv.extend_from_slice(args);
    teamplan_cli::run(argv)
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn gen_scenario(dir: &Path, name: &str, n: &str, m: &str, seed: &str) -> PathBuf {
    let p = path(dir, name);
    assert_eq!(run(dir, &["gen", "-n", n, "-m", m, "--seed", seed, "-o", &p]), exit::OK);
    PathBuf::from(p)
}

#[test]
fn gen_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let a = gen_scenario(d.path(), "a.json", "20", "3", "11");
    let b = gen_scenario(d.path(), "b.json", "20", "3", "11");
    let c = gen_scenario(d.path(), "c.json", "20", "3", "12");
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let s = Scenario::from_json(&read(&a)).unwrap();
    assert_eq!(s.points.len(), 20);
    assert_eq!(s.teams.len(), 3);
}

#[test]
fn gen_default_output_name() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["gen", "-n", "4", "--seed", "2", "--preset", "table4"]), exit::OK);
    let s = Scenario::from_json(&read(d.path().join("scenario-table4-n4-m1-seed2.json"))).unwrap();
    assert_eq!(s.teams.len(), 1);
    assert_eq!(s.teams[0].finish.x, 4000.0);
}

#[test]
fn bad_arguments_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["gen", "-n", "2", "-m", "3"]), exit::USAGE);
    assert_eq!(run(d.path(), &["gen", "-n", "4", "-m", "2", "--preset", "table4"]), exit::USAGE);
    assert_eq!(
        run(d.path(), &["gen", "-n", "4", "--preset", "custom", "--anchor", "1,2,3"]),
        exit::USAGE
    );
    assert_eq!(run(d.path(), &["plan"]), exit::USAGE);
    assert_eq!(run(d.path(), &["frobnicate"]), exit::USAGE);

    let bad = path(d.path(), "bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(d.path(), &["plan", &bad]), exit::USAGE);
}

#[test]
fn custom_preset_uses_given_anchors() {
    let d = tempfile::tempdir().unwrap();
    let p = path(d.path(), "c.json");
    let code = run(
        d.path(),
        &[
            "gen",
            "-n",
            "6",
            "-m",
            "2",
            "--preset",
            "custom",
            "--side",
            "2000",
            "--anchor",
            "0,0,2000,0",
            "--anchor",
            "0,2000,2000,2000",
            "-o",
            &p,
        ],
    );
    assert_eq!(code, exit::OK);
    let s = Scenario::from_json(&read(&p)).unwrap();
    assert_eq!(s.teams[1].start.y, 2000.0);
    assert!(s.points.iter().all(|q| q.x <= 2000.0 && q.y <= 2000.0));
}

#[test]
fn plan_validate_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let s = gen_scenario(d.path(), "s.json", "30", "2", "5");
    let plan = path(d.path(), "s.plan.json");
    assert_eq!(run(d.path(), &["plan", s.to_str().unwrap(), "-o", &plan]), exit::OK);
    assert_eq!(run(d.path(), &["validate", s.to_str().unwrap(), &plan]), exit::OK);

    let text = read(&plan);
    let file = PlanFile::from_json(&text).unwrap();
    assert_eq!(PlanFile::from_json(&file.to_json()).unwrap(), file);
    let mission = file.to_mission();
    let scenario = Scenario::from_json(&read(&s)).unwrap();
    assert_eq!(PlanFile::from_mission(&mission, &scenario).unwrap(), file);
    assert_eq!(Scenario::from_json(&scenario.to_json()).unwrap(), scenario);
    let worst = file.teams.iter().map(|t| t.mission_time).fold(0.0, f64::max);
    assert!((worst - file.objective).abs() < 1e-9);
}

#[test]
fn rerunning_plan_is_idempotent() {
    let d = tempfile::tempdir().unwrap();
    let s = gen_scenario(d.path(), "s.json", "25", "1", "9");
    assert_eq!(run(d.path(), &["plan", s.to_str().unwrap()]), exit::OK);
    let first = read(d.path().join("s.plan.json"));
    assert_eq!(run(d.path(), &["plan", s.to_str().unwrap()]), exit::OK);
    assert_eq!(read(d.path().join("s.plan.json")), first);
}

#[test]
fn tampered_plan_fails_validation() {
    let d = tempfile::tempdir().unwrap();
    let s = gen_scenario(d.path(), "s.json", "10", "1", "4");
    let plan = path(d.path(), "p.json");
    assert_eq!(run(d.path(), &["plan", s.to_str().unwrap(), "-o", &plan]), exit::OK);
    let mut file = PlanFile::from_json(&read(&plan)).unwrap();
    let tour = file.teams[0].tours.iter_mut().find(|t| !t.trivial).unwrap();
    tour.visits.pop();
    std::fs::write(&plan, file.to_json()).unwrap();
    assert_eq!(run(d.path(), &["validate", s.to_str().unwrap(), &plan]), exit::VALIDATION_FAILED);
}

#[test]
fn infeasible_scenario_exits_three() {
    let d = tempfile::tempdir().unwrap();
    let s = gen_scenario(d.path(), "s.json", "5", "1", "1");
    assert_eq!(run(d.path(), &["plan", s.to_str().unwrap(), "--delta-a", "560"]), exit::INFEASIBLE);
}

#[test]
fn plot_data_written_on_request() {
    let d = tempfile::tempdir().unwrap();
    let s = gen_scenario(d.path(), "s.json", "8", "1", "3");
    assert_eq!(run(d.path(), &["--emit-plot-data", "plan", s.to_str().unwrap()]), exit::OK);
    let routes = read(d.path().join("s-routes.csv"));
    assert!(routes.starts_with("team,row,step,kind,x,y,z"));
    assert_eq!(routes.lines().filter(|l| l.contains(",visit,")).count(), 8);
}

#[test]
fn simulate_writes_report() {
    let d = tempfile::tempdir().unwrap();
    let s = gen_scenario(d.path(), "s.json", "20", "2", "8");
    let plan = path(d.path(), "p.json");
    let csv_path = path(d.path(), "sim.csv");
    assert_eq!(run(d.path(), &["plan", s.to_str().unwrap(), "-o", &plan]), exit::OK);
    let args = [
        "simulate",
        s.to_str().unwrap(),
        &plan,
        "--runs",
        "4",
        "--seed",
        "100",
        "-o",
        &csv_path,
    ];
    assert_eq!(run(d.path(), &args), exit::OK);
    let first = read(&csv_path);
    assert_eq!(run(d.path(), &args), exit::OK);
    assert_eq!(read(&csv_path), first);

    let mut r = csv::Reader::from_reader(first.as_bytes());
    let headers = r.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "search"));
    let seeds: std::collections::BTreeSet<String> = r.records().map(|rec| rec.unwrap()[0].to_string()).collect();
    assert_eq!(seeds.len(), 4);
}

#[test]
fn bench_table3_covers_every_cell() {
    let d = tempfile::tempdir().unwrap();
    let out = path(d.path(), "b.csv");
    assert_eq!(run(d.path(), &["bench", "--repeats", "2", "-o", &out]), exit::OK);
    let mut r = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 24 * 2);
    let cells: std::collections::BTreeSet<(String, String)> = rows.iter().map(|x| (x[1].to_string(), x[2].to_string())).collect();
    assert_eq!(cells.len(), 24);
    assert!(rows.iter().all(|x| &x[7] == "0"));
}

#[test]
fn bench_table4_ratio_columns() {
    let d = tempfile::tempdir().unwrap();
    let out = path(d.path(), "o.csv");
    assert_eq!(
        run(
            d.path(),
            &["bench", "--preset", "table4", "--n", "2,3", "--repeats", "3", "-o", &out]
        ),
        exit::OK
    );
    let mut r = csv::Reader::from_path(&out).unwrap();
    assert_eq!(&r.headers().unwrap()[4], "ratio");
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let h: f64 = row[2].parse().unwrap();
        let o: f64 = row[3].parse().unwrap();
        let q: f64 = row[4].parse().unwrap();
        assert!(o <= h + 1e-6);
        assert!((q - h / o).abs() < 1e-12);
    }
}
