use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use teamplan::VehicleParams;

#[derive(Debug, Parser)]
#[command(name = "teamplan", version, about = "Mission planning for cooperative UAV-UGV teams")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Directory for outputs written without an explicit path.
    #[arg(long, global = true, env = "TEAMPLAN_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Also write CSV data series for plotting into the output directory.
    #[arg(long, global = true)]
    pub emit_plot_data: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scenario.
    Gen(GenArgs),
    /// Plan a mission for a scenario.
    Plan(PlanArgs),
    /// Check a plan against every constraint of its scenario.
    Validate(ValidateArgs),
    /// Execute a plan in worlds with unknown ground obstacles.
    Simulate(SimulateArgs),
    /// Run a benchmark sweep.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 4000 m square, reference team anchors, default vehicle parameters.
    Table3,
    /// One team from (0,0,0) to (4000,4000,0).
    Table4,
    /// Square of side --side with anchors from --anchor.
    Custom,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// UAV flight-time margin (s).
    #[arg(long)]
    pub delta_a: Option<f64>,
    /// UGV release-to-collect margin (s).
    #[arg(long)]
    pub delta_g: Option<f64>,
    /// Recharge ratio.
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut params: VehicleParams) -> VehicleParams {
        if let Some(v) = self.delta_a {
            params.delta_a = v;
        }
        if let Some(v) = self.delta_g {
            params.delta_g = v;
        }
        if let Some(v) = self.gamma {
            params.gamma = v;
        }
        params
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of monitoring points.
    #[arg(short, long)]
    pub n: usize,
    /// Number of teams.
    #[arg(short, long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "table3")]
    pub preset: Preset,
    /// Side of the square area for the custom preset (m).
    #[arg(long, default_value_t = 4000.0)]
    pub side: f64,
    /// Team start and finish as "x0,y0,x1,y1", once per team (custom preset).
    #[arg(long)]
    pub anchor: Vec<String>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    pub scenario: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub scenario: PathBuf,
    pub plan: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    pub plan: PathBuf,
    /// First world seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of worlds (consecutive seeds).
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Unknown obstacles per world.
    #[arg(long, default_value_t = 10)]
    pub obstacles: usize,
    /// Largest obstacle side (m).
    #[arg(long, default_value_t = 200.0)]
    pub max_size: f64,
    /// Multiplier on realized flight times.
    #[arg(long, default_value_t = 1.0)]
    pub wind: f64,
    /// Multiplier on adjustment budgets.
    #[arg(long, default_value_t = 1.0)]
    pub budget_scale: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "table3")]
    pub preset: Preset,
    /// Point counts (default 25,50,75,100 or 2,3,4,5 for table4).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Team counts (default 1,2,3,4,7,10; table4 always uses 1).
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    pub repeats: usize,
    /// First seed; each cell uses seeds seed..seed+repeats.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
