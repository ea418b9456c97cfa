//! Command-line front end.
//!
//! ```text
//! fast run --scenario PATH [--config PATH] [--seed U64] [--seeds N] [--out DIR]
//!          [--max-rounds N] [--emit trajectories,summary,heatmap,snapshots,steplog,fields]
//! ```
//!
//! Exit status: 0 on success, 1 for usage and I/O errors, 2 for invalid
//! scenarios or configurations.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::{run_simulation, SimResult};
use crate::output;
use crate::scenario::{parse_scenario, Profile, ScenarioSpec, SimConfig, DEFAULT_PROFILE};
use crate::static_field::{compute_static_field, compute_wall_distance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fast",
    version,
    about = "Floor-field pedestrian evacuation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario for one or more seeds.
    Run(RunOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Trajectories,
    Summary,
    Heatmap,
    Snapshots,
    Steplog,
    /// Static, wall-distance and final dynamic fields as PGM images.
    Fields,
}

#[derive(Debug, Clone, Args)]
pub struct RunOptions {
    /// Scenario map file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// First seed; overrides `seed` in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of runs, with consecutive seeds.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub max_rounds: Option<u32>,
    #[arg(long, value_delimiter = ',', default_value = "trajectories,summary")]
    pub emit: Vec<Emit>,
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl Failure {
    fn status(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Invalid(_) => EXIT_INVALID,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) => m,
        }
    }
}

/// Parses `key=value` configuration lines. Simulation keys (`delta`,
/// `alpha`, `w_max`, `max_rounds`, `seed`) update `base`; profile keys
/// (`v_max`, `k_S`, ...) are returned as overrides for the default profile.
pub fn parse_config(
    text: &str,
    base: SimConfig,
) -> Result<(SimConfig, Vec<(String, String)>), String> {
    let mut cfg = base;
    let mut overrides = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let bad = |what: &str| {
            format!(
                "config line {}: `{key}` expects {what}, got `{value}`",
                i + 1
            )
        };
        match key {
            "delta" => cfg.delta = value.parse().map_err(|_| bad("a number"))?,
            "alpha" => cfg.alpha = value.parse().map_err(|_| bad("a number"))?,
            "w_max" => cfg.w_max = value.parse().map_err(|_| bad("a number"))?,
            "max_rounds" => cfg.max_rounds = value.parse().map_err(|_| bad("an integer"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("an integer"))?,
            _ => {
                Profile::default()
                    .set(key, value)
                    .map_err(|e| format!("config line {}: {e}", i + 1))?;
                overrides.push((key.to_string(), value.to_string()));
            }
        }
    }
    cfg.validate()?;
    Ok((cfg, overrides))
}

fn apply_overrides(
    spec: &ScenarioSpec,
    overrides: &[(String, String)],
) -> Result<ScenarioSpec, String> {
    if overrides.is_empty() {
        return Ok(spec.clone());
    }
    let mut spec = spec.clone();
    let profile = spec
        .profiles
        .get_mut(DEFAULT_PROFILE)
        .expect("parsed scenarios always define the default profile");
    for (k, v) in overrides {
        profile.set(k, v)?;
    }
    // re-validate spawns and exits against the changed profile
    parse_scenario(&spec.render()).map_err(|e| e.to_string())
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let Command::Run(opts) = cli.command;
    match run_batch(&opts, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.status()
        }
    }
}

fn read(path: &Path, what: &str) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {what} {}: {e}", path.display())))
}

fn run_batch(opts: &RunOptions, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = read(&opts.scenario, "scenario")?;
    let spec = parse_scenario(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", opts.scenario.display())))?;
    let (mut cfg, overrides) = match &opts.config {
        Some(path) => {
            let text = read(path, "config")?;
            parse_config(&text, SimConfig::default()).map_err(Failure::Invalid)?
        }
        None => (SimConfig::default(), Vec::new()),
    };
    if let Some(m) = opts.max_rounds {
        cfg.max_rounds = m;
    }
    cfg.validate().map_err(Failure::Invalid)?;
    let spec = apply_overrides(&spec, &overrides).map_err(Failure::Invalid)?;
    let first_seed = opts.seed.unwrap_or(cfg.seed);

    let mut results = Vec::with_capacity(opts.seeds as usize);
    for k in 0..opts.seeds {
        let run_cfg = SimConfig {
            seed: first_seed.wrapping_add(k),
            ..cfg.clone()
        };
        let result =
            run_simulation(&spec, &run_cfg).map_err(|e| Failure::Invalid(e.to_string()))?;
        results.push(result);
    }

    fs::create_dir_all(&opts.out)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", opts.out.display())))?;
    if opts.emit.contains(&Emit::Fields) {
        write_fields(&spec, &cfg, &opts.out)?;
    }
    for result in &results {
        write_run(result, &spec, opts)?;
        let _ = writeln!(stdout, "{}", summary_line(result));
    }
    if results.len() > 1 {
        let times: Vec<f64> = results
            .iter()
            .filter_map(SimResult::evacuation_seconds)
            .collect();
        let mean = if times.is_empty() {
            "none".to_string()
        } else {
            format!("{:.3}", times.iter().sum::<f64>() / times.len() as f64)
        };
        let _ = writeln!(
            stdout,
            "runs={} evacuated_runs={} mean_evacuation_seconds={mean}",
            results.len(),
            times.len()
        );
    }
    Ok(())
}

fn summary_line(r: &SimResult) -> String {
    let rounds = r
        .evacuation_rounds
        .map_or("none".to_string(), |v| v.to_string());
    let secs = r
        .evacuation_seconds()
        .map_or("none".to_string(), |v| format!("{v:.1}"));
    format!(
        "seed={} evacuation_rounds={rounds} evacuation_seconds={secs} evacuated={}/{}",
        r.seed,
        r.evacuated(),
        r.agents_total()
    )
}

fn write_file(path: PathBuf, contents: &str) -> Result<(), Failure> {
    fs::write(&path, contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Writes the selected outputs of one run into `opts.out`, suffixed with
/// the run's seed.
pub fn write_outputs(
    result: &SimResult,
    spec: &ScenarioSpec,
    opts: &RunOptions,
) -> Result<(), String> {
    write_run(result, spec, opts).map_err(|f| f.message().to_string())
}

fn write_run(result: &SimResult, spec: &ScenarioSpec, opts: &RunOptions) -> Result<(), Failure> {
    let seed = result.seed;
    let dir = &opts.out;
    for emit in &opts.emit {
        match emit {
            Emit::Trajectories => write_file(
                dir.join(format!("trajectories_{seed}.csv")),
                &output::trajectories_csv(result),
            )?,
            Emit::Summary => write_file(
                dir.join(format!("summary_{seed}.txt")),
                &output::summary(result),
            )?,
            Emit::Heatmap => write_file(
                dir.join(format!("heatmap_{seed}.pgm")),
                &output::heatmap_pgm(result),
            )?,
            Emit::Snapshots => write_file(
                dir.join(format!("snapshots_{seed}.txt")),
                &output::snapshots(result, &spec.grid),
            )?,
            Emit::Steplog => write_file(
                dir.join(format!("steplog_{seed}.txt")),
                &output::step_log(result),
            )?,
            Emit::Fields => {
                let (dx, dy) = output::dynamic_pgms(&result.final_dynamic);
                write_file(dir.join(format!("dynamic_dx_{seed}.pgm")), &dx)?;
                write_file(dir.join(format!("dynamic_dy_{seed}.pgm")), &dy)?;
            }
        }
    }
    Ok(())
}

fn write_fields(spec: &ScenarioSpec, cfg: &SimConfig, dir: &Path) -> Result<(), Failure> {
    let g = &spec.grid;
    for e in 0..g.exit_count() {
        let f = compute_static_field(g, e);
        write_file(
            dir.join(format!("static_exit{e}.pgm")),
            &output::distance_pgm(g.width(), g.height(), f.values()),
        )?;
    }
    let w = compute_wall_distance(g, cfg.w_max);
    write_file(
        dir.join("wall_distance.pgm"),
        &output::distance_pgm(g.width(), g.height(), w.values()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_keys() {
        let (cfg, ov) = parse_config(
            "% comment\ndelta = 0.1\nalpha=0.2\nw_max=4\nmax_rounds=50\nk_S=2.5\nv_max=4\n",
            SimConfig::default(),
        )
        .unwrap();
        assert_eq!(
            (cfg.delta, cfg.alpha, cfg.w_max, cfg.max_rounds),
            (0.1, 0.2, 4.0, 50)
        );
        assert_eq!(
            ov,
            vec![("k_S".into(), "2.5".into()), ("v_max".into(), "4".into())]
        );
        assert!(parse_config("delta=2\n", SimConfig::default()).is_err());
        assert!(parse_config("speed=2\n", SimConfig::default()).is_err());
        assert!(parse_config("delta\n", SimConfig::default()).is_err());
    }

    #[test]
    fn overrides_touch_only_the_default_profile() {
        let spec = parse_scenario("WWWWW\nWa..E\nWWWWW\nprofile other k_S=7\n").unwrap();
        let spec = apply_overrides(&spec, &[("k_S".into(), "3".into())]).unwrap();
        assert_eq!(spec.profiles[DEFAULT_PROFILE].k_s, 3.0);
        assert_eq!(spec.profiles["other"].k_s, 7.0);
    }
}
