use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mecmob::harness::output::{out_path, write_csv, write_json, RunSummary};
use mecmob::harness::sweep::run_replicated;
use mecmob::harness::{epsilon_min, run_multiuser, sweep, EpsMinOptions, Scheme, SweepSpec};
use mecmob::scenario::ScenarioConfig;
use mecmob::{Error, Result};

/// Mobility-aware edge offloading simulator.
#[derive(Parser, Debug)]
#[command(name = "mecmob", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario under the proposed controller.
    Run(Common),
    /// Simulate one scenario under a benchmark handover scheme.
    Bench(Common),
    /// Sweep one parameter; `--config` names a sweep spec file.
    Sweep(Common),
    /// Search the smallest supportable reliability target.
    Epsmin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 12)]
        iterations: u32,
    },
    /// Multiuser run with the association search or a benchmark.
    Multiuser {
        #[command(flatten)]
        common: Common,
        /// Comma-separated user counts; defaults to the config value.
        #[arg(long, value_delimiter = ',')]
        users: Vec<usize>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    scheme: Option<Scheme>,
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::from_path(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn replications(&self, default: usize) -> Result<usize> {
        match self.replications {
            Some(0) => Err(Error::InvalidConfig("--replications must be at least 1".into())),
            Some(r) => Ok(r),
            None => Ok(default),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(c) => single(&c, "run", c.scheme.unwrap_or(Scheme::Proposed)),
        Command::Bench(c) => {
            let scheme = c.scheme.unwrap_or(Scheme::RssHysteresis);
            if scheme == Scheme::Proposed {
                return Err(Error::InvalidConfig("bench takes --scheme rss or rss-hyst".into()));
            }
            single(&c, "bench", scheme)
        }
        Command::Sweep(c) => run_sweep(&c),
        Command::Epsmin { common, iterations } => run_epsmin(&common, iterations),
        Command::Multiuser { common, users } => run_multi(&common, &users),
    }
}

fn single(c: &Common, command: &str, scheme: Scheme) -> Result<()> {
    let cfg = c.scenario()?;
    let reps = c.replications(1)?;
    let outs: Vec<_> = if reps == 1 {
        vec![mecmob::harness::simulate(&cfg, scheme)]
    } else {
        run_replicated(&cfg, scheme, reps)
    };
    let outs = outs.into_iter().collect::<Result<Vec<_>>>()?;
    let reports: Vec<_> = outs.iter().map(|o| o.report.clone()).collect();
    write_csv(&out_path(&c.out, &format!("{command}_{scheme}.csv"))?, &reports)?;
    write_csv(&out_path(&c.out, &format!("{command}_{scheme}_frames.csv"))?, &outs[0].frames)?;
    let drift: Vec<_> = outs
        .iter()
        .map(|o| json!({"b1": o.drift.b1, "b2": o.drift.b2, "e_max": o.drift.e_max, "violations": o.drift.violations}))
        .collect();
    let summary = RunSummary::new(command, &cfg, json!({"runs": reports, "drift": drift}));
    write_json(&out_path(&c.out, &format!("{command}_{scheme}.json"))?, &summary)?;
    for r in &reports {
        println!(
            "{scheme} seed={} E_av={:.4e} X_av={:.4e} X_final={:.4e} Q_mean={:.3} migrations={:.2}%",
            r.seed, r.energy_avg, r.failure_rate, r.final_window_failure_rate, r.mean_queue, r.migration_pct
        );
    }
    Ok(())
}

fn run_sweep(c: &Common) -> Result<()> {
    let path = c
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("sweep needs --config <spec.toml>".into()))?;
    let mut spec = SweepSpec::from_path(path)?;
    if let Some(s) = c.seed {
        spec.base.seed = s;
    }
    if let Some(r) = c.replications {
        spec.replications = r;
    }
    if let Some(s) = c.scheme {
        spec.schemes = vec![s];
    }
    spec.validate()?;
    let out = sweep(&spec)?;
    write_csv(&out_path(&c.out, "sweep_rows.csv")?, &out.rows)?;
    write_csv(&out_path(&c.out, "sweep_means.csv")?, &out.means)?;
    let summary = RunSummary::new("sweep", &spec.base, json!({"spec": &spec, "means": &out.means}));
    write_json(&out_path(&c.out, "sweep.json")?, &summary)?;
    for m in &out.means {
        println!(
            "{}={} {} E_av={:.4e} X_final={:.4e} Q_mean={:.3}",
            m.parameter, m.value, m.scheme, m.energy_avg, m.final_window_failure_rate, m.mean_queue
        );
    }
    Ok(())
}

fn run_epsmin(c: &Common, iterations: u32) -> Result<()> {
    let cfg = c.scenario()?;
    let scheme = c.scheme.unwrap_or(Scheme::Proposed);
    let opts = EpsMinOptions {
        iterations,
        replications: c.replications(3)?,
        ..Default::default()
    };
    let res = epsilon_min(&cfg, scheme, &opts)?;
    write_csv(&out_path(&c.out, &format!("epsmin_{scheme}.csv"))?, &res.probes)?;
    let summary = RunSummary::new("epsmin", &cfg, json!({"options": opts, "result": &res}));
    write_json(&out_path(&c.out, &format!("epsmin_{scheme}.json"))?, &summary)?;
    match res.eps_min {
        Some(e) => println!("{scheme} eps_min={e:.4e}"),
        None => println!("{scheme} eps_min=unsupported"),
    }
    Ok(())
}

fn run_multi(c: &Common, users: &[usize]) -> Result<()> {
    let base = c.scenario()?;
    let scheme = c.scheme.unwrap_or(Scheme::Proposed);
    let counts = if users.is_empty() {
        vec![base.multiuser.num_users]
    } else {
        users.to_vec()
    };
    let mut reports = Vec::new();
    for &m in &counts {
        let mut cfg = base.clone();
        cfg.multiuser.num_users = m;
        cfg.validate()?;
        let run = run_multiuser(&cfg, scheme)?;
        let tag = format!("multiuser_{scheme}_m{m}");
        write_csv(&out_path(&c.out, &format!("{tag}_frames.csv"))?, &run.frames)?;
        write_csv(&out_path(&c.out, &format!("{tag}_users.csv"))?, &run.users)?;
        write_csv(&out_path(&c.out, &format!("{tag}_speeds.csv"))?, &run.speed_buckets)?;
        println!(
            "{scheme} M={m} E_mean={:.4e} E_worst={:.4e} X_mean={:.4e} iterations={:.1}",
            run.report.mean_energy, run.report.worst_user_energy, run.report.mean_failure_rate, run.report.mean_iterations
        );
        reports.push(run.report);
    }
    write_csv(&out_path(&c.out, &format!("multiuser_{scheme}.csv"))?, &reports)?;
    let summary = RunSummary::new("multiuser", &base, json!({"runs": reports}));
    write_json(&out_path(&c.out, &format!("multiuser_{scheme}.json"))?, &summary)?;
    Ok(())
}
