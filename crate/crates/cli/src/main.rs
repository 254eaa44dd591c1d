use clap::{Args, Parser, Subcommand};
use obstacle_walk::env::{Environment, Tail};
use obstacle_walk::fmt::f17;
use obstacle_walk::gapsel::{select, select_growing, GapSelection};
use obstacle_walk::mc::{localization_experiment, ConditionedSampler, ExperimentOptions};
use obstacle_walk::mrp::free_energy;
use obstacle_walk::par::{with_threads, Execution};
use obstacle_walk::ruin::RuinKernel;
use obstacle_walk::survival::{survive_exact, KillMode};
use obstacle_walk::verify::{run_suite, VerifyOptions};
use obstacle_walk::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const THREADS_VAR: &str = "OBSTACLE_WALK_THREADS";

#[derive(Parser)]
#[command(
    name = "obstacle-walk",
    version,
    about = "Random walk among power-law renewal obstacles"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq, Debug)]
enum Cmd {
    /// Sample an environment and write it in the gap-file format.
    Env,
    /// First-visit laws of the slab: CSV t,n,q0,q1,q.
    Ruin,
    /// Exact survival: CSV n,logZ.
    Survive,
    /// Optimal gap selection: JSON.
    Select,
    /// Free energy of the truncated environment: JSON.
    Fe,
    /// Conditioned paths: CSV path,k,S_k.
    Simulate,
    /// Replicated localisation experiment: CSV, summary JSON.
    Localize,
    /// Acceptance criteria report.
    Verify,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Env => "env",
            Cmd::Ruin => "ruin",
            Cmd::Survive => "survive",
            Cmd::Select => "select",
            Cmd::Fe => "fe",
            Cmd::Simulate => "simulate",
            Cmd::Localize => "localize",
            Cmd::Verify => "verify",
        }
    }
}

/// Every flag can also come from the `--config` file; flags win.
#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
struct Flags {
    /// Flat JSON file with any of the flag names as keys.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Only checked against the subcommand on the command line.
    #[arg(skip)]
    subcommand: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    n: Option<u64>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Environment file; otherwise one is sampled from gamma, seed and count.
    #[arg(long, global = true)]
    env: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["bold", "soft"])]
    mode: Option<String>,
    /// Worker threads (0: all cores). Defaults to $OBSTACLE_WALK_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// ruin, survival, mrp, mc or all.
    #[arg(long, global = true)]
    suite: Option<String>,
    /// Slab width for `ruin`.
    #[arg(long, global = true)]
    t: Option<u64>,
    /// Number of gaps of a sampled environment.
    #[arg(long, global = true)]
    count: Option<usize>,
}

impl Flags {
    fn or(self, cfg: Flags) -> Flags {
        Flags {
            config: self.config,
            subcommand: cfg.subcommand,
            gamma: self.gamma.or(cfg.gamma),
            beta: self.beta.or(cfg.beta),
            n: self.n.or(cfg.n),
            reps: self.reps.or(cfg.reps),
            seed: self.seed.or(cfg.seed),
            env: self.env.or(cfg.env),
            out: self.out.or(cfg.out),
            mode: self.mode.or(cfg.mode),
            threads: self.threads.or(cfg.threads),
            suite: self.suite.or(cfg.suite),
            t: self.t.or(cfg.t),
            count: self.count.or(cfg.count),
        }
    }
}

/// Resolved run parameters.
struct Run {
    cmd: Cmd,
    gamma: f64,
    beta: f64,
    n: Option<u64>,
    reps: Option<usize>,
    seed: u64,
    env: Option<PathBuf>,
    out: Option<PathBuf>,
    mode: KillMode,
    suite: String,
    t: u64,
    count: usize,
}

enum Failure {
    Usage(String),
    Infeasible(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) => Failure::Infeasible(e.to_string()),
            Error::Domain(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Out<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn resolve(cli: Cli) -> Out<(Run, usize)> {
    let mut flags = cli.flags;
    if let Some(path) = flags.config.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        let cfg: Flags = serde_json::from_str(&text)
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        flags = flags.or(cfg);
    }
    if let Some(s) = &flags.subcommand {
        if s != cli.cmd.name() {
            return Err(usage(format!(
                "config is for {s:?}, command line asks for {:?}",
                cli.cmd.name()
            )));
        }
    }
    let mode = match flags.mode.as_deref() {
        None => KillMode::Bold,
        Some(m) => m.parse().map_err(|e: Error| usage(e.to_string()))?,
    };
    if let Some(p) = &flags.env {
        if !p.is_file() {
            return Err(usage(format!("environment file {} not found", p.display())));
        }
    }
    let threads = match flags.threads {
        Some(t) => t,
        None => match std::env::var(THREADS_VAR) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| usage(format!("{THREADS_VAR}={v:?} is not a count")))?,
            Err(_) => 0,
        },
    };
    let run = Run {
        cmd: cli.cmd,
        gamma: flags.gamma.unwrap_or(1.5),
        beta: flags.beta.unwrap_or(1.0),
        n: flags.n,
        reps: flags.reps,
        seed: flags.seed.unwrap_or(0),
        env: flags.env,
        out: flags.out,
        mode,
        suite: flags.suite.unwrap_or_else(|| "all".into()),
        t: flags.t.unwrap_or(5),
        count: flags.count.unwrap_or(64),
    };
    Ok((run, threads))
}

fn sink(out: &Option<PathBuf>) -> Out<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_env(path: &Path) -> Out<Environment> {
    Ok(Environment::read_from(BufReader::new(File::open(path)?))?)
}

impl Run {
    fn n(&self) -> Out<u64> {
        self.n
            .ok_or_else(|| usage(format!("{} needs --n", self.cmd.name())))
    }

    /// The given environment, or a sampled one grown by the selection at `n`.
    fn env_and_selection(&self, n: u64) -> Out<(Environment, GapSelection)> {
        match &self.env {
            Some(p) => {
                let env = load_env(p)?;
                let sel = select(&env, n, self.beta)?;
                Ok((env, sel))
            }
            None => Ok(select_growing(
                &Environment::sample(self.gamma, self.count, self.seed)?,
                n,
                self.beta,
                0,
            )?),
        }
    }

    fn env_for_walk(&self, n: u64) -> Out<Environment> {
        match &self.env {
            Some(p) => load_env(p),
            None => Ok(self.env_and_selection(n)?.0),
        }
    }

    fn exec(&self) -> Out<ExitCode> {
        match self.cmd {
            Cmd::Env => {
                let env = Environment::sample(self.gamma, self.count, self.seed)?;
                let mut w = sink(&self.out)?;
                env.write_to(&mut w)?;
                w.flush()?;
            }
            Cmd::Ruin => {
                let n = self.n()?;
                let k = RuinKernel::new(self.t)?;
                let mut w = sink(&self.out)?;
                writeln!(w, "t,n,q0,q1,q")?;
                for m in 1..=n {
                    writeln!(
                        w,
                        "{},{m},{},{},{}",
                        self.t,
                        f17(k.q0(m)),
                        f17(k.q1(m)),
                        f17(k.q(m))
                    )?;
                }
                w.flush()?;
            }
            Cmd::Survive => {
                let n = self.n()?;
                let env = self.env_for_walk(n)?;
                let lz = survive_exact(&env, n, self.beta, self.mode)?;
                let mut w = sink(&self.out)?;
                writeln!(w, "n,logZ\n{n},{}", f17(lz))?;
                w.flush()?;
            }
            Cmd::Select => {
                let n = self.n()?;
                let (_, s) = self.env_and_selection(n)?;
                let rec = json!({
                    "ell0": s.ell0,
                    "ell0_tilde": s.ell0_tilde,
                    "k0": s.k0,
                    "T1": s.t1,
                    "T2": s.t2,
                    "Iloc_lo": s.iloc_lo,
                    "Iloc_hi": s.iloc_hi,
                    "agree": s.agree,
                });
                self.emit_json(&rec)?;
            }
            Cmd::Fe => {
                let env_bar = match (self.n, &self.env) {
                    (Some(n), _) => {
                        let (env, sel) = self.env_and_selection(n)?;
                        env.truncate(sel.k0)?
                    }
                    (None, Some(p)) => {
                        let env = load_env(p)?;
                        let records = env.records().len();
                        // last record that has a successor
                        let k0 = if env.tail() == Tail::Unit {
                            records
                        } else {
                            records.saturating_sub(1)
                        };
                        if k0 == 0 {
                            return Err(usage(
                                "the environment has no record gap followed by a larger one",
                            ));
                        }
                        env.truncate(k0)?
                    }
                    (None, None) => return Err(usage("fe needs --env or --n")),
                };
                let fe = free_energy(&env_bar, self.beta)?;
                self.emit_json(
                    &serde_json::to_value(fe).map_err(|e| Failure::Other(e.to_string()))?,
                )?;
            }
            Cmd::Simulate => {
                let n = self.n()?;
                let env = self.env_for_walk(n)?;
                let s = ConditionedSampler::new(&env, n, self.beta, self.mode, 0)?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut w = sink(&self.out)?;
                writeln!(w, "path,k,S_k")?;
                for r in 0..self.reps.unwrap_or(1) {
                    for (k, x) in s.sample(&mut rng)?.iter().enumerate() {
                        writeln!(w, "{r},{k},{x}")?;
                    }
                }
                w.flush()?;
            }
            Cmd::Localize => {
                let n = self.n()?;
                let opt = ExperimentOptions {
                    mode: self.mode,
                    exec: Execution::Parallel,
                    ..ExperimentOptions::default()
                };
                let s = localization_experiment(
                    self.gamma,
                    self.beta,
                    n,
                    self.reps.unwrap_or(10),
                    self.seed,
                    &opt,
                )?;
                let mut w = sink(&self.out)?;
                s.write_csv(&mut w)?;
                w.flush()?;
                let summary =
                    serde_json::to_string_pretty(&s).map_err(|e| Failure::Other(e.to_string()))?;
                if self.out.is_some() {
                    println!("{summary}");
                } else {
                    eprintln!("{summary}");
                }
            }
            Cmd::Verify => {
                let opt = VerifyOptions::from_env();
                let reports = run_suite(&self.suite, &opt, |r| println!("{r}"))?;
                if let Some(p) = &self.out {
                    let mut w = BufWriter::new(File::create(p)?);
                    serde_json::to_writer_pretty(&mut w, &reports)
                        .map_err(|e| Failure::Other(e.to_string()))?;
                    writeln!(w)?;
                }
                if reports.iter().any(|r| !r.diagnostic && !r.passed) {
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Ok(ExitCode::SUCCESS)
    }

    fn emit_json(&self, v: &serde_json::Value) -> Out<()> {
        let mut w = sink(&self.out)?;
        serde_json::to_writer_pretty(&mut w, v).map_err(|e| Failure::Other(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = resolve(cli).and_then(|(run, threads)| with_threads(threads, || run.exec()));
    match res {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(m)) => {
            println!("{}", json!({ "status": "infeasible", "message": m }));
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
