use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cremona_cli::config::{ConfigError, Experiment, ExperimentConfig, Overrides};
use cremona_cli::experiment::{render_csv, run_experiment, write_atomic, RunError};
use cremona_cli::verify::{run_suite, Suite};
use cremona_core::cremona::{MonomialMatrix, RationalMap};
use cremona_core::dyndeg::{
    lambda1_fekete, lambda1_lineal, lambda1_word, spectral_radius, DynDegEstimate,
};
use cremona_core::exactpoly::DEFAULT_DEGREE_CAP;
use cremona_core::parse::parse_rational;
use cremona_core::walk::{run_trials, Backend};

/// Degrees, random walks and limit laws for plane Cremona maps.
#[derive(Parser)]
#[command(name = "cremona", version)]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Walk length n.
    #[arg(long, global = true)]
    length: Option<usize>,
    /// symbolic, fast or auto.
    #[arg(long, global = true)]
    backend: Option<Backend>,
    /// Output directory for walk.csv, summary.txt and histogram.csv.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print f∘g (g applied first) and its degree.
    Compose {
        /// Map as "[P0 : P1 : P2]" in X, Y, Z.
        f: String,
        g: String,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        cap: u32,
    },
    /// Print the degree of a map, or of its first K iterates.
    Degree {
        map: String,
        #[arg(long, value_name = "K")]
        iterate: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        cap: u32,
    },
    /// Run the configured walk and write the trajectory CSV.
    Walk,
    /// Run the configured walk and test it against the predicted limit law.
    Clt,
    /// Dynamical degree by one of the exact routes or a Fekete bound.
    Dyndeg {
        /// 2×2 integer matrix "a b; c d" of a monomial map.
        #[arg(long, conflicts_with_all = ["lambda", "map", "word"])]
        matrix: Option<String>,
        /// Translation factor of a lineal map.
        #[arg(long, conflicts_with_all = ["map", "word"])]
        lambda: Option<String>,
        /// Map as "[P0 : P1 : P2]"; yields a Fekete upper bound.
        #[arg(long, conflicts_with = "word")]
        map: Option<String>,
        /// Space-separated atom names of the configured free-basis measure.
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value_t = 20)]
        budget: u32,
        #[arg(long, default_value_t = 1 << 20)]
        cap: u32,
    },
    /// Run a named property suite, or all of them.
    Verify {
        /// submult, sqrt_subadd, functorial, fast_oracle, arithmetic, table or all.
        suite: String,
    },
}

enum Failure {
    Threshold(String),
    Parse(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Threshold(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Threshold(m) | Failure::Parse(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } => Failure::Io(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e.exit_code() {
            3 => Failure::Io(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

fn parse_map(src: &str) -> Result<RationalMap, Failure> {
    RationalMap::parse(src).map_err(|e| Failure::Parse(format!("{src}: {e}")))
}

fn load(shared: &Shared) -> Result<Experiment, Failure> {
    let path = shared
        .config
        .as_ref()
        .ok_or_else(|| Failure::Parse("--config is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    let overrides = Overrides {
        seed: shared.seed,
        trials: shared.trials,
        length: shared.length,
        backend: shared.backend,
        out: shared.out.clone(),
    };
    Ok(cfg.build(&overrides)?)
}

fn parse_matrix(src: &str) -> Result<MonomialMatrix, Failure> {
    let rows: Vec<Vec<i64>> = src
        .split(';')
        .map(|r| {
            r.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(str::parse)
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Parse(format!("--matrix: {e}")))?;
    match rows.as_slice() {
        [r0, r1] if r0.len() == 2 && r1.len() == 2 => {
            Ok(MonomialMatrix::from_i64([[r0[0], r0[1]], [r1[0], r1[1]]]))
        }
        _ => Err(Failure::Parse("--matrix: expected \"a b; c d\"".into())),
    }
}

fn render_estimate(e: &DynDegEstimate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lambda1: {}", e.value);
    let _ = writeln!(s, "log_lambda1: {}", e.log_value);
    let _ = writeln!(s, "exact: {}", e.exact);
    if !e.exact {
        let _ = writeln!(s, "truncated: {}", e.truncated);
        let _ = writeln!(s, "k,degree,bound");
        for ((k, b), d) in e.upper_bounds.iter().zip(&e.degrees) {
            let _ = writeln!(s, "{k},{d},{b}");
        }
    }
    s
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Compose { f, g, cap } => {
            let (f, g) = (parse_map(&f)?, parse_map(&g)?);
            let fg = RationalMap::compose_capped(&f, &g, cap)
                .map_err(|e| Failure::Threshold(e.to_string()))?;
            Ok(format!("{fg}\ndegree: {}\n", fg.degree()))
        }
        Command::Degree { map, iterate, cap } => {
            let f = parse_map(&map)?;
            match iterate {
                None => Ok(format!("{}\n", f.degree())),
                Some(k) => {
                    let mut out = String::from("k,degree\n");
                    let mut acc = RationalMap::identity();
                    for i in 1..=k {
                        acc = RationalMap::compose_capped(&acc, &f, cap)
                            .map_err(|e| Failure::Threshold(format!("{out}k = {i}: {e}")))?;
                        let _ = writeln!(out, "{i},{}", acc.degree());
                    }
                    Ok(out)
                }
            }
        }
        Command::Walk => {
            let exp = load(&cli.shared)?;
            let ensemble = run_trials(&exp.walk).map_err(|e| Failure::Parse(e.to_string()))?;
            let csv = render_csv(&ensemble, &exp.walk.checkpoints);
            let note = match &exp.outputs.csv {
                Some(p) => {
                    write_atomic(p, &csv).map_err(Failure::from)?;
                    format!("wrote {}\n", p.display())
                }
                None => csv,
            };
            if ensemble.failures.is_empty() {
                Ok(note)
            } else {
                Err(Failure::Threshold(format!(
                    "{note}{} of {} trials failed; first: trial {}: {}",
                    ensemble.failures.len(),
                    exp.walk.trials,
                    ensemble.failures[0].trial,
                    ensemble.failures[0].error
                )))
            }
        }
        Command::Clt => {
            let exp = load(&cli.shared)?;
            let (report, rendered) = run_experiment(&exp)?;
            if report.passed() {
                Ok(rendered.summary)
            } else {
                Err(Failure::Threshold(rendered.summary))
            }
        }
        Command::Dyndeg {
            matrix,
            lambda,
            map,
            word,
            budget,
            cap,
        } => {
            let est = if let Some(m) = matrix {
                spectral_radius(&parse_matrix(&m)?)
            } else if let Some(l) = lambda {
                let l = parse_rational(&l).map_err(|e| Failure::Parse(format!("--lambda: {e}")))?;
                lambda1_lineal(&l).map_err(|e| Failure::Parse(format!("--lambda: {e}")))?
            } else if let Some(m) = map {
                lambda1_fekete(&parse_map(&m)?, budget, cap)
                    .map_err(|e| Failure::Threshold(e.to_string()))?
            } else if let Some(w) = word {
                let exp = load(&cli.shared)?;
                let measure = &exp.walk.measure;
                let letters = w
                    .split_whitespace()
                    .map(|n| {
                        measure
                            .index_of(n)
                            .ok_or_else(|| Failure::Parse(format!("--word: unknown atom '{n}'")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                lambda1_word(measure, &letters).map_err(|e| Failure::Parse(e.to_string()))?
            } else {
                return Err(Failure::Parse(
                    "dyndeg needs one of --matrix, --lambda, --map or --word".into(),
                ));
            };
            Ok(render_estimate(&est))
        }
        Command::Verify { suite } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse().map_err(Failure::Parse)?]
            };
            let mut out = String::new();
            let mut ok = true;
            for s in suites {
                let r = run_suite(s);
                ok &= r.passed();
                let _ = writeln!(out, "{r}");
            }
            if ok {
                Ok(out)
            } else {
                Err(Failure::Threshold(out))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if matches!(f, Failure::Threshold(_)) {
                print!("{}", f.message());
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
