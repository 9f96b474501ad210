//! `hforce`: generate, inspect and check conditions stored as JSON files.
//!
//! Exit status is 0 when everything passes, 1 when a check fails or a
//! condition violates a construction clause, and 2 on usage, input or
//! format errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use hforce::checks::{build_maj_chain, check_flip_pair, majority_gate, run_suite, CheckReport};
use hforce::signatures::{close, components, u_set, upsilon, ClosedSet};
use hforce::workbench::{condition_id, decode, encode, generate, GeneratorSpec, TermPool, CORPUS_SIZE};
use hforce::{leq, leq_pr, transform, Condition, Error, SuiteConfig, Width};

#[derive(Parser)]
#[command(name = "hforce", version, about = "Workbench for finite historic forcing conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a condition from a seed.
    Gen(GenArgs),
    /// Rebuild conditions from their files and re-check every clause.
    Validate { files: Vec<PathBuf> },
    /// Print whether the second condition extends the first.
    Leq {
        p: PathBuf,
        q: PathBuf,
        /// Use pure extension instead.
        #[arg(long)]
        pure: bool,
    },
    /// Write the transform of Q by P.
    Transform {
        p: PathBuf,
        q: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the components at a level, one per line.
    Components {
        file: PathBuf,
        #[arg(long)]
        alpha: usize,
    },
    /// Print the least closed superset of a set of levels.
    Closure {
        file: PathBuf,
        #[arg(long, value_parser = parse_levels, default_value = "")]
        levels: Levels,
    },
    /// Print the signature of a closed set of levels.
    Upsilon {
        file: PathBuf,
        #[arg(long, value_parser = parse_levels, default_value = "")]
        levels: Levels,
    },
    /// Print the generators whose index-valued levels lie in a closed set.
    Uset {
        file: PathBuf,
        #[arg(long, value_parser = parse_levels, default_value = "")]
        levels: Levels,
    },
    /// Print the majority chain of an amalgam and its longest strict chain.
    Chain { file: PathBuf },
    /// Check that flipping along a pair of closed sets stays in the table.
    Flip {
        file: PathBuf,
        #[arg(long, value_parser = parse_levels, default_value = "")]
        z0: Levels,
        #[arg(long, value_parser = parse_levels, default_value = "")]
        z1: Levels,
        /// Check every row instead of a seeded sample.
        #[arg(long)]
        all_f: bool,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Run every check on each file; prints one JSON object per file.
    Suite {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Write the standard corpus into a directory.
    Corpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = CORPUS_SIZE)]
        count: u64,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    /// Term pool: `standard` or `const1`.
    #[arg(long, default_value = "standard")]
    pool: String,
    /// Let the copies at each level share a heart.
    #[arg(long)]
    heart: bool,
    /// Unused indices between consecutive blocks.
    #[arg(long, default_value_t = 1)]
    gap: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest pairs × rows product the flip check enumerates exhaustively.
    #[arg(long, default_value_t = SuiteConfig::default().flip_budget)]
    flip_budget: usize,
    /// Samples drawn when the flip check does not enumerate.
    #[arg(long, default_value_t = SuiteConfig::default().flip_samples)]
    flip_samples: usize,
}

impl SuiteArgs {
    fn config(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            flip_budget: self.flip_budget,
            flip_samples: self.flip_samples,
            ..SuiteConfig::default()
        }
    }
}

type Levels = Vec<usize>;

fn parse_levels(s: &str) -> std::result::Result<Levels, String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<usize>().map_err(|e| format!("bad level {x:?}: {e}")))
        .collect()
}

fn load(path: &Path) -> Result<Condition> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    decode(&text).with_context(|| format!("decoding {}", path.display()))
}

fn write_condition(p: &Condition, out: Option<&Path>) -> Result<()> {
    let text = encode(p);
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string(v).expect("values serialize"));
}

fn report_json(r: &CheckReport) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

fn closed(p: &Condition, levels: &[usize]) -> Result<ClosedSet> {
    Ok(ClosedSet::new(p, levels)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen(a) => {
            let mut spec = GeneratorSpec::new(a.seed, Width::new(a.width)?, a.height);
            spec.pool = TermPool::parse(&a.pool)?;
            spec.shared_heart = a.heart;
            spec.gap = a.gap;
            write_condition(&generate(&spec)?, a.out.as_deref())?;
        }
        Command::Validate { files } => {
            let mut ok = true;
            for f in &files {
                match load(f) {
                    Ok(p) => println!(
                        "{}: ok (id {}, height {}, {} generators, {} rows)",
                        f.display(),
                        condition_id(&p),
                        p.height(),
                        p.support().len(),
                        p.table().len()
                    ),
                    Err(e) if exit_code(&e) == 1 => {
                        ok = false;
                        println!("{}: invalid: {:#}", f.display(), e);
                    }
                    Err(e) => return Err(e),
                }
            }
            return Ok(ok);
        }
        Command::Leq { p, q, pure } => {
            let (p, q) = (load(&p)?, load(&q)?);
            let r = if pure { leq_pr(&p, &q)? } else { leq(&p, &q)? };
            println!("{r}");
        }
        Command::Transform { p, q, out } => {
            let t = transform(&load(&p)?, &load(&q)?)?;
            write_condition(&t, out.as_deref())?;
        }
        Command::Components { file, alpha } => {
            for c in components(&load(&file)?, alpha)? {
                print!("{}", encode(&c));
            }
        }
        Command::Closure { file, levels } => {
            let p = load(&file)?;
            print_json(&json!(close(&p, &levels)?.levels()));
        }
        Command::Upsilon { file, levels } => {
            let p = load(&file)?;
            print_json(&upsilon(&p, &closed(&p, &levels)?)?.to_json(p.width()));
        }
        Command::Uset { file, levels } => {
            let p = load(&file)?;
            print_json(&json!(u_set(&p, &closed(&p, &levels)?)?));
        }
        Command::Chain { file } => {
            let q = load(&file)?;
            let chain = build_maj_chain(&q)?;
            let longest = q.table().longest_chain(&chain)?.length;
            print_json(&json!({
                "chain": chain,
                "longest_strict_chain": longest,
                "gate": majority_gate(&q)?,
            }));
        }
        Command::Flip { file, z0, z1, all_f, suite } => {
            let p = load(&file)?;
            let r = check_flip_pair(&p, &z0, &z1, all_f, &suite.config());
            print_json(&report_json(&r));
            return Ok(r.passed());
        }
        Command::Suite { files, suite } => {
            let config = suite.config();
            let loaded = files.iter().map(|f| load(f)).collect::<Result<Vec<_>>>()?;
            let results: Vec<Vec<CheckReport>> =
                loaded.par_iter().map(|p| run_suite(p, &config)).collect();
            let mut ok = true;
            for (f, reports) in files.iter().zip(&results) {
                ok &= reports.iter().all(CheckReport::passed);
                let checks: Vec<Value> = reports.iter().map(report_json).collect();
                print_json(&json!({ "file": f.display().to_string(), "checks": checks }));
            }
            return Ok(ok);
        }
        Command::Corpus { out, count } => {
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let written = (0..count)
                .into_par_iter()
                .map(|seed| {
                    let p = generate(&GeneratorSpec::corpus(seed))?;
                    let path = out.join(format!("seed-{seed:03}.json"));
                    write_condition(&p, Some(&path))
                })
                .collect::<Result<Vec<_>>>()?;
            println!("wrote {} conditions to {}", written.len(), out.display());
        }
    }
    Ok(true)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidInput(_) | Error::Format(_)) | None => 2,
        Some(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
