//! `grometrics`: indexes, profiles and analyses of research output
//! from publication/citation count snapshots.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grometrics::{Distance, Linkage, ParseError, ReportError, SchemeError, StatsError};

use config::{apply_config_file, read_config_file, RunConfig};

/// Exit codes: 0 success, 2 usage error, 3 parse error, 4 analysis
/// error. Every failure prints a single `ERROR <code>: ...` line.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self { code: 2, message }
    }
    pub fn parse(message: String) -> Self {
        Self { code: 3, message }
    }
    pub fn analysis(message: String) -> Self {
        Self { code: 4, message }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        Self::parse(e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        Self::analysis(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        Self::analysis(e.to_string())
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        Self::parse(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "grometrics",
    version,
    about = "Geometric-mean research-output indexes over publication/citation snapshots",
    after_help = "Exit codes: 0 success, 2 usage error, 3 parse error, 4 analysis error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkageArg {
    Average,
    Complete,
    Ward,
}

impl From<LinkageArg> for Linkage {
    fn from(value: LinkageArg) -> Self {
        match value {
            LinkageArg::Average => Linkage::Average,
            LinkageArg::Complete => Linkage::Complete,
            LinkageArg::Ward => Linkage::Ward,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Euclidean,
    #[value(name = "one_minus_pearson")]
    OneMinusPearson,
}

impl From<DistanceArg> for Distance {
    fn from(value: DistanceArg) -> Self {
        match value {
            DistanceArg::Euclidean => Distance::Euclidean,
            DistanceArg::OneMinusPearson => Distance::OneMinusPearson,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// World baseline CSV (`field,n_docs,citations`, one row per field
    /// plus an ALL row)
    #[arg(long, value_name = "PATH")]
    world: Option<PathBuf>,

    /// Entity metrics CSV (`entity,kind,field,n_docs,citations`)
    #[arg(long, value_name = "PATH")]
    entities: Option<PathBuf>,

    /// Economic data CSV (`entity,gdp_busd,ppc_kusd`)
    #[arg(long, value_name = "PATH")]
    econ: Option<PathBuf>,

    /// Exclusion list, one entity code per line (dropped from the
    /// dataset; for `wealth`, kept but left out of the fit)
    #[arg(long, value_name = "PATH")]
    exclude: Option<PathBuf>,

    /// Analyse only entities with strictly more documents than this
    /// [default: 50]
    #[arg(long, value_name = "N")]
    min_docs: Option<u64>,

    /// Linkage for `cluster` [default: average]
    #[arg(long, value_enum, value_name = "LINKAGE")]
    linkage: Option<LinkageArg>,

    /// Distance for `cluster` [default: one_minus_pearson]
    #[arg(long, value_enum, value_name = "DISTANCE")]
    distance: Option<DistanceArg>,

    /// Field-grouping scheme file (`name: field; field; ...`); the
    /// built-in five-group scheme is used when absent
    #[arg(long, value_name = "PATH")]
    scheme: Option<PathBuf>,

    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for the synthetic generators [default: 0]
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Plain `key = value` config file; flags override its entries
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let entries = read_config_file(path)?;
            apply_config_file(&mut config, &entries)?;
        }
        if let Some(v) = &self.world {
            config.world = Some(v.clone());
        }
        if let Some(v) = &self.entities {
            config.entities = Some(v.clone());
        }
        if let Some(v) = &self.econ {
            config.econ = Some(v.clone());
        }
        if let Some(v) = &self.exclude {
            config.exclude = Some(v.clone());
        }
        if let Some(v) = &self.scheme {
            config.scheme = Some(v.clone());
        }
        if let Some(v) = self.min_docs {
            config.min_docs = v;
        }
        if let Some(v) = self.linkage {
            config.linkage = v.into();
        }
        if let Some(v) = self.distance {
            config.distance = v.into();
        }
        if let Some(v) = &self.out {
            config.out = v.clone();
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rank entities by their whole-entity indexes
    Index {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Per-field index profile of one entity
    Profile {
        #[command(flatten)]
        common: CommonArgs,
        /// Entity code to profile
        #[arg(value_name = "CODE")]
        entity: String,
    },
    /// Regress log index on log wealth
    Wealth {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Principal-component map of entities over grouped field scores
    Pca {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Hierarchical clustering of the research fields
    Cluster {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Side-by-side indicator comparison over a paper corpus
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Corpus CSV (`entity,cites`, one row per paper); a seeded
        /// synthetic corpus is generated when absent
        #[arg(long, value_name = "PATH")]
        corpus: Option<PathBuf>,
    },
    /// Whole-entity index against the sum of its field scores
    Linearity {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Index { common } => commands::cmd_index(&common.resolve()?),
        Command::Profile { common, entity } => commands::cmd_profile(&common.resolve()?, &entity),
        Command::Wealth { common } => commands::cmd_wealth(&common.resolve()?),
        Command::Pca { common } => commands::cmd_pca(&common.resolve()?),
        Command::Cluster { common } => commands::cmd_cluster(&common.resolve()?),
        Command::Compare { common, corpus } => {
            let mut config = common.resolve()?;
            if let Some(path) = corpus {
                config.corpus = Some(path);
            }
            commands::cmd_compare(&config)
        }
        Command::Linearity { common } => commands::cmd_linearity(&common.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // keep clap's usage text, but end with the machine-parsable line
            eprint!("{}", e.render());
            let first_line = e
                .to_string()
                .lines()
                .next()
                .unwrap_or("invalid usage")
                .to_string();
            eprintln!("ERROR 2: {first_line}");
            return ExitCode::from(2);
        }
        Err(e) => {
            // --help / --version
            print!("{}", e.render());
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {}: {}", e.code, e.message);
            ExitCode::from(e.code)
        }
    }
}
