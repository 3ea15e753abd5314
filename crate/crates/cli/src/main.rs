use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use orbitforge::pipeline::{
    cmd_distributions, cmd_extend, cmd_index, cmd_om, cmd_overlap, cmd_stats, DedupStore, IndexOptions, Shard,
};
use orbitforge::DesignParams;

/// Classification of symmetric designs with a prescribed automorphism of
/// prime order.
#[derive(Parser)]
#[command(name = "orbitforge", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long)]
    v: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    lambda: usize,
    /// Order of the automorphism.
    #[arg(long, default_value_t = 2)]
    p: usize,
}

impl ParamArgs {
    fn params(&self) -> Result<DesignParams> {
        Ok(DesignParams::new(self.v, self.k, self.lambda)?)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// List admissible fixed-point counts.
    Dist {
        #[command(flatten)]
        params: ParamArgs,
        /// Known lower bound on the number of fixed points.
        #[arg(long)]
        min_fixed: Option<usize>,
    },
    /// Build the orbit matrices of one stratum.
    Om {
        #[command(flatten)]
        params: ParamArgs,
        /// Number of fixed points.
        #[arg(long)]
        fixed: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand orbit matrices into designs and store them up to isomorphism.
    Index {
        /// Orbit-matrix file written by `om`.
        oms: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Process only the i-th of n interleaved partitions.
        #[arg(long, default_value = "1/1")]
        shard: Shard,
        /// Run even when the search is estimated to be too large.
        #[arg(long)]
        force: bool,
    },
    /// Totals of a completed store.
    Stats {
        #[arg(long)]
        store: PathBuf,
    },
    /// Union and intersections of several stores, given as LABEL=DIR or DIR.
    Overlap {
        #[arg(long = "store", required = true, num_args = 1..)]
        stores: Vec<String>,
    },
    /// Extend Hadamard designs to 3-designs and classify them.
    Extend {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() -> Result<()> {
    let Ok(s) = std::env::var("ORBITFORGE_THREADS") else { return Ok(()) };
    let n: usize = s.trim().parse().with_context(|| format!("ORBITFORGE_THREADS={s} is not a number"))?;
    if n == 0 {
        bail!("ORBITFORGE_THREADS must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn open(dir: &PathBuf) -> Result<DedupStore> {
    DedupStore::open(dir).with_context(|| format!("opening store {}", dir.display()))
}

fn run(cli: Cli) -> Result<String> {
    let report = match cli.cmd {
        Cmd::Dist { params, min_fixed } => cmd_distributions(params.params()?, params.p, min_fixed),
        Cmd::Om { params, fixed, out } => cmd_om(params.params()?, params.p, fixed, out.as_deref())?.0,
        Cmd::Index { oms, store, shard, force } => {
            let opts = IndexOptions { shard, force, ..IndexOptions::default() };
            cmd_index(&oms, &open(&store)?, &opts)?
        }
        Cmd::Stats { store } => cmd_stats(&open(&store)?)?,
        Cmd::Overlap { stores } => {
            if stores.len() < 2 {
                bail!("overlap needs at least two stores");
            }
            let mut opened = Vec::new();
            for (n, s) in stores.iter().enumerate() {
                let (label, dir) = match s.split_once('=') {
                    Some((l, d)) => (l.to_string(), PathBuf::from(d)),
                    None => ((n + 1).to_string(), PathBuf::from(s)),
                };
                opened.push((label, open(&dir)?));
            }
            let refs: Vec<(String, &DedupStore)> = opened.iter().map(|(l, s)| (l.clone(), s)).collect();
            cmd_overlap(&refs)?
        }
        Cmd::Extend { store, out } => cmd_extend(&open(&store)?, out.as_deref())?,
    };
    Ok(report.to_string())
}

fn main() -> Result<()> {
    init_threads()?;
    print!("{}", run(Cli::parse())?);
    Ok(())
}
