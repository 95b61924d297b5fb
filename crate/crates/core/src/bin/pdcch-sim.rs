use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use pdcch_sim::bits::{random_bits, to_string};
use pdcch_sim::chain::{Chain, ChainConfig};
use pdcch_sim::dci::{crc_attach, CrcConfig};
use pdcch_sim::fec::{polar_construct, polar_encode, tbcc_encode, TbccConfig};
use pdcch_sim::sim::{interpolate_threshold, SimConfig, SimResult, Simulator};
use pdcch_sim::{Error, Result, Standard};

#[derive(Parser)]
#[command(
    name = "pdcch-sim",
    version,
    about = "PDCCH link-level simulator for LTE-eMBMS and NR"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the CNR sweep described by a configuration file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CNR reaching a target BLER in a sweep CSV.
    Threshold {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        target: f64,
    },
    /// Write golden vectors, one `info<TAB>coded` line per case.
    Goldens {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            seed,
            workers,
            out,
        } => {
            let mut cfg = SimConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.sweep.master_seed = s;
            }
            if let Some(w) = workers {
                cfg.sweep.workers = w;
            }
            cfg.validate()?;
            let result = Simulator::new(cfg)?.run_sweep()?;
            match out {
                Some(path) => result.write_csv(BufWriter::new(File::create(path)?)),
                None => result.write_csv(io::stdout().lock()),
            }
        }
        Command::Threshold { input, target } => {
            let result = SimResult::read_csv(File::open(input)?)?;
            println!("{:.3}", interpolate_threshold(&result, target)?);
            Ok(())
        }
        Command::Goldens { out, seed, count } => write_goldens(&out, seed, count),
    }
}

fn write_goldens(dir: &Path, seed: u64, count: usize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lte_crc = CrcConfig::lte(Some(pdcch_sim::dci::M_RNTI));
    let nr_crc = CrcConfig::nr(Some(pdcch_sim::dci::NR_DEFAULT_RNTI));
    let polar = polar_construct(36, 126)?;
    let lte_chain = Chain::new(ChainConfig::new(Standard::Lte, 1))?;
    let nr_chain = Chain::new(ChainConfig::new(Standard::Nr, 1))?;

    type Case<'a> = Box<dyn Fn(&[u8]) -> Result<Vec<u8>> + 'a>;
    let files: Vec<(&str, usize, Case)> = vec![
        (
            "crc16_lte.txt",
            12,
            Box::new(|m| Ok(crc_attach(m, &lte_crc))),
        ),
        (
            "crc24c_nr.txt",
            12,
            Box::new(|m| Ok(crc_attach(m, &nr_crc))),
        ),
        (
            "tbcc.txt",
            28,
            Box::new(|m| tbcc_encode(m, &TbccConfig::default())),
        ),
        (
            "polar_k36_n128.txt",
            36,
            Box::new(|m| polar_encode(m, &polar)),
        ),
        (
            "pdcch_lte_al1.txt",
            12,
            Box::new(|m| Ok(lte_chain.transmit(m)?.rate_matched)),
        ),
        (
            "pdcch_nr_al1.txt",
            12,
            Box::new(|m| Ok(nr_chain.transmit(m)?.rate_matched)),
        ),
    ];
    for (name, k, case) in files {
        let mut w = BufWriter::new(File::create(dir.join(name))?);
        for _ in 0..count {
            let mut info = random_bits(k, &mut rng);
            if name.starts_with("pdcch_lte") {
                // Format 1C reserved bits are zero.
                info[8..].fill(0);
            }
            writeln!(w, "{}\t{}", to_string(&info), to_string(&case(&info)?))?;
        }
        w.flush().map_err(Error::from)?;
    }
    Ok(())
}
