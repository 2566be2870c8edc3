use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cocite::config::{parse_delimiter, PipelineConfig};
use cocite::export::MapWeight;
use cocite::ingest::YearWindow;
use cocite::pipeline::{run_stage, Stage};
use cocite::similarity::StorageMode;

const EXIT_STAGE_FAILURE: u8 = 1;
const EXIT_BAD_INVOCATION: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "cocite", version, about = "Co-citation journal similarity and article dissimilarity")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// key = value config file; flags and COCITE_* variables override it
    #[arg(long, global = true, env = "COCITE_CONFIG")]
    config: Option<PathBuf>,

    #[arg(long, global = true, env = "COCITE_CITATIONS")]
    citations: Option<PathBuf>,

    #[arg(long, global = true, env = "COCITE_CATEGORIES")]
    categories: Option<PathBuf>,

    /// Minimum inbound citations for the network export
    #[arg(long, global = true, env = "COCITE_MIN_CITATIONS")]
    min_citations: Option<u64>,

    /// Minimum matched references for decile analyses
    #[arg(long, global = true, env = "COCITE_MIN_REFS")]
    min_refs: Option<usize>,

    #[arg(long, global = true, env = "COCITE_MULTIDISCIPLINARY_LABEL")]
    multidisciplinary_label: Option<String>,

    /// Worker threads for the similarity stage (0 = all cores)
    #[arg(long, global = true, env = "COCITE_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, env = "COCITE_OUT")]
    out: Option<PathBuf>,

    #[arg(long, global = true, env = "COCITE_STORAGE", value_parser = ["sparse", "dense"])]
    storage: Option<String>,

    #[arg(long, global = true, env = "COCITE_SPARSITY_FLOOR")]
    sparsity_floor: Option<f64>,

    #[arg(long, global = true, env = "COCITE_YEAR_START", requires = "year_end")]
    year_start: Option<i32>,

    #[arg(long, global = true, env = "COCITE_YEAR_END", requires = "year_start")]
    year_end: Option<i32>,

    /// Input delimiter: one character, or tab / comma / semicolon
    #[arg(long, global = true, env = "COCITE_DELIMITER")]
    delimiter: Option<String>,

    /// Histogram bin width
    #[arg(long, global = true, env = "COCITE_BIN_WIDTH")]
    bin_width: Option<f64>,

    #[arg(long, global = true, env = "COCITE_TOP_JOURNALS")]
    top_journals: Option<usize>,

    /// Node weight in the map file
    #[arg(long, global = true, env = "COCITE_MAP_WEIGHT", value_parser = ["articles", "citations"])]
    map_weight: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Parse inputs, write the journal registry and an ingest summary
    Ingest,
    /// Compute and store the journal similarity matrix
    Similarity,
    /// Score articles and journals against a stored matrix
    Dissim,
    /// Histogram, decile and category reports
    Report,
    /// Map and network files for graph-visualization tools
    Export,
    /// All stages in one go
    Run,
}

impl Cli {
    fn config(&self) -> cocite::Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::from_file(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.citations {
            c.citations = Some(v.clone());
        }
        if let Some(v) = &self.categories {
            c.categories = Some(v.clone());
        }
        if let Some(v) = self.min_citations {
            c.min_inbound_citations = v;
        }
        if let Some(v) = self.min_refs {
            c.min_refs = v;
        }
        if let Some(v) = &self.multidisciplinary_label {
            c.multidisciplinary_label = v.clone();
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        if let Some(v) = &self.out {
            c.out_dir = v.clone();
        }
        if let Some(v) = &self.storage {
            c.storage = v.parse::<StorageMode>()?;
        }
        if let Some(v) = self.sparsity_floor {
            c.sparsity_floor = v;
        }
        if let (Some(start), Some(end)) = (self.year_start, self.year_end) {
            c.year_window = Some(YearWindow { start, end });
        }
        if let Some(v) = &self.delimiter {
            c.delimiter = parse_delimiter(v)?;
        }
        if let Some(v) = self.bin_width {
            c.bin_width = v;
        }
        if let Some(v) = self.top_journals {
            c.top_journals = v;
        }
        if let Some(v) = &self.map_weight {
            c.map_weight = v.parse::<MapWeight>()?;
        }
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_BAD_INVOCATION);
        }
    };
    let Some(citations) = &config.citations else {
        eprintln!("error: no citations file given (--citations or `citations =` in the config)");
        return ExitCode::from(EXIT_BAD_INVOCATION);
    };
    for path in std::iter::once(citations).chain(config.categories.as_ref()) {
        if !path.is_file() {
            eprintln!("error: input file {} does not exist", path.display());
            return ExitCode::from(EXIT_BAD_INVOCATION);
        }
    }
    let stage = match cli.command {
        Command::Ingest => Stage::Ingest,
        Command::Similarity => Stage::Similarity,
        Command::Dissim => Stage::Dissim,
        Command::Report => Stage::Report,
        Command::Export => Stage::Export,
        Command::Run => Stage::Run,
    };
    match run_stage(stage, &config) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_STAGE_FAILURE)
        }
    }
}
