//! Line-delimited tool server on stdin/stdout.

use std::io::{stdin, stdout, BufWriter};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use labgate::sem::CalibrationTable;
use labgate::server::{Server, ServerContext, SkillDocument, ToolRegistry};

#[derive(Parser, Debug)]
#[command(
    name = "labgate-server",
    about = "Schema-gated PL and SEM analysis tools over stdio"
)]
struct Args {
    /// Directory holding `<file_id>.csv` campaigns and `<file_id>.pgm` images.
    #[arg(long)]
    data_dir: PathBuf,
    /// Magnification calibration table.
    #[arg(long)]
    calibration: PathBuf,
    /// Optional skill document with defaults, routes and error directives.
    #[arg(long)]
    skill: Option<PathBuf>,
}

fn main() -> Result<()> {
    let args = Args::parse();
    let text = std::fs::read_to_string(&args.calibration)
        .with_context(|| format!("reading {}", args.calibration.display()))?;
    let calibration = CalibrationTable::parse(&text).context("loading calibration")?;
    let registry = ToolRegistry::builtin(ServerContext {
        data_dir: args.data_dir,
        calibration,
    });
    let skill = match &args.skill {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            SkillDocument::parse(&text, &registry).context("loading skill")?
        }
        None => SkillDocument::default(),
    };
    let server = Server::new(registry, skill);
    server.serve(stdin().lock(), BufWriter::new(stdout().lock()))?;
    Ok(())
}
