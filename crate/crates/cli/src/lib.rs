//! Stage-by-stage pipeline behind the `coauthor` command.

pub mod analysis;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::RunConfig;
pub use error::CliError;
pub use pipeline::{Manifest, Stage, Workspace};

/// Run every stage into `config.out_dir` and return the final manifest.
/// On failure the manifest on disk names the failed stage and earlier
/// outputs are kept.
pub fn run_pipeline(config: RunConfig) -> Result<Manifest, CliError> {
    let ws = Workspace::new(config)?;
    ws.run_all()?;
    let path = ws.path(pipeline::files::MANIFEST);
    Manifest::load(&path).ok_or_else(|| CliError::Config(format!("unreadable manifest {}", path.display())))
}
