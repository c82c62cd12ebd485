use std::path::PathBuf;

use bura_core::BuraError;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    /// A pipeline stage failed; `inputs` names the parameters it ran with.
    #[error("{stage} failed ({inputs}): {source}")]
    Stage {
        stage: &'static str,
        inputs: String,
        #[source]
        source: BuraError,
    },
    #[error("minimax for alpha={alpha}, k={k} did not converge (deviation {deviation:e})")]
    NotConverged { alpha: f64, k: usize, deviation: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str, inputs: impl FnOnce() -> String) -> Result<T>;
}

impl<T> StageExt<T> for std::result::Result<T, BuraError> {
    fn stage(self, stage: &'static str, inputs: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| ExperimentError::Stage { stage, inputs: inputs(), source })
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ExperimentError {
    let path = path.into();
    move |source| ExperimentError::Io { path, source }
}
