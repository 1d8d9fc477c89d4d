use singable::dataprep::DataprepError;
use singable::decode::DecodeError;
use singable::melody::MelodyError;
use singable::metrics::MetricsError;
use singable::model::ModelError;
use singable::phonology::{PhonologyError, ProfileError};
use singable::prompts::PromptError;
use singable::ranking::RankingError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Phonology(#[from] PhonologyError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Melody(#[from] MelodyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dataprep(#[from] DataprepError),
}

impl CliError {
    /// Name of the error type the failure came from.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Input(_) => "InputError",
            CliError::Profile(_) => "ProfileError",
            CliError::Phonology(_) => "PhonologyError",
            CliError::Prompt(_) => "PromptError",
            CliError::Melody(_) => "MelodyError",
            CliError::Model(_) => "ModelError",
            CliError::Decode(_) => "DecodeError",
            CliError::Ranking(_) => "RankingError",
            CliError::Metrics(_) => "MetricsError",
            CliError::Dataprep(_) => "DataprepError",
        }
    }
}
