use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("run aborted at event `{event}`: {source}")]
    Phase {
        event: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("log io error: {0}")]
    LogIo(#[from] std::io::Error),
}

impl RunError {
    pub fn at<E>(event: &'static str) -> impl FnOnce(E) -> Self
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        move |source| Self::Phase {
            event,
            source: Box::new(source),
        }
    }

    /// The event name the run failed at, when applicable.
    pub fn failing_event(&self) -> Option<&'static str> {
        match self {
            Self::Phase { event, .. } => Some(event),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("log truncated or damaged: {0}")]
    TruncatedLog(String),
    #[error("log schema version {found} unsupported (expected {expected})")]
    SchemaVersionMismatch { found: u64, expected: u64 },
}
