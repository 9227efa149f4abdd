use thiserror::Error;

use crate::task::BoxError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate task id `{0}`")]
    DuplicateTaskId(String),
    #[error("task `{task}`: {reason}")]
    InvalidPort { task: String, reason: String },
    #[error("collection `{key}` has two producers: `{first}` and `{second}`")]
    DuplicateProducer {
        key: String,
        first: String,
        second: String,
    },
    #[error("no producer for collection `{key}` required by task `{consumer}`")]
    MissingProducer { key: String, consumer: String },
    #[error(
        "type mismatch on collection `{key}`: produced as `{produced}`, \
         consumed as `{consumed}` by task `{consumer}`"
    )]
    TypeMismatch {
        key: String,
        produced: String,
        consumed: String,
        consumer: String,
    },
    #[error("dependency cycle: {}", path.join(" -> "))]
    Cycle { path: Vec<String> },

    #[error("collection `{key}` written twice in event {event_index}")]
    DoubleWrite { key: String, event_index: u64 },
    #[error("task `{task}` wrote `{key}` which is not a declared output")]
    UndeclaredOutput { task: String, key: String },
    #[error("task `{task}` read `{key}` which is not a declared input")]
    UndeclaredInput { task: String, key: String },
    #[error(
        "task `{task}` finished event {event_index} without writing its \
         declared output `{key}`"
    )]
    MissingDeclaredOutput {
        task: String,
        key: String,
        event_index: u64,
    },
    #[error(
        "input `{key}` of task `{task}` absent in event {event_index}; \
         scheduling invariant broken"
    )]
    InputMissing {
        task: String,
        key: String,
        event_index: u64,
    },
    #[error("collection `{key}` holds a different type than requested")]
    StoreType { key: String },

    #[error("sink `{0}` booked twice")]
    DuplicateSink(String),
    #[error("event source did not provide declared key `{0}`")]
    SourceKeyMissing(String),
    #[error("event source provided undeclared key `{0}`")]
    SourceKeyUnexpected(String),
    #[error("event source failed at event {event_index}: {source}")]
    SourceFailed {
        event_index: u64,
        #[source]
        source: BoxError,
    },

    #[error("task `{task}` failed on event {event_index}: {source}")]
    TaskFailed {
        task: String,
        event_index: u64,
        #[source]
        source: BoxError,
    },
    #[error("task `{task}` failed in {hook}: {source}")]
    HookFailed {
        task: String,
        hook: &'static str,
        #[source]
        source: BoxError,
    },

    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
