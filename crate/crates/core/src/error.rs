use thiserror::Error;

use crate::model::{NodeId, TaskId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("schedule references unknown task {0}")]
    UnknownTask(TaskId),
    #[error("schedule references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("task {task} starts at {start} before its submission at {submit}")]
    StartBeforeSubmit {
        task: TaskId,
        start: f64,
        submit: f64,
    },
    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    TooLarge { size: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_range(quantity: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            quantity,
            value,
            lo,
            hi,
        })
    }
}
