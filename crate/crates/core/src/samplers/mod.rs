//! Adaptive sampling loops, their schedules and a schedule validator.

mod driver;
mod schedule;
mod validate;

pub use driver::{
    midas_run, run_adaptive, submidas_run, AdaptiveSampler, Algorithm, Checkpoint, RunConfig,
    StepRecord,
};
pub use schedule::{Schedule, ScheduleValues};
pub use validate::{
    validate_schedule, Check, Decay, Outcome, ScheduleDescriptor, ValidationReport, Verdict,
};
