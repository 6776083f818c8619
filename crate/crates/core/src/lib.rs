//! Predicting which areas of interest a web user will look at in the next
//! time window, from eye-tracking signals and page interaction events.

pub mod balance;
pub mod classify;
pub mod corpus;
pub mod error;
pub mod features;
pub mod folds;
pub mod gaze;
pub mod layout;
pub mod metrics;
pub mod pipeline;
pub mod selection;
pub mod synth;
pub mod windowing;

pub use error::{Error, Result};
