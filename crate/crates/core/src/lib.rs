//! Classification of labeled temporal event sequences with learned
//! Horn-clause theories, explained contrastively via similarity-selected
//! near misses.
//!
//! The pipeline: facial action unit (AU) interval sequences are encoded as
//! ground facts ([`sequence`]), enriched with Allen temporal relations
//! ([`allen`]), classified by per-class Horn theories learned with a
//! covering loop ([`learner`]), traced back into local explanations and
//! propositionalized into feature sets ([`explain`]), and finally
//! contrasted against the most / least similar opposite-class examples
//! ([`contrast`]). The [`harness`] module adds a synthetic dataset
//! generator and an end-to-end evaluation report.

pub mod allen;
pub mod contrast;
pub mod error;
pub mod explain;
pub mod facs;
pub mod harness;
pub mod learner;
pub mod logic;
pub mod sequence;
