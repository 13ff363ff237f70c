//! The generation-judge-revision loop, deterministically: run a phase, and
//! on validation failure apply the next entry of an ordered fix ladder and
//! rerun, up to the iteration cap.

use crate::{Error, Result};
use alloc::string::String;
use alloc::vec::Vec;

/// Successful phase artifact plus its retry bookkeeping.
#[derive(Debug)]
pub struct RetryOutcome<T> {
    pub artifact: T,
    pub attempts: usize,
    pub fixes_applied: Vec<String>,
}

/// Runs `run(attempt, fixes_so_far)` up to `k_max` times. After each failure
/// the next ladder entry is appended to the fix list (the last entry repeats
/// once the ladder is exhausted); the closure re-derives its parameters from
/// that list, which keeps every attempt reproducible. After `k_max` failures
/// the last error is returned for the caller to escalate.
pub fn validate_retry<T>(
    phase: &str,
    k_max: usize,
    ladder: &[&str],
    mut run: impl FnMut(usize, &[String]) -> Result<T>,
) -> Result<RetryOutcome<T>> {
    let mut fixes: Vec<String> = Vec::new();
    let mut last_err: Option<Error> = None;
    for attempt in 1..=k_max.max(1) {
        match run(attempt, &fixes) {
            Ok(artifact) => return Ok(RetryOutcome { artifact, attempts: attempt, fixes_applied: fixes }),
            Err(e) => last_err = Some(e),
        }
        if !ladder.is_empty() {
            let next = ladder.get(fixes.len()).copied().unwrap_or(ladder[ladder.len() - 1]);
            fixes.push(next.into());
        }
    }
    Err(match last_err {
        Some(e) => e,
        None => Error::Pipeline { phase: phase.into(), what: "no attempt executed".into() },
    })
}

/// Count of a given fix tag in the applied list (phases derive their
/// parameters from these counts).
pub fn fix_count(fixes: &[String], tag: &str) -> usize {
    fixes.iter().filter(|f| f.as_str() == tag).count()
}
