//! Retry loop shared by the remote embedding and chat backends.

use std::thread;
use std::time::Duration;

/// Retry behavior for remote calls: retries apply to transport failures and
/// 5xx responses only, with exponential backoff between attempts.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { attempts: 3, initial_backoff: Duration::from_secs(1) }
    }
}

/// Outcome of a single attempt, as classified by the caller.
pub enum Attempt<T> {
    Ok(T),
    /// Transport failure or 5xx: eligible for another attempt.
    Retryable(String),
    /// Anything else (4xx, malformed payload): fail immediately.
    Fatal(String),
}

/// Run `op` up to `policy.attempts` times. Returns the final error message
/// and the number of attempts made when all attempts fail.
pub fn run_with_retries<T>(
    policy: &RetryPolicy,
    mut op: impl FnMut() -> Attempt<T>,
) -> Result<T, (String, u32)> {
    let mut backoff = policy.initial_backoff;
    let mut last_err = String::new();
    for attempt in 1..=policy.attempts.max(1) {
        match op() {
            Attempt::Ok(v) => return Ok(v),
            Attempt::Fatal(msg) => return Err((msg, attempt)),
            Attempt::Retryable(msg) => {
                last_err = msg;
                if attempt < policy.attempts {
                    thread::sleep(backoff);
                    backoff = backoff.saturating_mul(2);
                }
            }
        }
    }
    Err((last_err, policy.attempts.max(1)))
}
