use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ChatBackend, LlmError, LlmRequest, LlmResponse};
use crate::util::{child_seed, fnv1a};

/// Exponential backoff: `base_delay * factor^(attempt-1)`, stretched by up to
/// `jitter` (a fraction) drawn from a generator seeded per request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub factor: f64,
    pub jitter: f64,
    pub seed: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_secs(1),
            factor: 2.0,
            jitter: 0.25,
            seed: 0,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based) of the request tagged `tag`.
    pub fn delay(&self, tag: &str, retry: u32) -> Duration {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(self.seed ^ fnv1a(tag), u64::from(retry)));
        let stretch = 1.0 + self.jitter * rng.random::<f64>();
        let exp = self.factor.powi(retry.saturating_sub(1) as i32);
        self.base_delay.mul_f64(exp * stretch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrencyPolicy {
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    /// Cancel requests not yet started once any request has failed.
    pub fail_fast: bool,
}

impl Default for ConcurrencyPolicy {
    fn default() -> Self {
        ConcurrencyPolicy {
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            fail_fast: false,
        }
    }
}

/// One logical completion, retried per the policy.
pub fn complete<B: ChatBackend + ?Sized>(
    req: &LlmRequest,
    backend: &B,
    retry: &RetryPolicy,
) -> Result<LlmResponse, LlmError> {
    if req.turns.is_empty() {
        return Err(LlmError::Config("request has no turns".into()));
    }
    let max = retry.max_attempts.max(1);
    let mut attempt = 1;
    loop {
        match backend.send(req) {
            Ok(resp) => return Ok(resp),
            Err(e) if e.is_retryable() && attempt < max => {
                std::thread::sleep(retry.delay(&req.request_tag, attempt));
                attempt += 1;
            }
            Err(e) => return Err(e.with_attempts(attempt)),
        }
    }
}

/// Runs every request with at most `max_in_flight` outstanding. Results come
/// back in input order; a failing slot does not abort the others unless
/// `fail_fast` is set.
pub fn complete_batch<B: ChatBackend + ?Sized>(
    reqs: &[LlmRequest],
    backend: &B,
    policy: &ConcurrencyPolicy,
) -> Vec<Result<LlmResponse, LlmError>> {
    let workers = policy.max_in_flight.max(1).min(reqs.len());
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<Result<LlmResponse, LlmError>>>> = reqs.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= reqs.len() {
                    break;
                }
                let result = if policy.fail_fast && failed.load(Ordering::SeqCst) {
                    Err(LlmError::Cancelled)
                } else {
                    complete(&reqs[i], backend, &policy.retry)
                };
                if result.is_err() {
                    failed.store(true, Ordering::SeqCst);
                }
                *slots[i].lock().unwrap_or_else(|p| p.into_inner()) = Some(result);
            });
        }
    });

    slots
        .into_iter()
        .map(|m| {
            m.into_inner()
                .unwrap_or_else(|p| p.into_inner())
                .unwrap_or(Err(LlmError::Cancelled))
        })
        .collect()
}
