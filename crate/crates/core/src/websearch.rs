//! Search-API client that turns questions into result sets: cached on disk, rate limited,
//! retried with exponential backoff, and pluggable behind [`SearchBackend`].
//!
//! The HTTP backend expects a JSON response of the form
//!
//! ```text
//! {"organic_results": [{"position": 1, "title": "...", "snippet": "..."}, ...], ...}
//! ```
//!
//! Every other top-level key (answer boxes, knowledge panels, ads) is ignored.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{write_atomic, CompositionalityTag, Example, ResultSet, Snippet, MAX_SNIPPETS};
use crate::error::{Error, Result};

/// Environment variable holding the search API key.
pub const API_KEY_ENV: &str = "WEBQA_SEARCH_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("http error: {0}")]
    Http(String),
    #[error("authentication rejected (status {0})")]
    Auth(u16),
    #[error("search quota exceeded")]
    Quota,
    #[error("unparseable search response: {0}")]
    Parse(String),
    #[error("search cache {path}: {message}")]
    Cache { path: PathBuf, message: String },
    #[error("no API key: set {API_KEY_ENV}")]
    MissingKey,
}

impl SearchError {
    fn retryable(&self) -> bool {
        matches!(self, SearchError::Http(_))
    }
}

fn default_results() -> u32 {
    100
}
fn default_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_concurrency() -> usize {
    4
}
fn default_timeout_s() -> u64 {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub endpoint: String,
    /// Never read from the config file.
    #[serde(skip)]
    pub api_key: Option<String>,
    #[serde(default = "default_results")]
    pub results_per_query: u32,
    /// Queries per second.
    pub rate_limit: f64,
    pub cache_dir: PathBuf,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: u64,
}

impl SearchConfig {
    pub fn new(
        endpoint: impl Into<String>,
        rate_limit: f64,
        cache_dir: impl Into<PathBuf>,
    ) -> Self {
        SearchConfig {
            endpoint: endpoint.into(),
            api_key: None,
            results_per_query: default_results(),
            rate_limit,
            cache_dir: cache_dir.into(),
            max_retries: default_retries(),
            backoff_ms: default_backoff_ms(),
            concurrency: default_concurrency(),
            timeout_s: default_timeout_s(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_SNIPPETS as u32).contains(&self.results_per_query) {
            return Err(Error::Config(format!(
                "results_per_query must lie in [1, {MAX_SNIPPETS}], got {}",
                self.results_per_query
            )));
        }
        if !(self.rate_limit.is_finite() && self.rate_limit > 0.0) {
            return Err(Error::Config(format!(
                "rate_limit must be > 0, got {}",
                self.rate_limit
            )));
        }
        if self.concurrency == 0 {
            return Err(Error::Config("concurrency must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses a TOML config; the API key is taken from the environment.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut config: SearchConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// One organic result in engine order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResult {
    pub title: String,
    pub body: String,
}

pub trait SearchBackend: Send + Sync {
    fn search(&self, query: &str, count: u32) -> std::result::Result<Vec<RawResult>, SearchError>;
}

/// Monotonic time source, swappable for tests.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep_until(&self, deadline: Duration);
}

pub struct SystemClock {
    start: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            start: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.start.elapsed()
    }

    fn sleep_until(&self, deadline: Duration) {
        let now = self.now();
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
    }
}

/// Clock that only moves when slept on.
#[derive(Default)]
pub struct MockClock {
    now: Mutex<Duration>,
}

impl Clock for MockClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep_until(&self, deadline: Duration) {
        let mut now = self.now.lock().unwrap();
        *now = (*now).max(deadline);
    }
}

/// Spaces requests at least `1 / rate` seconds apart.
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Duration>,
}

impl RateLimiter {
    pub fn new(rate: f64) -> Self {
        RateLimiter {
            interval: Duration::from_nanos((1e9 / rate).ceil() as u64),
            next: Mutex::new(Duration::ZERO),
        }
    }

    /// Blocks until a slot is free and returns the slot time.
    pub fn acquire(&self, clock: &dyn Clock) -> Duration {
        let slot = {
            let mut next = self.next.lock().unwrap();
            let slot = (*next).max(clock.now());
            *next = slot + self.interval;
            slot
        };
        clock.sleep_until(slot);
        slot
    }
}

#[derive(Deserialize)]
struct ApiResponse {
    #[serde(default)]
    organic_results: Vec<ApiResult>,
}

#[derive(Deserialize)]
struct ApiResult {
    #[serde(default)]
    position: Option<u32>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    snippet: String,
}

/// Parses an engine response into organic results ordered by position.
pub fn parse_response(body: &str) -> std::result::Result<Vec<RawResult>, SearchError> {
    let parsed: ApiResponse =
        serde_json::from_str(body).map_err(|e| SearchError::Parse(e.to_string()))?;
    let mut results: Vec<(usize, ApiResult)> =
        parsed.organic_results.into_iter().enumerate().collect();
    results.sort_by_key(|(i, r)| (r.position.unwrap_or(u32::MAX), *i));
    Ok(results
        .into_iter()
        .map(|(_, r)| RawResult {
            title: strip_html(&r.title),
            body: strip_html(&r.snippet),
        })
        .collect())
}

/// Drops tags and decodes the common character entities.
pub fn strip_html(text: &str) -> String {
    let mut plain = String::with_capacity(text.len());
    let mut in_tag = false;
    for c in text.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => plain.push(c),
            _ => {}
        }
    }
    decode_entities(&plain)
}

fn decode_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let decoded = tail.find(';').filter(|&end| end <= 10).and_then(|end| {
            let name = &tail[1..end];
            let c = match name {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                "ndash" => Some('\u{2013}'),
                "mdash" => Some('\u{2014}'),
                "hellip" => Some('\u{2026}'),
                "lsquo" => Some('\u{2018}'),
                "rsquo" => Some('\u{2019}'),
                "ldquo" => Some('\u{201c}'),
                "rdquo" => Some('\u{201d}'),
                _ => name
                    .strip_prefix("#x")
                    .or_else(|| name.strip_prefix("#X"))
                    .and_then(|h| u32::from_str_radix(h, 16).ok())
                    .or_else(|| name.strip_prefix('#').and_then(|d| d.parse().ok()))
                    .and_then(char::from_u32),
            };
            c.map(|c| (c, end))
        });
        match decoded {
            Some((c, end)) => {
                out.push(c);
                rest = &tail[end + 1..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Search API over HTTP GET with `q`, `num` and `api_key` query parameters.
pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
}

impl HttpBackend {
    pub fn new(config: &SearchConfig) -> std::result::Result<Self, SearchError> {
        let api_key = config.api_key.clone().ok_or(SearchError::MissingKey)?;
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_s)))
            .build()
            .new_agent();
        Ok(HttpBackend {
            agent,
            endpoint: config.endpoint.clone(),
            api_key,
        })
    }
}

impl SearchBackend for HttpBackend {
    fn search(&self, query: &str, count: u32) -> std::result::Result<Vec<RawResult>, SearchError> {
        let mut response = self
            .agent
            .get(&self.endpoint)
            .query("q", query)
            .query("num", count.to_string())
            .query("api_key", &self.api_key)
            .call()
            .map_err(|e| SearchError::Http(e.to_string()))?;
        let status = response.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(SearchError::Auth(status)),
            429 => return Err(SearchError::Quota),
            _ => return Err(SearchError::Http(format!("status {status}"))),
        }
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| SearchError::Http(e.to_string()))?;
        parse_response(&body)
    }
}

/// In-memory backend keyed by normalized question.
#[derive(Default)]
pub struct MockBackend {
    results: HashMap<String, Vec<RawResult>>,
    failures: Mutex<HashMap<String, VecDeque<SearchError>>>,
    calls: AtomicUsize,
    call_times: Mutex<Vec<Duration>>,
    clock: Option<Arc<dyn Clock>>,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the clock time of every call.
    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = Some(clock);
        self
    }

    pub fn insert(&mut self, question: &str, results: Vec<RawResult>) {
        self.results.insert(normalize_question(question), results);
    }

    /// Queues an error returned before any results for `question`.
    pub fn fail_next(&self, question: &str, error: SearchError) {
        self.failures
            .lock()
            .unwrap()
            .entry(normalize_question(question))
            .or_default()
            .push_back(error);
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn call_times(&self) -> Vec<Duration> {
        self.call_times.lock().unwrap().clone()
    }
}

impl SearchBackend for MockBackend {
    fn search(&self, query: &str, count: u32) -> std::result::Result<Vec<RawResult>, SearchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(clock) = &self.clock {
            self.call_times.lock().unwrap().push(clock.now());
        }
        let key = normalize_question(query);
        if let Some(err) = self
            .failures
            .lock()
            .unwrap()
            .get_mut(&key)
            .and_then(|q| q.pop_front())
        {
            return Err(err);
        }
        let mut results = self
            .results
            .get(&key)
            .cloned()
            .ok_or_else(|| SearchError::Http(format!("no mock results for `{query}`")))?;
        results.truncate(count as usize);
        Ok(results)
    }
}

/// Lowercased, whitespace-collapsed question text.
pub fn normalize_question(question: &str) -> String {
    question
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

pub fn cache_path(cache_dir: &Path, question: &str) -> PathBuf {
    let digest = Sha256::digest(normalize_question(question).as_bytes());
    cache_dir.join(format!("{}.json", hex::encode(digest)))
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    question: String,
    snippets: ResultSet,
}

/// Fetch pipeline shared by all workers: backend, limiter, clock and retry policy.
pub struct Searcher<'a> {
    pub backend: &'a dyn SearchBackend,
    pub config: &'a SearchConfig,
    pub clock: &'a dyn Clock,
    pub limiter: &'a RateLimiter,
}

/// How a result set was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Cache,
    Network,
}

impl Searcher<'_> {
    /// Cache-first fetch of one result set.
    pub fn fetch(&self, question: &str) -> std::result::Result<(ResultSet, Source), SearchError> {
        let path = cache_path(&self.config.cache_dir, question);
        let cache_err = |message: String| SearchError::Cache {
            path: path.clone(),
            message,
        };
        if let Ok(bytes) = fs::read(&path) {
            return Ok((decode_cache(&bytes).map_err(cache_err)?, Source::Cache));
        }
        let raw = self.search_with_retries(question)?;
        let snippets = raw
            .into_iter()
            .take(self.config.results_per_query as usize)
            .zip(1..)
            .map(|(r, rank)| Snippet {
                title: r.title,
                body: r.body,
                rank,
            })
            .collect();
        let set = ResultSet::new(snippets).map_err(SearchError::Parse)?;
        let entry = CacheEntry {
            question: normalize_question(question),
            snippets: set,
        };
        let bytes = serde_json::to_vec(&entry).expect("cache entries serialize");
        fs::create_dir_all(&self.config.cache_dir).map_err(|e| cache_err(e.to_string()))?;
        write_atomic(&path, |w| w.write_all(&bytes)).map_err(|e| cache_err(e.to_string()))?;
        Ok((decode_cache(&bytes).map_err(cache_err)?, Source::Network))
    }

    fn search_with_retries(
        &self,
        question: &str,
    ) -> std::result::Result<Vec<RawResult>, SearchError> {
        let mut attempt = 0;
        loop {
            self.limiter.acquire(self.clock);
            match self.backend.search(question, self.config.results_per_query) {
                Err(e) if e.retryable() && attempt < self.config.max_retries => {
                    let delay = Duration::from_millis(self.config.backoff_ms << attempt.min(16));
                    log::warn!("search failed ({e}); retrying in {delay:?}");
                    self.clock.sleep_until(self.clock.now() + delay);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

fn decode_cache(bytes: &[u8]) -> std::result::Result<ResultSet, String> {
    serde_json::from_slice::<CacheEntry>(bytes)
        .map(|e| e.snippets)
        .map_err(|e| e.to_string())
}

/// Fetches one result set with a fresh limiter and the system clock.
pub fn fetch_result_set(
    question: &str,
    config: &SearchConfig,
    backend: &dyn SearchBackend,
) -> Result<ResultSet> {
    config.validate()?;
    let searcher = Searcher {
        backend,
        config,
        clock: &SystemClock::default(),
        limiter: &RateLimiter::new(config.rate_limit),
    };
    Ok(searcher.fetch(question)?.0)
}

/// Input line for dataset construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<Vec<CompositionalityTag>>,
}

pub fn load_questions(path: impl AsRef<Path>) -> Result<Vec<QuestionRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Record {
                line: i + 1,
                field: "<record>".into(),
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct BuildReport {
    pub examples: Vec<Example>,
    pub failures: Vec<(String, String)>,
    pub network_fetches: usize,
    pub cache_hits: usize,
}

type FetchOutcome = std::result::Result<(ResultSet, Source), SearchError>;

/// Fetches every question with bounded concurrency, in input order. Failures are
/// recorded and skipped; successful fetches are cached, so a re-run resumes.
pub fn build_dataset(
    questions: &[QuestionRecord],
    backend: &dyn SearchBackend,
    config: &SearchConfig,
    clock: &dyn Clock,
) -> Result<BuildReport> {
    config.validate()?;
    let limiter = RateLimiter::new(config.rate_limit);
    let searcher = Searcher {
        backend,
        config,
        clock,
        limiter: &limiter,
    };
    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<FetchOutcome>>> =
        questions.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..config.concurrency.min(questions.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(q) = questions.get(i) else { break };
                let outcome = searcher.fetch(&q.question);
                *slots[i].lock().unwrap() = Some(outcome);
                let n = done.fetch_add(1, Ordering::SeqCst) + 1;
                if n.is_multiple_of(50) || n == questions.len() {
                    log::info!("fetched {n}/{}", questions.len());
                }
            });
        }
    });
    let mut report = BuildReport::default();
    for (q, slot) in questions.iter().zip(slots) {
        match slot.into_inner().unwrap().expect("every slot is filled") {
            Ok((result_set, source)) => {
                match source {
                    Source::Cache => report.cache_hits += 1,
                    Source::Network => report.network_fetches += 1,
                }
                report.examples.push(Example {
                    id: q.id.clone(),
                    question: q.question.clone(),
                    gold_answers: q.answers.clone(),
                    result_set,
                    tags: q.tags.as_ref().map(|t| t.iter().copied().collect()),
                });
            }
            Err(e) => {
                log::warn!("{}: {e}", q.id);
                report.failures.push((q.id.clone(), e.to_string()));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(n: usize) -> Vec<RawResult> {
        (1..=n)
            .map(|i| RawResult {
                title: format!("t{i}"),
                body: format!("b{i}"),
            })
            .collect()
    }

    fn config(dir: &Path) -> SearchConfig {
        SearchConfig {
            backoff_ms: 10,
            ..SearchConfig::new("http://unused", 1000.0, dir)
        }
    }

    fn question(id: &str, q: &str) -> QuestionRecord {
        QuestionRecord {
            id: id.into(),
            question: q.into(),
            answers: vec!["x".into()],
            tags: None,
        }
    }

    #[test]
    fn config_from_toml() {
        let c = SearchConfig::from_toml(
            "endpoint = \"http://x\"\nrate_limit = 2.0\ncache_dir = \"c\"\n",
        )
        .unwrap();
        assert_eq!(c.results_per_query, 100);
        assert_eq!(c.concurrency, 4);
        assert!(SearchConfig::from_toml(
            "endpoint = \"x\"\nrate_limit = 2.0\ncache_dir = \"c\"\napi_key = \"k\"\n"
        )
        .is_err());
        assert!(
            SearchConfig::from_toml("endpoint = \"x\"\nrate_limit = 0.0\ncache_dir = \"c\"\n")
                .is_err()
        );
        assert!(SearchConfig::from_toml(
            "endpoint = \"x\"\nrate_limit = 1.0\ncache_dir = \"c\"\nresults_per_query = 101\n"
        )
        .is_err());
    }

    #[test]
    fn html_stripping() {
        assert_eq!(
            strip_html("<b>Frank</b> Vincent &amp; co&#39;s"),
            "Frank Vincent & co's"
        );
        assert_eq!(strip_html("AT&T &bogus; &#x41;"), "AT&T &bogus; A");
    }

    #[test]
    fn organic_results_only() {
        let body = r#"{"answer_box": {"answer": "boxed"},
            "organic_results": [{"position": 2, "title": "B", "snippet": "two"},
                                {"position": 1, "title": "A", "snippet": "<em>one</em>"}]}"#;
        let r = parse_response(body).unwrap();
        assert_eq!(
            r,
            vec![
                RawResult {
                    title: "A".into(),
                    body: "one".into()
                },
                RawResult {
                    title: "B".into(),
                    body: "two".into()
                },
            ]
        );
        assert!(matches!(parse_response("nope"), Err(SearchError::Parse(_))));
    }

    #[test]
    fn partial_results_ranked() {
        let dir = tempfile::tempdir().unwrap();
        let mut backend = MockBackend::new();
        backend.insert("q", raw(40));
        let set = fetch_result_set("q", &config(dir.path()), &backend).unwrap();
        assert_eq!(set.len(), 40);
        assert_eq!(
            set.snippets().iter().map(|s| s.rank).collect::<Vec<_>>(),
            (1..=40).collect::<Vec<_>>()
        );
    }

    #[test]
    fn cache_is_byte_identical_and_skips_network() {
        let dir = tempfile::tempdir().unwrap();
        let mut backend = MockBackend::new();
        backend.insert("Who played X?", raw(3));
        let c = config(dir.path());
        let first = fetch_result_set("Who played X?", &c, &backend).unwrap();
        let path = cache_path(dir.path(), "who  played x?");
        let bytes = fs::read(&path).unwrap();
        let second = fetch_result_set("who played x?", &c, &backend).unwrap();
        assert_eq!(first, second);
        assert_eq!(backend.calls(), 1);
        assert_eq!(fs::read(&path).unwrap(), bytes);
    }

    #[test]
    fn retries_then_succeeds() {
        let dir = tempfile::tempdir().unwrap();
        let mut backend = MockBackend::new();
        backend.insert("q", raw(2));
        backend.fail_next("q", SearchError::Http("503".into()));
        backend.fail_next("q", SearchError::Http("503".into()));
        let clock = MockClock::default();
        let c = config(dir.path());
        let limiter = RateLimiter::new(c.rate_limit);
        let s = Searcher {
            backend: &backend,
            config: &c,
            clock: &clock,
            limiter: &limiter,
        };
        assert_eq!(s.fetch("q").unwrap().0.len(), 2);
        assert_eq!(backend.calls(), 3);
        assert!(clock.now() >= Duration::from_millis(30));
    }

    #[test]
    fn retries_are_bounded_and_typed() {
        let dir = tempfile::tempdir().unwrap();
        let backend = MockBackend::new();
        for _ in 0..10 {
            backend.fail_next("q", SearchError::Http("500".into()));
        }
        backend.fail_next("auth", SearchError::Auth(401));
        backend.fail_next("quota", SearchError::Quota);
        let clock = MockClock::default();
        let c = config(dir.path());
        let limiter = RateLimiter::new(c.rate_limit);
        let s = Searcher {
            backend: &backend,
            config: &c,
            clock: &clock,
            limiter: &limiter,
        };
        assert!(matches!(s.fetch("q"), Err(SearchError::Http(_))));
        assert_eq!(backend.calls(), 4);
        assert!(matches!(s.fetch("auth"), Err(SearchError::Auth(401))));
        assert!(matches!(s.fetch("quota"), Err(SearchError::Quota)));
        assert_eq!(backend.calls(), 6);
    }

    #[test]
    fn rate_limit_holds_in_every_window() {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(MockClock::default());
        let mut backend = MockBackend::new().with_clock(clock.clone());
        let questions: Vec<QuestionRecord> = (0..25)
            .map(|i| question(&i.to_string(), &format!("q{i}")))
            .collect();
        for q in &questions {
            backend.insert(&q.question, raw(1));
        }
        let c = SearchConfig {
            concurrency: 1,
            ..SearchConfig::new("x", 3.0, dir.path())
        };
        build_dataset(&questions, &backend, &c, clock.as_ref()).unwrap();
        let times = backend.call_times();
        assert_eq!(times.len(), 25);
        for (i, &t) in times.iter().enumerate() {
            let in_window = times[i..]
                .iter()
                .filter(|&&u| u < t + Duration::from_secs(1))
                .count();
            assert!(
                in_window <= 3,
                "{in_window} calls in the window starting at {t:?}"
            );
        }
    }

    #[test]
    fn resume_skips_cached_questions() {
        let dir = tempfile::tempdir().unwrap();
        let mut backend = MockBackend::new();
        let qs = [
            question("1", "a?"),
            question("2", "b?"),
            question("3", "c?"),
        ];
        for q in &qs {
            backend.insert(&q.question, raw(2));
        }
        let c = config(dir.path());
        fetch_result_set("b?", &c, &backend).unwrap();
        let before = backend.calls();
        let report = build_dataset(&qs, &backend, &c, &MockClock::default()).unwrap();
        assert_eq!(backend.calls() - before, 2);
        assert_eq!((report.network_fetches, report.cache_hits), (2, 1));
        assert_eq!(
            report
                .examples
                .iter()
                .map(|e| e.id.as_str())
                .collect::<Vec<_>>(),
            ["1", "2", "3"]
        );
    }

    #[test]
    fn failures_recorded_and_run_continues() {
        let dir = tempfile::tempdir().unwrap();
        let mut backend = MockBackend::new();
        backend.insert("a?", raw(1));
        backend.fail_next("b?", SearchError::Quota);
        backend.insert("b?", raw(1));
        let qs = [question("1", "a?"), question("2", "b?")];
        let c = config(dir.path());
        let report = build_dataset(&qs, &backend, &c, &MockClock::default()).unwrap();
        assert_eq!(report.examples.len(), 1);
        assert_eq!(report.failures[0].0, "2");
        let rerun = build_dataset(&qs, &backend, &c, &MockClock::default()).unwrap();
        assert_eq!(rerun.examples.len(), 2);
        assert!(rerun.failures.is_empty());
    }
}
