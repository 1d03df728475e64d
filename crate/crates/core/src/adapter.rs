//! Line-delimited JSON protocol for external scorers and detectors.
//!
//! Requests carry `"v":1` and an `"op"` tag; responses carry `"v":1` and
//! either the operation's payload or an `"error"` string. The same bodies
//! travel over a child process's stdin/stdout (one JSON document per line)
//! or as HTTP POSTs to `<base>/<op>`. Field names are documented in
//! `docs/protocol.md`.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::attribute::{BinaryLabel, Detection, DetectorClient};
use crate::error::{Error, Result, ScorerError};
use crate::scorer::{
    CausalScorer, FillCandidate, MaskedPredictor, Paraphraser, SurprisalSequence, TokenSurprisal,
};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    Surprisals {
        text: String,
    },
    Logprob {
        prefix: String,
        word: String,
    },
    Fills {
        tokens: Vec<String>,
        mask_index: usize,
        k: usize,
    },
    Paraphrases {
        sentence: String,
        n: usize,
        diversity_penalty: f64,
    },
    Classify {
        text: String,
    },
}

impl Request {
    pub fn op(&self) -> &'static str {
        match self {
            Request::Surprisals { .. } => "surprisals",
            Request::Logprob { .. } => "logprob",
            Request::Fills { .. } => "fills",
            Request::Paraphrases { .. } => "paraphrases",
            Request::Classify { .. } => "classify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub v: u32,
    #[serde(flatten)]
    pub request: Request,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub v: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<TokenSurprisal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logprob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<FillCandidate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paraphrases: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<BinaryLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

impl Response {
    fn ok() -> Self {
        Response {
            v: PROTOCOL_VERSION,
            ..Default::default()
        }
    }

    fn failure(msg: impl Into<String>) -> Self {
        Response {
            v: PROTOCOL_VERSION,
            error: Some(msg.into()),
            ..Default::default()
        }
    }
}

/// Moves one request to an endpoint and brings back its response.
pub trait Transport: Send + Sync {
    fn call(&self, envelope: &Envelope) -> std::result::Result<Response, ScorerError>;
}

struct StdioConn {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Child process speaking the protocol on stdin/stdout. Requests on one
/// connection are serialized.
pub struct StdioTransport {
    conn: Mutex<StdioConn>,
}

impl StdioTransport {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ScorerError::Transport(format!("cannot spawn {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(StdioTransport {
            conn: Mutex::new(StdioConn {
                child,
                stdin,
                stdout,
            }),
        })
    }
}

impl Transport for StdioTransport {
    fn call(&self, envelope: &Envelope) -> std::result::Result<Response, ScorerError> {
        let line = serde_json::to_string(envelope).map_err(|e| ScorerError::Protocol(e.to_string()))?;
        let mut conn = self
            .conn
            .lock()
            .map_err(|_| ScorerError::Transport("connection poisoned".into()))?;
        let transport = |e: io::Error| ScorerError::Transport(e.to_string());
        conn.stdin.write_all(line.as_bytes()).map_err(transport)?;
        conn.stdin.write_all(b"\n").map_err(transport)?;
        conn.stdin.flush().map_err(transport)?;
        let mut reply = String::new();
        let n = conn.stdout.read_line(&mut reply).map_err(transport)?;
        if n == 0 {
            return Err(ScorerError::Transport("endpoint closed its output".into()));
        }
        parse_response(&reply)
    }
}

impl Drop for StdioTransport {
    fn drop(&mut self) {
        if let Ok(conn) = self.conn.get_mut() {
            let _ = conn.child.kill();
            let _ = conn.child.wait();
        }
    }
}

/// HTTP endpoint: each request is POSTed to `<base>/<op>`.
pub struct HttpTransport {
    base: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(base: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        HttpTransport {
            base: base.trim_end_matches('/').to_string(),
            agent,
        }
    }
}

impl Transport for HttpTransport {
    fn call(&self, envelope: &Envelope) -> std::result::Result<Response, ScorerError> {
        let url = format!("{}/{}", self.base, envelope.request.op());
        let body = serde_json::to_string(envelope).map_err(|e| ScorerError::Protocol(e.to_string()))?;
        let mut resp = self
            .agent
            .post(&url)
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        match status {
            200..=299 => parse_response(&text),
            500..=599 => Err(ScorerError::Transport(format!("HTTP {status}"))),
            _ => Err(ScorerError::Protocol(format!("HTTP {status}: {}", text.trim()))),
        }
    }
}

fn parse_response(raw: &str) -> std::result::Result<Response, ScorerError> {
    let resp: Response = serde_json::from_str(raw.trim())
        .map_err(|e| ScorerError::Protocol(format!("bad response: {e}")))?;
    if resp.v != PROTOCOL_VERSION {
        return Err(ScorerError::Protocol(format!("unsupported protocol version {}", resp.v)));
    }
    if let Some(err) = resp.error {
        return Err(ScorerError::Protocol(err));
    }
    Ok(resp)
}

/// Endpoint spec: `stdio:<program> [args...]` or an `http(s)://` base URL.
pub fn connect(spec: &str) -> Result<Box<dyn Transport>> {
    if let Some(cmd) = spec.strip_prefix("stdio:") {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::Config(format!("empty stdio command in {spec:?}")))?;
        let args: Vec<String> = parts.collect();
        Ok(Box::new(StdioTransport::spawn(&program, &args)?))
    } else if spec.starts_with("http://") || spec.starts_with("https://") {
        Ok(Box::new(HttpTransport::new(spec, Duration::from_secs(120))))
    } else {
        Err(Error::Config(format!("unrecognised endpoint {spec:?}")))
    }
}

/// Client side of the protocol; implements every model interface and
/// the detector interface on top of one transport.
pub struct AdapterClient {
    name: String,
    transport: Box<dyn Transport>,
}

impl AdapterClient {
    pub fn new(name: impl Into<String>, transport: Box<dyn Transport>) -> Self {
        AdapterClient {
            name: name.into(),
            transport,
        }
    }

    pub fn connect(name: impl Into<String>, spec: &str) -> Result<Self> {
        Ok(Self::new(name, connect(spec)?))
    }

    fn call(&self, request: Request) -> std::result::Result<Response, ScorerError> {
        self.transport.call(&Envelope {
            v: PROTOCOL_VERSION,
            request,
        })
    }
}

fn missing(field: &str) -> ScorerError {
    ScorerError::Protocol(format!("response lacks {field:?}"))
}

impl CausalScorer for AdapterClient {
    fn surprisals(&self, text: &str) -> Result<SurprisalSequence> {
        let resp = self.call(Request::Surprisals { text: text.into() })?;
        Ok(SurprisalSequence(resp.tokens.ok_or_else(|| missing("tokens"))?))
    }

    fn word_logprob(&self, prefix: &str, word: &str) -> Result<f64> {
        let resp = self.call(Request::Logprob {
            prefix: prefix.into(),
            word: word.into(),
        })?;
        Ok(resp.logprob.ok_or_else(|| missing("logprob"))?)
    }
}

impl MaskedPredictor for AdapterClient {
    fn fills(&self, tokens: &[String], mask_index: usize, k: usize) -> Result<Vec<FillCandidate>> {
        let resp = self.call(Request::Fills {
            tokens: tokens.to_vec(),
            mask_index,
            k,
        })?;
        Ok(resp.candidates.ok_or_else(|| missing("candidates"))?)
    }
}

impl Paraphraser for AdapterClient {
    fn paraphrases(&self, sentence: &str, n: usize, diversity_penalty: f64) -> Result<Vec<String>> {
        let resp = self.call(Request::Paraphrases {
            sentence: sentence.into(),
            n,
            diversity_penalty,
        })?;
        Ok(resp.paraphrases.ok_or_else(|| missing("paraphrases"))?)
    }
}

impl DetectorClient for AdapterClient {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, text: &str) -> std::result::Result<Detection, ScorerError> {
        let resp = self.call(Request::Classify { text: text.into() })?;
        let probability = resp.probability.ok_or_else(|| missing("probability"))?;
        Ok(Detection { probability })
    }
}

/// Models served by [`serve`]; absent ones answer with an error.
#[derive(Default, Clone, Copy)]
pub struct Backend<'a> {
    pub scorer: Option<&'a dyn CausalScorer>,
    pub predictor: Option<&'a dyn MaskedPredictor>,
    pub paraphraser: Option<&'a dyn Paraphraser>,
    pub detector: Option<&'a dyn DetectorClient>,
}

impl Backend<'_> {
    pub fn handle(&self, envelope: Envelope) -> Response {
        if envelope.v != PROTOCOL_VERSION {
            return Response::failure(format!("unsupported protocol version {}", envelope.v));
        }
        let unavailable = |op: &str| Response::failure(format!("operation {op:?} not served"));
        match envelope.request {
            Request::Surprisals { text } => match self.scorer {
                Some(s) => match s.surprisals(&text) {
                    Ok(seq) => Response {
                        tokens: Some(seq.0),
                        ..Response::ok()
                    },
                    Err(e) => Response::failure(e.to_string()),
                },
                None => unavailable("surprisals"),
            },
            Request::Logprob { prefix, word } => match self.scorer {
                Some(s) => match s.word_logprob(&prefix, &word) {
                    Ok(lp) => Response {
                        logprob: Some(lp),
                        ..Response::ok()
                    },
                    Err(e) => Response::failure(e.to_string()),
                },
                None => unavailable("logprob"),
            },
            Request::Fills {
                tokens,
                mask_index,
                k,
            } => match self.predictor {
                Some(p) => match p.fills(&tokens, mask_index, k) {
                    Ok(c) => Response {
                        candidates: Some(c),
                        ..Response::ok()
                    },
                    Err(e) => Response::failure(e.to_string()),
                },
                None => unavailable("fills"),
            },
            Request::Paraphrases {
                sentence,
                n,
                diversity_penalty,
            } => match self.paraphraser {
                Some(p) => match p.paraphrases(&sentence, n, diversity_penalty) {
                    Ok(v) => Response {
                        paraphrases: Some(v),
                        ..Response::ok()
                    },
                    Err(e) => Response::failure(e.to_string()),
                },
                None => unavailable("paraphrases"),
            },
            Request::Classify { text } => match self.detector {
                Some(d) => match d.detect(&text) {
                    Ok(det) => Response {
                        label: Some(BinaryLabel::from_probability(det.probability)),
                        probability: Some(det.probability),
                        ..Response::ok()
                    },
                    Err(e) => Response::failure(e.to_string()),
                },
                None => unavailable("classify"),
            },
        }
    }
}

/// Serve requests line by line until `input` is exhausted.
pub fn serve<R: BufRead, W: Write>(input: R, mut output: W, backend: &Backend<'_>) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        output.write_all(handle_line(backend, &line).as_bytes())?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

/// In-process transport that runs [`Backend::handle`] on the serialized
/// request, so the full encode/decode path is exercised without a process.
pub struct LoopbackTransport<F>
where
    F: Fn(&str) -> String + Send + Sync,
{
    handler: F,
}

impl<F> LoopbackTransport<F>
where
    F: Fn(&str) -> String + Send + Sync,
{
    pub fn new(handler: F) -> Self {
        LoopbackTransport { handler }
    }
}

impl<F> Transport for LoopbackTransport<F>
where
    F: Fn(&str) -> String + Send + Sync,
{
    fn call(&self, envelope: &Envelope) -> std::result::Result<Response, ScorerError> {
        let line = serde_json::to_string(envelope).map_err(|e| ScorerError::Protocol(e.to_string()))?;
        parse_response(&(self.handler)(&line))
    }
}

/// Answer one serialized request line with `backend`.
pub fn handle_line(backend: &Backend<'_>, line: &str) -> String {
    let response = match serde_json::from_str::<Envelope>(line) {
        Ok(env) => backend.handle(env),
        Err(e) => Response::failure(format!("bad request: {e}")),
    };
    serde_json::to_string(&response).expect("response serializes")
}
