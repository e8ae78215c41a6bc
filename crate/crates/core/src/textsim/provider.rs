//! Sources of captions, sentence embeddings and class probabilities.
//!
//! Three interchangeable back ends implement [`ModelProvider`]:
//! a deterministic in-process stub, a directory of cached outputs, and an
//! HTTP client for the model service (`/caption`, `/embed`, `/class_probs`).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::bow::tokenize;
use crate::error::{Error, Result};
use crate::features::ClassProbs;
use crate::media::{encode_png, FrameSequence, RgbFrame};

pub const STUB_EMBED_DIM: usize = 64;
pub const STUB_CLASSES: usize = 1000;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

/// Neural-model outputs consumed by the toolkit.
pub trait ModelProvider: Send + Sync {
    /// One caption per frame, in frame order.
    fn caption(&self, video: &FrameSequence) -> Result<Vec<String>>;
    /// One embedding per text, in input order.
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>>;
    fn class_probs(&self, video: &FrameSequence) -> Result<ClassProbs>;
}

/// `stub`, `file:<dir>` or `http:<url>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Stub,
    File(PathBuf),
    Http(String),
}

impl FromStr for ProviderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "stub" {
            Ok(ProviderSpec::Stub)
        } else if let Some(dir) = s.strip_prefix("file:") {
            Ok(ProviderSpec::File(PathBuf::from(dir)))
        } else if let Some(url) = s.strip_prefix("http:") {
            // Accept both `http:host:port` and `http:http://host:port`.
            let url = if url.starts_with("http://") || url.starts_with("https://") {
                url.to_string()
            } else {
                format!("http:{url}")
            };
            let url = if url.starts_with("http://") || url.starts_with("https://") {
                url
            } else {
                format!(
                    "http://{}",
                    url.trim_start_matches("http:").trim_start_matches('/')
                )
            };
            Ok(ProviderSpec::Http(url.trim_end_matches('/').to_string()))
        } else {
            Err(Error::InvalidConfig(format!(
                "provider must be stub, file:<dir> or http:<url>, got {s:?}"
            )))
        }
    }
}

impl ProviderSpec {
    pub fn build(&self, seed: u64, max_in_flight: usize) -> Box<dyn ModelProvider> {
        match self {
            ProviderSpec::Stub => Box::new(StubProvider::new(seed)),
            ProviderSpec::File(dir) => Box::new(FileProvider::new(dir)),
            ProviderSpec::Http(url) => Box::new(HttpProvider::new(url, max_in_flight)),
        }
    }
}

fn sha256(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

/// `n` values in [-1, 1) expanded from a keyed hash.
fn hash_stream(key: &[u8], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut counter = 0u32;
    while out.len() < n {
        let block = sha256(&[key, &counter.to_le_bytes()]);
        for chunk in block.chunks_exact(4) {
            if out.len() == n {
                break;
            }
            let v = u32::from_le_bytes(chunk.try_into().expect("4 bytes"));
            out.push(v as f64 / 2_147_483_648.0 - 1.0);
        }
        counter += 1;
    }
    out
}

fn frame_digest(frame: &RgbFrame) -> [u8; 32] {
    let dims = [frame.width() as u64, frame.height() as u64];
    let mut dim_bytes = Vec::with_capacity(16);
    for d in dims {
        dim_bytes.extend_from_slice(&d.to_le_bytes());
    }
    sha256(&[&dim_bytes, &frame.as_bytes()])
}

const STUB_PHRASES: &[&str] = &[
    "a dog running on the grass",
    "a cat sitting on a window sill",
    "a red car driving down a street",
    "a person walking on the beach",
    "a hot air balloon in the sky",
    "a bowl of fruit on a table",
    "a city skyline at night",
    "a blurry image of a room",
    "a close up of a flower",
    "a painting of a mountain landscape",
    "a group of people standing together",
    "an abstract pattern of colors",
    "a bird flying over the ocean",
    "a horse standing in a field",
    "a sunset over the water",
    "a dark image with some lights",
];

/// Deterministic stand-in for the neural models; outputs depend only on input bytes and the seed.
#[derive(Debug, Clone)]
pub struct StubProvider {
    seed: u64,
}

impl StubProvider {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn caption_frame(&self, frame: &RgbFrame) -> String {
        let d = sha256(&[&self.seed.to_le_bytes(), &frame_digest(frame)]);
        let idx =
            u64::from_le_bytes(d[..8].try_into().expect("8 bytes")) as usize % STUB_PHRASES.len();
        STUB_PHRASES[idx].to_string()
    }

    /// Sum of per-token hash projections, so equal token multisets embed identically.
    pub fn embed_text(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; STUB_EMBED_DIM];
        for tok in tokenize(text) {
            let key = [self.seed.to_le_bytes().as_slice(), tok.as_bytes()].concat();
            for (acc, x) in v.iter_mut().zip(hash_stream(&key, STUB_EMBED_DIM)) {
                *acc += x;
            }
        }
        v
    }

    pub fn frame_probs(&self, frame: &RgbFrame) -> Vec<f64> {
        let key = [self.seed.to_le_bytes().as_slice(), &frame_digest(frame)].concat();
        let logits: Vec<f64> = hash_stream(&key, STUB_CLASSES)
            .iter()
            .map(|x| 4.0 * x)
            .collect();
        softmax(&logits)
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

impl ModelProvider for StubProvider {
    fn caption(&self, video: &FrameSequence) -> Result<Vec<String>> {
        Ok(video
            .frames()
            .iter()
            .map(|f| self.caption_frame(f))
            .collect())
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| self.embed_text(t)).collect())
    }

    fn class_probs(&self, video: &FrameSequence) -> Result<ClassProbs> {
        ClassProbs::new(
            STUB_CLASSES,
            video.frames().iter().map(|f| self.frame_probs(f)).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionLine {
    pub frame: usize,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EmbeddingLine {
    text: String,
    vector: Vec<f64>,
}

/// Reads a captions JSON Lines file, returning captions ordered by frame index.
pub fn read_captions(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<CaptionLine> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<std::result::Result<_, _>>()?;
    lines.sort_by_key(|l| l.frame);
    for (i, l) in lines.iter().enumerate() {
        if l.frame != i {
            return Err(Error::Manifest(format!(
                "{}: expected frame {i}, found {}",
                path.display(),
                l.frame
            )));
        }
    }
    Ok(lines.into_iter().map(|l| l.caption).collect())
}

pub fn write_captions(path: &Path, captions: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut out = String::new();
    for (frame, caption) in captions.iter().enumerate() {
        out.push_str(&serde_json::to_string(&CaptionLine {
            frame,
            caption: caption.clone(),
        })?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Pre-computed outputs on disk:
/// `captions/<video>.jsonl`, `embeddings.jsonl` (`{text, vector}` lines) and
/// `class_probs/<video>.json`.
#[derive(Debug)]
pub struct FileProvider {
    dir: PathBuf,
    embeddings: Mutex<Option<HashMap<String, Vec<f64>>>>,
}

impl FileProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            embeddings: Mutex::new(None),
        }
    }

    fn load_embeddings(&self) -> Result<HashMap<String, Vec<f64>>> {
        let path = self.dir.join("embeddings.jsonl");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut map = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let e: EmbeddingLine = serde_json::from_str(line)?;
            map.insert(e.text, e.vector);
        }
        Ok(map)
    }
}

impl ModelProvider for FileProvider {
    fn caption(&self, video: &FrameSequence) -> Result<Vec<String>> {
        let path = self
            .dir
            .join("captions")
            .join(format!("{}.jsonl", video.source_id()));
        let caps = read_captions(&path)?;
        if caps.len() != video.len() {
            return Err(Error::Manifest(format!(
                "{} has {} captions for {} frames",
                path.display(),
                caps.len(),
                video.len()
            )));
        }
        Ok(caps)
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        let mut guard = self.embeddings.lock().expect("embedding cache lock");
        if guard.is_none() {
            *guard = Some(self.load_embeddings()?);
        }
        let map = guard.as_ref().expect("loaded above");
        texts
            .iter()
            .map(|t| {
                map.get(*t)
                    .cloned()
                    .ok_or_else(|| Error::Provider(format!("no cached embedding for {t:?}")))
            })
            .collect()
    }

    fn class_probs(&self, video: &FrameSequence) -> Result<ClassProbs> {
        ClassProbs::load(
            self.dir
                .join("class_probs")
                .join(format!("{}.json", video.source_id())),
        )
    }
}

#[derive(Serialize)]
struct ImageRequest<'a> {
    image: &'a str,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct CaptionResponse {
    caption: String,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f64>,
    dim: usize,
}

#[derive(Deserialize)]
struct ClassProbsResponse {
    probs: Vec<f64>,
    classes: usize,
}

/// Client for the model service. At most `max_in_flight` requests are open at
/// once across all callers; results are placed by index, never by arrival order.
#[derive(Debug)]
pub struct HttpProvider {
    base: String,
    agent: ureq::Agent,
    max_in_flight: usize,
    in_flight: Mutex<usize>,
    slot_free: Condvar,
}

impl HttpProvider {
    pub fn new(base: &str, max_in_flight: usize) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout_connect(Duration::from_secs(10))
            .timeout(Duration::from_secs(120))
            .build();
        Self {
            base: base.trim_end_matches('/').to_string(),
            agent,
            max_in_flight: max_in_flight.max(1),
            in_flight: Mutex::new(0),
            slot_free: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut n = self.in_flight.lock().expect("in-flight lock");
        while *n >= self.max_in_flight {
            n = self.slot_free.wait(n).expect("in-flight lock");
        }
        *n += 1;
    }

    fn release(&self) {
        *self.in_flight.lock().expect("in-flight lock") -= 1;
        self.slot_free.notify_one();
    }

    fn post<Req: Serialize, Resp: for<'de> Deserialize<'de>>(
        &self,
        endpoint: &str,
        body: &Req,
    ) -> Result<Resp> {
        let url = format!("{}/{endpoint}", self.base);
        self.acquire();
        let result = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| Error::Provider(format!("POST {url}: {e}")))
            .and_then(|resp| {
                resp.into_json::<Resp>()
                    .map_err(|e| Error::Provider(format!("POST {url}: malformed response: {e}")))
            });
        self.release();
        result
    }

    fn map_indexed<T: Send>(
        &self,
        n: usize,
        f: impl Fn(usize) -> Result<T> + Sync,
    ) -> Result<Vec<T>> {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<T>>>> = (0..n).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for _ in 0..self.max_in_flight.min(n.max(1)) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= n {
                        break;
                    }
                    let r = f(i);
                    let failed = r.is_err();
                    *slots[i].lock().expect("slot lock") = Some(r);
                    if failed {
                        // Stop handing out new work after a failure.
                        next.store(n, Ordering::SeqCst);
                    }
                });
            }
        });
        let mut out = Vec::with_capacity(n);
        for (i, slot) in slots.into_iter().enumerate() {
            match slot.into_inner().expect("slot lock") {
                Some(Ok(v)) => out.push(v),
                Some(Err(e)) => return Err(e),
                None => return Err(Error::Provider(format!("item {i} was not processed"))),
            }
        }
        Ok(out)
    }

    pub fn health(&self) -> Result<serde_json::Value> {
        let url = format!("{}/health", self.base);
        self.agent
            .get(&url)
            .call()
            .map_err(|e| Error::Provider(format!("GET {url}: {e}")))?
            .into_json()
            .map_err(|e| Error::Provider(format!("GET {url}: {e}")))
    }
}

fn png_b64(frame: &RgbFrame) -> String {
    STANDARD.encode(encode_png(frame))
}

impl ModelProvider for HttpProvider {
    fn caption(&self, video: &FrameSequence) -> Result<Vec<String>> {
        self.map_indexed(video.len(), |i| {
            let img = png_b64(&video.frames()[i]);
            self.post::<_, CaptionResponse>("caption", &ImageRequest { image: &img })
                .map(|r| r.caption)
                .map_err(|e| Error::Provider(format!("frame {i}: {e}")))
        })
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        let vectors = self.map_indexed(texts.len(), |i| {
            let r: EmbedResponse = self.post("embed", &EmbedRequest { text: texts[i] })?;
            if r.vector.len() != r.dim {
                return Err(Error::Provider(format!(
                    "embedding has {} values but dim {}",
                    r.vector.len(),
                    r.dim
                )));
            }
            Ok(r.vector)
        })?;
        if let Some(first) = vectors.first() {
            if vectors.iter().any(|v| v.len() != first.len()) {
                return Err(Error::Provider(
                    "embedding dimension changed between requests".into(),
                ));
            }
        }
        Ok(vectors)
    }

    fn class_probs(&self, video: &FrameSequence) -> Result<ClassProbs> {
        let rows: Vec<(usize, Vec<f64>)> = self.map_indexed(video.len(), |i| {
            let img = png_b64(&video.frames()[i]);
            let r: ClassProbsResponse = self
                .post("class_probs", &ImageRequest { image: &img })
                .map_err(|e| Error::Provider(format!("frame {i}: {e}")))?;
            Ok((r.classes, r.probs))
        })?;
        let classes = rows.first().map_or(0, |r| r.0);
        if rows.iter().any(|r| r.0 != classes) {
            return Err(Error::Provider("class count changed between frames".into()));
        }
        ClassProbs::new(classes, rows.into_iter().map(|r| r.1).collect())
    }
}
