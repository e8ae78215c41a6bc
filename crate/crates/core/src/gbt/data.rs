//! Labelled feature tables and train/validation/test splits.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidConfig(format!("unknown split {other:?}"))),
        }
    }
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledRow {
    pub video_id: String,
    pub features: Vec<Option<f64>>,
    /// 1 = natural, 0 = non-natural.
    pub label: u8,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledSet {
    pub feature_names: Vec<String>,
    pub rows: Vec<LabelledRow>,
}

const RESERVED: [&str; 3] = ["video_id", "label", "split"];

fn parse_cell(s: &str) -> Result<Option<f64>> {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::InvalidConfig(format!("bad numeric cell {t:?}")))
}

fn parse_label(s: &str) -> Result<u8> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "1.0" | "natural" | "true" => Ok(1),
        "0" | "0.0" | "non-natural" | "unnatural" | "false" => Ok(0),
        other => Err(Error::InvalidConfig(format!("bad label {other:?}"))),
    }
}

impl LabelledSet {
    /// Reads a CSV whose columns are `video_id`, features, `label` and optionally `split`.
    /// `labels` supplies `label`/`split` by `video_id` when the feature file lacks them.
    pub fn from_csv(
        features: impl std::io::Read,
        labels: Option<HashMap<String, (u8, Option<Split>)>>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(features);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let id_col = col("video_id")
            .ok_or_else(|| Error::InvalidConfig("missing video_id column".into()))?;
        let label_col = col("label");
        let split_col = col("split");
        let feature_cols: Vec<usize> = (0..headers.len())
            .filter(|&i| !RESERVED.contains(&&headers[i]))
            .collect();
        let feature_names = feature_cols
            .iter()
            .map(|&i| headers[i].to_string())
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let video_id = rec[id_col].to_string();
            let features = feature_cols
                .iter()
                .map(|&i| parse_cell(&rec[i]))
                .collect::<Result<Vec<_>>>()?;
            let from_file = match label_col {
                Some(c) if !rec[c].trim().is_empty() => {
                    let split = split_col
                        .map(|s| rec[s].trim())
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .transpose()?;
                    Some((parse_label(&rec[c])?, split))
                }
                _ => None,
            };
            let (label, split) = match (from_file, labels.as_ref().and_then(|l| l.get(&video_id))) {
                (_, Some(&(l, s))) => (l, s),
                (Some(ls), None) => ls,
                (None, None) => {
                    return Err(Error::InvalidConfig(format!(
                        "no label for video {video_id}"
                    )));
                }
            };
            rows.push(LabelledRow {
                video_id,
                features,
                label,
                split,
            });
        }
        let set = Self {
            feature_names,
            rows,
        };
        set.check_unique_ids()?;
        Ok(set)
    }

    pub fn load(features: impl AsRef<Path>, labels: Option<impl AsRef<Path>>) -> Result<Self> {
        let fp = features.as_ref();
        let f = std::fs::File::open(fp).map_err(|e| Error::io(fp, e))?;
        let labels = labels.map(|p| read_labels(p.as_ref())).transpose()?;
        Self::from_csv(f, labels)
    }

    fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.rows {
            if !seen.insert(r.video_id.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "video {} appears more than once (possibly across splits)",
                    r.video_id
                )));
            }
        }
        Ok(())
    }

    pub fn has_splits(&self) -> bool {
        self.rows.iter().all(|r| r.split.is_some())
    }

    /// 60/20/20 split stratified by label, seeded. Existing split tags are replaced.
    pub fn assign_splits(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for label in [0u8, 1] {
            let mut idx: Vec<usize> = (0..self.rows.len())
                .filter(|&i| self.rows[i].label == label)
                .collect();
            idx.sort_by(|&a, &b| self.rows[a].video_id.cmp(&self.rows[b].video_id));
            idx.shuffle(&mut rng);
            let n = idx.len();
            let n_train = (0.6 * n as f64).round() as usize;
            let n_val = (0.2 * n as f64).round() as usize;
            for (k, &i) in idx.iter().enumerate() {
                self.rows[i].split = Some(if k < n_train {
                    Split::Train
                } else if k < n_train + n_val {
                    Split::Val
                } else {
                    Split::Test
                });
            }
        }
    }

    pub fn split(&self, split: Split) -> Vec<&LabelledRow> {
        self.rows
            .iter()
            .filter(|r| r.split == Some(split))
            .collect()
    }
}

/// `video_id,label[,split]`
pub fn read_labels(path: &Path) -> Result<HashMap<String, (u8, Option<Split>)>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(f);
    let headers = rdr.headers()?.clone();
    let col = |n: &str| headers.iter().position(|h| h == n);
    let (id, label) = match (col("video_id"), col("label")) {
        (Some(i), Some(l)) => (i, l),
        _ => {
            return Err(Error::InvalidConfig(
                "labels file needs video_id and label columns".into(),
            ))
        }
    };
    let split = col("split");
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let s = split
            .map(|c| rec[c].trim())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .transpose()?;
        out.insert(rec[id].to_string(), (parse_label(&rec[label])?, s));
    }
    Ok(out)
}
