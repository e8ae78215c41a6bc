use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Aspect {
    Alignment,
    Perception,
}

impl Aspect {
    pub const ALL: [Aspect; 2] = [Aspect::Alignment, Aspect::Perception];

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Alignment => "alignment",
            Aspect::Perception => "perception",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aspect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alignment" => Ok(Aspect::Alignment),
            "perception" => Ok(Aspect::Perception),
            other => Err(Error::Ratings(format!("unknown aspect {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rating {
    pub video_id: String,
    pub model_name: String,
    pub prompt: String,
    pub annotator_id: String,
    pub aspect: Aspect,
    pub score: f64,
}

impl Rating {
    pub fn prompt_word_count(&self) -> usize {
        self.prompt.split_whitespace().count()
    }
}

#[derive(Deserialize)]
struct RawRow {
    video_id: String,
    model_name: String,
    prompt: String,
    annotator_id: String,
    aspect: String,
    score: f64,
}

/// Raw human ratings, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsTable {
    rows: Vec<Rating>,
}

impl RatingsTable {
    pub fn new(rows: Vec<Rating>) -> Result<Self> {
        let mut videos: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            if !(1.0..=10.0).contains(&r.score) {
                return Err(Error::Ratings(format!(
                    "row {}: score {} outside [1, 10]",
                    i + 1,
                    r.score
                )));
            }
            match videos.get(r.video_id.as_str()) {
                Some(&(m, p)) if m != r.model_name || p != r.prompt => {
                    return Err(Error::Ratings(format!(
                        "video {} has inconsistent model or prompt",
                        r.video_id
                    )))
                }
                Some(_) => {}
                None => {
                    videos.insert(&r.video_id, (&r.model_name, &r.prompt));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<RawRow>() {
            let r = rec?;
            rows.push(Rating {
                aspect: r.aspect.parse()?,
                video_id: r.video_id,
                model_name: r.model_name,
                prompt: r.prompt,
                annotator_id: r.annotator_id,
                score: r.score,
            });
        }
        Self::new(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(f)
    }

    pub fn rows(&self) -> &[Rating] {
        &self.rows
    }

    pub fn models(&self) -> Vec<String> {
        let mut m: Vec<String> = self.rows.iter().map(|r| r.model_name.clone()).collect();
        m.sort();
        m.dedup();
        m
    }

    /// video_id → (model, prompt).
    pub fn videos(&self) -> BTreeMap<String, (String, String)> {
        self.rows
            .iter()
            .map(|r| (r.video_id.clone(), (r.model_name.clone(), r.prompt.clone())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let csv = "video_id,model_name,prompt,annotator_id,aspect,score\n\
                   v1,m,a cat on a mat,a1,alignment,7\n\
                   v1,m,a cat on a mat,a1,Perception,6\n";
        let t = RatingsTable::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.rows().len(), 2);
        assert_eq!(t.rows()[1].aspect, Aspect::Perception);
        assert_eq!(t.rows()[0].prompt_word_count(), 5);

        let bad = csv.replace(",6\n", ",11\n");
        assert!(RatingsTable::from_reader(bad.as_bytes()).is_err());
        let bad = csv.replace("Perception", "motion");
        assert!(RatingsTable::from_reader(bad.as_bytes()).is_err());
        let bad = format!("{csv}v1,other,a cat on a mat,a2,alignment,5\n");
        assert!(RatingsTable::from_reader(bad.as_bytes()).is_err());
    }
}
