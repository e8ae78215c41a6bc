use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Writes through a sibling temp file so a failed run never leaves a partial output.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

/// CSV text with a leading `# <meta>` line.
pub fn csv_with_meta(meta: &str, header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut out = format!("# {meta}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// A CSV of `video_id` plus numeric columns; empty cells are missing values.
#[derive(Debug, Clone)]
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: BTreeMap<String, Vec<Option<f64>>>,
    pub order: Vec<String>,
}

impl NumericTable {
    /// Loads, ignoring the named non-numeric columns.
    pub fn load_skipping(path: &Path, skip: &[&str]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let headers = rdr.headers()?.clone();
        let Some(id) = headers.iter().position(|h| h == "video_id") else {
            bail!("{} has no video_id column", path.display());
        };
        let cols: Vec<usize> = (0..headers.len())
            .filter(|&i| i != id && !skip.contains(&&headers[i]))
            .collect();
        let mut rows = BTreeMap::new();
        let mut order = Vec::new();
        for rec in rdr.records() {
            let rec = rec.with_context(|| format!("reading {}", path.display()))?;
            let vid = rec[id].to_string();
            let vals = cols
                .iter()
                .map(|&c| {
                    let t = rec[c].trim();
                    if t.is_empty() {
                        Ok(None)
                    } else {
                        t.parse::<f64>().map(Some).with_context(|| {
                            format!(
                                "{}: video {vid}: bad number {t:?} in {}",
                                path.display(),
                                &headers[c]
                            )
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if rows.insert(vid.clone(), vals).is_some() {
                bail!("{}: duplicate video_id {vid}", path.display());
            }
            order.push(vid);
        }
        Ok(Self {
            columns: cols.iter().map(|&c| headers[c].to_string()).collect(),
            rows,
            order,
        })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, video: &str, col: usize) -> Option<f64> {
        self.rows.get(video).and_then(|r| r[col])
    }
}

/// Fails with every id that appears in only one of the two tables.
pub fn check_same_ids<'a>(
    left_name: &str,
    left: impl Iterator<Item = &'a String>,
    right_name: &str,
    right: impl Iterator<Item = &'a String>,
) -> Result<()> {
    let l: std::collections::BTreeSet<&String> = left.collect();
    let r: std::collections::BTreeSet<&String> = right.collect();
    let only_l: Vec<&str> = l.difference(&r).map(|s| s.as_str()).collect();
    let only_r: Vec<&str> = r.difference(&l).map(|s| s.as_str()).collect();
    if !only_l.is_empty() || !only_r.is_empty() {
        bail!(
            "unmatched video ids: only in {left_name}: [{}]; only in {right_name}: [{}]",
            only_l.join(", "),
            only_r.join(", ")
        );
    }
    Ok(())
}
