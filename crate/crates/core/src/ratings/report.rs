use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::rank::{LengthBucket, RankedModel};
use super::stats::{ModelStats, VideoMos};
use super::svg::{Svg, PALETTE};
use super::tukey::TukeyResult;
use super::Analysis;
use crate::error::{Error, Result};

pub const REPORT_FILES: [&str; 6] = [
    "model_stats.csv",
    "tukey.csv",
    "mos_distributions.svg",
    "tukey_intervals.svg",
    "prompt_length_box.svg",
    "rank_compare.svg",
];

/// Writes the CSV tables and SVG figures into `out_dir`.
///
/// `header` is embedded as a leading `#` line in CSVs and an XML comment in SVGs.
/// Everything is rendered before the first file is written.
pub fn emit_report(analysis: &Analysis, out_dir: &Path, header: Option<&str>) -> Result<()> {
    if analysis.stats.is_empty() {
        return Err(Error::Ratings("no models to report".into()));
    }
    let contents = [
        model_stats_csv(&analysis.stats, header)?,
        tukey_csv(analysis.tukey.as_ref(), header)?,
        mos_distributions_svg(&analysis.videos, header),
        tukey_intervals_svg(analysis.tukey.as_ref(), header),
        prompt_length_svg(&analysis.videos, header),
        rank_compare_svg(&analysis.rankings, header),
    ];
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, body) in REPORT_FILES.iter().zip(contents) {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn csv_doc(header: Option<&str>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Ratings(format!("csv buffer: {e}")))?;
    let mut out = header.map(|h| format!("# {h}\n")).unwrap_or_default();
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

fn f(v: f64) -> String {
    format!("{v:.6}")
}

pub fn model_stats_csv(stats: &[ModelStats], header: Option<&str>) -> Result<String> {
    let mut rows = vec![[
        "model_name",
        "n_videos",
        "alignment_mean",
        "alignment_std",
        "perception_mean",
        "perception_std",
        "combined",
        "clamped",
    ]
    .map(String::from)
    .to_vec()];
    for s in stats {
        rows.push(vec![
            s.model_name.clone(),
            s.n_videos.to_string(),
            f(s.alignment.mean),
            f(s.alignment.std),
            f(s.perception.mean),
            f(s.perception.std),
            f(s.combined),
            s.clamped.to_string(),
        ]);
    }
    csv_doc(header, rows)
}

pub fn tukey_csv(tukey: Option<&TukeyResult>, header: Option<&str>) -> Result<String> {
    let mut rows = vec![[
        "model_a",
        "model_b",
        "mean_diff",
        "q_statistic",
        "critical",
        "lower",
        "upper",
        "significant",
    ]
    .map(String::from)
    .to_vec()];
    if let Some(t) = tukey {
        for p in &t.pairs {
            rows.push(vec![
                p.model_a.clone(),
                p.model_b.clone(),
                f(p.mean_diff),
                f(p.q_statistic),
                f(t.critical),
                f(p.lower),
                f(p.upper),
                p.significant.to_string(),
            ]);
        }
    }
    csv_doc(header, rows)
}

fn models_of(videos: &[VideoMos]) -> Vec<&str> {
    let mut m: Vec<&str> = videos.iter().map(|v| v.model_name.as_str()).collect();
    m.sort();
    m.dedup();
    m
}

fn mos_distributions_svg(videos: &[VideoMos], header: Option<&str>) -> String {
    let models = models_of(videos);
    let (pw, ph, top) = (300.0, 150.0, 40.0);
    let mut svg = Svg::new(40.0 + 2.0 * pw, top + ph * models.len() as f64 + 20.0);
    svg.text(20.0 + pw, 24.0, 16.0, "middle", "Adjusted MOS per video");
    for (row, model) in models.iter().enumerate() {
        for (col, aspect) in super::Aspect::ALL.iter().enumerate() {
            let x0 = 20.0 + col as f64 * pw;
            let y0 = top + row as f64 * ph;
            let mut bins = [0usize; 10];
            for v in videos.iter().filter(|v| v.model_name == *model) {
                if let Some(s) = v.get(*aspect) {
                    bins[(s.floor().max(0.0) as usize).min(9)] += 1;
                }
            }
            let peak = *bins.iter().max().unwrap_or(&0).max(&1) as f64;
            let (bx, by, bw, bh) = (x0 + 30.0, y0 + 25.0, pw - 50.0, ph - 55.0);
            svg.text(
                x0 + pw / 2.0,
                y0 + 16.0,
                12.0,
                "middle",
                &format!("{model} / {aspect}"),
            );
            for (i, &c) in bins.iter().enumerate() {
                let h = bh * c as f64 / peak;
                let w = bw / 10.0;
                svg.rect(
                    bx + i as f64 * w,
                    by + bh - h,
                    w - 1.0,
                    h,
                    PALETTE[col],
                    "none",
                );
            }
            svg.line(bx, by + bh, bx + bw, by + bh, "black", 1.0);
            for t in [0, 5, 10] {
                svg.text(
                    bx + bw * t as f64 / 10.0,
                    by + bh + 14.0,
                    10.0,
                    "middle",
                    &t.to_string(),
                );
            }
        }
    }
    svg.finish(header)
}

fn tukey_intervals_svg(tukey: Option<&TukeyResult>, header: Option<&str>) -> String {
    let pairs = tukey.map_or(&[][..], |t| &t.pairs[..]);
    let (left, width, row_h, top) = (260.0, 420.0, 24.0, 50.0);
    let mut svg = Svg::new(
        left + width + 40.0,
        top + row_h * pairs.len().max(1) as f64 + 40.0,
    );
    let title = match tukey {
        Some(t) => format!("Tukey HSD intervals, alpha = {}", t.alpha),
        None => "Tukey HSD intervals (fewer than two models)".to_string(),
    };
    svg.text((left + width) / 2.0, 24.0, 16.0, "middle", &title);
    let extent = pairs
        .iter()
        .flat_map(|p| [p.lower.abs(), p.upper.abs()])
        .filter(|v| v.is_finite())
        .fold(1e-9, f64::max);
    let sx =
        |v: f64| left + width / 2.0 + (v.clamp(-extent, extent) / extent) * (width / 2.0 - 10.0);
    let bottom = top + row_h * pairs.len().max(1) as f64;
    svg.line(sx(0.0), top - 10.0, sx(0.0), bottom, "#888888", 1.0);
    for (i, p) in pairs.iter().enumerate() {
        let y = top + row_h * (i as f64 + 0.5);
        let color = if p.significant { "#d62728" } else { "#1f77b4" };
        svg.text(
            left - 10.0,
            y + 4.0,
            11.0,
            "end",
            &format!("{} - {}", p.model_b, p.model_a),
        );
        svg.line(sx(p.lower), y, sx(p.upper), y, color, 2.0);
        svg.circle(sx(p.mean_diff), y, 3.5, color);
    }
    svg.text(
        sx(-extent),
        bottom + 18.0,
        10.0,
        "middle",
        &format!("{:.3}", -extent),
    );
    svg.text(sx(0.0), bottom + 18.0, 10.0, "middle", "0");
    svg.text(
        sx(extent),
        bottom + 18.0,
        10.0,
        "middle",
        &format!("{extent:.3}"),
    );
    svg.finish(header)
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn prompt_length_svg(videos: &[VideoMos], header: Option<&str>) -> String {
    let models = models_of(videos);
    let mut groups: BTreeMap<(LengthBucket, &str), Vec<f64>> = BTreeMap::new();
    for v in videos {
        if let Some((c, _)) = v.combined() {
            groups
                .entry((
                    super::prompt_length_bucket(&v.prompt),
                    v.model_name.as_str(),
                ))
                .or_default()
                .push(c);
        }
    }
    let slot = 22.0;
    let group_w = slot * models.len() as f64 + 30.0;
    let (left, top, plot_h) = (50.0, 50.0, 300.0);
    let mut svg = Svg::new(
        left + group_w * 3.0 + 20.0,
        top + plot_h + 60.0 + 16.0 * models.len() as f64,
    );
    svg.text(
        left + group_w * 1.5,
        24.0,
        16.0,
        "middle",
        "Combined human score by prompt length",
    );
    let sy = |v: f64| top + plot_h * (1.0 - v.clamp(0.0, 1.0));
    svg.line(left, top, left, top + plot_h, "black", 1.0);
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        svg.text(left - 6.0, sy(t) + 4.0, 10.0, "end", &format!("{t:.2}"));
    }
    for (bi, bucket) in LengthBucket::ALL.iter().enumerate() {
        let gx = left + 15.0 + bi as f64 * group_w;
        svg.text(
            gx + group_w / 2.0 - 15.0,
            top + plot_h + 18.0,
            12.0,
            "middle",
            bucket.as_str(),
        );
        for (mi, model) in models.iter().enumerate() {
            let Some(vals) = groups.get_mut(&(*bucket, model)) else {
                continue;
            };
            vals.sort_by(f64::total_cmp);
            let x = gx + mi as f64 * slot;
            let c = PALETTE[mi % PALETTE.len()];
            let (q0, q1, q2, q3, q4) = (
                vals[0],
                quantile(vals, 0.25),
                quantile(vals, 0.5),
                quantile(vals, 0.75),
                vals[vals.len() - 1],
            );
            svg.line(
                x + slot / 2.0 - 1.0,
                sy(q0),
                x + slot / 2.0 - 1.0,
                sy(q4),
                c,
                1.0,
            );
            svg.rect(x + 3.0, sy(q3), slot - 8.0, sy(q1) - sy(q3), "white", c);
            svg.line(x + 3.0, sy(q2), x + slot - 5.0, sy(q2), c, 2.0);
        }
    }
    for (mi, model) in models.iter().enumerate() {
        let y = top + plot_h + 40.0 + 16.0 * mi as f64;
        svg.rect(
            left,
            y - 9.0,
            10.0,
            10.0,
            PALETTE[mi % PALETTE.len()],
            "none",
        );
        svg.text(left + 16.0, y, 11.0, "start", model);
    }
    svg.finish(header)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRanking {
    pub metric: String,
    pub ranking: Vec<RankedModel>,
    /// Agreement with the human ranking.
    pub tau: Option<f64>,
}

fn rank_compare_svg(rankings: &[MetricRanking], header: Option<&str>) -> String {
    let n = rankings.iter().map(|r| r.ranking.len()).max().unwrap_or(0);
    let (col_w, row_h, top, left) = (170.0, 30.0, 70.0, 30.0);
    let mut svg = Svg::new(
        left * 2.0 + col_w * rankings.len().max(1) as f64,
        top + row_h * n as f64 + 20.0,
    );
    svg.text(
        left + col_w * rankings.len() as f64 / 2.0,
        24.0,
        16.0,
        "middle",
        "Model ranks by metric",
    );
    let mut all: Vec<&str> = rankings
        .iter()
        .flat_map(|r| r.ranking.iter().map(|m| m.model_name.as_str()))
        .collect();
    all.sort();
    all.dedup();
    let color = |m: &str| PALETTE[all.iter().position(|x| *x == m).unwrap_or(0) % PALETTE.len()];
    let pos = |ci: usize, rank: usize| {
        (
            left + col_w * (ci as f64 + 0.5),
            top + row_h * (rank as f64 - 0.5),
        )
    };
    for (ci, r) in rankings.iter().enumerate() {
        let (x, _) = pos(ci, 1);
        svg.text(x, top - 28.0, 12.0, "middle", &r.metric);
        if let Some(t) = r.tau {
            svg.text(x, top - 12.0, 10.0, "middle", &format!("tau = {t:.3}"));
        }
        if ci > 0 {
            for m in &r.ranking {
                if let Some(prev) = rankings[ci - 1]
                    .ranking
                    .iter()
                    .find(|p| p.model_name == m.model_name)
                {
                    let (x0, y0) = pos(ci - 1, prev.rank);
                    let (x1, y1) = pos(ci, m.rank);
                    svg.line(x0, y0, x1, y1, color(&m.model_name), 2.0);
                }
            }
        }
    }
    for (ci, r) in rankings.iter().enumerate() {
        for m in &r.ranking {
            let (x, y) = pos(ci, m.rank);
            svg.circle(x, y, 5.0, color(&m.model_name));
            svg.text(
                x + 8.0,
                y - 6.0,
                10.0,
                "start",
                &format!("{} ({})", m.model_name, m.rank),
            );
        }
    }
    svg.finish(header)
}
