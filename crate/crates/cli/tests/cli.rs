//! Runs the `t2vqa` binary end to end on tiny synthetic inputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use t2vqa_core::media::{write_png, RgbFrame};

fn t2vqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_t2vqa"))
        .args(args)
        .env_remove("T2VQA_PROVIDER")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = t2vqa(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Exit code 1 and a one-line JSON error on stderr.
fn err(args: &[&str]) -> serde_json::Value {
    let out = t2vqa(args);
    assert_eq!(out.status.code(), Some(1), "{args:?} should fail");
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line = stderr.lines().last().unwrap();
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {stderr}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    /// Three 8-frame 64x64 clips, a manifest and a NIQE model fitted on the clips.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let prompts = [
            "a red car driving down a street",
            "a dog running on the grass",
            "a city skyline at night",
        ];
        let mut manifest = String::from("video_id,model_name,prompt,frames_path\n");
        for (v, prompt) in prompts.iter().enumerate() {
            let fdir = dir.path().join(format!("frames/vid{v}"));
            std::fs::create_dir_all(&fdir).unwrap();
            for k in 0..8 {
                let f = RgbFrame::from_fn(64, 64, |x, y| {
                    let t = (x as f64 + 2.0 * k as f64) / 9.0 + v as f64;
                    let u = y as f64 / 7.0;
                    let g = 128.0 + 60.0 * t.sin() * u.cos() + 30.0 * (0.37 * (x * y) as f64).sin();
                    let g = g.clamp(0.0, 255.0) as u8;
                    [g, g.saturating_add(20), 255 - g]
                })
                .unwrap();
                write_png(&f, fdir.join(format!("frame_{k:04}.png"))).unwrap();
            }
            manifest.push_str(&format!("vid{v},model{},{prompt},frames/vid{v}\n", v % 2));
        }
        std::fs::write(dir.path().join("manifest.csv"), manifest).unwrap();
        let fx = Self { dir };
        let mut args = vec!["fit-niqe", "--patch-size", "16", "--out"];
        let model = fx.path("niqe.json");
        args.push(s(&model));
        let frames: Vec<PathBuf> = (0..3).map(|v| fx.path(&format!("frames/vid{v}"))).collect();
        for f in &frames {
            args.push("--frames");
            args.push(s(f));
        }
        ok(&args);
        fx
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn features(&self, out: &str) -> Output {
        t2vqa(&[
            "features",
            "--manifest",
            s(&self.path("manifest.csv")),
            "--niqe-model",
            s(&self.path("niqe.json")),
            "--out",
            s(&self.path(out)),
        ])
    }

    fn textsim(&self, out: &str) -> Output {
        t2vqa(&[
            "textsim",
            "--manifest",
            s(&self.path("manifest.csv")),
            "--provider",
            "stub",
            "--captions-dir",
            s(&self.path("captions")),
            "--out",
            s(&self.path(out)),
        ])
    }
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn features_one_row_per_video_and_reproducible() {
    let fx = Fixture::new();
    assert!(fx.features("a.csv").status.success());
    assert!(fx.features("b.csv").status.success());
    let a = std::fs::read_to_string(fx.path("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(fx.path("b.csv")).unwrap());
    let lines = data_lines(&a);
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("video_id,"));
    let meta: serde_json::Value =
        serde_json::from_str(a.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(meta["seed"], 42);
    assert!(meta["config_hash"].as_str().unwrap().len() == 16);
    assert!(meta["tool_version"].is_string());
}

#[test]
fn missing_frames_name_the_video() {
    let fx = Fixture::new();
    std::fs::remove_dir_all(fx.path("frames/vid1")).unwrap();
    let e = err(&[
        "features",
        "--manifest",
        s(&fx.path("manifest.csv")),
        "--niqe-model",
        s(&fx.path("niqe.json")),
        "--out",
        s(&fx.path("f.csv")),
    ]);
    assert!(e["error"].as_str().unwrap().contains("vid1"), "{e}");
    assert!(!fx.path("f.csv").exists(), "no partial output");
}

#[test]
fn textsim_stub_is_deterministic_and_reuses_captions() {
    let fx = Fixture::new();
    assert!(fx.textsim("t1.csv").status.success());
    assert!(fx.path("captions/vid0.jsonl").exists());
    // Frames are no longer needed once captions are cached.
    std::fs::remove_dir_all(fx.path("frames")).unwrap();
    let second = fx.textsim("t2.csv");
    assert!(
        second.status.success(),
        "{}",
        String::from_utf8_lossy(&second.stderr)
    );
    let a = std::fs::read_to_string(fx.path("t1.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(fx.path("t2.csv")).unwrap());
    assert_eq!(
        data_lines(&a)[0],
        "video_id,model_name,n_frames,unique_captions,video_score"
    );
    assert_eq!(data_lines(&a).len(), 4);
}

#[test]
fn textsim_needs_a_provider_and_videos() {
    let fx = Fixture::new();
    let e = err(&[
        "textsim",
        "--manifest",
        s(&fx.path("manifest.csv")),
        "--out",
        s(&fx.path("t.csv")),
    ]);
    assert!(
        e["error"].as_str().unwrap().contains("T2VQA_PROVIDER"),
        "{e}"
    );
    std::fs::write(
        fx.path("empty.csv"),
        "video_id,model_name,prompt,frames_path\n",
    )
    .unwrap();
    err(&[
        "textsim",
        "--manifest",
        s(&fx.path("empty.csv")),
        "--provider",
        "stub",
        "--out",
        s(&fx.path("t.csv")),
    ]);
}

/// Trains a small classifier on the fixture features plus shifted copies labelled unnatural.
fn train_classifier(fx: &Fixture) -> PathBuf {
    let feats = std::fs::read_to_string(fx.path("feat.csv")).unwrap();
    let lines = data_lines(&feats);
    let mut train = format!("{},label,split\n", lines[0]);
    let splits = ["train", "train", "val"];
    for (i, l) in lines[1..].iter().enumerate() {
        train.push_str(&format!("{l},1,{}\n", splits[i]));
        let (id, rest) = l.split_once(',').unwrap();
        let shifted: Vec<String> = rest
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_or(String::new(), |x| (x + 5.0).to_string())
            })
            .collect();
        let split = ["train", "train", "test"][i];
        train.push_str(&format!("{id}_bad,{},0,{split}\n", shifted.join(",")));
    }
    std::fs::write(fx.path("train.csv"), train).unwrap();
    let model = fx.path("gbt.json");
    ok(&[
        "train-classifier",
        "--features",
        s(&fx.path("train.csv")),
        "--n-trees",
        "5,10",
        "--max-depth",
        "2",
        "--learning-rate",
        "0.3",
        "--out",
        s(&model),
        "--report",
        s(&fx.path("report.json")),
    ]);
    model
}

fn write_weights(path: &Path, intercept: f64, wn: f64, ws: f64) {
    let w = serde_json::json!({
        "intercept": intercept,
        "w_naturalness": wn,
        "w_textsim": ws,
        "meta": {"dataset_id": "test", "rows": 3}
    });
    std::fs::write(path, w.to_string()).unwrap();
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let lines = data_lines(text);
    let idx = lines[0].split(',').position(|c| c == name).unwrap();
    lines[1..]
        .iter()
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn score_pipeline() {
    let fx = Fixture::new();
    assert!(fx.features("feat.csv").status.success());
    assert!(fx.textsim("ts.csv").status.success());
    let model = train_classifier(&fx);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fx.path("report.json")).unwrap()).unwrap();
    assert_eq!(report["meta"]["seed"], 42);

    write_weights(&fx.path("w.json"), 0.0, 1.0, 0.0);
    let score = |out: &str| {
        ok(&[
            "score",
            "--features",
            s(&fx.path("feat.csv")),
            "--textsim",
            s(&fx.path("ts.csv")),
            "--naturalness-model",
            s(&model),
            "--weights",
            s(&fx.path("w.json")),
            "--out",
            s(&fx.path(out)),
        ])
    };
    score("score.csv");
    let text = std::fs::read_to_string(fx.path("score.csv")).unwrap();
    let nat = column(&text, "naturalness");
    let ens = column(&text, "ensemble_score");
    assert_eq!(nat.len(), 3);
    for (n, e) in nat.iter().zip(&ens) {
        assert!((n - e).abs() < 1e-9, "{n} vs {e}");
    }

    // Mismatched video sets are reported by id.
    let ts = std::fs::read_to_string(fx.path("ts.csv"))
        .unwrap()
        .replace("vid2,", "other9,");
    std::fs::write(fx.path("ts.csv"), ts).unwrap();
    let out = t2vqa(&[
        "score",
        "--features",
        s(&fx.path("feat.csv")),
        "--textsim",
        s(&fx.path("ts.csv")),
        "--naturalness-model",
        s(&model),
        "--weights",
        s(&fx.path("w.json")),
        "--out",
        s(&fx.path("bad.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("vid2") && msg.contains("other9"), "{msg}");
}

fn write_ratings(path: &Path) {
    let mut csv = String::from("video_id,model_name,prompt,annotator_id,aspect,score\n");
    let models = [("m_low", 3.0), ("m_mid", 5.0), ("m_high", 7.0)];
    for (m, (name, level)) in models.iter().enumerate() {
        for v in 0..4 {
            for a in 0..3 {
                for aspect in ["alignment", "perception"] {
                    let score = level + ((v + a + m) % 3) as f64 - 1.0;
                    csv.push_str(&format!(
                        "{name}_{v},{name},a short prompt with {v} words,p{a},{aspect},{score}\n"
                    ));
                }
            }
        }
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn analyze_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("ratings.csv");
    write_ratings(&ratings);
    let out = dir.path().join("report");
    ok(&["analyze", "--ratings", s(&ratings), "--out-dir", s(&out)]);
    for name in [
        "model_stats.csv",
        "tukey.csv",
        "mos_distributions.svg",
        "tukey_intervals.svg",
        "prompt_length_box.svg",
        "rank_compare.svg",
    ] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(text.contains("config_hash"), "{name} lacks the run stamp");
    }
    let tukey = std::fs::read_to_string(out.join("tukey.csv")).unwrap();
    assert_eq!(data_lines(&tukey).len(), 4);

    // A per-video metric is ranked against the human ranking.
    let mut metric = String::from("video_id,my_metric\n");
    for (m, level) in [("m_low", 0.1), ("m_mid", 0.5), ("m_high", 0.9)] {
        for v in 0..4 {
            metric.push_str(&format!("{m}_{v},{level}\n"));
        }
    }
    let mpath = dir.path().join("metric.csv");
    std::fs::write(&mpath, metric).unwrap();
    let out2 = dir.path().join("report2");
    ok(&[
        "analyze",
        "--ratings",
        s(&ratings),
        "--out-dir",
        s(&out2),
        "--metric-scores",
        s(&mpath),
    ]);
    assert!(std::fs::read_to_string(out2.join("rank_compare.svg"))
        .unwrap()
        .contains("my_metric"));

    let e = err(&[
        "analyze",
        "--ratings",
        s(&dir.path().join("nope.csv")),
        "--out-dir",
        s(&out),
    ]);
    assert!(e["error"].as_str().unwrap().contains("nope.csv"), "{e}");
}

#[test]
fn config_file_sets_defaults_and_flags_win() {
    let fx = Fixture::new();
    std::fs::write(
        fx.path("run.cfg"),
        "# run settings\nseed = 7\nspectral_mode = channel\n",
    )
    .unwrap();
    let (cfg, manifest, niqe, c1) = (
        fx.path("run.cfg"),
        fx.path("manifest.csv"),
        fx.path("niqe.json"),
        fx.path("c1.csv"),
    );
    let base = [
        "features",
        "--config",
        s(&cfg),
        "--manifest",
        s(&manifest),
        "--niqe-model",
        s(&niqe),
    ];
    let mut a = base.to_vec();
    a.extend(["--out", s(&c1)]);
    ok(&a);
    let mut b = base.to_vec();
    let c2 = fx.path("c2.csv");
    b.extend(["--seed", "9", "--out", s(&c2)]);
    ok(&b);
    let meta = |p: &Path| -> serde_json::Value {
        let t = std::fs::read_to_string(p).unwrap();
        serde_json::from_str(t.lines().next().unwrap().trim_start_matches("# ")).unwrap()
    };
    assert_eq!(meta(&c1)["seed"], 7);
    assert_eq!(meta(&c2)["seed"], 9);
    assert_ne!(meta(&c1)["config_hash"], meta(&c2)["config_hash"]);

    std::fs::write(fx.path("bad.cfg"), "seed 7\n").unwrap();
    let e = err(&["features", "--config", s(&fx.path("bad.cfg"))]);
    assert!(e["error"].as_str().unwrap().contains("config"), "{e}");
}

#[test]
fn usage_errors_are_single_line_json() {
    let e = err(&["score", "--features", "x.csv"]);
    assert_eq!(e["retriable"], false);
    assert!(!e["error"].as_str().unwrap().contains('\n'));
    let help = t2vqa(&["--help"]);
    assert!(help.status.success());
    assert!(String::from_utf8_lossy(&help.stdout).contains("analyze"));
}
