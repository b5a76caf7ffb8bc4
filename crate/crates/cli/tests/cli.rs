use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use autocam_core::geom::Direction;
use autocam_core::grid::GlimpseGrid;
use autocam_core::raster::{FrameDir, Raster};
use autocam_core::scoring::{FeatureRecord, FeatureSet, Label, ScoreMap};
use autocam_core::trajectory::{read_trajectories, write_trajectories, ContinuousTrajectory, TrajectoryDoc, TrajectoryKind};
use serde_json::Value;

fn autocam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autocam")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = autocam(args);
    assert!(
        out.status.success(),
        "autocam {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = autocam(args);
    assert!(!out.status.success(), "autocam {args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn score_map(dir: &Path, steps: usize) -> PathBuf {
    let grid = GlimpseGrid::with_defaults(steps).unwrap();
    let map = ScoreMap::from_fn("vid", grid, |g| {
        ((g.t as f64 * 0.37 + g.dir.theta() * 0.011 + g.dir.phi() * 0.0023).sin() + 1.0) / 2.0
    })
    .unwrap();
    let path = dir.join(format!("scores{steps}.json"));
    map.save(&path).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn grid_reports_lattice() {
    let out: Value = serde_json::from_str(&ok(&["grid", "--duration", "60"])).unwrap();
    assert_eq!(out["num_steps"], 12);
    assert_eq!(out["cells_per_step"], 198);
    assert_eq!(out["glimpses"], 2376);
    assert!(!fails(&["grid"]).is_empty());
    assert!(!fails(&["grid", "--duration", "2"]).is_empty());
}

#[test]
fn solve_defaults_to_twenty() {
    let dir = tempfile::tempdir().unwrap();
    let scores = score_map(dir.path(), 12);
    let out = dir.path().join("t.json");
    ok(&["solve", "--scores", s(&scores), "--out", s(&out)]);
    let docs = read_trajectories(&out).unwrap();
    assert_eq!(docs.len(), 20);
    assert!(docs.iter().all(|d| d.kind == TrajectoryKind::Discrete && d.entries.len() == 12));
    let scores: Vec<f64> = docs.iter().map(|d| d.aggregate_score.unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[solver]\nk = 3\n").unwrap();
    ok(&["--config", s(&cfg), "solve", "--scores", s(&scores_path(dir.path())), "--out", s(&out)]);
    assert_eq!(read_trajectories(&out).unwrap().len(), 3);
    ok(&["--config", s(&cfg), "solve", "--k", "5", "--scores", s(&scores_path(dir.path())), "--out", s(&out)]);
    assert_eq!(read_trajectories(&out).unwrap().len(), 5);
}

fn scores_path(dir: &Path) -> PathBuf {
    dir.join("scores12.json")
}

#[test]
fn invalid_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"video_id\": \"v\"}").unwrap();
    fails(&["solve", "--scores", s(&bad), "--out", s(&dir.path().join("o.json"))]);
    let scores = score_map(dir.path(), 4);
    fails(&["solve", "--scores", s(&scores), "--k", "0", "--out", s(&dir.path().join("o.json"))]);
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[solver]\nepsilonn = 3\n").unwrap();
    fails(&["--config", s(&cfg), "grid", "--duration", "10"]);
    fails(&["bogus"]);
}

#[test]
fn baselines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eye.json");
    ok(&["baseline", "eyelevel", "--duration", "30", "--out", s(&out)]);
    let docs = read_trajectories(&out).unwrap();
    assert_eq!(docs.len(), 18);
    assert!(docs.iter().all(|d| d.aggregate_score.is_none()));

    let err = fails(&["baseline", "center", "--duration", "30", "--out", s(&out)]);
    assert!(err.contains("seed"), "{err}");
    let scores = score_map(dir.path(), 6);
    fails(&["baseline", "nostitch", "--scores", s(&scores), "--out", s(&out)]);

    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        ok(&["baseline", "center", "--scores", s(&scores), "--seed", "4", "--out", s(p)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let docs = read_trajectories(&a).unwrap();
    assert_eq!(docs.len(), 20);
    assert_eq!(docs[0].video_id, "vid");
    assert!(docs[0].aggregate_score.is_some());

    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 4\n").unwrap();
    ok(&["--config", s(&cfg), "baseline", "center", "--scores", s(&scores), "--out", s(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    ok(&["baseline", "nostitch", "--scores", s(&scores), "--seed", "1", "--k", "7", "--out", s(&a)]);
    assert_eq!(read_trajectories(&a).unwrap().len(), 7);
}

#[test]
fn interp_and_render() {
    let dir = tempfile::tempdir().unwrap();
    // 10 s at 3 fps: two 5 s steps.
    let frames: Vec<Raster> = (0..30)
        .map(|k| Raster::from_fn(72, 36, 3, |x, y| vec![(x / 72.0) as f32, (y / 36.0) as f32, k as f32 / 30.0]))
        .collect();
    let video = dir.path().join("frames");
    FrameDir::write(&video, 3.0, &frames).unwrap();
    let scores = dir.path().join("s.json");
    ScoreMap::from_fn("v", GlimpseGrid::with_defaults(2).unwrap(), |g| if g.dir.phi() == 100.0 { 1.0 } else { 0.0 })
        .unwrap()
        .save(&scores)
        .unwrap();
    let traj = dir.path().join("t.json");
    ok(&["solve", "--scores", s(&scores), "--k", "2", "--out", s(&traj)]);
    let cont = dir.path().join("c.json");
    ok(&["interp", "--input", s(&traj), "--fps", "3", "--out", s(&cont)]);
    let docs = read_trajectories(&cont).unwrap();
    assert_eq!(docs.len(), 2);
    assert_eq!(docs[0].entries.len(), 30);

    let out = dir.path().join("nfov");
    ok(&["render", "--frames", s(&video), "--trajectory", s(&cont), "--width", "32", "--out", s(&out)]);
    let rendered = FrameDir::open(&out).unwrap();
    let meta = autocam_core::raster::FrameSource::meta(&rendered);
    assert_eq!((meta.width, meta.height, meta.frame_count), (32, 24, 30));
    // Discrete trajectories are interpolated at the source rate.
    let out2 = dir.path().join("nfov2");
    ok(&["render", "--frames", s(&video), "--trajectory", s(&traj), "--width", "32", "--out", s(&out2)]);
    for i in 0..30 {
        let name = autocam_core::raster::frame_file_name(i);
        assert_eq!(std::fs::read(out.join(&name)).unwrap(), std::fs::read(out2.join(&name)).unwrap());
    }
    fails(&["render", "--frames", s(&video), "--trajectory", s(&cont), "--index", "5", "--out", s(&out)]);
}

#[test]
fn standin_scoring_from_frames() {
    let dir = tempfile::tempdir().unwrap();
    let frames: Vec<Raster> = (0..10)
        .map(|_| Raster::from_fn(72, 36, 1, |x, _| vec![if x > 36.0 { ((x as u32) % 2) as f32 } else { 0.5 }]))
        .collect();
    let video = dir.path().join("frames");
    FrameDir::write(&video, 1.0, &frames).unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[camera]\nwidth = 16\n").unwrap();
    let out = dir.path().join("s.json");
    ok(&["--config", s(&cfg), "score", "standin", "--frames", s(&video), "--video-id", "v", "--out", s(&out)]);
    let doc = read_json(&out);
    assert_eq!(doc["video_id"], "v");
    assert_eq!(doc["scores"].as_array().unwrap().len(), 2);
    ok(&["score", "file", "--input", s(&out), "--frames", s(&video), "--out", s(&dir.path().join("s2.json"))]);
    fails(&["score", "file", "--input", s(&out), "--duration", "20", "--out", s(&dir.path().join("s3.json"))]);
}

fn record(id: String, video: &str, label: Label, vector: Vec<f64>) -> FeatureRecord {
    FeatureRecord {
        id,
        video_id: video.into(),
        label,
        vector,
    }
}

#[test]
fn train_then_score_with_model() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GlimpseGrid::with_defaults(2).unwrap();
    // Glimpse features of two videos: first feature is high near the equator.
    let mut glimpses = Vec::new();
    for video in ["a", "b"] {
        for g in grid.glimpses() {
            let key = autocam_core::scoring::glimpse_key(&g);
            glimpses.push(record(key, video, Label::Negative, vec![-g.dir.theta().abs() / 75.0, g.t as f64]));
        }
    }
    let humancam: Vec<FeatureRecord> = (0..20)
        .map(|i| record(format!("h{i}"), "yt", Label::Positive, vec![0.1 * (i % 3) as f64, (i % 2) as f64]))
        .collect();
    let (hp, gp) = (dir.path().join("h.txt"), dir.path().join("g.txt"));
    FeatureSet::new(2, humancam).unwrap().save(&hp).unwrap();
    FeatureSet::new(2, glimpses.clone()).unwrap().save(&gp).unwrap();
    let model = dir.path().join("m.json");
    fails(&["train", "--humancam", s(&hp), "--glimpses", s(&gp), "--heldout", "a", "--out", s(&model)]);
    ok(&["train", "--humancam", s(&hp), "--glimpses", s(&gp), "--heldout", "a", "--seed", "3", "--out", s(&model)]);

    let only_a = dir.path().join("a.txt");
    FeatureSet::new(2, glimpses.into_iter().filter(|r| r.video_id == "a").collect())
        .unwrap()
        .save(&only_a)
        .unwrap();
    let out = dir.path().join("s.json");
    ok(&["score", "model", "--model", s(&model), "--features", s(&only_a), "--duration", "10", "--out", s(&out)]);
    let doc = read_json(&out);
    let step0 = &doc["scores"][0];
    // Equator (index 5) outscores the southernmost row.
    assert!(step0[5][0].as_f64().unwrap() > step0[0][0].as_f64().unwrap());
}

fn human_doc(video: &str, annotator: &str, phi: f64) -> TrajectoryDoc {
    let t = ContinuousTrajectory::new(2.0, vec![Direction::new(0.0, phi).unwrap(); 20]).unwrap();
    let mut d = TrajectoryDoc::from_continuous(video, &t);
    d.annotator = Some(annotator.into());
    d
}

#[test]
fn consistency_of_identical_annotators_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let humans = dir.path().join("h.json");
    write_trajectories(&humans, &[human_doc("v", "a", 40.0), human_doc("v", "b", 40.0), human_doc("w", "a", 0.0), human_doc("w", "c", 0.0)]).unwrap();
    let report = dir.path().join("r.json");
    let table = ok(&["eval", "consistency", "--humans", s(&humans), "--out", s(&report)]);
    assert!(table.contains("HumanEdit"), "{table}");
    let r = read_json(&report);
    assert_eq!(r["rows"][0]["values"], serde_json::json!([1.0, 1.0, 1.0, 1.0]));

    let lonely = dir.path().join("l.json");
    write_trajectories(&lonely, &[human_doc("v", "a", 0.0)]).unwrap();
    fails(&["eval", "consistency", "--humans", s(&lonely)]);
}

#[test]
fn humanedit_eval_ranks_methods() {
    let dir = tempfile::tempdir().unwrap();
    let humans = dir.path().join("h.json");
    write_trajectories(&humans, &[human_doc("v", "a", 40.0), human_doc("v", "b", 60.0)]).unwrap();
    let (good, bad) = (dir.path().join("good.json"), dir.path().join("bad.json"));
    write_trajectories(&good, &[human_doc("v", "x", 40.0)]).unwrap();
    write_trajectories(&bad, &[human_doc("v", "x", 220.0)]).unwrap();
    let report = dir.path().join("r.json");
    let good_arg = format!("good={}", s(&good));
    let bad_arg = format!("bad={}", s(&bad));
    ok(&["eval", "humanedit", "--method", &good_arg, "--method", &bad_arg, "--humans", s(&humans), "--out", s(&report)]);
    let r = read_json(&report);
    assert_eq!(r["rows"][0]["name"], "bad");
    assert_eq!(r["rows"][1]["name"], "good");
    assert_eq!(r["rows"][1]["values"][0], 1.0);
    assert!(r["rows"][0]["values"][0].as_f64().unwrap() < 0.0);
    fails(&["eval", "humanedit", "--method", "nonsense", "--humans", s(&humans)]);
}

#[test]
fn classifier_evals() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut draw = |shift: f64| vec![n.sample(&mut rng) + shift, n.sample(&mut rng)];
    let human: Vec<_> = (0..40).map(|i| record(format!("h{i}"), "yt", Label::Positive, draw(0.0))).collect();
    let near: Vec<_> = (0..40).map(|i| record(format!("n{i}"), &format!("v{}", i % 8), Label::Negative, draw(0.0))).collect();
    let far: Vec<_> = (0..40).map(|i| record(format!("f{i}"), &format!("v{}", i % 8), Label::Negative, draw(6.0))).collect();
    let (hp, np, fp) = (dir.path().join("h.txt"), dir.path().join("n.txt"), dir.path().join("f.txt"));
    FeatureSet::new(2, human).unwrap().save(&hp).unwrap();
    FeatureSet::new(2, near).unwrap().save(&np).unwrap();
    FeatureSet::new(2, far).unwrap().save(&fp).unwrap();
    let near_arg = format!("near={}", s(&np));
    let far_arg = format!("far={}", s(&fp));

    fails(&["eval", "distinguish", "--method", &near_arg, "--human", s(&hp)]);
    let report = dir.path().join("d.json");
    ok(&["eval", "distinguish", "--method", &near_arg, "--method", &far_arg, "--human", s(&hp), "--seed", "1", "--out", s(&report)]);
    let r = read_json(&report);
    let far_err = r["rows"][0]["values"][0].as_f64().unwrap();
    let near_err = r["rows"][1]["values"][0].as_f64().unwrap();
    assert!(far_err < 0.05 && near_err > 0.3, "{far_err} {near_err}");

    let report = dir.path().join("l.json");
    ok(&["eval", "likeness", "--method", &near_arg, "--method", &far_arg, "--human", s(&hp), "--out", s(&report)]);
    let r = read_json(&report);
    assert!(r["rows"][1]["values"][0].as_f64().unwrap() < r["rows"][0]["values"][0].as_f64().unwrap());
    assert_eq!(r["rows"][0]["per_video"].as_object().unwrap().len(), 8);

    let classes = |tag: &str| -> Vec<FeatureRecord> {
        (0..40)
            .map(|i| {
                let c = i % 4;
                record(format!("{tag}{i}"), "v", Label::Class(format!("c{c}")), vec![5.0 * c as f64 + 0.01 * i as f64, (c % 2) as f64])
            })
            .collect()
    };
    let (ap, hp2) = (dir.path().join("auto.txt"), dir.path().join("human.txt"));
    FeatureSet::new(2, classes("a")).unwrap().save(&ap).unwrap();
    FeatureSet::new(2, classes("h")).unwrap().save(&hp2).unwrap();
    let table = ok(&["eval", "transfer", "--auto", s(&ap), "--human", s(&hp2)]);
    assert!(table.contains("Human->Auto") && table.contains("Auto->Human"), "{table}");
}

#[test]
fn analyze_scores_command() {
    let dir = tempfile::tempdir().unwrap();
    let scores = score_map(dir.path(), 3);
    let out = dir.path().join("a.json");
    ok(&["analyze-scores", "--scores", s(&scores), "--out", s(&out)]);
    let r = read_json(&out);
    assert_eq!(r["per_latitude"].as_array().unwrap().len(), 11);
    assert_eq!(r["per_longitude"].as_array().unwrap().len(), 18);
    fails(&["analyze-scores", "--scores", s(&scores), "--hi", "0.4", "--lo", "0.6"]);
}
