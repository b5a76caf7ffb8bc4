use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use autocam_annotate::AnnotationService;
use autocam_core::baselines::{center_baseline, eye_level_baseline, no_stitch_sample, RngSeed};
use autocam_core::grid::GlimpseGrid;
use autocam_core::metrics::{
    consistency_report, distinguishability, evaluate_humanedit, humancam_likeness, humanedit_report, transferability,
    HumanAnnotation, HumanEditConfig, MetricReport, ReportRow,
};
use autocam_core::raster::{FrameDir, FrameSource};
use autocam_core::render::{render_to_dir, RenderJob};
use autocam_core::scoring::{
    analyze_scores, assemble_training_set, load_score_map, score_glimpses, standin_score_map, train_worthiness,
    FeatureSet, ScoreMap, StandinScorer, WorthinessModel,
};
use autocam_core::solver::{aggregate_score, interpolate, solve_topk};
use autocam_core::trajectory::{
    read_trajectories, write_trajectories, ContinuousTrajectory, DiscreteTrajectory, TrajectoryDoc, TrajectoryKind,
};
use serde::Serialize;

use crate::config::PipelineConfig;
// Writes to stdout, returning an error (rather than panicking) when the
// reader has gone away.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        writeln!(std::io::stdout().lock(), $($arg)*)?
    }};
}

use crate::{BaselineCommand, BaselineGrid, Cli, Command, EvalCommand, GridSource, ScoreCommand};

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn duration_of(source: &GridSource) -> Result<Option<f64>> {
    Ok(match (&source.duration, &source.frames) {
        (Some(d), _) => Some(*d),
        (None, Some(dir)) => Some(FrameDir::open(dir)?.meta().duration()),
        (None, None) => None,
    })
}

fn grid_for(cfg: &PipelineConfig, source: &GridSource) -> Result<GlimpseGrid> {
    let duration = duration_of(source)?.ok_or_else(|| anyhow!("give --duration or --frames"))?;
    Ok(cfg.grid.build(duration)?)
}

fn save_discrete(path: &Path, video_id: &str, interval: f64, trajs: &[DiscreteTrajectory], scored: bool) -> Result<()> {
    let docs: Vec<TrajectoryDoc> = trajs
        .iter()
        .map(|t| {
            let mut doc = TrajectoryDoc::from_discrete(video_id, interval, t);
            if !scored {
                doc.aggregate_score = None;
            }
            doc
        })
        .collect();
    Ok(write_trajectories(path, &docs)?)
}

/// Per-frame directions of any trajectory document; discrete ones are
/// interpolated at `fps`.
fn continuous_of(doc: &TrajectoryDoc, fps: f64) -> Result<ContinuousTrajectory> {
    Ok(match doc.kind {
        TrajectoryKind::Continuous => doc.to_continuous()?,
        TrajectoryKind::Discrete => interpolate(
            &doc.to_discrete()?,
            fps,
            doc.interval_seconds.expect("validated by to_discrete"),
        )?,
    })
}

fn load_grouped(files: &[PathBuf], fps: f64) -> Result<BTreeMap<String, Vec<ContinuousTrajectory>>> {
    let mut out: BTreeMap<String, Vec<ContinuousTrajectory>> = BTreeMap::new();
    for f in files {
        for doc in read_trajectories(f)? {
            let t = continuous_of(&doc, fps).with_context(|| format!("in {}", f.display()))?;
            out.entry(doc.video_id.clone()).or_default().push(t);
        }
    }
    Ok(out)
}

/// Splits repeated `NAME=PATH` arguments, keeping first-seen order of
/// names irrelevant (reports are sorted by name).
fn parse_methods(args: &[String]) -> Result<BTreeMap<String, Vec<PathBuf>>> {
    let mut out: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for a in args {
        let (name, path) = a
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| anyhow!("expected NAME=PATH, got {a:?}"))?;
        out.entry(name.to_string()).or_default().push(PathBuf::from(path));
    }
    Ok(out)
}

fn load_feature_methods(args: &[String]) -> Result<BTreeMap<String, FeatureSet>> {
    parse_methods(args)?
        .into_iter()
        .map(|(name, paths)| {
            if paths.len() != 1 {
                bail!("method {name} given {} feature files, expected one", paths.len());
            }
            Ok((name, FeatureSet::load(&paths[0])?))
        })
        .collect()
}

fn emit(report: &MetricReport, out: Option<&Path>) -> Result<()> {
    outln!("{}", report.to_table().trim_end_matches('\n'));
    if let Some(path) = out {
        report.save_json(path)?;
    }
    Ok(())
}

fn single_column(title: &str, column: &str, rows: Vec<(String, f64)>) -> MetricReport {
    MetricReport {
        title: title.to_string(),
        columns: vec![column.to_string()],
        rows: rows
            .into_iter()
            .map(|(name, v)| ReportRow {
                name,
                values: vec![v],
                per_video: BTreeMap::new(),
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct GridDoc<'a> {
    interval_seconds: f64,
    latitudes: &'a [f64],
    longitudes: &'a [f64],
    num_steps: usize,
    cells_per_step: usize,
    glimpses: usize,
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Grid { source, out } => {
            let grid = grid_for(&cfg, &source)?;
            let doc = GridDoc {
                interval_seconds: grid.interval(),
                latitudes: grid.latitudes(),
                longitudes: grid.longitudes(),
                num_steps: grid.num_steps(),
                cells_per_step: grid.cells_per_step(),
                glimpses: grid.len(),
            };
            match out {
                Some(p) => write_json(&p, &doc)?,
                None => outln!("{}", serde_json::to_string_pretty(&doc)?),
            }
        }
        Command::Score(cmd) => score(&cfg, cmd)?,
        Command::Train {
            humancam,
            glimpses,
            heldout,
            seed,
            c,
            out,
        } => {
            let seed = cfg.seed(seed, "train")?;
            let set = assemble_training_set(&FeatureSet::load(&humancam)?, &FeatureSet::load(&glimpses)?, &heldout, seed)?;
            let report = train_worthiness(&set, c.unwrap_or(cfg.scoring.c))?;
            if !report.converged {
                log::warn!("training stopped after {} iterations, gradient norm {:.3e}", report.iterations, report.grad_norm);
            }
            write_json(&out, &report.model)?;
            outln!(
                "trained on {} records: {} iterations, final loss {:.6}",
                set.len(),
                report.iterations,
                report.loss_trace.last().copied().unwrap_or(f64::NAN)
            );
        }
        Command::Solve { scores, epsilon, k, out } => {
            let map = load_score_map(&scores, None)?;
            let trajs = solve_topk(&map, epsilon.unwrap_or(cfg.solver.epsilon), k.unwrap_or(cfg.solver.k))?;
            save_discrete(&out, map.video_id(), map.grid().interval(), &trajs, true)?;
            outln!("wrote {} trajectories to {}", trajs.len(), out.display());
        }
        Command::Baseline(cmd) => baseline(&cfg, cmd)?,
        Command::Interp { input, fps, out } => {
            let docs = read_trajectories(&input)?
                .iter()
                .map(|d| {
                    let t = continuous_of(d, fps)?;
                    let mut c = TrajectoryDoc::from_continuous(&d.video_id, &t);
                    c.annotator = d.annotator.clone();
                    Ok(c)
                })
                .collect::<Result<Vec<_>>>()?;
            write_trajectories(&out, &docs)?;
        }
        Command::Render {
            frames,
            trajectory,
            index,
            width,
            out,
        } => {
            let src = FrameDir::open(&frames)?;
            let docs = read_trajectories(&trajectory)?;
            let doc = docs
                .get(index)
                .ok_or_else(|| anyhow!("{} holds {} trajectories, no index {index}", trajectory.display(), docs.len()))?;
            let traj = continuous_of(doc, src.meta().fps)?;
            let mut cam = cfg.camera.clone();
            if let Some(w) = width {
                cam.width = w;
            }
            let meta = render_to_dir(
                &RenderJob {
                    frames: &src,
                    trajectory: &traj,
                    cam: cam.build()?,
                    parallel: true,
                },
                &out,
            )?;
            outln!("rendered {} frames to {}", meta.frame_count, out.display());
        }
        Command::Eval(cmd) => eval(&cfg, cmd)?,
        Command::AnalyzeScores { scores, hi, lo, out } => {
            let maps = scores
                .iter()
                .map(|p| load_score_map(p, None))
                .collect::<autocam_core::Result<Vec<ScoreMap>>>()?;
            let dist = analyze_scores(&maps, hi.unwrap_or(cfg.metrics.hi), lo.unwrap_or(cfg.metrics.lo))?;
            match out {
                Some(p) => write_json(&p, &dist)?,
                None => outln!("{}", serde_json::to_string_pretty(&dist)?),
            }
        }
        Command::Serve { videos, out, addr } => {
            let svc = AnnotationService::open(&videos, &out)?;
            tokio::runtime::Runtime::new()?.block_on(autocam_annotate::serve(svc, addr))?;
        }
    }
    Ok(())
}

fn score(cfg: &PipelineConfig, cmd: ScoreCommand) -> Result<()> {
    let (map, out) = match cmd {
        ScoreCommand::File { input, source, out } => {
            let grid = match duration_of(&source)? {
                Some(d) => Some(cfg.grid.build(d)?),
                None => None,
            };
            (load_score_map(&input, grid.as_ref())?, out)
        }
        ScoreCommand::Standin { frames, video_id, out } => {
            let src = FrameDir::open(&frames)?;
            let grid = cfg.grid.build(src.meta().duration())?;
            let scorer = StandinScorer::new(cfg.scoring.alpha, cfg.scoring.beta)?;
            let map = standin_score_map(
                &video_id,
                &src,
                &grid,
                &cfg.camera.build()?,
                &scorer,
                cfg.scoring.frame_stride,
            )?;
            (map, out)
        }
        ScoreCommand::Model {
            model,
            features,
            source,
            out,
        } => {
            let model: WorthinessModel = read_json(&model)?;
            let grid = grid_for(cfg, &source)?;
            (score_glimpses(&model, &FeatureSet::load(&features)?, &grid)?, out)
        }
    };
    map.save(&out)?;
    Ok(())
}

fn baseline_grid(cfg: &PipelineConfig, g: &BaselineGrid) -> Result<(GlimpseGrid, String, Option<ScoreMap>)> {
    match &g.scores {
        Some(p) => {
            let map = load_score_map(p, None)?;
            Ok((map.grid().clone(), map.video_id().to_string(), Some(map)))
        }
        None => Ok((grid_for(cfg, &g.source)?, g.video_id.clone(), None)),
    }
}

fn with_scores(map: &Option<ScoreMap>, mut trajs: Vec<DiscreteTrajectory>) -> Vec<DiscreteTrajectory> {
    if let Some(m) = map {
        for t in &mut trajs {
            t.aggregate_score = aggregate_score(m, t).expect("lattice trajectory");
        }
    }
    trajs
}

fn baseline(cfg: &PipelineConfig, cmd: BaselineCommand) -> Result<()> {
    match cmd {
        BaselineCommand::Center {
            grid,
            k,
            sigma,
            seed,
            out,
        } => {
            let seed = cfg.seed(seed, "baseline center")?;
            let (g, video, map) = baseline_grid(cfg, &grid)?;
            let trajs = center_baseline(
                &g,
                k.unwrap_or(cfg.solver.k),
                sigma.unwrap_or(cfg.baseline.sigma),
                RngSeed(seed),
            )?;
            save_discrete(&out, &video, g.interval(), &with_scores(&map, trajs), map.is_some())?;
        }
        BaselineCommand::Eyelevel { grid, out } => {
            let (g, video, map) = baseline_grid(cfg, &grid)?;
            let trajs = eye_level_baseline(&g)?;
            outln!("wrote {} trajectories to {}", trajs.len(), out.display());
            save_discrete(&out, &video, g.interval(), &with_scores(&map, trajs), map.is_some())?;
        }
        BaselineCommand::Nostitch {
            scores,
            k,
            temperature,
            seed,
            out,
        } => {
            let seed = cfg.seed(seed, "baseline nostitch")?;
            let map = load_score_map(&scores, None)?;
            let trajs = no_stitch_sample(
                &map,
                k.unwrap_or(cfg.solver.k),
                temperature.unwrap_or(cfg.baseline.temperature),
                RngSeed(seed),
            )?;
            save_discrete(&out, map.video_id(), map.grid().interval(), &trajs, true)?;
        }
    }
    Ok(())
}

fn eval(cfg: &PipelineConfig, cmd: EvalCommand) -> Result<()> {
    let he = HumanEditConfig {
        fps: cfg.metrics.fps,
        fov: cfg.metrics.overlap_fov,
    };
    match cmd {
        EvalCommand::Humanedit { methods, humans, out } => {
            let humans = load_grouped(&humans, he.fps)?;
            let mut summaries = BTreeMap::new();
            for (name, files) in parse_methods(&methods)? {
                let generated = load_grouped(&files, he.fps)?;
                let s = evaluate_humanedit(&generated, &humans, &he).with_context(|| format!("method {name}"))?;
                summaries.insert(name, s);
            }
            emit(&humanedit_report("HumanEdit similarity", &summaries), out.as_deref())?;
        }
        EvalCommand::Consistency { humans, out } => {
            let mut annotations = Vec::new();
            for f in &humans {
                for doc in read_trajectories(f)? {
                    let annotator = doc
                        .annotator
                        .clone()
                        .ok_or_else(|| anyhow!("{}: trajectory of {} has no annotator", f.display(), doc.video_id))?;
                    annotations.push(HumanAnnotation {
                        trajectory: continuous_of(&doc, he.fps)?,
                        video_id: doc.video_id,
                        annotator,
                    });
                }
            }
            let s = consistency_report(&annotations, &he)?;
            let report = humanedit_report("HumanEdit consistency", &BTreeMap::from([("HumanEdit".to_string(), s)]));
            emit(&report, out.as_deref())?;
        }
        EvalCommand::Distinguish {
            methods,
            human,
            folds,
            seed,
            out,
        } => {
            let seed = cfg.seed(seed, "eval distinguish")?;
            let human = FeatureSet::load(&human)?;
            let folds = folds.unwrap_or(cfg.metrics.folds);
            let rows = load_feature_methods(&methods)?
                .into_iter()
                .map(|(name, gen)| {
                    let d = distinguishability(&gen, &human, folds, seed).with_context(|| format!("method {name}"))?;
                    Ok((name, d.error_rate))
                })
                .collect::<Result<Vec<_>>>()?;
            emit(&single_column("Distinguishability", "error rate", rows), out.as_deref())?;
        }
        EvalCommand::Likeness { methods, human, out } => {
            let likeness = humancam_likeness(&load_feature_methods(&methods)?, &FeatureSet::load(&human)?)?;
            let mut report = single_column("HumanCam-likeness", "mean rank", likeness.per_method.clone().into_iter().collect());
            for row in &mut report.rows {
                for (video, ranks) in &likeness.per_video {
                    if let Some(r) = ranks.get(&row.name) {
                        row.per_video.insert(video.clone(), vec![*r]);
                    }
                }
            }
            emit(&report, out.as_deref())?;
        }
        EvalCommand::Transfer { auto, human, out } => {
            let (auto, human) = (FeatureSet::load(&auto)?, FeatureSet::load(&human)?);
            let rows = vec![
                ("Human->Auto".to_string(), transferability(&human, &auto)?),
                ("Auto->Human".to_string(), transferability(&auto, &human)?),
            ];
            emit(&single_column("Transferability", "accuracy", rows), out.as_deref())?;
        }
    }
    Ok(())
}
