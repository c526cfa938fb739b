use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use arnav::drift::{
    default_hologram_in_anchor, run_drift_trace, simulate_drift_trace, AnchorBinding, Displacement, DriftSimConfig,
    PoseEventKind,
};
use arnav::io::frames::{read_frames, ParseMode};
use arnav::io::report::{build_report, emit_report, parse_report, parse_trials, ReportFormat};
use arnav::io::scene::{read_annotations, read_scene, write_scene_file, Scene};
use arnav::io::trace::{read_trace, write_trace_file};
use arnav::io::vertices::read_vertices;
use arnav::io::{to_json_string, InputDigest};
use arnav::metrics::{ExperimentKind, TipAggregate, TrialResult};
use arnav::pipeline::{assess_trial, AssessOptions};
use arnav::probe::GroundTruthOptions;
use arnav::sphere::{fit_sphere, fit_sphere_algebraic};
use arnav::stability::stability_report;
use arnav::stats::{pooled, z_test, Pooling};
use arnav::synth::{generate_session, SceneConfig, UserErrorModel};
use arnav::{solve_rigid, Error, LabeledPointSet, Result};

#[derive(Parser)]
#[command(name = "arnav", version, about = "Error assessment for tracked AR neuronavigation sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a sphere to an `x y z` vertex list.
    FitSphere {
        vertices: PathBuf,
        /// Report the algebraic fit without geometric refinement.
        #[arg(long)]
        no_refine: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Rigid registration between two labeled point sets (JSON arrays).
    Register {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Assess trials: frames plus annotations against a scene's models.
    Assess {
        #[arg(long)]
        scene: PathBuf,
        /// Marker frames and annotation file of one trial; repeatable.
        #[arg(long, num_args = 2, value_names = ["FRAMES", "ANNOTATIONS"], required = true)]
        trial: Vec<PathBuf>,
        /// Expected per-axis tracker noise, for the static-phantom check (mm).
        #[arg(long, default_value_t = 0.25)]
        noise_sd: f64,
        #[arg(long, default_value = "max")]
        tip_aggregate: TipAggregate,
        #[arg(long, default_value = "summary")]
        pooling: Pooling,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Static-marker repeatability and rigid-body distance spread.
    Stability {
        #[arg(long)]
        frames: PathBuf,
        /// Comma-separated labels of markers held still.
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        /// Comma-separated labels of markers on one rigid body.
        #[arg(long, value_delimiter = ',')]
        body: Vec<String>,
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Two-sample Z-test, from six scalars or two report files.
    Ztest {
        /// mean1 sd1 n1 mean2 sd2 n2
        #[arg(num_args = 6, value_names = ["M1", "S1", "N1", "M2", "S2", "N2"], allow_negative_numbers = true)]
        values: Vec<String>,
        #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "values")]
        reports: Vec<PathBuf>,
        /// Experiment to take from the first report (default: its first).
        #[arg(long)]
        kind_a: Option<ExperimentKind>,
        #[arg(long)]
        kind_b: Option<ExperimentKind>,
        #[arg(long, default_value = "summary")]
        pooling: Pooling,
        #[command(flatten)]
        out: Output,
    },
    /// Simulate or replay anchor drift and report hologram displacement.
    DriftSim {
        /// Replay this JSON-lines trace instead of simulating.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Anchor binding JSON used with --trace.
        #[arg(long, requires = "trace")]
        binding: Option<PathBuf>,
        #[command(flatten)]
        sim: DriftArgs,
        /// Also write the simulated trace.
        #[arg(long, conflicts_with = "trace")]
        write_trace: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Generate a synthetic session with a ground-truth ledger.
    Simulate {
        /// Scene file; the built-in synthetic scene when absent.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        kind: ExperimentKind,
        #[arg(long, default_value_t = 0.0)]
        user_bias: f64,
        #[arg(long, default_value_t = 3.0)]
        user_sd: f64,
        /// Overrides the scene's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Build a report from trial lists or earlier reports.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long, default_value = "summary")]
        pooling: Pooling,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

#[derive(Args)]
struct DriftArgs {
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 50)]
    detect_every: usize,
    #[arg(long, default_value_t = 0.2)]
    step_translation: f64,
    #[arg(long, default_value_t = 0.05)]
    step_rotation_deg: f64,
    #[arg(long, default_value_t = 0.0)]
    anchor_noise_sd: f64,
    #[arg(long, default_value_t = 0.0)]
    anchor_noise_rot_deg: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct DriftSummary {
    events: usize,
    detections: usize,
    max_translation_mm: f64,
    max_rotation_deg: f64,
    max_translation_at_detection_mm: f64,
    max_rotation_at_detection_deg: f64,
    displacements: Vec<Displacement>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARNAV_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::FitSphere { vertices, no_refine, out } => {
            let points = read_vertices(&vertices)?;
            let fit = if no_refine { fit_sphere_algebraic(&points)? } else { fit_sphere(&points)? };
            out.emit(&to_json_string(&fit)?)
        }
        Command::Register { source, target, out } => {
            let result = solve_rigid(&read_point_set(&source)?, &read_point_set(&target)?)?;
            out.emit(&to_json_string(&result)?)
        }
        Command::Assess { scene, trial, noise_sd, tip_aggregate, pooling, format, strict, out } => {
            let mut inputs = vec![InputDigest::of_file(&scene)?];
            let scene = read_scene(&scene)?;
            let options = AssessOptions {
                ground_truth: GroundTruthOptions { noise_sd, ..Default::default() },
                tip_aggregate,
            };
            let mut trials: Vec<TrialResult> = Vec::new();
            for pair in trial.chunks(2) {
                let frames = load_frames(&pair[0], strict)?;
                let annotations = read_annotations(&pair[1])?;
                inputs.push(InputDigest::of_file(&pair[0])?);
                inputs.push(InputDigest::of_file(&pair[1])?);
                let a = assess_trial(&scene.config.probe, &scene.config.phantom, &frames, &annotations, &options)?;
                log::info!(
                    "{}: error {:.3} mm, probe FRE {:.3} mm, phantom FRE {:.3} mm",
                    a.result.trial_id,
                    a.result.error_mean,
                    a.probe_fre_mean,
                    a.ground_truth.registration_fre
                );
                trials.push(a.result);
            }
            let report = build_report(inputs, &trials, pooling)?;
            out.emit(&emit_report(&report, format)?)
        }
        Command::Stability { frames, labels, body, strict, out } => {
            let stream = load_frames(&frames, strict)?;
            let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
            let body: Vec<&str> = body.iter().map(String::as_str).collect();
            let report = stability_report(&stream, &labels, &body)?;
            out.emit(&to_json_string(&report)?)
        }
        Command::Ztest { values, reports, kind_a, kind_b, pooling, out } => {
            let result = if reports.is_empty() {
                if values.len() != 6 {
                    return Err(Error::InvalidArgument("expected M1 S1 N1 M2 S2 N2 or --reports A B".into()));
                }
                let f = |i: usize| -> Result<f64> {
                    values[i].parse().map_err(|_| Error::InvalidArgument(format!("not a number: {:?}", values[i])))
                };
                let n = |i: usize| -> Result<usize> {
                    values[i].parse().map_err(|_| Error::InvalidArgument(format!("not a count: {:?}", values[i])))
                };
                z_test(f(0)?, f(1)?, n(2)?, f(3)?, f(4)?, n(5)?)?
            } else {
                let a = report_experiment(&reports[0], kind_a, pooling)?;
                let b = report_experiment(&reports[1], kind_b, pooling)?;
                z_test(a.mean, a.sd, a.n, b.mean, b.sd, b.n)?
            };
            out.emit(&to_json_string(&result)?)
        }
        Command::DriftSim { trace, binding, sim, write_trace, out } => {
            let (events, binding) = match trace {
                Some(path) => {
                    let binding = match binding {
                        Some(b) => read_json::<AnchorBinding>(&b)?,
                        None => AnchorBinding { hologram_in_anchor: default_hologram_in_anchor() },
                    };
                    (read_trace(&path)?, binding)
                }
                None => {
                    let config = DriftSimConfig {
                        steps: sim.steps,
                        detect_every: sim.detect_every,
                        step_translation: sim.step_translation,
                        step_rotation_deg: sim.step_rotation_deg,
                        anchor_noise_sd: sim.anchor_noise_sd,
                        anchor_noise_rot_deg: sim.anchor_noise_rot_deg,
                        seed: sim.seed,
                        ..Default::default()
                    };
                    let events = simulate_drift_trace(&config);
                    if let Some(path) = write_trace {
                        write_trace_file(&events, path)?;
                    }
                    (events, AnchorBinding { hologram_in_anchor: default_hologram_in_anchor() })
                }
            };
            let displacements = run_drift_trace(&events, &binding, &binding.hologram_in_anchor)?;
            let detections: Vec<&Displacement> =
                displacements.iter().filter(|d| d.kind == PoseEventKind::AnchorDetected).collect();
            let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
            let summary = DriftSummary {
                events: displacements.len(),
                detections: detections.len(),
                max_translation_mm: max(&mut displacements.iter().map(|d| d.translation_mm)),
                max_rotation_deg: max(&mut displacements.iter().map(|d| d.rotation_deg)),
                max_translation_at_detection_mm: max(&mut detections.iter().map(|d| d.translation_mm)),
                max_rotation_at_detection_deg: max(&mut detections.iter().map(|d| d.rotation_deg)),
                displacements,
            };
            out.emit(&to_json_string(&summary)?)
        }
        Command::Simulate { scene, kind, user_bias, user_sd, seed, out_dir } => {
            if user_sd.is_nan() || user_sd < 0.0 || !user_bias.is_finite() {
                return Err(Error::InvalidArgument("user error SD must be non-negative".into()));
            }
            let mut config = match scene {
                Some(path) => read_scene(path)?.config,
                None => SceneConfig::synthetic_default(),
            };
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let session = generate_session(&config, kind, &UserErrorModel { bias: user_bias, sd: user_sd });
            session.write_to(&out_dir)?;
            write_scene_file(&Scene { config, annotations: None }, out_dir.join("scene.json"))
        }
        Command::Report { inputs, format, pooling, out } => {
            let mut digests = Vec::with_capacity(inputs.len());
            let mut trials = Vec::new();
            for path in &inputs {
                let bytes = std::fs::read(path)?;
                digests.push(InputDigest::of_bytes(path.display().to_string(), &bytes));
                let text = String::from_utf8(bytes)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
                trials.extend(parse_trials(&text)?);
            }
            let report = build_report(digests, &trials, pooling)?;
            out.emit(&emit_report(&report, format)?)
        }
    }
}

fn load_frames(path: &Path, strict: bool) -> Result<arnav::MarkerFrameStream> {
    let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
    let parsed = read_frames(path, mode)?;
    for d in &parsed.diagnostics {
        log::warn!("{}:{}:{}: {} (row skipped)", path.display(), d.line, d.column, d.reason);
    }
    Ok(parsed.stream)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })
}

fn read_point_set(path: &Path) -> Result<LabeledPointSet> {
    read_json(path)
}

fn report_experiment(
    path: &Path,
    kind: Option<ExperimentKind>,
    pooling: Pooling,
) -> Result<arnav::metrics::PooledStats> {
    let report = parse_report(&std::fs::read_to_string(path)?)?;
    let summary = match kind {
        Some(k) => report.experiment(k),
        None => report.experiments.first(),
    }
    .ok_or_else(|| Error::InvalidArgument(format!("{}: no matching experiment", path.display())))?;
    pooled(summary, pooling)
}
