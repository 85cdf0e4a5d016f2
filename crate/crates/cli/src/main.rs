//! `eddy`: command-line front end for detection, sweeps, timing, tracking
//! and synthetic scene generation.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eddy_core::harness::{bench, run_method, sweep, MethodOutput};
use eddy_core::io::{
    load_config, load_frame, load_scene, ring_diagnostics, save_frame, to_csv, to_json, track_rows, write_csv, write_json,
    write_text,
};
use eddy_core::synth::compose_scene;
use eddy_core::track::{associate, top_by_radius};
use eddy_core::{presets, Error, ErrorKind, Method, OceanFrame, RunConfig};

#[derive(Parser)]
#[command(name = "eddy", version, about = "Detect and track 3D ocean eddies in gridded fields")]
struct Cli {
    /// Worker threads for candidate-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect eddies in one frame and write a JSON report.
    Detect(DetectArgs),
    /// Rerun detection over a list of values of one parameter.
    Sweep(SweepArgs),
    /// Time several methods on the same frame, single-threaded.
    Bench(BenchArgs),
    /// Detect in every frame and link detections into tracks.
    Track(TrackArgs),
    /// Write frame files for a synthetic scene.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    re: Option<usize>,
    #[arg(long)]
    rv: Option<usize>,
    #[arg(long)]
    rc: Option<usize>,
    #[arg(long)]
    rs: Option<usize>,
    #[arg(long)]
    sv: Option<f64>,
    #[arg(long)]
    sa: Option<f64>,
    #[arg(long)]
    sae: Option<f64>,
    #[arg(long)]
    san: Option<usize>,
    #[arg(long)]
    sd: Option<f64>,
    #[arg(long)]
    sy: Option<f64>,
    #[arg(long = "ow-k")]
    ow_k: Option<f64>,
    #[arg(long = "wa-step")]
    wa_step: Option<f64>,
    /// Any other parameter as NAME=VALUE, e.g. `--set wa-spacing=2`.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct DetectArgs {
    /// Frame header file.
    frame: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Report path; stdout when absent and not set in the config.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Directory for per-eddy ring diagnostics (hybrid only).
    #[arg(long)]
    rings: Option<PathBuf>,
    /// Omit wall-clock timings so the report is byte-stable.
    #[arg(long)]
    stable: bool,
}

#[derive(Args)]
struct SweepArgs {
    frame: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Parameter name, e.g. re, sv, ow-k.
    #[arg(long)]
    param: String,
    /// Comma-separated values; may be empty.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    values: Vec<String>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    frame: PathBuf,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "hybrid,ow,wa")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrackArgs {
    /// Frame header files, in any order; frames are ordered by their index.
    #[arg(required = true)]
    frames: Vec<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[arg(long = "max-displacement")]
    max_displacement: Option<f64>,
    /// Keep only the N tracks with the largest surface radius.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene description in TOML.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    scene: Option<PathBuf>,
    /// Built-in scene name.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "out-dir", short)]
    out_dir: PathBuf,
    #[arg(long, default_value = "frame")]
    stem: String,
    /// Also write the scene's ground truth as JSON.
    #[arg(long)]
    truth: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.method {
            cfg.method = m;
        }
        let numeric = [
            ("re", self.re.map(|v| v as f64)),
            ("rv", self.rv.map(|v| v as f64)),
            ("rc", self.rc.map(|v| v as f64)),
            ("rs", self.rs.map(|v| v as f64)),
            ("sv", self.sv),
            ("sa", self.sa),
            ("sae", self.sae),
            ("san", self.san.map(|v| v as f64)),
            ("sd", self.sd),
            ("sy", self.sy),
            ("ow-k", self.ow_k),
            ("wa-step", self.wa_step),
        ];
        for (name, v) in numeric {
            if let Some(v) = v {
                cfg.set(name, v)?;
            }
        }
        for kv in &self.set {
            let (name, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects NAME=VALUE, got {kv:?}")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("--set {name}: {value:?} is not a number")))?;
            cfg.set(name.trim(), value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes to `out`, or stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_text(p, text),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn detect(args: DetectArgs) -> Result<(), Error> {
    let cfg = args.common.resolve()?;
    let frame = load_frame(&args.frame)?;
    let output = run_method(&frame, &cfg, cfg.method)?;
    let json = match (&output, args.stable) {
        (MethodOutput::Hybrid(r), true) => r.stable_json() + "\n",
        _ => to_json(&output)?,
    };
    let out = args.out.or(cfg.output.report.clone());
    emit(out.as_deref(), &json)?;
    if let Some(dir) = args.rings.or(cfg.output.rings.clone()) {
        write_rings(&frame, &output, &dir)?;
    }
    Ok(())
}

fn write_rings(frame: &OceanFrame, output: &MethodOutput, dir: &Path) -> Result<(), Error> {
    let MethodOutput::Hybrid(report) = output else {
        return Err(Error::Config("ring diagnostics need the hybrid method".into()));
    };
    for e in &report.eddies {
        write_csv(&dir.join(format!("eddy_{:04}.csv", e.id)), &ring_diagnostics(frame, e)?)?;
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), Error> {
    let cfg = args.common.resolve()?;
    let frame = load_frame(&args.frame)?;
    let values = args
        .values
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Config(format!("--values: {s:?} is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = sweep(&frame, &cfg, &args.param, &values)?;
    emit(args.out.as_deref(), &to_csv(&rows)?)
}

fn run_bench(args: BenchArgs) -> Result<(), Error> {
    let cfg = args.common.resolve()?;
    let frame = load_frame(&args.frame)?;
    let rows = bench(&frame, &cfg, &args.methods, args.repetitions)?;
    emit(args.out.as_deref(), &to_csv(&rows)?)
}

fn run_track(args: TrackArgs) -> Result<(), Error> {
    let mut cfg = args.common.resolve()?;
    if let Some(d) = args.max_displacement {
        cfg.set("max-displacement", d)?;
        cfg.validate()?;
    }
    if args.frames.len() < 2 {
        return Err(Error::Config(format!("tracking needs at least 2 frames, got {}", args.frames.len())));
    }
    let mut frames = args.frames.iter().map(|p| load_frame(p)).collect::<Result<Vec<_>, _>>()?;
    frames.sort_by_key(|f| f.frame_index);
    if let Some(w) = frames.windows(2).find(|w| w[0].frame_index == w[1].frame_index) {
        return Err(Error::Shape(format!("two frames share index {}", w[0].frame_index)));
    }
    let reports = frames
        .iter()
        .map(|f| match run_method(f, &cfg, Method::Hybrid)? {
            MethodOutput::Hybrid(r) => Ok(r),
            _ => unreachable!(),
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut tracks = associate(&reports, &cfg.track)?;
    if let Some(n) = args.top {
        tracks = top_by_radius(&tracks, n);
    }
    let out = args.out.or(cfg.output.tracks.clone());
    emit(out.as_deref(), &to_csv(&track_rows(&tracks))?)
}

fn run_synth(args: SynthArgs) -> Result<(), Error> {
    let scene = match (&args.scene, &args.preset) {
        (Some(p), _) => load_scene(p)?,
        (None, Some(name)) => presets::by_name(name)?,
        (None, None) => unreachable!("clap requires one"),
    };
    let frames = compose_scene(&scene)?;
    for f in &frames {
        let path = save_frame(f, &args.out_dir, &format!("{}_{:03}", args.stem, f.frame_index))?;
        println!("{}", path.display());
    }
    if args.truth {
        let truth: Vec<_> = (0..scene.frames).map(|f| scene.ground_truth(f)).collect();
        write_json(&args.out_dir.join(format!("{}_truth.json", args.stem)), &truth)?;
    }
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Io => 3,
        ErrorKind::Data => 4,
    }
}

fn label(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Config => "config",
        ErrorKind::Io => "io",
        ErrorKind::Data => "data",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[config]: {first}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error[config]: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Detect(a) => detect(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Bench(a) => run_bench(a),
        Command::Track(a) => run_track(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            eprintln!("error[{}]: {}", label(kind), e.to_string().replace('\n', " "));
            ExitCode::from(exit_code(kind))
        }
    }
}
