//! The `ris` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime error (one-line diagnostic on stderr),
//! 2 usage error. File artifacts are written to a temporary file in the
//! target directory and renamed into place.

use std::error::Error;
use std::fmt::Write as _;
use std::io::Write as _;
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::optimizer::{
    exhaustive, genetic, greedy_flip, random_search, ChannelObjective, GeneticParams, SearchReport,
};
use crate::protocol::transport::SerialTransport;
use crate::protocol::{self, Client, Emulator, Transport, VirtualChannel};
use crate::response::{ElementResponse, IdealResponse, ReflectionModel, StateTag, CSV_HEADER};
use crate::solver::{beam_pattern, peak_direction, reflection_sweep, DirectionGrid, Scene};
use crate::surface::{ideal_phase_profile, quantize_1bit, Pattern, SurfaceGeometry};
use crate::vector::Vec3;

type CliResult<T = ()> = Result<T, Box<dyn Error>>;

/// Environment variable naming the default dataset.
pub const DATASET_ENV: &str = "RIS_DATASET";
/// Environment variable overriding the emulator TCP port.
pub const PORT_ENV: &str = "RIS_EMULATOR_PORT";

#[derive(Debug, Parser)]
#[command(
    name = "ris",
    version,
    about = "Binary-phase RIS digital twin and controller"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a reflection CSV and print its band statistics.
    Ingest(IngestArgs),
    /// Uniform-pattern reflection versus frequency, as a re-ingestable CSV.
    Sweep(SweepArgs),
    /// Synthesize a 1-bit steering pattern and its beam cut.
    Steer(SteerArgs),
    /// Pattern generators and hex codec.
    Pattern(PatternArgs),
    /// Search for the pattern maximizing received power.
    Optimize(OptimizeArgs),
    /// Serve the device emulator over TCP.
    Emulate(EmulateArgs),
    /// Talk to a device or emulator.
    Control(ControlArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Reflection CSV (defaults to the bundled dataset).
    #[arg(long, env = DATASET_ENV)]
    data: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> CliResult<(ElementResponse, Vec<String>)> {
        match &self.data {
            None => Ok((ElementResponse::anchored(), Vec::new())),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                let ingested = ElementResponse::from_csv(&text)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                let warnings = ingested.warnings.iter().map(ToString::to_string).collect();
                Ok((ingested.response, warnings))
            }
        }
    }
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[arg(long, default_value_t = 16)]
    nx: usize,
    #[arg(long, default_value_t = 16)]
    ny: usize,
    /// Column pitch in mm.
    #[arg(long, default_value_t = 20.0)]
    pitch_x: f64,
    /// Row pitch in mm.
    #[arg(long, default_value_t = 13.0)]
    pitch_y: f64,
}

impl GeometryArgs {
    fn build(&self) -> CliResult<SurfaceGeometry> {
        Ok(SurfaceGeometry::new(
            self.nx,
            self.ny,
            self.pitch_x,
            self.pitch_y,
        )?)
    }
}

#[derive(Debug, Args)]
struct SceneArgs {
    /// Transmitter position in meters, `x,y,z`.
    #[arg(long, default_value = "-0.6,0.2,1.5", value_parser = parse_vec3, allow_hyphen_values = true)]
    tx: Vec3,
    /// Receiver position in meters, `x,y,z`.
    #[arg(long, default_value = "0.8,-0.3,2.0", value_parser = parse_vec3, allow_hyphen_values = true)]
    rx: Vec3,
    /// Cosine element-factor exponent.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
}

impl SceneArgs {
    fn build(&self, freq_ghz: f64) -> Scene {
        Scene::spherical(self.tx, self.rx, freq_ghz).with_q(self.q)
    }
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("expected x,y,z: {e}"))?;
    match parts[..] {
        [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected three finite numbers x,y,z, got {s:?}")),
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// CSV to validate.
    path: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, default_value_t = 5.1)]
    from: f64,
    #[arg(long, default_value_t = 5.9)]
    to: f64,
    /// Frequency step in GHz.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Output CSV (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SteerArgs {
    /// Target polar angle in degrees.
    #[arg(long)]
    theta: f64,
    /// Target azimuth in degrees.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Polar angle the wave arrives from.
    #[arg(long, default_value_t = 0.0)]
    inc_theta: f64,
    /// Azimuth the wave arrives from.
    #[arg(long, default_value_t = 0.0)]
    inc_phi: f64,
    #[arg(long, default_value_t = 5.5)]
    freq: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Use an ideal lossless 0/180 degree element instead of the dataset.
    #[arg(long)]
    ideal: bool,
    /// Beam cut step in degrees.
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Beam cut CSV through the target azimuth.
    #[arg(long)]
    beam_out: Option<PathBuf>,
    /// File receiving the pattern hex.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also print the pattern as ASCII art.
    #[arg(long)]
    ascii: bool,
}

#[derive(Debug, Args)]
struct PatternArgs {
    #[command(subcommand)]
    kind: PatternKind,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Also print the pattern as ASCII art.
    #[arg(long, global = true)]
    ascii: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StateArg {
    Off,
    On,
}

impl From<StateArg> for StateTag {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Off => StateTag::Off,
            StateArg::On => StateTag::On,
        }
    }
}

#[derive(Debug, Subcommand)]
enum PatternKind {
    Uniform {
        #[arg(long, value_enum, default_value = "off")]
        state: StateArg,
    },
    Checkerboard,
    /// Alternating column stripes.
    Stripes {
        #[arg(long, default_value_t = 2)]
        period: usize,
    },
    /// Validate and pretty-print a hex pattern.
    Decode {
        hex: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    Exhaustive,
    Random,
    Genetic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Off,
    On,
    Random,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long, value_enum, default_value = "greedy")]
    method: Method,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, default_value_t = 5.5)]
    freq: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Greedy passes, random draws, or genetic generations.
    #[arg(long)]
    budget: Option<usize>,
    /// Greedy starting pattern.
    #[arg(long, value_enum, default_value = "off")]
    init: InitArg,
    #[arg(long, default_value_t = 32)]
    population: usize,
    #[arg(long, default_value_t = 0.02)]
    mutation: f64,
    /// Search log output.
    #[arg(long)]
    log: Option<PathBuf>,
    /// File receiving the best pattern hex.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmulateArgs {
    #[arg(long, env = PORT_ENV, default_value_t = protocol::DEFAULT_TCP_PORT)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Attach the solver-backed channel so GET_RSSI answers.
    #[arg(long)]
    channel: bool,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, default_value_t = 5.5)]
    freq: f64,
    /// Exit after the first connection closes.
    #[arg(long)]
    once: bool,
}

#[derive(Debug, Args)]
struct ControlArgs {
    /// Emulator address `host:port`.
    #[arg(long, conflicts_with = "serial")]
    connect: Option<String>,
    /// Serial device path.
    #[arg(long)]
    serial: Option<String>,
    #[arg(long, default_value_t = protocol::DEFAULT_BAUD)]
    baud: u32,
    /// Response timeout in ms.
    #[arg(long, default_value_t = 1000)]
    timeout_ms: u64,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(subcommand)]
    action: ControlAction,
}

#[derive(Debug, Subcommand)]
enum ControlAction {
    /// Upload a hex pattern.
    Set { hex: String },
    /// Set one element.
    Element {
        index: u8,
        #[arg(value_enum)]
        state: StateArg,
    },
    /// Read received power in dB.
    Rssi,
    /// Print surface dimensions and firmware version.
    Info,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Sweep(a) => sweep(a),
        Command::Steer(a) => steer(a),
        Command::Pattern(a) => pattern(a),
        Command::Optimize(a) => optimize(a),
        Command::Emulate(a) => emulate(a),
        Command::Control(a) => control(a),
    }
}

/// Write `contents` via a sibling temporary file and an atomic rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult {
    match out {
        Some(path) => write_atomic(path, contents.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display()).into()),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn ingest(a: IngestArgs) -> CliResult {
    let data = DataArgs {
        data: a.path.or(a.data.data),
    };
    let (response, warnings) = data.load()?;
    let (dlo, dhi) = response.data_range();
    let (lo, hi) = response.band();
    let wc = response.worst_case(lo, hi)?;
    println!("samples {}", response.samples().len());
    println!("data_range_ghz {dlo} {dhi}");
    println!("band_ghz {lo} {hi}");
    println!(
        "worst_off_db {:.4} at {:.4} GHz",
        wc.off_db.value, wc.off_db.freq_ghz
    );
    println!(
        "worst_on_db {:.4} at {:.4} GHz",
        wc.on_db.value, wc.on_db.freq_ghz
    );
    println!(
        "min_phase_difference_deg {:.4} at {:.4} GHz",
        wc.phase_difference_deg.value, wc.phase_difference_deg.freq_ghz
    );
    for w in &warnings {
        println!("warning: {w}");
    }
    println!("warnings {}", warnings.len());
    Ok(())
}

fn frequency_grid(from: f64, to: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && from.is_finite() && to.is_finite() && from <= to) {
        return Err("sweep needs finite --from <= --to and a positive --step".into());
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    // Snap to the nanohertz-free grid so printed and evaluated values agree.
    Ok((0..=n)
        .map(|i| ((from + step * i as f64) * 1e6).round() / 1e6)
        .collect())
}

fn sweep(a: SweepArgs) -> CliResult {
    let (response, _) = a.data.load()?;
    let response = response.with_band(a.from, a.to)?;
    let geometry = a.geometry.build()?;
    let freqs = frequency_grid(a.from, a.to, a.step)?;
    let samples = reflection_sweep(&geometry, &response, &freqs)?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for s in &samples {
        let off = format!("{:.6}", s.phase_off_deg);
        let on = format!("{:.6}", s.phase_on_deg);
        // Difference of the printed values, so re-ingestion agrees exactly.
        let diff = crate::response::wrap_deg(off.parse::<f64>()? - on.parse::<f64>()?);
        let _ = writeln!(
            csv,
            "{:.6},{:.6},{:.6},{off},{on},{diff:.6}",
            s.freq_ghz, s.mag_off_db, s.mag_on_db
        );
    }
    emit(a.out.as_deref(), &csv)
}

fn steer(a: SteerArgs) -> CliResult {
    let geometry = a.geometry.build()?;
    let model: Box<dyn ReflectionModel> = if a.ideal {
        Box::new(IdealResponse::binary())
    } else {
        Box::new(a.data.load()?.0)
    };
    if !(0.0..90.0).contains(&a.theta) || !(0.0..90.0).contains(&a.inc_theta) {
        return Err("--theta and --inc-theta must lie in [0, 90)".into());
    }
    let incident = -Vec3::from_angles(a.inc_theta, a.inc_phi);
    let target = Vec3::from_angles(a.theta, a.phi);
    let profile = ideal_phase_profile(&geometry, incident, target, a.freq)?;
    let pattern = quantize_1bit(&profile, &*model, a.freq)?;

    let span = 90.0 - a.step;
    let grid = DirectionGrid::cut(a.phi, -span, span, a.step);
    let beam = beam_pattern(&geometry, &pattern, &*model, a.freq, incident, a.q, &grid)?;
    let peak = peak_direction(&beam)?;

    let mut text = pattern.to_hex();
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    if a.out.is_some() {
        println!("{}", pattern.to_hex());
    }
    if a.ascii {
        print!("{}", pattern.ascii_art());
    }
    eprintln!("peak {:.2} deg in the phi={} cut", peak.angle_deg, a.phi);
    if let Some(path) = &a.beam_out {
        write_atomic(path, beam.to_csv().as_bytes())?;
    }
    Ok(())
}

fn pattern(a: PatternArgs) -> CliResult {
    let geometry = a.geometry.build()?;
    let p = match a.kind {
        PatternKind::Uniform { state } => Pattern::uniform(&geometry, state.into()),
        PatternKind::Checkerboard => Pattern::checkerboard(&geometry),
        PatternKind::Stripes { period } => Pattern::column_stripes(&geometry, period)?,
        PatternKind::Decode { hex } => Pattern::from_hex(&hex, &geometry)?,
    };
    println!("{}", p.to_hex());
    if a.ascii {
        print!("{}", p.ascii_art());
    }
    Ok(())
}

fn optimize(a: OptimizeArgs) -> CliResult {
    let geometry = a.geometry.build()?;
    let (response, _) = a.data.load()?;
    let scene = a.scene.build(a.freq);
    let objective = ChannelObjective::new(geometry, &response, scene);
    let report: SearchReport = match a.method {
        Method::Greedy => {
            let initial = match a.init {
                InitArg::Off => Pattern::uniform(&geometry, StateTag::Off),
                InitArg::On => Pattern::uniform(&geometry, StateTag::On),
                InitArg::Random => random_pattern(&geometry, a.seed),
            };
            let mut r = greedy_flip(objective, initial, a.budget.unwrap_or(100))?;
            r.seed = Some(a.seed);
            r
        }
        Method::Exhaustive => exhaustive(objective, &geometry)?,
        Method::Random => random_search(objective, &geometry, a.budget.unwrap_or(1000), a.seed)?,
        Method::Genetic => {
            let params = GeneticParams {
                population: a.population,
                generations: a.budget.unwrap_or(100),
                mutation_rate: a.mutation,
            };
            genetic(objective, &geometry, params, a.seed)?
        }
    };
    if let Some(path) = &a.log {
        write_atomic(path, report.to_log().as_bytes())?;
    }
    let mut text = report.best.to_hex();
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    println!(
        "best_db {:.6} evaluations {} iterations {}",
        report.best_db(),
        report.evaluations,
        report.iterations
    );
    Ok(())
}

fn random_pattern(geometry: &SurfaceGeometry, seed: u64) -> Pattern {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Pattern::from_fn(geometry, |_, _| rng.random::<bool>())
}

fn emulate(a: EmulateArgs) -> CliResult {
    let geometry = a.geometry.build()?;
    let mut emulator = Emulator::new(geometry)?;
    if a.channel {
        let (response, _) = a.data.load()?;
        let channel = VirtualChannel::new(a.scene.build(a.freq), Arc::new(response));
        emulator = emulator.with_channel(channel)?;
    }
    let listener = TcpListener::bind((a.bind.as_str(), a.port))
        .map_err(|e| format!("cannot listen on {}:{}: {e}", a.bind, a.port))?;
    eprintln!("emulator listening on {}", listener.local_addr()?);
    emulator.serve_tcp(&listener, a.once.then_some(1))?;
    Ok(())
}

fn control(a: ControlArgs) -> CliResult {
    let transport: Box<dyn Transport> = match (&a.connect, &a.serial) {
        (Some(addr), None) => {
            let stream =
                TcpStream::connect(addr).map_err(|e| format!("cannot connect to {addr}: {e}"))?;
            stream.set_nodelay(true)?;
            Box::new(stream)
        }
        (None, Some(path)) => Box::new(
            SerialTransport::open(path, a.baud).map_err(|e| format!("cannot open {path}: {e}"))?,
        ),
        _ => return Err("one of --connect or --serial is required".into()),
    };
    let mut client =
        Client::new(transport).with_timeout(std::time::Duration::from_millis(a.timeout_ms));
    match a.action {
        ControlAction::Set { hex } => {
            let geometry = a.geometry.build()?;
            let p = Pattern::from_hex(&hex, &geometry)?;
            client.set_pattern(&p)?;
            println!("ok");
        }
        ControlAction::Element { index, state } => {
            client.set_element(index, StateTag::from(state).bit())?;
            println!("ok");
        }
        ControlAction::Rssi => {
            let cdb = client.get_rssi()?;
            println!("{:.2}", cdb as f64 / 100.0);
        }
        ControlAction::Info => {
            let info = client.get_info()?;
            println!(
                "nx {} ny {} firmware {}.{}",
                info.nx, info.ny, info.firmware.0, info.firmware.1
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec3_parsing() {
        assert_eq!(parse_vec3("1,-2.5,3").unwrap(), Vec3::new(1.0, -2.5, 3.0));
        assert!(parse_vec3("1,2").is_err());
        assert!(parse_vec3("1,2,nan").is_err());
    }

    #[test]
    fn grid_is_snapped() {
        let f = frequency_grid(5.1, 5.9, 0.01).unwrap();
        assert_eq!(f.len(), 81);
        assert_eq!(f[46], 5.56);
        assert_eq!(*f.last().unwrap(), 5.9);
        assert!(frequency_grid(5.9, 5.1, 0.01).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["ris"]), 2);
        assert_eq!(run(["ris", "steer"]), 2);
        assert_eq!(run(["ris", "--help"]), 0);
    }
}
