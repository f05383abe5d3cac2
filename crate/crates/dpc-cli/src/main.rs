//! `dpc`: simulate and analyze dissipatively coupled photonic circuits.
//!
//! Circuits come from a `.dpc` file or a builder flag; results go to
//! stdout or `--out` as CSV, JSON or SVG. Exit codes: 0 success, 1 usage
//! error, 2 parse/validation error, 3 numeric failure.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64 as C64;

use dpc::circuit::{builders, Circuit, CircuitError, Severity};
use dpc::dynamics::{self, AmplitudeVector, DynamicsError};
use dpc::io::dpc::parse_circuit;
use dpc::io::{render_heatmap, Dialect, Palette, ResultTable, Value};
use dpc::quantum::{self, fock, GibbsSpec, QuantumError};
use dpc::stationary::{self, StationaryError};
use dpc::waveguide::{self, DispersionModel, FieldState, WaveguideDevice, WaveguideError};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::UnknownMode(_) => CliError::parse(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidCircuit(_)
            | DynamicsError::DimensionMismatch { .. }
            | DynamicsError::NonFiniteAmplitude => CliError::parse(e.to_string()),
            DynamicsError::BadTimes(_) | DynamicsError::NotAPlaquetteLattice(_) => {
                CliError::usage(e.to_string())
            }
        }
    }
}

impl From<StationaryError> for CliError {
    fn from(e: StationaryError) -> Self {
        match e {
            StationaryError::ResourceExceeded { .. } => CliError::numeric(e.to_string()),
            StationaryError::Dynamics(d) => d.into(),
            StationaryError::SupportTooLarge { .. } | StationaryError::NotNormalized(_) => {
                CliError::usage(e.to_string())
            }
            StationaryError::UnknownMode(_) | StationaryError::NotStationary { .. } => {
                CliError::parse(e.to_string())
            }
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::CutoffTooSmall { .. } => CliError::numeric(e.to_string()),
            QuantumError::Dynamics(d) => d.into(),
            QuantumError::Circuit(c) => c.into(),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<WaveguideError> for CliError {
    fn from(e: WaveguideError) -> Self {
        match e {
            WaveguideError::RecurrenceWindowTooShort(_) => CliError::numeric(e.to_string()),
            WaveguideError::Dynamics(d) => d.into(),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<dpc::io::table::TableError> for CliError {
    fn from(e: dpc::io::table::TableError) -> Self {
        CliError::numeric(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "dpc", version, about = "Coherent diffusive photonics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve coherent amplitudes and emit the trajectory
    Simulate(SimulateArgs),
    /// Kernel-projected asymptotic amplitudes
    Asymptotic(CircuitIoArgs),
    /// Drift-matrix eigenvalues, kernel dimension and gap
    Spectrum(CircuitIoArgs),
    /// Orthonormal basis of the stationary subspace
    Kernel(CircuitIoArgs),
    /// Compactly supported stationary states
    Localized(LocalizedArgs),
    /// Propagate a tight-binding waveguide device
    Waveguide(WaveguideArgs),
    /// Wavelength scan of a waveguide device
    Scan(ScanArgs),
    /// Erasure energetics of a signal mode against a coherent chain
    Erase(EraseArgs),
    /// Fock-space master-equation oracle checks
    Oracle(OracleArgs),
    /// SVG heatmap of modal amplitudes
    Render(RenderArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuilderKind {
    Chain,
    TwoArm,
    DoubleChain,
    Square,
    Honeycomb,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CircuitSource {
    /// Circuit description file (.dpc); '-' reads stdin
    #[arg(long, value_name = "FILE", conflicts_with = "builder")]
    circuit: Option<PathBuf>,
    /// Built-in topology instead of a file
    #[arg(long, value_enum)]
    builder: Option<BuilderKind>,
    /// Size parameter: chain length, modes per arm, or columns
    #[arg(long)]
    n: Option<usize>,
    /// Lattice rows (square, honeycomb)
    #[arg(long)]
    rows: Option<usize>,
    /// Lattice columns (square, honeycomb)
    #[arg(long)]
    cols: Option<usize>,
    /// Uniform dissipator rate for builders
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Extra per-mode loss, label=rate (repeatable)
    #[arg(long = "loss", value_name = "LABEL=RATE")]
    losses: Vec<String>,
    /// Initial amplitude, label=re[,im] (repeatable; overrides file init)
    #[arg(long = "init", value_name = "LABEL=RE[,IM]")]
    inits: Vec<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when absent)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Table dialect
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct CircuitIoArgs {
    #[command(flatten)]
    source: CircuitSource,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: CircuitSource,
    #[command(flatten)]
    output: OutputArgs,
    /// Comma-separated effective times (gamma*t)
    #[arg(long, value_name = "T1,T2,...", conflicts_with_all = ["t_max", "points"])]
    times: Option<String>,
    /// End of a uniform time grid
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points over (0, t_max]
    #[arg(long, default_value_t = 50)]
    points: usize,
}

#[derive(Args)]
struct LocalizedArgs {
    #[command(flatten)]
    source: CircuitSource,
    #[command(flatten)]
    output: OutputArgs,
    /// Largest support size to search
    #[arg(long, default_value_t = 4)]
    max_support: usize,
}

#[derive(Args)]
struct DeviceArgs {
    /// Read device parameters from the `set` entries of a .dpc file
    /// (keys: n_chain, n_res, kappa1, kappa2, z_max, input); explicit
    /// flags override the file
    #[arg(long, value_name = "FILE")]
    device_config: Option<PathBuf>,
    /// Number of low-loss chain guides [default: 2]
    #[arg(long)]
    n_chain: Option<usize>,
    /// Guides per reservoir array [default: 20]
    #[arg(long)]
    n_res: Option<usize>,
    /// Chain-to-reservoir coupling, mm^-1 [default: 0.15]
    #[arg(long)]
    kappa1: Option<f64>,
    /// Intra-reservoir coupling, mm^-1 [default: 0.3]
    #[arg(long)]
    kappa2: Option<f64>,
    /// Device length, mm [default: 30]
    #[arg(long)]
    z_max: Option<f64>,
    /// Chain guide excited at the input (0-based) [default: 0]
    #[arg(long)]
    input: Option<usize>,
}

struct DeviceSettings {
    device: WaveguideDevice,
    input: usize,
}

fn resolve_device(args: &DeviceArgs) -> Result<DeviceSettings, CliError> {
    let mut n_chain = 2usize;
    let mut n_res = 20usize;
    let mut kappa1 = 0.15f64;
    let mut kappa2 = 0.3f64;
    let mut z_max = 30.0f64;
    let mut input = 0usize;
    if let Some(path) = &args.device_config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))?;
        let parsed = parse_circuit(&text).map_err(|e| CliError::parse(e.to_string()))?;
        let meta = &parsed.circuit.metadata;
        let get_num = |key: &str, target: &mut f64| -> Result<(), CliError> {
            if let Some(v) = meta.get(key) {
                *target = v.parse().map_err(|_| {
                    CliError::parse(format!("config key `{key}` has non-numeric value `{v}`"))
                })?;
            }
            Ok(())
        };
        let get_int = |key: &str, target: &mut usize| -> Result<(), CliError> {
            if let Some(v) = meta.get(key) {
                *target = v.parse().map_err(|_| {
                    CliError::parse(format!("config key `{key}` has non-integer value `{v}`"))
                })?;
            }
            Ok(())
        };
        get_int("n_chain", &mut n_chain)?;
        get_int("n_res", &mut n_res)?;
        get_num("kappa1", &mut kappa1)?;
        get_num("kappa2", &mut kappa2)?;
        get_num("z_max", &mut z_max)?;
        get_int("input", &mut input)?;
    }
    let device = WaveguideDevice::new(
        args.n_chain.unwrap_or(n_chain),
        args.n_res.unwrap_or(n_res),
        args.kappa1.unwrap_or(kappa1),
        args.kappa2.unwrap_or(kappa2),
        args.z_max.unwrap_or(z_max),
    )?;
    Ok(DeviceSettings {
        device,
        input: args.input.unwrap_or(input),
    })
}

#[derive(Args)]
struct WaveguideArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Comma-separated propagation distances in mm
    #[arg(long, value_name = "Z1,Z2,...")]
    z: Option<String>,
    /// Number of grid points over (0, z_max]
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Also compare against the calibrated effective chain model
    #[arg(long)]
    compare: bool,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 700.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 790.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 16)]
    points: usize,
    /// kappa1(lambda) intercept, mm^-1 (default: ratio-0.5 model)
    #[arg(long)]
    k1_intercept: Option<f64>,
    /// kappa1(lambda) slope, mm^-1 per nm
    #[arg(long)]
    k1_slope: Option<f64>,
    /// kappa2(lambda) intercept, mm^-1
    #[arg(long)]
    k2_intercept: Option<f64>,
    /// kappa2(lambda) slope, mm^-1 per nm
    #[arg(long)]
    k2_slope: Option<f64>,
}

#[derive(Args)]
struct EraseArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Reservoir size parameter N (the chain has N+2 modes)
    #[arg(long)]
    n: usize,
    /// Reservoir amplitude, re[,im]
    #[arg(long, default_value = "1")]
    alpha: String,
    /// Signal component amplitude, re[,im] (repeatable)
    #[arg(long = "beta", value_name = "RE[,IM]")]
    betas: Vec<String>,
    /// Signal component weight (repeatable, parallel to --beta)
    #[arg(long = "weight", value_name = "P")]
    weights: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleState {
    /// Product coherent state from the initial amplitudes
    Coherent,
    /// Single photon with the initial amplitudes as coefficients
    SinglePhoton,
    /// Collective-mode Gibbs state (two-mode chain only)
    Gibbs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: CircuitSource,
    #[command(flatten)]
    output: OutputArgs,
    /// Initial state family
    #[arg(long, value_enum, default_value = "coherent")]
    state: OracleState,
    /// Photon cutoff per mode
    #[arg(long, default_value_t = 6)]
    cutoff: usize,
    /// Effective evolution time
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Inverse temperature for --state gibbs
    #[arg(long, default_value_t = 1.0)]
    beta_g: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RenderField {
    Initial,
    Asymptotic,
    /// One localized stationary state (see --state-index, --max-support)
    Localized,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    source: CircuitSource,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Which field to render
    #[arg(long, value_enum, default_value = "asymptotic")]
    field: RenderField,
    /// Localized-state search budget for --field localized
    #[arg(long, default_value_t = 4)]
    max_support: usize,
    /// Which localized state to render (index into the catalog)
    #[arg(long, default_value_t = 0)]
    state_index: usize,
    /// Colour map
    #[arg(long, value_enum, default_value = "viridis")]
    palette: PaletteArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PaletteArg {
    Grayscale,
    Viridis,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Asymptotic(args) => asymptotic(args),
        Command::Spectrum(args) => spectrum(args),
        Command::Kernel(args) => kernel(args),
        Command::Localized(args) => localized(args),
        Command::Waveguide(args) => waveguide_cmd(args),
        Command::Scan(args) => scan(args),
        Command::Erase(args) => erase(args),
        Command::Oracle(args) => oracle(args),
        Command::Render(args) => render(args),
    }
}

fn parse_complex(text: &str) -> Result<C64, CliError> {
    let err = || {
        CliError::usage(format!(
            "malformed complex number `{text}` (use re or re,im)"
        ))
    };
    match text.split_once(',') {
        Some((re, im)) => Ok(C64::new(
            re.trim().parse().map_err(|_| err())?,
            im.trim().parse().map_err(|_| err())?,
        )),
        None => Ok(C64::new(text.trim().parse().map_err(|_| err())?, 0.0)),
    }
}

fn parse_number_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("malformed number `{t}` in list")))
        })
        .collect()
}

fn load_circuit(source: &CircuitSource) -> Result<(Circuit, AmplitudeVector), CliError> {
    let (mut circuit, mut initial) = if let Some(path) = &source.circuit {
        let text = if path.as_os_str() == "-" {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::usage(format!("reading stdin: {e}")))?;
            buf
        } else {
            std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))?
        };
        let parsed = parse_circuit(&text).map_err(|e| {
            let mut message = String::from("circuit parse failed");
            for d in &e.diagnostics {
                message.push_str(&format!("\n  {d}"));
            }
            CliError::parse(message)
        })?;
        (parsed.circuit, parsed.initial)
    } else if let Some(builder) = source.builder {
        let n = source.n;
        let circuit = match builder {
            BuilderKind::Chain => builders::uniform_chain(
                n.ok_or_else(|| CliError::usage("--builder chain needs --n"))?,
                source.rate,
            )?,
            BuilderKind::TwoArm => builders::two_arm(
                n.ok_or_else(|| CliError::usage("--builder two-arm needs --n"))?,
                source.rate,
            )?,
            BuilderKind::DoubleChain => builders::double_chain(
                n.ok_or_else(|| CliError::usage("--builder double-chain needs --n"))?,
                source.rate,
            )?,
            BuilderKind::Square => builders::square_lattice(
                source
                    .rows
                    .ok_or_else(|| CliError::usage("--builder square needs --rows"))?,
                source
                    .cols
                    .ok_or_else(|| CliError::usage("--builder square needs --cols"))?,
                source.rate,
            )?,
            BuilderKind::Honeycomb => builders::honeycomb(
                source
                    .rows
                    .ok_or_else(|| CliError::usage("--builder honeycomb needs --rows"))?,
                source
                    .cols
                    .ok_or_else(|| CliError::usage("--builder honeycomb needs --cols"))?,
                source.rate,
            )?,
        };
        let initial = DVector::from_element(circuit.mode_count(), C64::new(0.0, 0.0));
        (circuit, initial)
    } else {
        return Err(CliError::usage("provide --circuit FILE or --builder KIND"));
    };

    for loss in &source.losses {
        let (label, rate) = loss.split_once('=').ok_or_else(|| {
            CliError::usage(format!("malformed --loss `{loss}` (use label=rate)"))
        })?;
        let rate: f64 = rate
            .parse()
            .map_err(|_| CliError::usage(format!("malformed rate in --loss `{loss}`")))?;
        circuit = circuit.add_mode_loss(label, rate)?;
    }
    for init in &source.inits {
        let (label, value) = init.split_once('=').ok_or_else(|| {
            CliError::usage(format!("malformed --init `{init}` (use label=re[,im])"))
        })?;
        let index = circuit
            .mode_index(label)
            .ok_or_else(|| CliError::parse(format!("unknown mode `{label}` in --init")))?;
        initial[index] = parse_complex(value)?;
    }

    let errors: Vec<String> = circuit
        .validate()
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.message)
        .collect();
    if !errors.is_empty() {
        return Err(CliError::parse(format!(
            "invalid circuit: {}",
            errors.join("; ")
        )));
    }
    Ok((circuit, initial))
}

fn write_output(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dialect(format: Format) -> Dialect {
    match format {
        Format::Csv => Dialect::Csv,
        Format::Json => Dialect::Json,
    }
}

fn amplitude_columns(circuit: &Circuit) -> Vec<String> {
    let mut columns = Vec::with_capacity(2 * circuit.mode_count());
    for m in &circuit.modes {
        columns.push(format!("re_{}", m.label));
        columns.push(format!("im_{}", m.label));
    }
    columns
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (circuit, initial) = load_circuit(&args.source)?;
    let times = match (&args.times, args.t_max) {
        (Some(list), _) => parse_number_list(list)?,
        (None, Some(t_max)) => {
            if args.points == 0 {
                return Err(CliError::usage("--points must be positive"));
            }
            (1..=args.points)
                .map(|i| t_max * i as f64 / args.points as f64)
                .collect()
        }
        (None, None) => return Err(CliError::usage("provide --times or --t-max")),
    };
    let trajectory = dynamics::evolve(&circuit, &initial, &times)?;
    let mut columns = vec!["t".to_string()];
    columns.extend(amplitude_columns(&circuit));
    let mut table = ResultTable::new(columns);
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let mut row = vec![Value::Num(*t)];
        for a in state.iter() {
            row.push(Value::Num(a.re));
            row.push(Value::Num(a.im));
        }
        table.push_row(row)?;
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)
}

fn asymptotic(args: CircuitIoArgs) -> Result<(), CliError> {
    let (circuit, initial) = load_circuit(&args.source)?;
    let state = dynamics::asymptotic_state(&circuit, &initial)?;
    let mut table = ResultTable::new(["mode", "re", "im", "intensity"]);
    for (m, a) in circuit.modes.iter().zip(state.iter()) {
        table.push_row([
            Value::Str(m.label.clone()),
            Value::Num(a.re),
            Value::Num(a.im),
            Value::Num(a.norm_sqr()),
        ])?;
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)
}

fn spectrum(args: CircuitIoArgs) -> Result<(), CliError> {
    let (circuit, _) = load_circuit(&args.source)?;
    let s = dynamics::spectrum(&circuit)?;
    let mut table = ResultTable::new(["index", "eigenvalue", "is_kernel"]);
    for (i, &e) in s.eigenvalues.iter().enumerate() {
        table.push_row([
            Value::Int(i as i64),
            Value::Num(e),
            Value::Int(i64::from(i < s.kernel_dimension)),
        ])?;
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)?;
    eprintln!(
        "kernel dimension {}, gap {}",
        s.kernel_dimension,
        s.gap
            .map(|g| g.to_string())
            .unwrap_or_else(|| "none".into())
    );
    Ok(())
}

fn kernel(args: CircuitIoArgs) -> Result<(), CliError> {
    let (circuit, _) = load_circuit(&args.source)?;
    let basis = stationary::kernel_basis(&circuit)?;
    let mut columns = vec!["mode".to_string()];
    for k in 0..basis.len() {
        columns.push(format!("re_v{k}"));
        columns.push(format!("im_v{k}"));
    }
    let mut table = ResultTable::new(columns);
    for (i, m) in circuit.modes.iter().enumerate() {
        let mut row = vec![Value::Str(m.label.clone())];
        for v in &basis {
            row.push(Value::Num(v[i].re));
            row.push(Value::Num(v[i].im));
        }
        table.push_row(row)?;
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)
}

fn localized(args: LocalizedArgs) -> Result<(), CliError> {
    let (circuit, _) = load_circuit(&args.source)?;
    let states = stationary::find_localized_states(&circuit, args.max_support)?;
    let mut table = ResultTable::new(["state", "support_size", "mode", "re", "im"]);
    for (k, s) in states.iter().enumerate() {
        for &i in &s.support {
            table.push_row([
                Value::Int(k as i64),
                Value::Int(s.support_size() as i64),
                Value::Str(circuit.label(i).to_string()),
                Value::Num(s.amplitudes[i].re),
                Value::Num(s.amplitudes[i].im),
            ])?;
        }
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)
}

fn waveguide_cmd(args: WaveguideArgs) -> Result<(), CliError> {
    let DeviceSettings { device, input } = resolve_device(&args.device)?;
    let zs = match &args.z {
        Some(list) => parse_number_list(list)?,
        None => {
            if args.points == 0 {
                return Err(CliError::usage("--points must be positive"));
            }
            (1..=args.points)
                .map(|i| device.z_max * i as f64 / args.points as f64)
                .collect()
        }
    };
    let input = FieldState::chain_excitation(&device, input)?;
    let prop = waveguide::propagate_z(&device, &input, &zs)?;
    for w in &prop.warnings {
        eprintln!("warning: {w}");
    }

    let comparison = if args.compare {
        let report = waveguide::compare_to_lindblad(&device, &input, &zs)?;
        eprintln!(
            "calibrated gamma_eff = {} mm^-1; max L-inf deviation {}{}",
            report.gamma_eff,
            report.max_linf,
            if report.flagged {
                " (adiabatic regime broken)"
            } else {
                ""
            }
        );
        Some(report)
    } else {
        None
    };

    let mut columns = vec!["z_mm".to_string()];
    for g in 1..=device.n_chain {
        columns.push(format!("I{g}"));
    }
    columns.push("chain_power".into());
    if comparison.is_some() {
        columns.push("lindblad_linf".into());
    }
    let mut table = ResultTable::new(columns);
    for (k, (state, &z)) in prop.states.iter().zip(&zs).enumerate() {
        let mut row = vec![Value::Num(z)];
        let intensities = state.chain_intensities();
        let chain_power: f64 = intensities.iter().sum();
        for i in intensities {
            row.push(Value::Num(i));
        }
        row.push(Value::Num(chain_power));
        if let Some(report) = &comparison {
            row.push(Value::Num(report.per_point[k].1));
        }
        table.push_row(row)?;
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)
}

fn scan(args: ScanArgs) -> Result<(), CliError> {
    let DeviceSettings { device, input } = resolve_device(&args.device)?;
    let defaults = DispersionModel::default();
    let custom = args.k1_intercept.is_some()
        || args.k1_slope.is_some()
        || args.k2_intercept.is_some()
        || args.k2_slope.is_some();
    let dispersion = if custom {
        DispersionModel::new(
            (
                args.k1_intercept.unwrap_or(defaults.kappa1.0),
                args.k1_slope.unwrap_or(defaults.kappa1.1),
            ),
            (
                args.k2_intercept.unwrap_or(defaults.kappa2.0),
                args.k2_slope.unwrap_or(defaults.kappa2.1),
            ),
            (args.lambda_min, args.lambda_max),
        )?
    } else {
        defaults
    };
    let result = waveguide::wavelength_scan(
        &device,
        &dispersion,
        (args.lambda_min, args.lambda_max),
        args.points,
        input,
    )?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let mut columns = vec![
        "lambda_nm".to_string(),
        "kappa1".to_string(),
        "kappa2".to_string(),
    ];
    for g in 1..=device.n_chain {
        columns.push(format!("I{g}"));
    }
    let mut table = ResultTable::new(columns);
    for row in &result.rows {
        let mut values = vec![
            Value::Num(row.lambda_nm),
            Value::Num(row.kappa1),
            Value::Num(row.kappa2),
        ];
        for &i in &row.intensities {
            values.push(Value::Num(i));
        }
        table.push_row(values)?;
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)
}

fn erase(args: EraseArgs) -> Result<(), CliError> {
    let alpha = parse_complex(&args.alpha)?;
    let betas = if args.betas.is_empty() {
        vec![C64::new(0.0, 0.0)]
    } else {
        args.betas
            .iter()
            .map(|b| parse_complex(b))
            .collect::<Result<_, _>>()?
    };
    let weights = if args.weights.is_empty() {
        vec![1.0 / betas.len() as f64; betas.len()]
    } else {
        args.weights.clone()
    };
    if weights.len() != betas.len() {
        return Err(CliError::usage("--beta and --weight counts must match"));
    }
    let signal: Vec<(f64, C64)> = weights.into_iter().zip(betas).collect();
    let report = quantum::erasure_scenario(args.n, alpha, &signal)?;
    let mut table = ResultTable::new([
        "weight",
        "beta_re",
        "beta_im",
        "abar_re",
        "abar_im",
        "abar_closed_re",
        "abar_closed_im",
        "delta_e",
        "energy_drop",
        "delta_e0_exact",
        "delta_e0_large_n",
        "fidelity_to_phi",
    ]);
    for comp in &report.components {
        table.push_row([
            Value::Num(comp.weight),
            Value::Num(comp.beta.re),
            Value::Num(comp.beta.im),
            Value::Num(comp.abar_projected.re),
            Value::Num(comp.abar_projected.im),
            Value::Num(comp.abar_closed_form.re),
            Value::Num(comp.abar_closed_form.im),
            Value::Num(report.delta_e),
            Value::Num(report.energy_drop),
            Value::Num(report.delta_e0_exact),
            Value::Num(report.delta_e0_large_n),
            Value::Num(report.fidelity_to_phi),
        ])?;
    }
    write_output(&table.emit(dialect(args.output.format)), &args.output.out)
}

fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let (circuit, initial) = load_circuit(&args.source)?;
    match args.state {
        OracleState::Gibbs => {
            let report = fock::gibbs_stationarity(
                &circuit,
                GibbsSpec {
                    beta: args.beta_g,
                    cutoff: args.cutoff,
                },
            )?;
            let mut table = ResultTable::new(["beta_g", "cutoff", "residual", "tail_weight"]);
            table.push_row([
                Value::Num(args.beta_g),
                Value::Int(args.cutoff as i64),
                Value::Num(report.residual),
                Value::Num(report.tail_weight),
            ])?;
            write_output(&table.emit(dialect(args.output.format)), &args.output.out)
        }
        OracleState::Coherent => {
            let amps: Vec<C64> = initial.iter().copied().collect();
            let rho0 = fock::FockDensityMatrix::coherent_product(&amps, args.cutoff);
            let (rho, diag) = fock::fock_oracle_evolve(&circuit, &rho0, args.t)?;
            let predicted = if args.t == 0.0 {
                initial.clone()
            } else {
                dynamics::evolve(&circuit, &initial, &[args.t])?
                    .states
                    .pop()
                    .expect("one state")
            };
            let target: Vec<C64> = predicted.iter().copied().collect();
            let psi = fock::coherent_product_vector(&target, args.cutoff);
            let fidelity = rho.fidelity_with_pure(&psi);
            let mut table =
                ResultTable::new(["t", "fidelity_to_prediction", "trace_defect", "leakage"]);
            table.push_row([
                Value::Num(args.t),
                Value::Num(fidelity),
                Value::Num(diag.trace_defect),
                Value::Num(diag.leakage),
            ])?;
            write_output(&table.emit(dialect(args.output.format)), &args.output.out)?;
            if diag.leakage_warning {
                return Err(CliError::numeric(format!(
                    "truncation leakage {} exceeds 1e-4; raise --cutoff",
                    diag.leakage
                )));
            }
            Ok(())
        }
        OracleState::SinglePhoton => {
            let norm = initial.norm();
            if norm == 0.0 {
                return Err(CliError::usage(
                    "single-photon oracle needs --init coefficients",
                ));
            }
            let coeffs = &initial / C64::new(norm, 0.0);
            let (is_stationary, residual) =
                stationary::single_photon_stationarity(&circuit, &coeffs)?;
            let vec: Vec<C64> = coeffs.iter().copied().collect();
            let psi = fock::single_photon_vector(&vec, args.cutoff);
            let rho0 = fock::FockDensityMatrix::from_pure(circuit.mode_count(), args.cutoff, &psi)?;
            let (rho, diag) = fock::fock_oracle_evolve(&circuit, &rho0, args.t)?;
            let mut table = ResultTable::new([
                "t",
                "stationary",
                "kernel_residual",
                "excited_population",
                "trace_defect",
            ]);
            table.push_row([
                Value::Num(args.t),
                Value::Int(i64::from(is_stationary)),
                Value::Num(residual),
                Value::Num(rho.excited_population()),
                Value::Num(diag.trace_defect),
            ])?;
            write_output(&table.emit(dialect(args.output.format)), &args.output.out)
        }
    }
}

fn render(args: RenderArgs) -> Result<(), CliError> {
    let (circuit, initial) = load_circuit(&args.source)?;
    let field = match args.field {
        RenderField::Initial => initial.clone(),
        RenderField::Asymptotic => dynamics::asymptotic_state(&circuit, &initial)?,
        RenderField::Localized => {
            let states = stationary::find_localized_states(&circuit, args.max_support)?;
            let state = states.get(args.state_index).ok_or_else(|| {
                CliError::usage(format!(
                    "localized state {} of {} requested",
                    args.state_index,
                    states.len()
                ))
            })?;
            state.amplitudes.clone()
        }
    };
    let values: Vec<f64> = field.iter().map(|a| a.norm()).collect();
    let palette = match args.palette {
        PaletteArg::Grayscale => Palette::Grayscale,
        PaletteArg::Viridis => Palette::Viridis,
    };
    let svg =
        render_heatmap(&circuit, &values, palette).map_err(|e| CliError::usage(e.to_string()))?;
    write_output(&svg, &args.out)
}
