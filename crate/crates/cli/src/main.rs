use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use polar_coord::channel::{capacity, joint_channel, parse_preset, ChannelSpec};
use polar_coord::construction::{
    build_partition, capacity_threshold, check_conditions, select_good, CoordinationCode, NestingPolicy,
};
use polar_coord::coordination::{simulate_sessions, single_letter_target};
use polar_coord::oracle::{self, DistTable, DEFAULT_TABLE_CAP};
use polar_coord::polar::PolarParams;
use polar_coord::regions::{self, RegionCurve, RegionMetadata, DEFAULT_GRID_POINTS};
use polar_coord::resolvability::{build_resolvability_code, empirical_output, resolvability_bound, ResolvabilityCode};
use polar_coord::synthesis::{exact_is_feasible, synthesize_auto, synthesize_exact};
use polar_coord::{Error, QuantizationBudget, SelectionMode, SynthesizedBitChannel};

#[derive(Parser)]
#[command(name = "polarcoord", version, about = "Polar codes for channel resolvability and strong coordination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize both test channels and build the nested index partition.
    Construct(CodeArgs),
    /// Build a resolvability code and measure its output distribution.
    Resolve(ResolveArgs),
    /// Run coordination sessions between node X and node Y.
    Coordinate(CoordinateArgs),
    /// Emit achievable-rate region corners as CSV.
    Region {
        #[command(subcommand)]
        case: RegionCase,
    },
    /// Exact small-n computations.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
}

#[derive(Args, Serialize, Clone)]
struct Common {
    /// Master seed for every derived random stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone)]
struct PolarArgs {
    /// Block length exponent, n = 2^m.
    #[arg(long, default_value_t = 4)]
    m: u32,
    /// Selection exponent: index i is good when C_i ≥ 2^(−n^beta).
    #[arg(long, default_value_t = 0.25)]
    beta: f64,
    /// Quantization budget (output symbols per bit channel).
    #[arg(long, default_value_t = 64)]
    mu: usize,
    /// Require exact enumeration everywhere (fails with exit 4 past the cap).
    #[arg(long)]
    exact: bool,
    /// Entry cap for exact tables.
    #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
    cap: usize,
    /// Select good indices of W_X|V by target rate instead of threshold.
    #[arg(long)]
    x_rate: Option<f64>,
    /// Fail (exit 3) instead of dropping indices when good_x is not inside good_yx.
    #[arg(long)]
    strict_nesting: bool,
}

#[derive(Args, Serialize, Clone)]
struct PairArgs {
    /// W_X|V preset, e.g. bsc:0.1.
    #[arg(long, required_unless_present = "wx_spec")]
    wx: Option<String>,
    /// W_X|V as a JSON channel file.
    #[arg(long, conflicts_with = "wx")]
    wx_spec: Option<PathBuf>,
    /// W_Y|V preset, e.g. bsc:0.2 or bsc-bec:0.1,0.4.
    #[arg(long, required_unless_present = "wy_spec")]
    wy: Option<String>,
    /// W_Y|V as a JSON channel file.
    #[arg(long, conflicts_with = "wy")]
    wy_spec: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone)]
struct CodeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    polar: PolarArgs,
    #[command(flatten)]
    pair: PairArgs,
}

#[derive(Args, Serialize, Clone)]
struct ResolveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    polar: PolarArgs,
    /// Channel preset, e.g. bsc:0.3.
    #[arg(long, required_unless_present = "spec")]
    channel: Option<String>,
    /// Channel as a JSON file.
    #[arg(long, conflicts_with = "channel")]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
}

#[derive(Args, Serialize, Clone)]
struct CoordinateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    polar: PolarArgs,
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, alias = "trials", default_value_t = 100_000)]
    sessions: usize,
}

#[derive(Subcommand, Serialize, Clone)]
#[serde(tag = "case", rename_all = "kebab-case")]
enum RegionCase {
    /// BSC(p)∘BEC(eps) actions: polar and reference corners.
    Example1 {
        #[arg(long, default_value_t = 0.15)]
        p: f64,
        #[arg(long, default_value_t = 0.4)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
        /// Write the reference curve instead of the polar one.
        #[arg(long)]
        reference: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BEC(eps) actions: the only admissible test channel is V = X.
    Example2 {
        #[arg(long, default_value_t = 0.4)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corner for an arbitrary test channel pair.
    General {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Serialize, Clone)]
#[serde(tag = "op", rename_all = "kebab-case")]
enum OracleOp {
    /// Exact capacities and Bhattacharyya parameters of every bit channel.
    BitChannels {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact output distance of a resolvability code.
    Resolvability {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact induced joint distances of a coordination code.
    Coordination {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L1 distance and KL divergence between two JSON tables.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary entropy in bits.
    Entropy {
        #[arg(long)]
        p: f64,
    },
}

fn load_channel(preset: Option<&str>, spec: Option<&Path>) -> Result<ChannelSpec> {
    match (preset, spec) {
        (Some(p), _) => Ok(parse_preset(p)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
        }
        (None, None) => bail!(Error::InvalidParameter("no channel given".into())),
    }
}

impl PairArgs {
    fn load(&self) -> Result<(ChannelSpec, ChannelSpec)> {
        Ok((
            load_channel(self.wx.as_deref(), self.wx_spec.as_deref())?,
            load_channel(self.wy.as_deref(), self.wy_spec.as_deref())?,
        ))
    }
}

impl PolarArgs {
    fn params(&self) -> Result<(PolarParams, SelectionMode, QuantizationBudget)> {
        Ok((
            PolarParams::new(self.m)?,
            SelectionMode::threshold(self.beta)?,
            QuantizationBudget::new(self.mu)?,
        ))
    }

    fn synthesize(&self, ch: &ChannelSpec) -> Result<Vec<SynthesizedBitChannel>> {
        let budget = QuantizationBudget::new(self.mu)?;
        Ok(if self.exact {
            synthesize_exact(ch, self.m, self.cap)?
        } else {
            synthesize_auto(ch, self.m, budget)?
        })
    }

    fn method(&self, ch: &ChannelSpec) -> &'static str {
        if self.exact || exact_is_feasible(ch, self.m) {
            "exact"
        } else {
            "quantized"
        }
    }
}

fn report(command: &str, config: &impl Serialize, result: Value) -> Result<String> {
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn profile_json(bits: &[SynthesizedBitChannel]) -> Value {
    json!({
        "capacity_lower": bits.iter().map(|b| b.capacity_lower).collect::<Vec<_>>(),
        "capacity_upper": bits.iter().map(|b| b.capacity_upper).collect::<Vec<_>>(),
    })
}

fn code_json(code: &CoordinationCode) -> Result<Value> {
    let p = &code.partition;
    Ok(json!({
        "n": code.n(),
        "f1": p.f1,
        "f2": p.f2,
        "f3": p.f3,
        "nesting_forced": p.nesting_forced,
        "rate_r": code.rate_r,
        "rate_r0": code.rate_r0,
        "capacity_x_v": capacity(&code.wx_v)?,
        "capacity_yx_v": capacity(&code.wyx_v)?,
    }))
}

fn build(args: &PolarArgs, wx: &ChannelSpec, wy: &ChannelSpec) -> Result<(CoordinationCode, Vec<SynthesizedBitChannel>, Vec<SynthesizedBitChannel>)> {
    let (_, joint_mode, _) = args.params()?;
    let marginal_mode = match args.x_rate {
        Some(rate) => SelectionMode::rate_target(rate)?,
        None => joint_mode,
    };
    let policy = if args.strict_nesting {
        NestingPolicy::Strict
    } else {
        NestingPolicy::Force
    };
    check_conditions(wx, wy)?;
    let yx = args.synthesize(&joint_channel(wx, wy)?)?;
    let x = args.synthesize(wx)?;
    let partition = build_partition(&yx, &x, joint_mode, marginal_mode, policy)?;
    let code = CoordinationCode::from_partition(wx.clone(), wy.clone(), partition, None)?;
    Ok((code, yx, x))
}

fn construct(args: &CodeArgs) -> Result<()> {
    let (wx, wy) = args.pair.load()?;
    let (code, yx, x) = build(&args.polar, &wx, &wy)?;
    let result = json!({
        "code": code_json(&code)?,
        "synthesis": args.polar.method(&code.wyx_v),
        "threshold": capacity_threshold(code.n(), args.polar.beta),
        "profile_yx_v": profile_json(&yx),
        "profile_x_v": profile_json(&x),
    });
    emit(args.common.out.as_deref(), &report("construct", args, result)?)
}

fn resolve(args: &ResolveArgs) -> Result<()> {
    let ch = load_channel(args.channel.as_deref(), args.spec.as_deref())?;
    let (params, mode, budget) = args.polar.params()?;
    let (code, profile) = if args.polar.exact {
        let profile = synthesize_exact(&ch, params.m(), args.polar.cap)?;
        let (good, _) = select_good(&profile, mode)?;
        let code = ResolvabilityCode::new(ch.clone(), params, good, None)?;
        (code, profile)
    } else {
        build_resolvability_code(&ch, params, mode, budget)?
    };
    let bound = resolvability_bound(&profile, &code.good);
    let emp = empirical_output(&code, args.trials, args.common.seed);
    let exact = if args.polar.exact {
        let s = oracle::resolvability_summary(&code, args.polar.cap)?;
        json!({ "status": "computed", "tv_l1": s.tv_l1, "kl_bits": s.kl_bits, "pinsker_l1": s.pinsker_l1 })
    } else {
        json!({ "status": "bounded, not computed" })
    };
    let result = json!({
        "n": code.n(),
        "good": code.good,
        "rate": code.rate_bits() as f64 / code.n() as f64,
        "capacity": capacity(&ch)?,
        "synthesis": args.polar.method(&ch),
        "bound": { "kl_bits": bound.kl_bound, "tv_l1": bound.tv_bound },
        "empirical": {
            "trials": emp.trials,
            "max_symbol_tv_l1": emp.max_symbol_tv(&code.target()),
        },
        "exact": exact,
    });
    emit(args.common.out.as_deref(), &report("resolve", args, result)?)
}

fn coordinate(args: &CoordinateArgs) -> Result<()> {
    let (wx, wy) = args.pair.load()?;
    let (code, yx, x) = build(&args.polar, &wx, &wy)?;
    let stats = simulate_sessions(&code, args.sessions, args.common.seed)?;
    let target = single_letter_target(&code);
    let kl_bound: f64 = code.partition.f1.iter().map(|&i| yx[i].capacity_upper).sum();
    let encoder_bound: f64 = code
        .partition
        .bad_x_v
        .iter()
        .map(|&i| oracle::pinsker_l1_bound(x[i].capacity_upper))
        .sum();
    let exact = if args.polar.exact {
        let s = oracle::coordination_summary(&code, args.polar.cap)?;
        json!({
            "status": "computed",
            "tv_l1": s.tv_l1,
            "encoder_tv_l1": s.encoder_tv_l1,
            "ensemble_tv_l1": s.ensemble_tv_l1,
            "ensemble_kl_bits": s.ensemble_kl_bits,
        })
    } else {
        json!({ "status": "bounded, not computed" })
    };
    let result = json!({
        "code": code_json(&code)?,
        "empirical": {
            "sessions": stats.sessions,
            "max_pair_tv_l1": stats.max_pair_tv(&target),
            "pooled_pair_frequencies": stats.pooled_pair_frequencies(),
            "target": target,
        },
        "exact": exact,
        "bounds": {
            "ensemble_kl_bits": kl_bound,
            "ensemble_tv_l1": oracle::pinsker_l1_bound(kl_bound),
            "encoder_tv_l1": encoder_bound,
        },
        "ledger": stats.ledger,
    });
    emit(args.common.out.as_deref(), &report("coordinate", args, result)?)
}

fn write_curve(out: Option<&Path>, curve: &RegionCurve, meta: &RegionMetadata) -> Result<()> {
    emit(out, &curve.to_csv())?;
    if let Some(path) = out {
        let sidecar = path.with_extension("json");
        let doc = json!({ "version": env!("CARGO_PKG_VERSION"), "metadata": meta });
        fs::write(&sidecar, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", sidecar.display()))?;
    }
    Ok(())
}

fn region(case: &RegionCase) -> Result<()> {
    match case {
        RegionCase::Example1 {
            p,
            eps,
            points,
            reference,
            out,
        } => {
            let curve = if *reference {
                let grid = regions::linear_grid(0.0, eps.min(1.0), *points)?;
                regions::reference_region_example1(*p, *eps, &grid)?
            } else {
                let grid = regions::linear_grid(0.0, p.min(0.5), *points)?;
                regions::polar_region_example1(*p, *eps, &grid)?
            };
            let name = if *reference { "example1-reference" } else { "example1-polar" };
            write_curve(out.as_deref(), &curve, &RegionMetadata::describe(name, Some(*p), *eps, &curve))
        }
        RegionCase::Example2 { eps, out } => {
            let corner = regions::polar_region_example2(*eps)?;
            let doc = report(
                "region",
                case,
                json!({ "corner": corner, "region": "trivial: R >= 1, R0 >= 0" }),
            )?;
            emit(out.as_deref(), &doc)
        }
        RegionCase::General { pair, out } => {
            let (wx, wy) = pair.load()?;
            let corner = regions::polar_region_general(&wx, &wy)?;
            let doc = report("region", case, json!({ "corner": corner, "sum": corner.sum() }))?;
            emit(out.as_deref(), &doc)
        }
    }
}

fn oracle_cmd(op: &OracleOp) -> Result<()> {
    match op {
        OracleOp::BitChannels { channel, m, cap, out } => {
            let ch = parse_preset(channel)?;
            let tables = oracle::brute_force_bit_channels(&ch, *m, *cap)?;
            let rows: Vec<Value> = tables
                .iter()
                .map(|t| json!({ "index": t.index, "capacity": t.capacity, "bhattacharyya": t.bhattacharyya() }))
                .collect();
            emit(out.as_deref(), &report("oracle", op, json!({ "bit_channels": rows }))?)
        }
        OracleOp::Resolvability {
            channel,
            m,
            beta,
            cap,
            out,
        } => {
            let ch = parse_preset(channel)?;
            let params = PolarParams::new(*m)?;
            let profile = synthesize_exact(&ch, *m, *cap)?;
            let (good, _) = select_good(&profile, SelectionMode::threshold(*beta)?)?;
            let code = ResolvabilityCode::new(ch, params, good, None)?;
            let s = oracle::resolvability_summary(&code, *cap)?;
            let bound = resolvability_bound(&profile, &code.good);
            let result = json!({
                "good": code.good,
                "tv_l1": s.tv_l1,
                "kl_bits": s.kl_bits,
                "composite_capacity": oracle::composite_channel_capacity(&code, *cap)?,
                "kl_bound": bound.kl_bound,
            });
            emit(out.as_deref(), &report("oracle", op, result)?)
        }
        OracleOp::Coordination {
            pair,
            m,
            beta,
            cap,
            out,
        } => {
            let (wx, wy) = pair.load()?;
            let polar = PolarArgs {
                m: *m,
                beta: *beta,
                mu: 64,
                exact: true,
                cap: *cap,
                x_rate: None,
                strict_nesting: false,
            };
            let (code, _, _) = build(&polar, &wx, &wy)?;
            let s = oracle::coordination_summary(&code, *cap)?;
            let result = json!({ "code": code_json(&code)?, "summary": s, "triangle_holds": s.triangle_holds(1e-12) });
            emit(out.as_deref(), &report("oracle", op, result)?)
        }
        OracleOp::Distance { a, b, out } => {
            let read = |p: &Path| -> Result<DistTable> {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())).into())
            };
            let (ta, tb) = (read(a)?, read(b)?);
            let kl = match oracle::kl(&ta, &tb) {
                Ok(v) => json!(v),
                Err(Error::SupportViolation) => json!("infinite"),
                Err(e) => return Err(e.into()),
            };
            let result = json!({ "tv_l1": oracle::tv(&ta, &tb)?, "kl_bits": kl });
            emit(out.as_deref(), &report("oracle", op, result)?)
        }
        OracleOp::Entropy { p } => {
            if !(0.0..=1.0).contains(p) {
                bail!(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
            }
            emit(None, &report("oracle", op, json!({ "bits": oracle::binary_entropy(*p) }))?)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::CapExceeded { .. }) => 4,
        Some(e) if e.is_invariant_violation() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Construct(a) => construct(a),
        Command::Resolve(a) => resolve(a),
        Command::Coordinate(a) => coordinate(a),
        Command::Region { case } => region(case),
        Command::Oracle { op } => oracle_cmd(op),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
