use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use fiberkit::io::{
    matrix_json, parse_generators, parse_matrix, parse_vector, vector_json, FiberedVectorJson,
    FrameReportJson, GroupSpec, RangeFunctionJson, RangeOperatorJson, RankProfileJson,
    SectionJson, SubgroupSpec,
};
use fiberkit::{
    direct_frame_bounds, extract_range_operator, fiber_frame_bounds, fourier_conjugate,
    is_modulation_preserving, is_translation_preserving, reconstruct_operator, Error,
    FiniteAbelianGroup, FrameReport, GroupOperator, GroupVector, ModInvariantSpace, ModZak,
    Subgroup, Tolerances,
};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Fiberwise analysis of modulation-preserving operators on finite abelian
/// groups.
#[derive(Parser)]
#[command(name = "fiberkit", version)]
struct Cli {
    /// Verdict tolerance.
    #[arg(long, global = true, env = "FIBERKIT_TOL", default_value_t = 1e-9)]
    tol: f64,

    /// Relative singular-value cutoff for ranks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    rank_cutoff: f64,

    /// Worker threads for per-fiber work; output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GroupArgs {
    /// Group file: {"orders": [...], "subgroup": {"generators": [...]}}.
    group: PathBuf,

    /// Subgroup file {"generators": [...]} overriding the group file's Λ.
    #[arg(long)]
    subgroup: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Group order, Λ, its annihilator and the section sizes.
    Info {
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Modulation Zak transform of a vector, or its inverse.
    Fiberize {
        #[command(flatten)]
        group: GroupArgs,
        /// Vector file, or with --inverse a fibered vector or fiberize report.
        #[arg(long)]
        input: PathBuf,
        /// Invert a fibered vector back to L²(G).
        #[arg(long)]
        inverse: bool,
    },
    /// Whether an operator commutes with the modulations by Λ.
    CheckOp {
        #[command(flatten)]
        group: GroupArgs,
        /// Operator matrix, JSON or CSV by extension.
        #[arg(long)]
        operator: PathBuf,
        /// Check commutation with the translations by Λ ⊆ G instead.
        #[arg(long)]
        translation: bool,
    },
    /// Range operator of an operator on the space spanned by a generator set.
    Extract {
        #[command(flatten)]
        group: GroupArgs,
        /// Operator matrix, JSON or CSV by extension.
        #[arg(long)]
        operator: PathBuf,
        /// Generator vectors spanning the invariant space.
        #[arg(long)]
        generators: PathBuf,
    },
    /// Operator on L²(G) from a range operator or extract report.
    Reconstruct {
        #[command(flatten)]
        group: GroupArgs,
        /// Range operator, or an extract report.
        #[arg(long)]
        range_operator: PathBuf,
        /// Generator vectors spanning the invariant space.
        #[arg(long)]
        generators: PathBuf,
    },
    /// Frame and Riesz bounds of the modulation system of a generator set.
    FrameBounds {
        #[command(flatten)]
        group: GroupArgs,
        /// Generator vectors spanning the invariant space.
        #[arg(long)]
        generators: PathBuf,
        /// Also run the direct frame-operator computation.
        #[arg(long)]
        oracle: bool,
        /// Print a per-fiber table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Orthogonal decomposition into Parseval generators.
    Decompose {
        #[command(flatten)]
        group: GroupArgs,
        /// Generator vectors spanning the invariant space.
        #[arg(long)]
        generators: PathBuf,
        /// Report only the per-fiber ranks of the range function.
        #[arg(long)]
        rank_only: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotPreserving { .. }
            | Error::WellDefinedness { .. }
            | Error::DomainMismatch { .. }
            | Error::DomainNotInvariant { .. }
            | Error::RieszRank { .. } => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

enum Output {
    /// Payload and exit status.
    Report(Value, u8),
    Text(String),
}

/// Reads input files and records their digests by role.
struct Inputs {
    digests: serde_json::Map<String, Value>,
}

impl Inputs {
    fn read(&mut self, role: &str, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.digests.insert(role.to_string(), Value::String(hex));
        String::from_utf8(bytes).map_err(|_| Failure::input(format!("{} is not UTF-8", path.display())))
    }
}

fn in_file<T>(path: &Path, r: fiberkit::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

struct Setting {
    orders: Vec<usize>,
    lambda_spec: SubgroupSpec,
    group: FiniteAbelianGroup,
    zak: Arc<ModZak<f64>>,
}

impl Setting {
    fn load(inputs: &mut Inputs, args: &GroupArgs) -> Result<Self, Failure> {
        let spec = in_file(&args.group, GroupSpec::parse(&inputs.read("group", &args.group)?))?;
        let group = in_file(&args.group, spec.build())?;
        let lambda_spec = match &args.subgroup {
            Some(p) => in_file(p, SubgroupSpec::parse(&inputs.read("subgroup", p)?))?,
            None => spec.subgroup.clone().unwrap_or(SubgroupSpec {
                generators: Vec::new(),
            }),
        };
        let lambda = lambda_spec.build(&group)?;
        Ok(Self {
            orders: spec.orders,
            lambda_spec,
            zak: ModZak::shared(&lambda),
            group,
        })
    }

    fn lambda(&self) -> &Subgroup {
        self.zak.lambda()
    }
}

fn members_json(h: &Subgroup) -> Vec<Vec<usize>> {
    h.elements().iter().map(|e| e.coords().to_vec()).collect()
}

fn info(s: &Setting) -> Value {
    let ann = s.zak.annihilator();
    json!({
        "order": s.group.order(),
        "orders": s.group.orders(),
        "subgroup": {
            "order": s.lambda().order(),
            "generators": SubgroupSpec::of(s.lambda()).generators,
            "members": members_json(s.lambda()),
        },
        "annihilator": {
            "order": ann.order(),
            "generators": SubgroupSpec::of(ann).generators,
            "members": members_json(ann),
        },
        "fiber_count": s.zak.fiber_count(),
        "fiber_dim": s.zak.fiber_dim(),
        "base_section": SectionJson::of(s.zak.base_section()),
        "fiber_section": SectionJson::of(s.zak.fiber_section()),
    })
}

/// Accepts a bare object or a report carrying it under `payload`.
fn unwrap_payload(text: &str, path: &Path) -> Result<Value, Failure> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(match v {
        Value::Object(mut m) if m.contains_key("payload") && m.contains_key("tool_version") => {
            m.remove("payload").expect("checked")
        }
        other => other,
    })
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value, path: &Path) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_space(
    inputs: &mut Inputs,
    s: &Setting,
    path: &Path,
    cutoff: f64,
) -> Result<ModInvariantSpace<f64>, Failure> {
    let gens = in_file(path, parse_generators(&s.group, &inputs.read("generators", path)?))?;
    if gens.is_empty() {
        return Err(Failure::input(format!("{}: no generators", path.display())));
    }
    Ok(ModInvariantSpace::new(s.zak.clone(), gens, cutoff)?)
}

fn load_operator(inputs: &mut Inputs, s: &Setting, path: &Path) -> Result<GroupOperator<f64>, Failure> {
    let text = inputs.read("operator", path)?;
    let m = in_file(path, parse_matrix(path, &text))?;
    in_file(path, GroupOperator::new(&s.group, m))
}

fn frame_table(r: &FrameReport<f64>, s: &Setting) -> String {
    let mut out = format!(
        "kind {:?}  lower {:.12e}  upper {:.12e}\n",
        r.kind, r.lower, r.upper
    )
    .to_lowercase();
    if let Some((lo, hi)) = r.riesz {
        out += &format!("riesz lower {lo:.12e}  upper {hi:.12e}\n");
    }
    out += &format!("{:>6}  {:<16} {:>4}  {:>20}  {:>20}\n", "fiber", "representative", "rank", "lower", "upper");
    let base = s.zak.base_section();
    for b in &r.per_fiber {
        let rep = format!("{:?}", s.group.element_at(base.reps()[b.fiber]).coords());
        out += &format!(
            "{:>6}  {:<16} {:>4}  {:>20.12e}  {:>20.12e}\n",
            b.fiber, rep, b.rank, b.lower, b.upper
        );
    }
    out
}

fn run(cli: &Cli, inputs: &mut Inputs) -> Result<(Setting, Output), Failure> {
    let tol = cli.tol;
    let cutoff = cli.rank_cutoff;
    let tols = Tolerances {
        tol,
        rank_cutoff: cutoff,
    };
    match &cli.command {
        Command::Info { group } => {
            let s = Setting::load(inputs, group)?;
            let p = info(&s);
            Ok((s, Output::Report(p, 0)))
        }
        Command::Fiberize {
            group,
            input,
            inverse,
        } => {
            let s = Setting::load(inputs, group)?;
            let text = inputs.read("input", input)?;
            let payload = if *inverse {
                let fv: FiberedVectorJson = from_value(unwrap_payload(&text, input)?, input)?;
                let fv = in_file(input, fv.to_fibered(&s.zak))?;
                let f = s.zak.inverse(&fv)?;
                json!({ "values": vector_json(f.values().as_slice()) })
            } else {
                let f: GroupVector<f64> = in_file(input, parse_vector(&s.group, &text))?;
                serde_json::to_value(FiberedVectorJson::of(&s.zak.apply(&f)?)).expect("serializable")
            };
            Ok((s, Output::Report(payload, 0)))
        }
        Command::CheckOp {
            group,
            operator,
            translation,
        } => {
            let s = Setting::load(inputs, group)?;
            let u = load_operator(inputs, &s, operator)?;
            let (side, pres, cross) = if *translation {
                // U commutes with T_γ iff F*UF commutes with M_γ.
                let back = fourier_conjugate(&u.adjoint()).adjoint();
                let cross = is_modulation_preserving(&back, s.lambda(), tol);
                ("translation", is_translation_preserving(&u, s.lambda(), tol), cross)
            } else {
                let cross = is_translation_preserving(&fourier_conjugate(&u), s.lambda(), tol);
                ("modulation", is_modulation_preserving(&u, s.lambda(), tol), cross)
            };
            let payload = json!({
                "side": side,
                "holds": pres.holds,
                "defect": pres.defect,
                "threshold": pres.threshold,
                "conjugate_defect": cross.defect,
            });
            Ok((s, Output::Report(payload, if pres.holds { 0 } else { 1 })))
        }
        Command::Extract {
            group,
            operator,
            generators,
        } => {
            let s = Setting::load(inputs, group)?;
            let u = load_operator(inputs, &s, operator)?;
            let w = load_space(inputs, &s, generators, cutoff)?;
            let r = extract_range_operator(&u, &w, tol)?;
            let payload = serde_json::to_value(RangeOperatorJson::of(&r)).expect("serializable");
            Ok((s, Output::Report(payload, 0)))
        }
        Command::Reconstruct {
            group,
            range_operator,
            generators,
        } => {
            let s = Setting::load(inputs, group)?;
            let text = inputs.read("range_operator", range_operator)?;
            let rj: RangeOperatorJson =
                from_value(unwrap_payload(&text, range_operator)?, range_operator)?;
            let w = load_space(inputs, &s, generators, cutoff)?;
            let r = in_file(range_operator, rj.to_range_operator(&s.zak, w.range_function()))?;
            let u = reconstruct_operator(&r, &w)?;
            let pres = is_modulation_preserving(&u, s.lambda(), tol);
            let payload = json!({
                "matrix": matrix_json(u.matrix()),
                "preserving": { "holds": pres.holds, "defect": pres.defect },
                "operator_norm": u.operator_norm(),
            });
            Ok((s, Output::Report(payload, 0)))
        }
        Command::FrameBounds {
            group,
            generators,
            oracle,
            table,
        } => {
            let s = Setting::load(inputs, group)?;
            let w = load_space(inputs, &s, generators, cutoff)?;
            let r = fiber_frame_bounds(&s.zak, w.generators(), &tols)?;
            if *table {
                let mut text = frame_table(&r, &s);
                if *oracle {
                    let d = direct_frame_bounds(&s.zak, w.generators(), &tols)?;
                    text += &format!(
                        "oracle lower {:.12e}  upper {:.12e}  discrepancy {:.3e} {:.3e}\n",
                        d.lower,
                        d.upper,
                        (d.lower - r.lower).abs(),
                        (d.upper - r.upper).abs()
                    );
                }
                return Ok((s, Output::Text(text)));
            }
            let mut payload = json!({
                "fiber": FrameReportJson::of(&r, s.zak.base_section()),
            });
            if *oracle {
                let d = direct_frame_bounds(&s.zak, w.generators(), &tols)?;
                payload["oracle"] = serde_json::to_value(FrameReportJson::of(&d, s.zak.base_section()))
                    .expect("serializable");
                payload["discrepancy"] = json!({
                    "lower": (d.lower - r.lower).abs(),
                    "upper": (d.upper - r.upper).abs(),
                });
            }
            Ok((s, Output::Report(payload, 0)))
        }
        Command::Decompose {
            group,
            generators,
            rank_only,
        } => {
            let s = Setting::load(inputs, group)?;
            let w = load_space(inputs, &s, generators, cutoff)?;
            let pieces = w.principal_decomposition();
            let mut checks = Vec::new();
            let mut all_parseval = true;
            for (n, piece) in pieces.iter().enumerate() {
                let b = fiber_frame_bounds(&s.zak, std::slice::from_ref(piece), &tols)?;
                all_parseval &= b.kind == fiberkit::FrameKind::Parseval;
                checks.push(json!({
                    "piece": n,
                    "lower": b.lower,
                    "upper": b.upper,
                    "kind": b.kind,
                }));
            }
            let range = if *rank_only {
                serde_json::to_value(RankProfileJson::of(w.range_function()))
            } else {
                serde_json::to_value(RangeFunctionJson::of(w.range_function()))
            }
            .expect("serializable");
            let payload = json!({
                "generators": pieces.iter().map(|p| vector_json(p.values().as_slice())).collect::<Vec<_>>(),
                "parseval": checks,
                "all_parseval": all_parseval,
                "dimension": w.dimension(),
                "range_function": range,
            });
            Ok((s, Output::Report(payload, if all_parseval { 0 } else { 1 })))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Info { .. } => "info",
        Command::Fiberize { .. } => "fiberize",
        Command::CheckOp { .. } => "check-op",
        Command::Extract { .. } => "extract",
        Command::Reconstruct { .. } => "reconstruct",
        Command::FrameBounds { .. } => "frame-bounds",
        Command::Decompose { .. } => "decompose",
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.output {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, Failure> {
    let mut inputs = Inputs {
        digests: serde_json::Map::new(),
    };
    let (s, out) = run(cli, &mut inputs)?;
    match out {
        Output::Text(t) => {
            emit(cli, &t)?;
            Ok(0)
        }
        Output::Report(payload, code) => {
            let report = json!({
                "tool_version": env!("CARGO_PKG_VERSION"),
                "command": command_name(&cli.command),
                "inputs": Value::Object(inputs.digests),
                "group": { "orders": s.orders },
                "subgroup": s.lambda_spec,
                "tolerances": { "tol": cli.tol, "rank_cutoff": cli.rank_cutoff },
                "payload": payload,
            });
            let mut text = serde_json::to_string_pretty(&report).expect("serializable");
            text.push('\n');
            emit(cli, &text)?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure::input(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("fiberkit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
