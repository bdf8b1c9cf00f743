//! Batch command-line front end. Every command prints exactly one JSON
//! document on stdout; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 negative verdict, 2 usage or input error,
//! 3 resource cap exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{Caps, Operation};
use crate::counterexamples::{
    bracket_containment, family_violation, in_u, mu_minus, mu_plus, narrowing_check, omega_family,
    BracketedParam,
};
use crate::error::{Error, Result};
use crate::galois::{
    express_from_certificate, imp_membership, wclone_membership, ImpWitness, MembershipVerdict,
};
use crate::improve::{find_weighted_polymorphism, improvement_rows, is_weighted_polymorphism, pol};
use crate::rational::{format_rat, parse_rat, Rat};
use crate::reductions::{reduce_opt, reduce_scale, ScaledInstance};
use crate::vcsp::VcspInstance;
use crate::wops::Weighting;
use crate::wrel::{Language, WeightedRelation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wclone",
    version,
    about = "Weighted clones, weighted polymorphisms and valued CSPs"
)]
pub struct Cli {
    #[command(flatten)]
    pub caps: CapArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Maximum number of operations of one arity to enumerate (overrides WCLONE_OP_CAP).
    #[arg(long, global = true)]
    pub op_cap: Option<u64>,
    /// Maximum number of assignments a brute-force solve may visit.
    #[arg(long, global = true)]
    pub assignment_cap: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the k-ary polymorphisms of a language.
    Pol {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        arity: usize,
    },
    /// Check whether a weighting improves a relation or every relation of a language.
    WpolCheck {
        #[arg(long)]
        weighting: PathBuf,
        #[arg(long, required_unless_present = "language")]
        relation: Option<PathBuf>,
        #[arg(long, conflicts_with = "relation")]
        language: Option<PathBuf>,
    },
    /// Find a k-ary weighted polymorphism, optionally positive on a given operation.
    WpolFind {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        arity: usize,
        /// Operation file; the weighting must give it weight at least 1.
        #[arg(long)]
        positive: Option<PathBuf>,
    },
    /// Emit the improvement rows γ[X] over the k-ary polymorphisms.
    ImproveRows {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        arity: usize,
    },
    /// Decide whether a relation is expressible from a language.
    ImpMember {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        relation: PathBuf,
    },
    /// Decide whether a weighting lies in the weighted clone of a set of weightings.
    WcloneMember {
        /// JSON array of weightings.
        #[arg(long)]
        weightings: PathBuf,
        #[arg(long)]
        weighting: PathBuf,
        #[arg(long, default_value_t = 0)]
        arity_cap: usize,
    },
    /// Rebuild a relation from a membership witness.
    Express {
        #[arg(long)]
        language: PathBuf,
        /// A witness or a member verdict.
        #[arg(long)]
        witness: PathBuf,
    },
    /// Solve an instance by brute force.
    Solve {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Smallest positive gap between distinct finite objective values.
    Delta {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Replace Opt(γ) constraints with copies of γ.
    ReduceOpt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        opt: String,
        #[arg(long)]
        allow_identity: bool,
    },
    /// Replace rational constraint factors with integer multiplicities.
    ReduceScale {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        epsilon: String,
    },
    /// Bracketed constructions on a three-element domain.
    Counterexample {
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Lower end of an enclosing bracket to check containment against.
        #[arg(long, requires = "loose_v")]
        loose_u: Option<String>,
        #[arg(long, requires = "loose_u")]
        loose_v: Option<String>,
    },
}

/// Result of one command: a JSON document and whether the verdict was positive.
struct Output {
    value: Value,
    positive: bool,
}

impl Output {
    fn ok(value: impl Serialize) -> Result<Self> {
        Ok(Output {
            value: to_value(value)?,
            positive: true,
        })
    }

    fn verdict(value: impl Serialize, positive: bool) -> Result<Self> {
        Ok(Output {
            value: to_value(value)?,
            positive,
        })
    }
}

fn to_value(value: impl Serialize) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn from_value<T: DeserializeOwned>(value: Value, path: &Path) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Loads an instance whose `"language"` field is inline or a path relative to the file.
fn load_instance<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let mut value: Value = load(path)?;
    if let Some(Value::String(lang)) = value.get("language") {
        let base = path.parent().unwrap_or(Path::new("."));
        let lang_path = base.join(lang);
        let inline: Value = load(&lang_path)?;
        value["language"] = inline;
    }
    from_value(value, path)
}

fn caps(args: &CapArgs) -> Result<Caps> {
    let mut caps = Caps::from_env()?;
    if let Some(c) = args.op_cap {
        caps.op_cap = c;
    }
    if let Some(c) = args.assignment_cap {
        caps.assignment_cap = c;
    }
    Ok(caps)
}

fn rat_arg(name: &str, text: &str) -> Result<Rat> {
    parse_rat(text)
        .map_err(|_| Error::Parse(format!("--{name}: {text:?} is not an exact rational")))
}

fn execute(command: &Command, caps: &Caps) -> Result<Output> {
    match command {
        Command::Pol { language, arity } => {
            let lang: Language = load(language)?;
            let ops = pol(&lang, *arity, caps)?;
            let ops: Vec<&Operation> = ops.arity(*arity).collect();
            Output::ok(json!({ "arity": arity, "count": ops.len(), "operations": ops }))
        }
        Command::WpolCheck {
            weighting,
            relation,
            language,
        } => {
            let omega: Weighting = load(weighting)?;
            let relations: Vec<(String, WeightedRelation)> = match (relation, language) {
                (Some(r), _) => vec![(r.display().to_string(), load(r)?)],
                (None, Some(l)) => load::<Language>(l)?
                    .iter()
                    .map(|(n, r)| (n.clone(), r.clone()))
                    .collect(),
                (None, None) => return Err(Error::invalid("give --relation or --language")),
            };
            let mut failures = Vec::new();
            for (name, rel) in &relations {
                if !is_weighted_polymorphism(&omega, rel)? {
                    failures.push(name.clone());
                }
            }
            let ok = failures.is_empty();
            Output::verdict(json!({ "verdict": ok, "failures": failures }), ok)
        }
        Command::WpolFind {
            language,
            arity,
            positive,
        } => {
            let lang: Language = load(language)?;
            let f0: Option<Operation> = positive.as_deref().map(load).transpose()?;
            let found = find_weighted_polymorphism(&lang, *arity, f0.as_ref(), caps)?;
            let ok = found.is_some();
            Output::verdict(json!({ "found": ok, "weighting": found }), ok)
        }
        Command::ImproveRows { language, arity } => {
            let lang: Language = load(language)?;
            let (basis, rows) = improvement_rows(&lang, *arity, caps)?;
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "relation": r.relation,
                        "x": r.x.rows(),
                        "vector": r.vector.iter().map(format_rat).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Output::ok(json!({ "basis": basis, "rows": rows }))
        }
        Command::ImpMember { language, relation } => {
            let lang: Language = load(language)?;
            let rho: WeightedRelation = load(relation)?;
            let verdict = imp_membership(&lang, &rho, caps)?;
            let ok = verdict.is_member();
            Output::verdict(verdict, ok)
        }
        Command::WcloneMember {
            weightings,
            weighting,
            arity_cap,
        } => {
            let omegas: Vec<Weighting> = load(weightings)?;
            let mu: Weighting = load(weighting)?;
            let verdict = wclone_membership(&omegas, &mu, *arity_cap, caps)?;
            let ok = verdict.is_member();
            Output::verdict(verdict, ok)
        }
        Command::Express { language, witness } => {
            let lang: Language = load(language)?;
            let value: Value = load(witness)?;
            let witness: ImpWitness = if value.get("verdict").is_some() {
                match from_value::<MembershipVerdict>(value, witness)? {
                    MembershipVerdict::Member { witness } => witness,
                    MembershipVerdict::Separated { .. } => {
                        return Err(Error::invalid("a separated verdict carries no witness"))
                    }
                }
            } else {
                from_value(value, witness)?
            };
            Output::ok(express_from_certificate(&witness, &lang, caps)?)
        }
        Command::Solve { instance } => {
            let inst: VcspInstance = load_instance(instance)?;
            let solution = inst.solve(caps)?;
            let ok = solution.optimum.is_finite();
            Output::verdict(solution, ok)
        }
        Command::Delta { instance } => {
            let inst: VcspInstance = load_instance(instance)?;
            let delta = inst.delta(caps)?;
            Output::ok(json!({ "delta": delta.as_ref().map(format_rat) }))
        }
        Command::ReduceOpt {
            instance,
            gamma,
            opt,
            allow_identity,
        } => {
            let inst: VcspInstance = load_instance(instance)?;
            Output::ok(reduce_opt(&inst, gamma, opt, *allow_identity, caps)?)
        }
        Command::ReduceScale { instance, epsilon } => {
            let inst: ScaledInstance = load_instance(instance)?;
            let eps = rat_arg("epsilon", epsilon)?;
            Output::ok(reduce_scale(&inst, &eps, caps)?)
        }
        Command::Counterexample {
            u,
            v,
            k,
            loose_u,
            loose_v,
        } => {
            let bracket = BracketedParam::new(rat_arg("u", u)?, rat_arg("v", v)?, "t")?;
            let minus = mu_minus(&bracket.lower);
            let plus = mu_plus(&bracket.upper);
            let narrowing = narrowing_check(&bracket.lower, &bracket.upper, *k, caps)?;
            let family = omega_family(&bracket)?;
            let outsider = family.outsider();
            let violation = family_violation(&outsider, &bracket.lower);
            let containment = match (loose_u, loose_v) {
                (Some(lu), Some(lv)) => {
                    let loose =
                        BracketedParam::new(rat_arg("loose-u", lu)?, rat_arg("loose-v", lv)?, "t")?;
                    Some(bracket_containment(&bracket, &loose, *k, caps)?.len())
                }
                _ => None,
            };
            Output::ok(json!({
                "bracket": bracket,
                "mu_minus": minus,
                "mu_plus": plus,
                "in_u": [in_u(&minus, &bracket)?, in_u(&plus, &bracket)?],
                "narrowing": narrowing,
                "family": family,
                "outsider": outsider,
                "outsider_violation": violation,
                "containment_certificates": containment,
            }))
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CapExceeded { .. } => EXIT_CAP,
        _ => EXIT_USAGE,
    }
}

/// Runs the command line `args` (program name first), writing to the given streams.
pub fn run_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let result = caps(&cli.caps).and_then(|caps| execute(&cli.command, &caps));
    match result {
        Ok(output) => {
            let text = serde_json::to_string_pretty(&output.value).expect("values serialize");
            let _ = writeln!(out, "{text}");
            if output.positive {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
