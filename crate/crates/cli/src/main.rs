mod manifest;
mod svg;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use bridgeland_core::charge::{
    class_charge, gieseker_compare, heart_position, hilbert_polynomial, phase_compare, slope, ChargeMap, ChargeParams,
    Slope, SlopeProfile,
};
use bridgeland_core::enumerate::{budget_from_env, DEFAULT_BUDGET};
use bridgeland_core::hn::{hn_filtration, is_semistable, validate, CategoryPresentation};
use bridgeland_core::lattice::mukai_pairing;
use bridgeland_core::mmp::{bb_square, lagrangian_candidates, moduli_dimension, omega_class, wall_report, WallReportOptions};
use bridgeland_core::num::{parse_rational, rat, Integer, Rational};
use bridgeland_core::support::{analyze, equivalent_support_roundtrip, support_check, RootSearch};
use bridgeland_core::walls::{
    chambers_along_path, compare_with_oracle, nesting_check, sampling_oracle, scan_walls, Region, SliceParams, WallScan,
};
use bridgeland_core::{ChernCharacter, Error, GaussianRational, MukaiVector, NsLattice};

use manifest::Recorder;

#[derive(Parser, Debug)]
#[command(name = "bridgeland", version, about = "Exact numerical Bridgeland stability on surfaces")]
struct Cli {
    /// Write the result, with a run manifest, to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Recorded in the manifest; no subcommand currently samples randomly.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Lattice-point enumeration budget (falls back to BRIDGELAND_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct LatticeArg {
    /// NS lattice JSON: {"rank", "gram", "ample", "k3"}.
    #[arg(long)]
    lattice: String,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    /// B-field in NS coordinates, comma separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    /// Kähler class in NS coordinates.
    #[arg(long, allow_hyphen_values = true)]
    omega: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mukai pairing (v, w).
    Pairing {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
    },
    /// Central charge Z_{omega,beta}(v).
    Charge {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[command(flatten)]
        stab: StabilityArgs,
    },
    /// Compares phases of two charges, given directly ("re,im") or as Z(v), Z(w).
    PhaseCompare {
        #[arg(long, allow_hyphen_values = true)]
        z1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z2: Option<String>,
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
    /// Position of a sheaf relative to the tilted heart, from its HN slopes
    /// ("--slopes inf,1/2,-1") or its HN factors ("--factors 'r,c,s;r,c,s'").
    Heart {
        #[arg(long, allow_hyphen_values = true)]
        slopes: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        factors: Option<String>,
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
    /// Harder–Narasimhan filtration of an object of a finite presentation.
    Hn {
        #[arg(long)]
        category: String,
        /// Either {"columns": [...]} or {"beta", "omega", "lattice"}.
        #[arg(long)]
        charge: String,
        #[arg(long)]
        object: String,
    },
    /// Kernel, norm form, minimal root norm and Q_Z of a K3 charge.
    Support {
        #[command(flatten)]
        lattice: LatticeArg,
        #[command(flatten)]
        stab: StabilityArgs,
        /// Largest root-norm bound searched.
        #[arg(long)]
        bound: Option<String>,
        /// JSON list of classes to check against Q_Z.
        #[arg(long)]
        classes: Option<String>,
    },
    /// Potential walls for v on the slice beta = beta0 + bH, omega = tH.
    Walls {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, allow_hyphen_values = true)]
        beta0: Option<String>,
        /// Range "lo:hi".
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Range "lo:hi" with lo > 0.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = 8)]
        bound: i64,
        /// Also run the sampling oracle on a grid x grid lattice.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Chambers along the vertical path b = const.
    Chambers {
        #[arg(long)]
        walls: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// SVG wall diagram.
    Plot {
        #[arg(long)]
        walls: String,
    },
    /// Omega class, its Beauville–Bogomolov square and the moduli dimension.
    Nef {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[command(flatten)]
        stab: StabilityArgs,
    },
    /// Lattice-theoretic report on the wall of (v, w) at a point "b,t" of the slice.
    ClassifyWall {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long, allow_hyphen_values = true)]
        beta0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 3)]
        max_m: usize,
        /// Coordinate bound for decomposition parts.
        #[arg(long, default_value_t = 10)]
        bound: i64,
    },
    /// Isotropic classes u with (u, v) = 0 in a coordinate box.
    Lagrangian {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value_t = 8)]
        bound: i64,
    },
    /// Gieseker comparison of the reduced Hilbert polynomials of v and w.
    Gieseker {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
    },
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Computation(e.to_string())
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

struct Output {
    result: Value,
    summary: String,
    plot: Option<WallScan>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read_json<T: DeserializeOwned>(rec: &mut Recorder, path: &str) -> Res<T> {
    let bytes = rec.read(path).map_err(|e| invalid(format!("{path}: {e}")))?;
    serde_json::from_slice(&bytes).map_err(|e| invalid(format!("{path}: {e}")))
}

fn load_lattice(rec: &mut Recorder, path: &str) -> Res<NsLattice> {
    read_json(rec, path)
}

fn parse_vector(s: &str, lattice: &NsLattice) -> Res<MukaiVector> {
    let v = MukaiVector::parse_flat(s)?;
    lattice.check_len(v.c.len())?;
    Ok(v)
}

fn parse_rationals(s: &str) -> Res<Vec<Rational>> {
    Ok(s.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?)
}

fn parse_range(s: &str) -> Res<(Rational, Rational)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| invalid(format!("expected a range lo:hi, got `{s}`")))?;
    Ok((parse_rational(lo)?, parse_rational(hi)?))
}

fn parse_gaussian(s: &str) -> Res<GaussianRational> {
    match parse_rationals(s)?.as_slice() {
        [re, im] => Ok(GaussianRational::new(re.clone(), im.clone())),
        _ => Err(invalid(format!("expected `re,im`, got `{s}`"))),
    }
}

fn params(lattice: NsLattice, beta: &str, omega: &str) -> Res<ChargeParams> {
    Ok(ChargeParams::new(lattice, parse_rationals(beta)?, parse_rationals(omega)?)?)
}

fn slice(lattice: NsLattice, beta0: Option<&str>) -> Res<SliceParams> {
    let beta0 = match beta0 {
        Some(s) => parse_rationals(s)?,
        None => vec![rat(0); lattice.rank()],
    };
    Ok(SliceParams::new(lattice, beta0, None)?)
}

fn ordering_name(o: std::cmp::Ordering) -> &'static str {
    match o {
        std::cmp::Ordering::Less => "less",
        std::cmp::Ordering::Equal => "equal",
        std::cmp::Ordering::Greater => "greater",
    }
}

/// A wall scan file is either the `walls` result, its `scan` member, or
/// either of these wrapped with a manifest.
fn load_scan(rec: &mut Recorder, path: &str) -> Res<WallScan> {
    let mut v: Value = read_json(rec, path)?;
    if let Some(r) = v.get_mut("result") {
        v = r.take();
    }
    if let Some(s) = v.get_mut("scan") {
        v = s.take();
    }
    serde_json::from_value(v).map_err(|e| invalid(format!("{path}: not a wall scan: {e}")))
}

fn budget(cli_budget: Option<u64>) -> u64 {
    cli_budget.unwrap_or_else(|| budget_from_env(DEFAULT_BUDGET))
}

fn run(cmd: &Command, rec: &mut Recorder, cli_budget: Option<u64>) -> Res<Output> {
    let out = |result: Value, summary: String| Ok(Output { result, summary, plot: None });
    match cmd {
        Command::Pairing { lattice, v, w } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let (v, w) = (parse_vector(v, &l)?, parse_vector(w, &l)?);
            let value = mukai_pairing(&v, &w, &l)?;
            out(json!({ "value": value.to_string() }), format!("(v, w) = {value}"))
        }
        Command::Charge { lattice, v, stab } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let v = parse_vector(v, &l)?;
            let p = params(l, &stab.beta, &stab.omega)?;
            let z = class_charge(&v, &p)?;
            let summary = format!("Z(v) = {} + {} i", z.re, z.im);
            out(json!({ "charge": to_value(&z) }), summary)
        }
        Command::PhaseCompare {
            z1,
            z2,
            lattice,
            v,
            w,
            beta,
            omega,
        } => {
            let (a, b) = match (z1, z2, lattice, v, w, beta, omega) {
                (Some(z1), Some(z2), None, None, None, None, None) => (parse_gaussian(z1)?, parse_gaussian(z2)?),
                (None, None, Some(l), Some(v), Some(w), Some(beta), Some(omega)) => {
                    let l = load_lattice(rec, l)?;
                    let (v, w) = (parse_vector(v, &l)?, parse_vector(w, &l)?);
                    let p = params(l, beta, omega)?;
                    (class_charge(&v, &p)?, class_charge(&w, &p)?)
                }
                _ => {
                    return Err(invalid(
                        "give either --z1 and --z2, or --lattice, --v, --w, --beta and --omega",
                    ))
                }
            };
            let o = phase_compare(&a, &b)?;
            out(
                json!({ "order": ordering_name(o), "z1": to_value(&a), "z2": to_value(&b) }),
                format!("phase(z1) is {} phase(z2)", ordering_name(o)),
            )
        }
        Command::Heart {
            slopes,
            factors,
            lattice,
            beta,
            omega,
        } => {
            let list: Vec<Slope> = match (slopes, factors, lattice, beta, omega) {
                (Some(s), None, None, None, None) => {
                    s.split(',').map(Slope::parse).collect::<Result<_, _>>()?
                }
                (None, Some(f), Some(l), Some(beta), Some(omega)) => {
                    let l = load_lattice(rec, l)?;
                    let p = params(l.clone(), beta, omega)?;
                    f.split(';')
                        .map(|s| {
                            let v = parse_vector(s, &l)?;
                            Ok(slope(&ChernCharacter::of_mukai_vector(&v, &l), &p)?)
                        })
                        .collect::<Res<_>>()?
                }
                _ => {
                    return Err(invalid(
                        "give either --slopes, or --factors with --lattice, --beta and --omega",
                    ))
                }
            };
            let profile = SlopeProfile::new(list)?;
            let pos = heart_position(&profile);
            out(
                json!({ "position": to_value(&pos), "slopes": to_value(&profile) }),
                format!("heart position: {}", to_value(&pos).as_str().unwrap_or_default()),
            )
        }
        Command::Hn { category, charge, object } => {
            let cat: CategoryPresentation = read_json(rec, category)?;
            let raw: Value = read_json(rec, charge)?;
            let z = match serde_json::from_value::<ChargeMap>(raw.clone()) {
                Ok(z) => z,
                Err(_) => {
                    let p: ChargeParams =
                        serde_json::from_value(raw).map_err(|e| invalid(format!("{charge}: {e}")))?;
                    ChargeMap::from_params(&p)?
                }
            };
            let violations = validate(&cat, &z);
            if !violations.is_empty() {
                let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
                return Err(invalid(format!("invalid presentation:\n  {}", list.join("\n  "))));
            }
            let filt = hn_filtration(&cat, &z, object)?;
            let semistable = is_semistable(&cat, &z, object)?;
            let summary = format!("{} HN factor(s): {}", filt.factors.len(), filt.factors.join(", "));
            out(
                json!({ "object": object, "semistable": semistable, "filtration": to_value(&filt) }),
                summary,
            )
        }
        Command::Support {
            lattice,
            stab,
            bound,
            classes,
        } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let p = params(l, &stab.beta, &stab.omega)?;
            let mut search = RootSearch {
                budget: budget(cli_budget),
                ..RootSearch::default()
            };
            if let Some(b) = bound {
                search.max_bound = parse_rational(b)?;
            }
            rec.bound("root_norm_max", &search.max_bound);
            rec.bound("budget", search.budget);
            let a = analyze(&p, &search)?;
            let mut result = json!({ "analysis": to_value(&a) });
            if let Some(path) = classes {
                let list: Vec<Vec<String>> = read_json(rec, path)?;
                let list: Vec<Vec<Integer>> = list
                    .iter()
                    .map(|c| c.iter().map(|x| Ok(bridgeland_core::num::parse_integer(x)?)).collect())
                    .collect::<Res<_>>()?;
                let q = a
                    .q_z
                    .as_ref()
                    .ok_or_else(|| Failure::Computation("no root found: Q_Z is not defined".into()))?;
                result["support_check"] = to_value(&support_check(q, &a.charge, &list)?);
                result["roundtrip"] = to_value(&equivalent_support_roundtrip(q, &a.charge, &list)?);
            }
            let summary = match &a.root_norm.c_squared {
                Some(c2) => format!("kernel rank {}, minimal root norm {c2}", a.kernel.basis.len()),
                None => format!("kernel rank {}, no root up to {}", a.kernel.basis.len(), a.root_norm.bound),
            };
            out(result, summary)
        }
        Command::Walls {
            lattice,
            v,
            beta0,
            b,
            t,
            bound,
            grid,
        } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let v = parse_vector(v, &l)?;
            let s = slice(l, beta0.as_deref())?;
            let (b0, b1) = parse_range(b)?;
            let (t0, t1) = parse_range(t)?;
            let region = Region::new(b0, b1, t0, t1)?;
            rec.bound("bound", bound);
            let scan = scan_walls(&v, &s, &region, *bound)?;
            let nesting = nesting_check(&scan.walls);
            let mut result = json!({ "scan": to_value(&scan), "nesting": to_value(&nesting) });
            let mut summary = format!(
                "{} potential wall(s) from {} candidate class(es); {} nesting violation(s)",
                scan.walls.len(),
                scan.candidate_count,
                nesting.violations.len()
            );
            if let Some(g) = grid {
                rec.bound("grid", g);
                let oracle = sampling_oracle(&v, &s, &region, *g, *bound)?;
                let cmp = compare_with_oracle(&scan, &oracle);
                summary.push_str(&format!("; oracle agreement: {}", cmp.equal));
                result["oracle"] = to_value(&cmp);
            }
            out(result, summary)
        }
        Command::Chambers { walls, b, t } => {
            let scan = load_scan(rec, walls)?;
            let b = parse_rational(b)?;
            let (t0, t1) = parse_range(t)?;
            let report = chambers_along_path(&b, &t0, &t1, &scan.walls)?;
            let summary = format!(
                "{} crossing(s), {} chamber(s)",
                report.crossings.len(),
                report.chambers.len()
            );
            out(to_value(&report), summary)
        }
        Command::Plot { walls } => {
            let scan = load_scan(rec, walls)?;
            Ok(Output {
                result: Value::Null,
                summary: format!("plotted {} wall(s)", scan.walls.len()),
                plot: Some(scan),
            })
        }
        Command::Nef { lattice, v, stab } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let v = parse_vector(v, &l)?;
            let p = params(l.clone(), &stab.beta, &stab.omega)?;
            let z = ChargeMap::from_params(&p)?;
            let omega = omega_class(&v, &z, &l)?;
            let q = bb_square(&omega);
            let dim = moduli_dimension(&v, &l)?;
            let summary = format!("bb_square = {q}, moduli dimension {}", dim.dimension);
            out(
                json!({
                    "omega_class": to_value(&omega),
                    "bb_square": q.to_string(),
                    "moduli_dimension": to_value(&dim),
                }),
                summary,
            )
        }
        Command::ClassifyWall {
            lattice,
            v,
            w,
            beta0,
            point,
            max_m,
            bound,
        } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let (v, w) = (parse_vector(v, &l)?, parse_vector(w, &l)?);
            let s = slice(l, beta0.as_deref())?;
            let (pb, pt) = match parse_rationals(point)?.as_slice() {
                [b, t] => (b.clone(), t.clone()),
                _ => return Err(invalid(format!("expected --point b,t, got `{point}`"))),
            };
            let z = ChargeMap::from_params(&s.params_at(&pb, &pt)?)?;
            let opts = WallReportOptions {
                root_bound: None,
                max_m: *max_m,
                part_bound: *bound,
            };
            rec.bound("max_m", max_m);
            rec.bound("part_bound", bound);
            let report = wall_report(&v, &w, &s, &z, &opts)?;
            let summary = format!(
                "on wall: {}; {} root(s), {} decomposition(s)",
                report.on_wall,
                report.roots.len(),
                report.decompositions.len()
            );
            out(to_value(&report), summary)
        }
        Command::Lagrangian { lattice, v, bound } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let v = parse_vector(v, &l)?;
            rec.bound("bound", bound);
            let list = lagrangian_candidates(&v, &l, *bound)?;
            let summary = format!("{} candidate(s)", list.len());
            out(json!({ "candidates": to_value(&list) }), summary)
        }
        Command::Gieseker {
            lattice,
            v,
            w,
            beta,
            omega,
        } => {
            let l = load_lattice(rec, &lattice.lattice)?;
            let (v, w) = (parse_vector(v, &l)?, parse_vector(w, &l)?);
            let beta = match beta {
                Some(b) => parse_rationals(b)?,
                None => vec![rat(0); l.rank()],
            };
            let p = ChargeParams::new(l.clone(), beta, parse_rationals(omega)?)?;
            let pv = hilbert_polynomial(&ChernCharacter::of_mukai_vector(&v, &l), &p)?;
            let pw = hilbert_polynomial(&ChernCharacter::of_mukai_vector(&w, &l), &p)?;
            let o = gieseker_compare(&pv, &pw)?;
            let strs = |p: &[Rational]| p.iter().map(ToString::to_string).collect::<Vec<_>>();
            out(
                json!({ "order": ordering_name(o), "hilbert_v": strs(&pv), "hilbert_w": strs(&pw) }),
                format!("reduced Hilbert polynomials: p_v vs p_w is {}", ordering_name(o)),
            )
        }
    }
}

fn write_file(path: &str, contents: &str) -> Res<()> {
    std::fs::write(path, contents).map_err(|e| Failure::Computation(format!("{path}: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if matches!(cli.command, Command::Plot { .. }) && cli.out.is_none() {
        eprintln!("error: plot needs --out");
        return ExitCode::from(1);
    }
    let mut rec = Recorder::default();
    let result = run(&cli.command, &mut rec, cli.budget).and_then(|o| {
        let manifest = to_value(&rec.finish(cli.seed));
        // serde_json::Value keeps object keys sorted, which makes output canonical
        match (&cli.out, &o.plot) {
            (Some(path), Some(scan)) => {
                let meta = serde_json::to_string(&manifest).expect("serializable");
                write_file(path, &svg::render(scan, Some(&meta)))?;
            }
            (Some(path), None) => {
                let doc = json!({ "manifest": manifest, "result": o.result });
                write_file(path, &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
            }
            (None, _) => {
                use std::io::Write;
                // a closed pipe on stdout is not an error of the computation
                let text = serde_json::to_string_pretty(&o.result).expect("serializable");
                let _ = writeln!(std::io::stdout().lock(), "{text}");
            }
        }
        eprintln!("{}", o.summary);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Computation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
