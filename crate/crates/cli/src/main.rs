//! `tanaka`: prolongations, derived flags and symmetry checks from files.
//!
//! Exit codes: 0 success, 1 a mathematical violation or inconsistency,
//! 2 an I/O or parse error. `TANAKA_THREADS` caps the solver thread pool.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use tanaka::distribution::{derived_flag, named_model, summarize, FieldsDoc};
use tanaka::flat::{
    contact_component, contact_span_theta, decompose_g1_contact, decompose_g1_projective, embedding_of_covector,
    field_component, field_span_theta, hamiltonians, lagrangian_contact_g0,
};
use tanaka::graded::Gnla;
use tanaka::linalg::{int, parse_scalar, Matrix, Subspace, SubspaceDoc};
use tanaka::prolong::{prolong, ProlongedAlgebra, ReductionKind, ReductionSpec, DEFAULT_MAX_DEGREE};
use tanaka::symmetry::{
    check_bracket_compat, determinacy_table, filtration_report, sl3_scenario, verify, GradedCoordinateModel, ScenarioDoc,
};
use tanaka::Error;

#[derive(Parser)]
#[command(name = "tanaka", version, about = "Tanaka prolongation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a graded nilpotent Lie algebra file.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Prolong an algebra, optionally with reductions.
    Prolong {
        file: PathBuf,
        /// der0, co, so, or a subspace file in degree 0 θ-coordinates.
        #[arg(long, default_value = "der0")]
        g0: String,
        /// degree:kind[:file] with kind in orthogonal, conformal, complex, trace-free, custom.
        #[arg(long = "reduce")]
        reduce: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
        max_degree: usize,
        /// Include component bases in the output.
        #[arg(long)]
        dump: bool,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Derived flag, growth vectors and nilpotent approximations.
    Flag {
        file: PathBuf,
        /// Comma-separated rationals; a lone 0 means the origin.
        #[arg(long = "point")]
        points: Vec<String>,
        /// Emit the graded algebra at each requested point.
        #[arg(long)]
        gnla: bool,
        #[arg(long, default_value_t = 8)]
        max_step: usize,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Verify a symmetry scenario.
    Symmetry {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Write built-in algebras, models and reductions as files.
    Export {
        #[command(subcommand)]
        what: Export,
    },
}

#[derive(Subcommand)]
enum Export {
    /// heisenberg(d): x1..xd, p1..pd, z.
    Heisenberg { d: usize },
    /// Abelian algebra of dimension n in degree −1.
    Abelian { n: usize },
    /// Built-in distribution: heisenberg, martinet, cartan235, plane.
    Fields { name: String },
    /// W ⊂ contact g1, as a degree 1 reduction of heisenberg(n−1).
    ContactW { n: usize },
    /// S³W ⊂ contact g1, as a degree 1 reduction of heisenberg(n−1).
    ContactS3w { n: usize },
    /// ℝ ⊕ V⊗V* ⊂ contact g0, as a degree 0 reduction of heisenberg(n−1).
    Lagrangian { n: usize },
    /// i(V*) ⊂ S²V*⊗V, as a degree 1 reduction of the abelian algebra.
    ProjectiveImage { n: usize },
    /// Ker q ⊂ S²V*⊗V, as a degree 1 reduction of the abelian algebra.
    DivergenceFree { n: usize },
    /// The sl(3) symmetry scenario on the Heisenberg model.
    Sl3Scenario,
    /// All homogeneous symmetries of a built-in model up to an order.
    GradedScenario {
        model: String,
        #[arg(long, default_value_t = 0)]
        max_order: i32,
        #[arg(long, default_value_t = 1)]
        cap: usize,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Json(_) | Error::Malformed(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn parse_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| parse_failure(path, e))
}

fn read_gnla(path: &Path) -> Result<Gnla, Failure> {
    Gnla::from_json(&read(path)?).map_err(|e| match e {
        Error::Json(_) | Error::Parse(_) | Error::Malformed(_) => parse_failure(path, e),
        other => other.into(),
    })
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match run(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("TANAKA_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure {
        code: 2,
        message: format!("TANAKA_THREADS must be a positive integer, got `{v}`"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })
}

fn run(command: Command) -> Result<(String, u8), Failure> {
    match command {
        Command::Check { file, format } => cmd_check(&file, format),
        Command::Prolong {
            file,
            g0,
            reduce,
            max_degree,
            dump,
            format,
        } => cmd_prolong(&file, &g0, &reduce, max_degree, dump, format),
        Command::Flag {
            file,
            points,
            gnla,
            max_step,
            format,
        } => cmd_flag(&file, &points, gnla, max_step, format),
        Command::Symmetry { file, format } => cmd_symmetry(&file, format),
        Command::Export { what } => Ok((cmd_export(what)?, 0)),
    }
}

#[derive(Serialize)]
struct CheckReport {
    schema_version: u32,
    valid: bool,
    fundamental: bool,
    dims: Vec<usize>,
    violations: Vec<String>,
}

fn cmd_check(file: &Path, format: Format) -> Result<(String, u8), Failure> {
    let m = read_gnla(file)?;
    let violations: Vec<String> = m.validate().iter().map(ToString::to_string).collect();
    let valid = violations.is_empty();
    let fundamental = valid && m.is_fundamental();
    let report = CheckReport {
        schema_version: 1,
        valid,
        fundamental,
        dims: m.dims(),
        violations,
    };
    let code = if valid && fundamental { 0 } else { 1 };
    let out = match format {
        Format::Json => json(&report),
        Format::Human => {
            let mut s = format!("dims (from degree -{}): {:?}\n", m.depth(), report.dims);
            for v in &report.violations {
                writeln!(s, "violation: {v}").unwrap();
            }
            if valid {
                writeln!(s, "valid: yes").unwrap();
                writeln!(s, "fundamental: {}", if fundamental { "yes" } else { "no" }).unwrap();
            } else {
                writeln!(s, "valid: no").unwrap();
            }
            s
        }
    };
    Ok((out, code))
}

/// A square matrix file: `{"rows": [["1", "0"], ["0", "1"]]}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    #[serde(default)]
    #[allow(dead_code)]
    schema_version: Option<u32>,
    rows: Vec<Vec<String>>,
}

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    let doc: MatrixDoc = read_json(path)?;
    let cols = doc.rows.first().map_or(0, Vec::len);
    let rows = doc
        .rows
        .iter()
        .map(|r| r.iter().map(|s| parse_scalar(s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| parse_failure(path, e))?;
    Matrix::from_rows(cols, rows).map_err(|e| parse_failure(path, e))
}

fn read_subspace(path: &Path, degree: usize) -> Result<Subspace, Failure> {
    let doc: SubspaceDoc = read_json(path)?;
    if let Some(d) = doc.degree {
        if d != degree {
            return Err(Failure {
                code: 1,
                message: format!("{}: subspace is for degree {d}, used at degree {degree}", path.display()),
            });
        }
    }
    Subspace::from_doc(&doc).map_err(|e| parse_failure(path, e))
}

fn standard_complex(d: usize) -> Result<Matrix, Failure> {
    if d % 2 != 0 {
        return Err(Failure {
            code: 1,
            message: format!("no default complex structure in odd dimension {d}"),
        });
    }
    let h = d / 2;
    let mut j = Matrix::zeros(d, d);
    for i in 0..h {
        j.set(i, h + i, int(-1));
        j.set(h + i, i, int(1));
    }
    Ok(j)
}

fn parse_reduction(spec: &str, d1: usize) -> Result<ReductionSpec, Failure> {
    let bad = |why: &str| Failure {
        code: 2,
        message: format!("--reduce `{spec}`: {why}"),
    };
    let mut parts = spec.splitn(3, ':');
    let degree: usize = parts
        .next()
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| bad("degree must be a nonnegative integer"))?;
    let kind = parts.next().ok_or_else(|| bad("missing kind"))?;
    let file = parts.next().map(PathBuf::from);
    let form = |file: &Option<PathBuf>| file.as_deref().map_or(Ok(Matrix::identity(d1)), read_matrix);
    let kind = match kind {
        "orthogonal" => ReductionKind::Orthogonal(form(&file)?),
        "conformal" => ReductionKind::Conformal(form(&file)?),
        "complex" => ReductionKind::Complex(match &file {
            Some(p) => read_matrix(p)?,
            None => standard_complex(d1)?,
        }),
        "trace-free" => ReductionKind::TraceFreeDivergence,
        "custom" => ReductionKind::Custom(read_subspace(
            file.as_deref().ok_or_else(|| bad("custom needs a subspace file"))?,
            degree,
        )?),
        other => return Err(bad(&format!("unknown kind `{other}`"))),
    };
    Ok(ReductionSpec::new(degree, kind))
}

fn cmd_prolong(
    file: &Path,
    g0: &str,
    reduce: &[String],
    max_degree: usize,
    dump: bool,
    format: Format,
) -> Result<(String, u8), Failure> {
    let m = read_gnla(file)?;
    let d1 = m.dim_of(-1);
    let mut specs = Vec::new();
    match g0 {
        "der0" => {}
        "co" => specs.push(ReductionSpec::new(0, ReductionKind::Conformal(Matrix::identity(d1)))),
        "so" => specs.push(ReductionSpec::new(0, ReductionKind::Orthogonal(Matrix::identity(d1)))),
        path => specs.push(ReductionSpec::new(0, ReductionKind::Custom(read_subspace(Path::new(path), 0)?))),
    }
    for r in reduce {
        specs.push(parse_reduction(r, d1)?);
    }
    let alg = prolong(&m, None, &specs, max_degree)?;
    let out = match format {
        Format::Json => {
            let mut report = serde_json::to_value(alg.report()).expect("report serializes");
            if !dump {
                report.as_object_mut().expect("object").remove("components");
            }
            json(&report)
        }
        Format::Human => human_prolong(&alg, dump),
    };
    Ok((out, 0))
}

fn human_prolong(alg: &ProlongedAlgebra, dump: bool) -> String {
    let mut s = format!("dims {}\n", alg.dims());
    for a in alg.audit() {
        writeln!(s, "reduction at degree {}: {} ({} -> {})", a.degree, a.kind, a.dim_before, a.dim_after).unwrap();
        for v in &a.invariance_violations {
            writeln!(s, "  not g0-invariant: {v}").unwrap();
        }
    }
    if dump {
        for c in alg.report().components {
            writeln!(s, "g_{} (dim {}):", c.degree, c.dim).unwrap();
            for b in &c.basis {
                writeln!(s, "  {b:?}").unwrap();
            }
        }
    }
    s
}

fn parse_point(src: &str, n: usize) -> Result<Vec<tanaka::linalg::Scalar>, Failure> {
    let fail = |e: Error| Failure {
        code: 2,
        message: format!("--point `{src}`: {e}"),
    };
    let parts: Vec<&str> = src.split(',').collect();
    if parts.len() == 1 && parts[0].trim() == "0" {
        return Ok(vec![int(0); n]);
    }
    if parts.len() != n {
        return Err(Failure {
            code: 2,
            message: format!("--point `{src}` has {} coordinates, expected {n}", parts.len()),
        });
    }
    parts.iter().map(|p| parse_scalar(p).map_err(fail)).collect()
}

fn cmd_flag(file: &Path, points: &[String], with_gnla: bool, max_step: usize, format: Format) -> Result<(String, u8), Failure> {
    let doc: FieldsDoc = read_json(file)?;
    let fields = doc.parse_fields().map_err(|e| parse_failure(file, e))?;
    let flag = derived_flag(&fields, max_step)?;
    let pts = points
        .iter()
        .map(|p| parse_point(p, doc.coords.len()))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(&flag, &pts, with_gnla)?;
    let irregular = with_gnla && summary.points.iter().any(|p| !p.regular);
    let out = match format {
        Format::Json => json(&summary),
        Format::Human => {
            let mut s = format!("generic growth {:?}\n", summary.generic_ranks);
            writeln!(s, "bracket generating: {}", if summary.bracket_generating { "yes" } else { "no" }).unwrap();
            for p in &summary.points {
                writeln!(
                    s,
                    "point ({}): growth {:?}, {}",
                    p.point.join(", "),
                    p.growth,
                    if p.regular { "regular" } else { "irregular" }
                )
                .unwrap();
                if let Some(g) = &p.gnla {
                    s.push_str(&json(g));
                }
            }
            s
        }
    };
    if irregular {
        eprintln!("error: the graded algebra is only defined at regular points");
    }
    Ok((out, if irregular { 1 } else { 0 }))
}

fn cmd_symmetry(file: &Path, format: Format) -> Result<(String, u8), Failure> {
    let doc: ScenarioDoc = read_json(file)?;
    let (model, syms) = doc.build().map_err(|e| match e {
        Error::Parse(_) | Error::Json(_) => parse_failure(file, e),
        other => other.into(),
    })?;
    let verdicts = verify(&syms, &model)?;
    if verdicts.iter().any(|v| !v.symmetry) {
        let mut s = String::new();
        for v in &verdicts {
            writeln!(s, "field {}: ({}) {}", v.index, v.field.join(", "), verdict_word(v.symmetry)).unwrap();
        }
        let message = match filtration_report(&syms, &model, doc.cap) {
            Err(e) => e.to_string(),
            Ok(_) => "non-symmetry input".into(),
        };
        print!("{s}");
        return Err(Failure { code: 1, message });
    }
    let report = filtration_report(&syms, &model, doc.cap)?;
    let compat = check_bracket_compat(&report, &model)?;
    let determinacy = determinacy_table(&syms, &model)?;
    let code = if report.bound_holds && report.symbols_injective && compat.holds { 0 } else { 1 };
    let out = match format {
        Format::Json => json(&tanaka::symmetry::ScenarioOutcome {
            schema_version: 1,
            report,
            compat,
            determinacy,
        }),
        Format::Human => {
            let mut s = format!("model {} (depth {}), cap {}\n", model.name(), model.depth(), doc.cap);
            for v in &report.fields {
                writeln!(
                    s,
                    "field {}: ({}) {}, weighted order {}, jet order {}",
                    v.index,
                    v.field.join(", "),
                    verdict_word(v.symmetry),
                    v.weighted_order.map_or("-".into(), |o| o.to_string()),
                    v.jet_order.map_or("-".into(), |o| o.to_string()),
                )
                .unwrap();
            }
            writeln!(s, "degree  dim s  dim g").unwrap();
            for d in &report.degrees {
                writeln!(s, "{:>6}  {:>5}  {:>5}", d.degree, d.dim_s, d.dim_g).unwrap();
            }
            writeln!(s, "total   {:>5}  {:>5}", report.total_s, report.total_g).unwrap();
            writeln!(s, "bound: {}", if report.bound_holds { "holds" } else { "violated" }).unwrap();
            writeln!(s, "symbols injective: {}", if report.symbols_injective { "yes" } else { "no" }).unwrap();
            writeln!(s, "[s_i, g_-1] in s_(i-1): {}", if compat.holds { "holds" } else { "fails" }).unwrap();
            for w in &compat.witnesses {
                writeln!(s, "  witness: degree {} symbol ({}) with {} gives ({})", w.degree, w.symbol.join(", "), w.generator, w.bracket.join(", ")).unwrap();
            }
            for d in &determinacy {
                writeln!(
                    s,
                    "determinacy field {}: i = {}, s = {}, {} <= s <= {}: {}; weight bound {} <= s: {}",
                    d.index,
                    d.weighted_order,
                    d.jet_order,
                    d.lower,
                    d.upper,
                    if d.holds { "holds" } else { "fails" },
                    d.weight_lower,
                    if d.weight_bound_holds { "holds" } else { "fails" },
                )
                .unwrap();
            }
            s
        }
    };
    Ok((out, code))
}

fn verdict_word(ok: bool) -> &'static str {
    if ok {
        "symmetry"
    } else {
        "not a symmetry"
    }
}

fn need(cond: bool, what: &str) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: what.into(),
        })
    }
}

fn cmd_export(what: Export) -> Result<String, Failure> {
    Ok(match what {
        Export::Heisenberg { d } => {
            need(d >= 1, "heisenberg needs d >= 1")?;
            Gnla::heisenberg(d).to_json() + "\n"
        }
        Export::Abelian { n } => {
            need(n >= 1, "abelian needs n >= 1")?;
            Gnla::abelian(n).to_json() + "\n"
        }
        Export::Fields { name } => {
            let fields = named_model(&name).ok_or_else(|| Failure {
                code: 2,
                message: format!("unknown model `{name}`"),
            })?;
            json(&FieldsDoc::from_fields(&fields))
        }
        Export::ContactW { n } | Export::ContactS3w { n } => {
            need(n >= 2, "contact models need n >= 2")?;
            let w_part = matches!(what, Export::ContactW { .. });
            let (w, s3w) = decompose_g1_contact(n);
            let alg = prolong(&Gnla::heisenberg(n - 1), None, &[], 0)?;
            let basis = contact_component(n, 1);
            let hams = hamiltonians(n, &basis, if w_part { &w } else { &s3w });
            json(&contact_span_theta(&alg, 1, &hams)?.to_doc(Some(1)))
        }
        Export::Lagrangian { n } => {
            need(n >= 2, "contact models need n >= 2")?;
            let alg = ProlongedAlgebra::new(Gnla::heisenberg(n - 1))?;
            let hams = hamiltonians(n, &contact_component(n, 0), &lagrangian_contact_g0(n));
            json(&contact_span_theta(&alg, 0, &hams)?.to_doc(Some(0)))
        }
        Export::ProjectiveImage { n } | Export::DivergenceFree { n } => {
            need(n >= 2, "projective models need n >= 2")?;
            let image = matches!(what, Export::ProjectiveImage { .. });
            let alg = prolong(&Gnla::abelian(n), None, &[], 0)?;
            let fields = if image {
                (0..n).map(|b| embedding_of_covector(n, b)).collect::<Vec<_>>()
            } else {
                let (ker, _) = decompose_g1_projective(n);
                let basis = field_component(n, 1);
                ker.vectors().map(|v| basis.combine(n, v)).collect()
            };
            json(&field_span_theta(&alg, 1, &fields)?.to_doc(Some(1)))
        }
        Export::Sl3Scenario => sl3_scenario()?.to_json(),
        Export::GradedScenario { model, max_order, cap } => {
            let m = GradedCoordinateModel::named(&model).map_err(|e| Failure {
                code: 2,
                message: e.to_string(),
            })?;
            ScenarioDoc::graded(&m, max_order, cap)?.to_json()
        }
    })
}
