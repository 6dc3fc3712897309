//! Command-line surface over `rlt_core`.
//!
//! [`run_cli`] does all the work and returns the exit code together with the
//! text destined for stdout and stderr, so the binary is a thin wrapper and
//! the tests can drive every subcommand in-process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rlt_core::gen::{self, GeneratedInstance, InstanceKind};
use rlt_core::io::{self, format_list, format_matrix};
use rlt_core::special::{self, SpecificClassInstance};
use rlt_core::{dualcert, rlt, Error, LpStatus, Polyhedron, QpInstance, Vector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

/// Agreement required between the closed-form bound and the LP in `stqp-bound`.
const CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "rltqp", version, about = "RLT relaxations of quadratic programs: bounds, certificates and instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the RLT relaxation and print the bound, the optimal lifted point and the dual blocks.
    Solve { file: PathBuf },
    /// Decide whether the relaxation is exact by comparing it against the global optimum.
    Certify { file: PathBuf },
    /// List vertices, minimal faces and recession generators of the feasible region.
    Vertices {
        file: PathBuf,
        /// Also enumerate the vertices of the lifted relaxation region by brute force.
        #[arg(long)]
        lifted: bool,
    },
    /// Generate an instance with a known certificate over the region of FILE.
    Generate {
        /// unbounded, exact, inexact-vertices or inexact-faces.
        #[arg(long)]
        kind: InstanceKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minimal face index for `exact` (defaults to seed mod face count).
        #[arg(long, conflicts_with_all = ["v1", "v2"])]
        face: Option<usize>,
        /// First vertex (inexact-vertices) or minimal face (inexact-faces) index.
        #[arg(long, requires = "v2")]
        v1: Option<usize>,
        /// Second vertex or minimal face index.
        #[arg(long, requires = "v1")]
        v2: Option<usize>,
        /// Write the instance here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        file: PathBuf,
    },
    /// Closed-form bound for an instance over {aᵀx = 1, x ≥ 0}, cross-checked by the LP.
    StqpBound { file: PathBuf },
    /// Emit the reformulation over {aᵀy = 1, y ≥ 0} and the bound sandwich.
    Qpa {
        #[arg(short, long)]
        output: Option<PathBuf>,
        file: PathBuf,
    },
    /// Evaluate the convex underestimator at a point.
    Underest {
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        at: Vec<f64>,
        file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::DimensionMismatch(_) => EXIT_PARSE,
            Error::ScaleLimit(_)
            | Error::NumericalBreakdown(_)
            | Error::OracleIncomplete(_)
            | Error::EmptyPolyhedron => EXIT_NUMERICAL,
            Error::VerificationFailed(_) => EXIT_VERIFICATION,
            _ => EXIT_USAGE,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

/// Run one command line (`argv[0]` is the program name).
pub fn run_cli<I, S>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                CliOutput { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let mut out = String::new();
    match dispatch(cli.command, &mut out) {
        Ok(()) => CliOutput { code: EXIT_OK, stdout: out, stderr: String::new() },
        Err(f) => CliOutput { code: f.code, stdout: out, stderr: format!("error: {}\n", f.msg) },
    }
}

fn read_file(path: &Path) -> Result<io::InstanceFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_PARSE, msg: format!("cannot read {}: {e}", path.display()) })?;
    Ok(io::parse_instance_file(&text)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn dispatch(cmd: Command, out: &mut String) -> Result<(), Failure> {
    match cmd {
        Command::Solve { file } => {
            let qp = read_file(&file)?.qp;
            out.push_str(&io::solve_report(&rlt::solve_rlt(&qp)?));
        }
        Command::Certify { file } => {
            let qp = read_file(&file)?.qp;
            out.push_str(&io::exactness_report(&dualcert::certify_exactness(&qp)?));
        }
        Command::Vertices { file, lifted } => vertices(&read_file(&file)?.qp, lifted, out)?,
        Command::Generate { kind, seed, face, v1, v2, output, file } => {
            let poly = read_file(&file)?.qp.poly;
            let inst = generate(&poly, kind, seed, face, v1.zip(v2))?;
            let check = gen::verify(&inst)?;
            let text = io::emit_instance(&inst.qp, &io::generated_meta(&inst));
            match output {
                Some(path) => {
                    write_file(&path, &text)?;
                    let _ = writeln!(out, "kind={}", kind.as_str());
                    let _ = writeln!(out, "seed={seed}");
                    let _ = writeln!(out, "verified={}", check.ok);
                    let _ = writeln!(out, "rlt={}", check.rlt_bound);
                }
                None => out.push_str(&text),
            }
            if !check.ok {
                return Err(Failure { code: EXIT_VERIFICATION, msg: check.detail });
            }
        }
        Command::StqpBound { file } => stqp(&read_file(&file)?.qp, out)?,
        Command::Qpa { output, file } => {
            let qp = read_file(&file)?.qp;
            let qpa = special::build_qpa(&qp)?;
            let sandwich = special::bound_sandwich(&qp)?;
            let meta = vec![
                ("source.s".to_string(), qpa.s().to_string()),
                ("source.t".to_string(), qpa.t().to_string()),
                ("sandwich.rlt".to_string(), sandwich.rlt.to_string()),
                ("sandwich.rlt_qpa".to_string(), sandwich.rlt_qpa.to_string()),
                ("sandwich.qp".to_string(), sandwich.qp.to_string()),
            ];
            let text = io::emit_instance(&qpa.instance().to_qp(), &meta);
            match output {
                Some(path) => {
                    write_file(&path, &text)?;
                    let _ = writeln!(out, "s={}", qpa.s());
                    let _ = writeln!(out, "t={}", qpa.t());
                    let _ = writeln!(out, "rlt={}", sandwich.rlt);
                    let _ = writeln!(out, "rlt_qpa={}", sandwich.rlt_qpa);
                    let _ = writeln!(out, "qp={}", sandwich.qp);
                }
                None => out.push_str(&text),
            }
        }
        Command::Underest { at, file } => {
            let qp = read_file(&file)?.qp;
            if at.len() != qp.n() {
                return Err(usage(format!("--at has {} coordinates, the instance has n = {}", at.len(), qp.n())));
            }
            let x = Vector::from_vec(at);
            let value = dualcert::underestimator(&qp, &x)?;
            let _ = writeln!(out, "x={}", format_list(x.as_slice()));
            let _ = writeln!(out, "underestimator={value}");
            let _ = writeln!(out, "q={}", qp.objective(&x));
        }
    }
    Ok(())
}

fn vertices(qp: &QpInstance, lifted: bool, out: &mut String) -> Result<(), Failure> {
    let poly = &qp.poly;
    let faces = poly.enumerate_minimal_faces()?;
    let verts: Vec<&Vector> = faces.iter().filter(|f| f.dim == 0).map(|f| &f.witness).collect();
    let _ = writeln!(out, "vertices={}", verts.len());
    for (k, x) in verts.iter().enumerate() {
        let _ = writeln!(out, "vertex.{k}={}", format_list(x.as_slice()));
    }
    let _ = writeln!(out, "minimal_faces={}", faces.len());
    for (k, f) in faces.iter().enumerate() {
        let active: Vec<String> = f.active_ineq.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "face.{k}=dim:{} active:{} witness:{}",
            f.dim,
            active.join(","),
            format_list(f.witness.as_slice())
        );
    }
    let gens = poly.extreme_rays()?;
    let _ = writeln!(out, "lineality={}", gens.lineality_basis.len());
    for (k, b) in gens.lineality_basis.iter().enumerate() {
        let _ = writeln!(out, "lineality.{k}={}", format_list(b.as_slice()));
    }
    let _ = writeln!(out, "rays={}", gens.extreme_rays.len());
    for (k, r) in gens.extreme_rays.iter().enumerate() {
        let _ = writeln!(out, "ray.{k}={}", format_list(r.as_slice()));
    }
    if lifted {
        let rel = rlt::build_rlt(qp);
        let pts = rlt::enumerate_lifted_vertices(&rel)?;
        let _ = writeln!(out, "lifted_vertices={}", pts.len());
        for (k, pt) in pts.iter().enumerate() {
            let _ = writeln!(
                out,
                "lifted.{k}=x:{} X:{}",
                format_list(pt.x.as_slice()),
                format_matrix(&pt.products)
            );
        }
    }
    Ok(())
}

fn generate(
    poly: &Polyhedron,
    kind: InstanceKind,
    seed: u64,
    face: Option<usize>,
    pair: Option<(usize, usize)>,
) -> Result<GeneratedInstance, Failure> {
    let by_seed = |count: usize| -> Result<(usize, usize), Failure> {
        if count < 2 {
            return Err(usage(format!("{kind:?} needs at least two candidates, the region has {count}")));
        }
        let i = seed as usize % count;
        Ok((i, (i + 1) % count))
    };
    let inst = match kind {
        InstanceKind::Unbounded => gen::gen_unbounded(poly, seed)?,
        InstanceKind::Exact => {
            let index = match face {
                Some(k) => k,
                None => seed as usize % poly.enumerate_minimal_faces()?.len().max(1),
            };
            gen::gen_exact(poly, index, seed)?
        }
        InstanceKind::InexactVertices => {
            let verts = poly.enumerate_vertices()?;
            let (i, j) = match pair {
                Some(p) => p,
                None => by_seed(verts.len())?,
            };
            let count = verts.len();
            let pick = |k: usize| verts.get(k).ok_or_else(|| Failure::from(Error::BadFaceIndex { index: k, count }));
            gen::gen_inexact_vertices(poly, pick(i)?, pick(j)?, seed)?
        }
        InstanceKind::InexactMinFaces => {
            let (i, j) = match pair {
                Some(p) => p,
                None => by_seed(poly.enumerate_minimal_faces()?.len())?,
            };
            gen::gen_inexact_minfaces(poly, i, j, seed)?
        }
    };
    Ok(inst)
}

/// Weights `a` when the region is `{aᵀx = 1, x ≥ 0}` written as `−x ≤ 0` rows in index order.
fn specific_weights(poly: &Polyhedron) -> Option<Vector> {
    let n = poly.n();
    let sign_rows = poly.m() == n
        && poly.ineq_rhs.iter().all(|g| *g == 0.0)
        && (0..n).all(|i| (0..n).all(|j| poly.ineq_normals[(i, j)] == if i == j { -1.0 } else { 0.0 }));
    (sign_rows && poly.p() == 1 && poly.eq_rhs[0] == 1.0).then(|| poly.eq_normals.column(0).into_owned())
}

fn stqp(qp: &QpInstance, out: &mut String) -> Result<(), Failure> {
    let a = specific_weights(&qp.poly)
        .ok_or_else(|| usage("the region is not of the form {aᵀx = 1, x ≥ 0}; use `qpa` to reformulate it"))?;
    let standard = a.iter().all(|v| *v == 1.0);
    let closed = if standard {
        special::stqp_bound(&qp.q, &qp.c)
    } else {
        special::specific_bound(&SpecificClassInstance::new(qp.q.clone(), qp.c.clone(), a)?)?
    };
    let sol = rlt::solve_rlt(qp)?;
    let lp = match sol.status {
        LpStatus::Infeasible => return Err(Error::EmptyPolyhedron.into()),
        _ => sol.value,
    };
    let agree = (closed == lp) || (closed - lp).abs() <= CROSS_CHECK_TOL * (1.0 + lp.abs());
    let _ = writeln!(out, "class={}", if standard { "standard" } else { "weighted" });
    let _ = writeln!(out, "closed_form={closed}");
    let _ = writeln!(out, "lp={lp}");
    let _ = writeln!(out, "agree={agree}");
    if !agree {
        return Err(Failure { code: EXIT_VERIFICATION, msg: format!("closed form {closed} differs from LP {lp}") });
    }
    Ok(())
}
