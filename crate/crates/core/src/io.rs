//! Plain-text instance files and `key=value` reports.
//!
//! An instance file lists constraints one per row (`A = Gᵀ`, `B = Hᵀ`):
//!
//! ```text
//! # comment
//! n 2
//! m 4
//! p 0
//! Q
//! -2 2
//! 2 2
//! c 0 -2
//! A
//! 1 0
//! 0 1
//! -1 0
//! 0 -1
//! g 1 1 0 0
//! B
//! h
//! meta
//! seed 7
//! ```
//!
//! Vectors sit on the line of their key; matrices take the following `n`, `m`
//! or `p` lines. Everything after `meta` is a list of `key value…` lines.
//! Reals are written in the shortest form that parses back to the same `f64`.

use std::fmt::Write as _;

use crate::dualcert::{DualSolution, ExactnessReport};
use crate::error::{Error, Result};
use crate::gen::{Certificate, GeneratedInstance, InstanceKind};
use crate::linalg::{Mat, Vector};
use crate::lp::LpStatus;
use crate::poly::Polyhedron;
use crate::rlt::{self, LiftedDirection, QpInstance, RltSolution};

/// Asymmetry in `Q` above which parsing logs a warning before averaging.
pub const ASYMMETRY_WARN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub qp: QpInstance,
    pub meta: Vec<(String, String)>,
}

impl InstanceFile {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn perr(line: usize, field: &str, msg: impl Into<String>) -> Error {
    Error::Parse { line, field: field.to_string(), msg: msg.into() }
}

fn parse_reals(tokens: &[&str], line: usize, field: &str) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| perr(line, field, format!("`{t}` is not a number"))))
        .collect()
}

pub fn parse_instance(doc: &str) -> Result<QpInstance> {
    Ok(parse_instance_file(doc)?.qp)
}

pub fn parse_instance_file(doc: &str) -> Result<InstanceFile> {
    let lines: Vec<(usize, Vec<&str>)> = doc
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    let mut dims: [Option<usize>; 3] = [None; 3];
    let mut q: Option<Mat> = None;
    let mut mats: [Option<Mat>; 2] = [None, None];
    let mut vecs: [Option<Vec<f64>>; 3] = [None, None, None];
    let mut meta = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let (ln, ref toks) = lines[k];
        let key = toks[0];
        k += 1;
        match key {
            "n" | "m" | "p" => {
                let slot = ["n", "m", "p"].iter().position(|s| *s == key).unwrap();
                if toks.len() != 2 {
                    return Err(perr(ln, key, "expected a single nonnegative integer"));
                }
                let v = toks[1]
                    .parse::<usize>()
                    .map_err(|_| perr(ln, key, format!("`{}` is not a nonnegative integer", toks[1])))?;
                dims[slot] = Some(v);
            }
            "Q" | "A" | "B" => {
                let n = dims[0].ok_or_else(|| perr(ln, key, "`n` must precede matrices"))?;
                let rows = match key {
                    "Q" => n,
                    "A" => dims[1].ok_or_else(|| perr(ln, key, "`m` must precede `A`"))?,
                    _ => dims[2].ok_or_else(|| perr(ln, key, "`p` must precede `B`"))?,
                };
                if toks.len() != 1 {
                    return Err(perr(ln, key, "matrix rows start on the next line"));
                }
                let mut mat = Mat::zeros(rows, n);
                for r in 0..rows {
                    let (rl, ref rt) = *lines
                        .get(k)
                        .ok_or_else(|| perr(ln, key, format!("expected {rows} rows, found {r}")))?;
                    let vals = parse_reals(rt, rl, key)?;
                    if vals.len() != n {
                        return Err(Error::DimensionMismatch(format!(
                            "line {rl}: row {} of {key} has {} entries, expected {n}",
                            r + 1,
                            vals.len()
                        )));
                    }
                    for (j, v) in vals.into_iter().enumerate() {
                        mat[(r, j)] = v;
                    }
                    k += 1;
                }
                match key {
                    "Q" => q = Some(mat),
                    "A" => mats[0] = Some(mat),
                    _ => mats[1] = Some(mat),
                }
            }
            "c" | "g" | "h" => {
                let slot = ["c", "g", "h"].iter().position(|s| *s == key).unwrap();
                let expected = match key {
                    "c" => dims[0],
                    "g" => dims[1],
                    _ => dims[2],
                }
                .ok_or_else(|| perr(ln, key, "dimensions must precede vectors"))?;
                let vals = parse_reals(&toks[1..], ln, key)?;
                if vals.len() != expected {
                    return Err(Error::DimensionMismatch(format!(
                        "line {ln}: {key} has {} entries, expected {expected}",
                        vals.len()
                    )));
                }
                vecs[slot] = Some(vals);
            }
            "meta" => {
                while k < lines.len() {
                    let (_, ref mt) = lines[k];
                    meta.push((mt[0].to_string(), mt[1..].join(" ")));
                    k += 1;
                }
            }
            other => return Err(perr(ln, other, "unknown field")),
        }
    }
    let missing = |f: &str| perr(0, f, "missing field");
    let n = dims[0].ok_or_else(|| missing("n"))?;
    let m = dims[1].ok_or_else(|| missing("m"))?;
    let p = dims[2].ok_or_else(|| missing("p"))?;
    let q = q.ok_or_else(|| missing("Q"))?;
    let c = vecs[0].take().ok_or_else(|| missing("c"))?;
    let a = match mats[0].take() {
        Some(a) => a,
        None if m == 0 => Mat::zeros(0, n),
        None => return Err(missing("A")),
    };
    let b = match mats[1].take() {
        Some(b) => b,
        None if p == 0 => Mat::zeros(0, n),
        None => return Err(missing("B")),
    };
    let g = vecs[1].take().unwrap_or_default();
    let h = vecs[2].take().unwrap_or_default();
    if g.len() != m {
        return Err(Error::DimensionMismatch(format!("g has {} entries, expected {m}", g.len())));
    }
    if h.len() != p {
        return Err(Error::DimensionMismatch(format!("h has {} entries, expected {p}", h.len())));
    }
    let asym = (&q - q.transpose()).amax();
    if asym > ASYMMETRY_WARN {
        log::warn!("Q is not symmetric (max |Q - Qᵀ| = {asym}); using (Q + Qᵀ)/2");
    }
    let poly = Polyhedron::from_rows(&a, Vector::from_vec(g), &b, Vector::from_vec(h))?;
    let qp = QpInstance::new(q, Vector::from_vec(c), poly)?;
    Ok(InstanceFile { qp, meta })
}

fn join(values: impl IntoIterator<Item = f64>, sep: &str) -> String {
    // `+ 0.0` turns `-0` into `0`
    values.into_iter().map(|v| format!("{}", v + 0.0)).collect::<Vec<_>>().join(sep)
}

/// Shortest round-trip decimal for each entry, space separated.
pub fn format_reals(values: &[f64]) -> String {
    join(values.iter().cloned(), " ")
}

pub fn emit_instance(qp: &QpInstance, meta: &[(String, String)]) -> String {
    let poly = &qp.poly;
    let mut out = String::new();
    let _ = writeln!(out, "n {}", qp.n());
    let _ = writeln!(out, "m {}", poly.m());
    let _ = writeln!(out, "p {}", poly.p());
    let matrix = |out: &mut String, key: &str, m: &Mat| {
        let _ = writeln!(out, "{key}");
        for r in 0..m.nrows() {
            let _ = writeln!(out, "{}", join(m.row(r).iter().cloned(), " "));
        }
    };
    let vector = |out: &mut String, key: &str, v: &Vector| {
        if v.is_empty() {
            let _ = writeln!(out, "{key}");
        } else {
            let _ = writeln!(out, "{key} {}", join(v.iter().cloned(), " "));
        }
    };
    matrix(&mut out, "Q", &qp.q);
    vector(&mut out, "c", &qp.c);
    matrix(&mut out, "A", &poly.ineq_normals.transpose());
    vector(&mut out, "g", &poly.ineq_rhs);
    matrix(&mut out, "B", &poly.eq_normals.transpose());
    vector(&mut out, "h", &poly.eq_rhs);
    if !meta.is_empty() {
        let _ = writeln!(out, "meta");
        for (k, v) in meta {
            let _ = writeln!(out, "{k} {v}");
        }
    }
    out
}

fn mat_row_major(m: &Mat) -> Vec<f64> {
    (0..m.nrows()).flat_map(|r| m.row(r).iter().cloned().collect::<Vec<_>>()).collect()
}

fn dual_meta(meta: &mut Vec<(String, String)>, ds: &DualSolution) {
    meta.push(("cert.u".into(), format_reals(ds.u.as_slice())));
    meta.push(("cert.w".into(), format_reals(ds.w.as_slice())));
    meta.push(("cert.R".into(), format_reals(&mat_row_major(&ds.r))));
    meta.push(("cert.S".into(), format_reals(&mat_row_major(&ds.s))));
}

/// `meta` entries recording the kind, seed and certificate of an instance.
pub fn generated_meta(inst: &GeneratedInstance) -> Vec<(String, String)> {
    let mut meta = vec![
        ("seed".to_string(), inst.seed.to_string()),
        ("kind".to_string(), inst.kind.as_str().to_string()),
    ];
    match &inst.certificate {
        Certificate::Ray { origin, direction, value } => {
            meta.push(("cert.origin".into(), format_reals(origin.as_slice())));
            meta.push(("cert.d".into(), format_reals(direction.d.as_slice())));
            meta.push(("cert.D".into(), format_reals(&mat_row_major(&direction.products))));
            meta.push(("cert.value".into(), format!("{value}")));
        }
        Certificate::Exact { witness, face_index, dual } => {
            meta.push(("cert.witness".into(), format_reals(witness.as_slice())));
            meta.push(("cert.face".into(), face_index.to_string()));
            dual_meta(&mut meta, dual);
        }
        Certificate::Inexact { v1, v2, dual, .. } => {
            meta.push(("cert.v1".into(), format_reals(v1.as_slice())));
            meta.push(("cert.v2".into(), format_reals(v2.as_slice())));
            dual_meta(&mut meta, dual);
        }
    }
    meta
}

fn meta_reals(file: &InstanceFile, key: &str, len: usize) -> Result<Vec<f64>> {
    let raw = file.meta_value(key).ok_or_else(|| perr(0, key, "missing certificate entry"))?;
    let toks: Vec<&str> = raw.split_whitespace().collect();
    let vals = parse_reals(&toks, 0, key)?;
    if vals.len() != len {
        return Err(Error::DimensionMismatch(format!("{key} has {} entries, expected {len}", vals.len())));
    }
    Ok(vals)
}

fn meta_dual(file: &InstanceFile) -> Result<DualSolution> {
    let (n, m, p) = (file.qp.n(), file.qp.poly.m(), file.qp.poly.p());
    Ok(DualSolution {
        u: Vector::from_vec(meta_reals(file, "cert.u", m)?),
        w: Vector::from_vec(meta_reals(file, "cert.w", p)?),
        r: Mat::from_row_slice(p, n, &meta_reals(file, "cert.R", p * n)?),
        s: Mat::from_row_slice(m, m, &meta_reals(file, "cert.S", m * m)?),
    })
}

/// Rebuild a generated instance from a parsed file; `None` when the file
/// carries no `kind` entry.
pub fn generated_from_file(file: &InstanceFile) -> Result<Option<GeneratedInstance>> {
    let Some(kind) = file.meta_value("kind") else { return Ok(None) };
    let kind: InstanceKind = kind.parse()?;
    let seed = match file.meta_value("seed") {
        Some(s) => s.parse::<u64>().map_err(|_| perr(0, "seed", "not an unsigned integer"))?,
        None => 0,
    };
    let n = file.qp.n();
    let vec = |key: &str| meta_reals(file, key, n).map(Vector::from_vec);
    let certificate = match kind {
        InstanceKind::Unbounded => {
            let direction = LiftedDirection {
                d: vec("cert.d")?,
                products: Mat::from_row_slice(n, n, &meta_reals(file, "cert.D", n * n)?),
            };
            let value = meta_reals(file, "cert.value", 1)?[0];
            Certificate::Ray { origin: vec("cert.origin")?, direction, value }
        }
        InstanceKind::Exact => {
            let face_index = file
                .meta_value("cert.face")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| perr(0, "cert.face", "missing or malformed face index"))?;
            Certificate::Exact { witness: vec("cert.witness")?, face_index, dual: meta_dual(file)? }
        }
        InstanceKind::InexactVertices | InstanceKind::InexactMinFaces => {
            let (v1, v2) = (vec("cert.v1")?, vec("cert.v2")?);
            Certificate::Inexact { optimum: rlt::midpoint_lift(&v1, &v2), v1, v2, dual: meta_dual(file)? }
        }
    };
    Ok(Some(GeneratedInstance { qp: file.qp.clone(), kind, seed, certificate }))
}

/// Comma-separated entries.
pub fn format_list(values: &[f64]) -> String {
    join(values.iter().cloned(), ",")
}

/// Rows separated by `;`, entries by `,`.
pub fn format_matrix(m: &Mat) -> String {
    (0..m.nrows())
        .map(|r| join(m.row(r).iter().cloned(), ","))
        .collect::<Vec<_>>()
        .join(";")
}

/// Report of a relaxation solve, one `key=value` per line.
pub fn solve_report(sol: &RltSolution) -> String {
    let mut out = String::new();
    let status = match sol.status {
        LpStatus::Optimal => "Optimal",
        LpStatus::Unbounded => "Unbounded",
        LpStatus::Infeasible => "Infeasible",
    };
    let _ = writeln!(out, "status={status}");
    let _ = writeln!(out, "rlt={}", sol.value);
    if let Some(pt) = &sol.point {
        let _ = writeln!(out, "x={}", format_list(pt.x.as_slice()));
        let _ = writeln!(out, "X={}", format_matrix(&pt.products));
    }
    if let Some(ds) = &sol.dual {
        let _ = writeln!(out, "u={}", format_list(ds.u.as_slice()));
        let _ = writeln!(out, "w={}", format_list(ds.w.as_slice()));
        let _ = writeln!(out, "R={}", format_matrix(&ds.r));
        let _ = writeln!(out, "S={}", format_matrix(&ds.s));
    }
    if let Some(ray) = &sol.ray {
        let _ = writeln!(out, "ray_d={}", format_list(ray.d.as_slice()));
        let _ = writeln!(out, "ray_D={}", format_matrix(&ray.products));
    }
    out
}

pub fn exactness_report(r: &ExactnessReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status={:?}", r.status);
    let _ = writeln!(out, "rlt={}", r.rlt_bound);
    let _ = writeln!(out, "qp={}", r.qp_value);
    if let Some(w) = &r.witness {
        let _ = writeln!(out, "witness={}", format_list(w.as_slice()));
    }
    if let Some(f) = &r.witness_face {
        let active: Vec<String> = f.active_ineq.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "witness_face_active={}", active.join(","));
        let _ = writeln!(out, "witness_face_dim={}", f.dim);
    }
    out
}
