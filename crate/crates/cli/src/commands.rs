use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use sepcert_core::cert::{
    certify_unique, certify_unique_ensemble, verify_completeness, Certificate, CertifyOptions, Strategy,
};
use sepcert_core::choi::{channel_to_choi_ensemble, ensemble_to_state};
use sepcert_core::file::{write_atomic, ChannelFile, FamilyKind};
use sepcert_core::hunter::{hunt_product, HuntConfig};
use sepcert_core::linalg::{ComplexMatrix, TolerancePolicy};
use sepcert_core::product::OperatorFamily;
use sepcert_core::{zoo, Error};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INCOMPLETE: u8 = 3;
pub const EXIT_NEGATIVE: u8 = 4;
pub const EXIT_CAP: u8 = 5;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Size(_) => EXIT_CAP,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

pub struct Outcome {
    pub code: u8,
    pub stdout: String,
}

fn json_out(code: u8, value: &impl Serialize) -> Result<Outcome, CliError> {
    let stdout = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    Ok(Outcome { code, stdout })
}

fn load(path: &Path) -> Result<(ChannelFile, OperatorFamily), CliError> {
    let file = ChannelFile::load(path)?;
    let fam = file.to_family().map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((file, fam))
}

fn policy(tol: f64) -> Result<TolerancePolicy, CliError> {
    Ok(TolerancePolicy::relative(tol)?)
}

fn require_channel(file: &ChannelFile, path: &Path, command: &str) -> Result<(), CliError> {
    if file.kind != FamilyKind::Channel {
        return Err(CliError::input(format!(
            "{}: `{command}` needs a channel file, got an ensemble",
            path.display()
        )));
    }
    Ok(())
}

pub fn verify(path: &Path, tol: f64, residual_tol: f64) -> Result<Outcome, CliError> {
    let (file, fam) = load(path)?;
    require_channel(&file, path, "verify")?;
    if !(residual_tol.is_finite() && residual_tol > 0.0) {
        return Err(CliError::input("--residual-tol must be positive"));
    }
    let policy = policy(tol)?;
    let report = verify_completeness(&fam, residual_tol, &policy)?;
    let code = if report.is_complete { EXIT_OK } else { EXIT_INCOMPLETE };
    json_out(
        code,
        &json!({
            "command": "verify",
            "version": VERSION,
            "file": path,
            "tolerance": policy,
            "report": report,
        }),
    )
}

#[derive(Serialize)]
struct CutView {
    cut: String,
    delta_a: usize,
    delta_b: usize,
    delta_sum: usize,
}

#[derive(Serialize)]
struct WitnessView {
    /// One-based member indices.
    members: Vec<usize>,
    cuts: Vec<CutView>,
}

fn witness_views(cert: &Certificate) -> Vec<WitnessView> {
    cert.witnesses
        .iter()
        .map(|w| WitnessView {
            members: w.subset.iter().map(|j| j + 1).collect(),
            cuts: w
                .deltas
                .iter()
                .map(|d| CutView {
                    cut: d.cut.to_string(),
                    delta_a: d.delta_a,
                    delta_b: d.delta_b,
                    delta_sum: d.sum(),
                })
                .collect(),
        })
        .collect()
}

fn certificate_text(path: &Path, kind: FamilyKind, cert: &Certificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "file: {}", path.display());
    let _ = writeln!(out, "kind: {kind:?}");
    let _ = writeln!(out, "status: {:?}", cert.status);
    let _ = writeln!(out, "strategy: {}", cert.strategy);
    let _ = writeln!(
        out,
        "tolerance: relative {:e}{}, floor {:e}",
        cert.tol.relative_rank_threshold,
        if cert.tol.scale_by_dimension { " x max(rows, cols)" } else { "" },
        cert.tol.absolute_floor
    );
    let _ = writeln!(out, "members: {}, parties: {}", cert.members, cert.parties);
    let _ = writeln!(out, "subsets examined: {}", cert.subsets_examined);
    let _ = writeln!(out, "version: {VERSION}");
    for w in witness_views(cert) {
        let members = w.members.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",");
        let cuts = w
            .cuts
            .iter()
            .map(|c| format!("{} {}+{}={}", c.cut, c.delta_a, c.delta_b, c.delta_sum))
            .collect::<Vec<_>>()
            .join("; ");
        let _ = writeln!(out, "witness {{{members}}}: {cuts}");
    }
    out.trim_end().to_string()
}

pub fn certify(
    path: &Path,
    strategy: Option<Strategy>,
    tol: f64,
    max_members: usize,
    fast_fail: bool,
    text: bool,
) -> Result<Outcome, CliError> {
    let (file, fam) = load(path)?;
    let policy = policy(tol)?;
    let options = CertifyOptions { strategy, max_members, fast_fail };
    let cert = match file.kind {
        FamilyKind::Channel => certify_unique(&fam, &options, &policy)?,
        FamilyKind::Ensemble => certify_unique_ensemble(&fam, &options, &policy)?,
    };
    let code = if cert.is_unique() { EXIT_OK } else { EXIT_NEGATIVE };
    if text {
        return Ok(Outcome { code, stdout: certificate_text(path, file.kind, &cert) });
    }
    json_out(
        code,
        &json!({
            "command": "certify",
            "version": VERSION,
            "file": path,
            "kind": file.kind,
            "status": cert.status,
            "strategy": cert.strategy,
            "tolerance": cert.tol,
            "members": cert.members,
            "parties": cert.parties,
            "subsets_examined": cert.subsets_examined,
            "witnesses": witness_views(&cert),
        }),
    )
}

pub fn hunt(path: &Path, subset: Option<&[usize]>, config: HuntConfig) -> Result<Outcome, CliError> {
    let (file, fam) = load(path)?;
    let subset: Vec<usize> = match subset {
        None => (0..fam.len()).collect(),
        Some(one_based) => {
            if let Some(&bad) = one_based.iter().find(|&&j| j == 0 || j > fam.len()) {
                return Err(CliError::input(format!(
                    "--subset: index {bad} is outside 1..={}",
                    fam.len()
                )));
            }
            one_based.iter().map(|j| j - 1).collect()
        }
    };
    let result = hunt_product(&fam, &subset, &config)?;
    let candidate = match &result.candidate {
        Some(op) => {
            let single = OperatorFamily::new(fam.spec().clone(), vec![op.clone()])?;
            let mut meta = Map::new();
            meta.insert("source".into(), json!(path));
            meta.insert("coefficients".into(), json!(pairs(&result.coefficients)));
            Some(ChannelFile::from_family(&single, file.kind, meta)?)
        }
        None => None,
    };
    let code = if result.found { EXIT_OK } else { EXIT_NEGATIVE };
    json_out(
        code,
        &json!({
            "command": "hunt",
            "version": VERSION,
            "file": path,
            "config": config,
            "novelty_tolerance": config.threshold.sqrt(),
            "found": result.found,
            "novel": result.novel,
            "residual": result.residual,
            "subset": result.subset.iter().map(|j| j + 1).collect::<Vec<_>>(),
            "support": result.support.iter().map(|j| j + 1).collect::<Vec<_>>(),
            "coefficients": pairs(&result.coefficients),
            "restarts_used": result.restarts_used,
            "seed": result.seed,
            "candidate": candidate,
        }),
    )
}

fn pairs(zs: &[Complex64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

pub struct GenParams {
    pub mu: String,
    pub phi: f64,
    pub dims: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub parties: usize,
    pub dim: usize,
    pub seed: u64,
    pub base: Option<PathBuf>,
}

fn parse_complex(raw: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::input(format!("--mu: cannot parse {s:?} as a number")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(CliError::input(format!("--mu: expected `re` or `re,im`, got {raw:?}"))),
    }
}

fn dims_or(params: &GenParams, default: &[usize]) -> Vec<usize> {
    params.dims.clone().unwrap_or_else(|| default.to_vec())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.coefficients.json"))
}

pub fn generate(name: &str, params: &GenParams, out: &Path) -> Result<Outcome, CliError> {
    let mut meta = Map::new();
    meta.insert("generator".into(), json!(name));
    let mut coefficients = None;
    let fam = match name {
        "eq701" => {
            let mu = parse_complex(&params.mu)?;
            meta.insert("mu".into(), json!([mu.re, mu.im]));
            meta.insert("phi".into(), json!(params.phi));
            zoo::three_kraus_qubit_channel(mu, params.phi)?
        }
        "fourier" => {
            let dims = dims_or(params, &[2, 2]);
            let fp = zoo::FourierParams::new(&dims)?;
            meta.insert("dims".into(), json!(dims));
            meta.insert("n".into(), json!(fp.n));
            zoo::fourier_channel(&dims)?
        }
        "product-unitary" => {
            let dims = dims_or(params, &[2, 2]);
            let n = params.n.unwrap_or(3);
            meta.insert("dims".into(), json!(dims));
            meta.insert("n".into(), json!(n));
            meta.insert("seed".into(), json!(params.seed));
            zoo::random_product_unitary_channel(&dims, n, params.seed)?
        }
        "pauli" => zoo::pauli_example(),
        "projective" => {
            let dims = dims_or(params, &[2, 2]);
            let [d1, d2] = dims[..] else {
                return Err(CliError::input("--dims: projective needs exactly two dimensions"));
            };
            meta.insert("dims".into(), json!(dims));
            zoo::projective_basis(d1, d2)?
        }
        "augment" => {
            let base = match &params.base {
                Some(path) => {
                    let (file, fam) = load(path)?;
                    require_channel(&file, path, "gen augment")?;
                    meta.insert("base".into(), json!(path));
                    fam
                }
                None => {
                    meta.insert("base".into(), json!("eq701"));
                    zoo::three_kraus_qubit_channel(Complex64::new(0.5, 0.0), 0.0)?
                }
            };
            let (d, unitaries) = zoo::heisenberg_weyl_for(base.len());
            meta.insert("unitary_dim".into(), json!(d));
            zoo::augment_channel(&base, &unitaries, &unitaries)?
        }
        "tight" => {
            let n = params.n.unwrap_or(2);
            meta.insert("n".into(), json!(n));
            meta.insert("parties".into(), json!(params.parties));
            meta.insert("dim".into(), json!(params.dim));
            meta.insert("seed".into(), json!(params.seed));
            let (fam, coeffs) = zoo::tight_example(n, params.parties, params.dim, params.seed)?;
            coefficients = Some(coeffs);
            fam
        }
        other => return Err(CliError::input(format!("unknown generator {other:?}"))),
    };
    meta.insert("members".into(), json!(fam.len()));
    let file = ChannelFile::from_family(&fam, FamilyKind::Channel, meta)?;
    file.save(out)?;
    let mut summary = json!({
        "command": "gen",
        "version": VERSION,
        "generator": name,
        "out": out,
        "members": fam.len(),
        "metadata": file.metadata,
    });
    if let Some(coeffs) = coefficients {
        let side = sidecar_path(out);
        let body = serde_json::to_string_pretty(&json!({ "coefficients": pairs(&coeffs) }))
            .map_err(|e| CliError::input(e.to_string()))?;
        write_atomic(&side, body.as_bytes())?;
        summary["coefficients_file"] = json!(side);
    }
    json_out(EXIT_OK, &summary)
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect()
}

pub fn choi(path: &Path, out: &Path, state: Option<&Path>) -> Result<Outcome, CliError> {
    let (file, fam) = load(path)?;
    require_channel(&file, path, "choi")?;
    let ens = channel_to_choi_ensemble(&fam)?;
    let mut meta = Map::new();
    meta.insert("source".into(), json!(path));
    meta.insert("convention".into(), json!("unnormalized; party ket = column-stacked vec(K)"));
    if let Some(Value::String(g)) = file.metadata.get("generator") {
        meta.insert("generator".into(), json!(g));
    }
    ChannelFile::from_family(&ens, FamilyKind::Ensemble, meta)?.save(out)?;
    let mut summary = json!({
        "command": "choi",
        "version": VERSION,
        "file": path,
        "out": out,
        "members": ens.len(),
        "party_dims": ens.spec().parties().iter().map(|p| p.d_out).collect::<Vec<_>>(),
    });
    if let Some(state_path) = state {
        let rho = ensemble_to_state(&ens)?;
        let body = serde_json::to_string_pretty(&json!({
            "dims": rho.dims(),
            "trace": rho.trace(),
            "matrix": matrix_rows(rho.matrix()),
        }))
        .map_err(|e| CliError::input(e.to_string()))?;
        write_atomic(state_path, body.as_bytes())?;
        summary["state"] = json!(state_path);
    }
    json_out(EXIT_OK, &summary)
}
