//! Self-describing outputs: every artifact carries the tool version, the
//! command with its configuration, and the SHA-256 of the model file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use momenta::exactalg::format_rational;
use momenta::{BigRational, ModelSpec};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct LoadedModel {
    pub spec: ModelSpec,
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_model(path: &Path, no_symmetry: bool) -> Result<LoadedModel, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::Input(format!("{}: not UTF-8", path.display())))?;
    let spec = ModelSpec::parse(&text)?;
    let spec = if no_symmetry { spec.without_symmetries() } else { spec };
    Ok(LoadedModel {
        spec,
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    })
}

/// Header fields shared by JSON and CSV artifacts.
#[derive(Serialize)]
pub struct Meta<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    pub threads: usize,
    pub symmetry: bool,
    pub model: Option<Value>,
}

impl<C: Serialize> Meta<'_, C> {
    pub fn model_json(model: &LoadedModel) -> Value {
        json!({
            "name": model.spec.name,
            "path": model.path.display().to_string(),
            "sha256": model.sha256,
        })
    }
}

/// `{"meta": …, "result": …}`, pretty-printed with a trailing newline.
pub fn json_artifact<C: Serialize>(meta: &Meta<'_, C>, result: Value) -> Result<Vec<u8>, Failure> {
    let doc = json!({ "meta": meta, "result": result });
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

/// `# key: value` comment lines heading a CSV artifact.
pub fn csv_header<C: Serialize>(meta: &Meta<'_, C>) -> Result<Vec<u8>, Failure> {
    let mut out = Vec::new();
    let v = serde_json::to_value(meta)?;
    if let Value::Object(map) = v {
        for (k, v) in map {
            writeln!(out, "# {k}: {}", serde_json::to_string(&v)?)?;
        }
    }
    Ok(out)
}

pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

/// Integers as JSON numbers, other rationals as `"p/q"` strings.
pub fn rational_value(q: &BigRational) -> Value {
    if q.is_integer() {
        if let Some(i) = q.to_integer().to_i64() {
            return json!(i);
        }
    }
    json!(format_rational(q))
}
