//! Writing artifacts and their manifest sidecars.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// A result document tagged with the schema version.
#[derive(Serialize)]
pub struct Versioned<'a, T: Serialize> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn json_bytes<T: Serialize>(body: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(writer.into_inner()?)
}

#[derive(Serialize)]
struct Library {
    name: &'static str,
    version: &'static str,
}

/// Everything needed to regenerate an artifact. Equal manifests (ignoring
/// `created_unix`) give byte-identical artifacts.
#[derive(Serialize)]
struct Manifest<'a, P: Serialize> {
    schema_version: u32,
    subcommand: &'a str,
    parameters: &'a P,
    seed: u64,
    library: Library,
    created_unix: u64,
    output: String,
    output_sha256: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `bytes` to `out` plus its manifest, or to stdout without one.
pub fn emit<P: Serialize>(
    out: Option<&Path>,
    bytes: &[u8],
    subcommand: &str,
    parameters: &P,
    seed: u64,
) -> anyhow::Result<()> {
    let Some(out) = out else {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    };
    std::fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        subcommand,
        parameters,
        seed,
        library: Library {
            name: "rphash-core",
            version: rphash_core::VERSION,
        },
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        output: out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        output_sha256: Sha256::digest(bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect(),
    };
    let path = manifest_path(out);
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
