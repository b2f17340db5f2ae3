//! Versioned JSON interchange format for product families.
//!
//! Complex numbers are `[re, im]` pairs and every local factor is a list of
//! rows. Ensembles store kets as single-column factors.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::product::{OperatorFamily, PartyDims, PartySpec, ProductOperator};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Channel,
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyEntry {
    pub d_in: usize,
    pub d_out: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberEntry {
    pub weight: [f64; 2],
    pub factors: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub format_version: u32,
    pub kind: FamilyKind,
    pub parties: Vec<PartyEntry>,
    pub members: Vec<MemberEntry>,
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn rows_of(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| pair(m.get(i, j))).collect())
        .collect()
}

impl ChannelFile {
    pub fn from_family(fam: &OperatorFamily, kind: FamilyKind, metadata: Map<String, Value>) -> Result<Self> {
        if kind == FamilyKind::Ensemble && !fam.is_ket_family() {
            return Err(Error::Format("an ensemble file needs single-column factors".into()));
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            kind,
            parties: fam
                .spec()
                .parties()
                .iter()
                .map(|p| PartyEntry { d_in: p.d_in, d_out: p.d_out })
                .collect(),
            members: fam
                .members()
                .iter()
                .map(|m| MemberEntry {
                    weight: pair(m.weight()),
                    factors: m.factors().iter().map(rows_of).collect(),
                })
                .collect(),
            metadata,
        })
    }

    /// Validates dimensions against `parties` and builds the family.
    pub fn to_family(&self) -> Result<OperatorFamily> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "format_version: unsupported value {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.parties.is_empty() {
            return Err(Error::Format("parties: at least one party is required".into()));
        }
        if self.members.is_empty() {
            return Err(Error::Format("members: at least one member is required".into()));
        }
        for (a, p) in self.parties.iter().enumerate() {
            if p.d_in == 0 || p.d_out == 0 {
                return Err(Error::Format(format!("parties[{a}]: dimensions must be positive")));
            }
            if self.kind == FamilyKind::Ensemble && p.d_in != 1 {
                return Err(Error::Format(format!(
                    "parties[{a}].d_in: ensemble parties need d_in = 1, got {}",
                    p.d_in
                )));
            }
        }
        let spec = PartySpec::new(
            self.parties
                .iter()
                .map(|p| PartyDims { d_in: p.d_in, d_out: p.d_out })
                .collect(),
        )
        .map_err(|e| Error::Format(format!("parties: {e}")))?;
        let members = self
            .members
            .iter()
            .enumerate()
            .map(|(j, m)| self.member(j, m))
            .collect::<Result<Vec<_>>>()?;
        OperatorFamily::new(spec, members).map_err(|e| Error::Format(format!("members: {e}")))
    }

    fn member(&self, j: usize, m: &MemberEntry) -> Result<ProductOperator> {
        if m.factors.len() != self.parties.len() {
            return Err(Error::Format(format!(
                "members[{j}].factors: {} factors for {} parties",
                m.factors.len(),
                self.parties.len()
            )));
        }
        let mut factors = Vec::with_capacity(m.factors.len());
        for (a, (rows, p)) in m.factors.iter().zip(&self.parties).enumerate() {
            let at = format!("members[{j}].factors[{a}]");
            if rows.len() != p.d_out {
                return Err(Error::Format(format!(
                    "{at}: {} rows, party {} has d_out = {}",
                    rows.len(),
                    a + 1,
                    p.d_out
                )));
            }
            let mut data = Vec::with_capacity(p.d_out * p.d_in);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != p.d_in {
                    return Err(Error::Format(format!(
                        "{at}[{i}]: {} columns, party {} has d_in = {}",
                        row.len(),
                        a + 1,
                        p.d_in
                    )));
                }
                data.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
            }
            let f = ComplexMatrix::new(p.d_out, p.d_in, data).map_err(|e| Error::Format(format!("{at}: {e}")))?;
            if !f.is_finite() {
                return Err(Error::Format(format!("{at}: non-finite entry")));
            }
            factors.push(f);
        }
        let [re, im] = m.weight;
        ProductOperator::new(Complex64::new(re, im), factors).map_err(|e| Error::Format(format!("members[{j}]: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Format(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Error::Format(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
