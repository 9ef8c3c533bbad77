use std::fs;
use std::path::{Path, PathBuf};

use locus_core::frame::FrameJson;
use locus_core::nuclei::NucleusJson;
use locus_core::tree::{TreeGenerator, TreeJson};
use locus_core::{FiniteFrame, Mask, Tree};
use serde::de::DeserializeOwned;

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_frame(path: &Path) -> Result<FiniteFrame, CliError> {
    let spec: FrameJson = read_json(path)?;
    FiniteFrame::from_json(&spec).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn load_nucleus(path: &Path) -> Result<NucleusJson, CliError> {
    read_json(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Generator {
    Cantor,
    Baire,
    Koenig,
}

#[derive(Debug, Clone, clap::Args)]
pub struct TreeSource {
    /// Tree JSON file.
    pub file: Option<PathBuf>,
    /// Generate a standard tree instead of reading one.
    #[arg(long, conflicts_with = "file")]
    pub generate: Option<Generator>,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub width: usize,
}

impl TreeSource {
    pub fn load(&self) -> Result<Tree, CliError> {
        let spec = match (&self.file, self.generate) {
            (Some(path), _) => read_json::<TreeJson>(path)?,
            (None, Some(g)) => TreeJson::Generated(match g {
                Generator::Cantor => TreeGenerator::Cantor { depth: self.depth },
                Generator::Baire => TreeGenerator::Baire {
                    width: self.width,
                    depth: self.depth,
                },
                Generator::Koenig => TreeGenerator::Koenig {
                    width: self.width,
                    depth: self.depth,
                },
            }),
            (None, None) => return Err(CliError::Usage("give a tree file or --generate".into())),
        };
        Tree::from_json(&spec).map_err(|e| CliError::Invalid(e.to_string()))
    }
}

/// A base given inline as a JSON array of labels or as a file holding one.
/// Without one, the join-irreducibles are used.
pub fn load_base(f: &FiniteFrame, arg: Option<&str>) -> Result<Mask, CliError> {
    let Some(arg) = arg else {
        return Ok(f.join_irreducibles());
    };
    let labels: Vec<String> = if arg.trim_start().starts_with('[') {
        serde_json::from_str(arg).map_err(|e| CliError::Parse {
            path: PathBuf::from("--base"),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    } else {
        read_json(Path::new(arg))?
    };
    let mut m = Mask::empty(f.size());
    for l in &labels {
        m.insert(f.element(l).map_err(|e| CliError::Invalid(e.to_string()))?);
    }
    Ok(m)
}
