//! Instance sources and list-valued flags.

use std::path::{Path, PathBuf};

use sdmsop_core::gtsp_io::{read_instance, MetaTable, TransformWarning};
use sdmsop_core::{parse_gtsp, transform_to_sdmsop, GtspFile, InstanceMeta, ProfitRule, SdmsopInstance};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0} is a GTSP file; pass --meta with its best-known tour cost")]
    NeedsMeta(PathBuf),
    #[error("{0}")]
    Invalid(String),
}

pub fn read_text(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A raw GTSP file still to be transformed, or a finished instance file.
#[derive(Debug, Clone)]
pub enum Source {
    Gtsp(GtspFile),
    Instance(SdmsopInstance),
}

impl Source {
    /// `.gtsp` files are parsed as GTSP, anything else as an instance file.
    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = read_text(path)?;
        let parse = |message: String| InputError::Parse {
            path: path.to_path_buf(),
            message,
        };
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gtsp")) {
            parse_gtsp(&text).map(Source::Gtsp).map_err(|e| parse(e.to_string()))
        } else {
            read_instance(&text).map(Source::Instance).map_err(|e| parse(e.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Source::Gtsp(g) => &g.name,
            Source::Instance(i) => i.name(),
        }
    }

    /// Rule label for reports; instance files carry their own profits.
    pub fn rule_label(&self, rule: ProfitRule) -> String {
        match self {
            Source::Gtsp(_) => rule.to_string(),
            Source::Instance(_) => "file".to_string(),
        }
    }

    /// The sDmSOP instance for `m` travelers. GTSP sources are transformed
    /// with the budget `floor(w * opt)`; instance files keep their budget.
    pub fn materialize(
        &self,
        rule: ProfitRule,
        w: f64,
        meta: Option<&MetaTable>,
        m: usize,
        path: &Path,
    ) -> Result<(SdmsopInstance, Vec<TransformWarning>), InputError> {
        match self {
            Source::Gtsp(g) => {
                let meta = meta.ok_or_else(|| InputError::NeedsMeta(path.to_path_buf()))?;
                let opt = meta.gtsp_opt_cost(&g.name).map_err(|e| InputError::Invalid(e.to_string()))?;
                let im = InstanceMeta::allow_zero(opt, w).map_err(|e| InputError::Invalid(e.to_string()))?;
                let t = transform_to_sdmsop(g, rule, im, m).map_err(|e| InputError::Invalid(e.to_string()))?;
                let provenance = format!("from {} rule={rule} w={w} opt={opt}", g.name);
                Ok((t.instance.with_provenance(provenance), t.warnings))
            }
            Source::Instance(inst) => inst
                .with_travelers(m)
                .map(|i| (i, Vec::new()))
                .map_err(|e| InputError::Invalid(e.to_string())),
        }
    }
}

pub fn load_meta(path: Option<&Path>) -> Result<Option<MetaTable>, InputError> {
    path.map(|p| {
        MetaTable::parse(&read_text(p)?).map_err(|e| InputError::Parse {
            path: p.to_path_buf(),
            message: e.to_string(),
        })
    })
    .transpose()
}

/// Seeds as `a..b` (half-open), a comma list, or a single value.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let bad = |_| format!("bad seed list `{s}`; use `0..10` or `1,2,3`");
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(bad)?;
        let b: u64 = b.trim().parse().map_err(bad)?;
        if a >= b {
            return Err(format!("empty seed range `{s}`"));
        }
        return Ok((a..b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(bad)).collect()
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}
