//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use sdmsop_core::gtsp_io::MetaTable;
use sdmsop_core::{parse_gtsp, transform_to_sdmsop, InstanceMeta, ProfitRule, SdmsopInstance};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// A bundled GTSP instance transformed with `w = 0.25`.
pub fn bundled(name: &str, rule: ProfitRule, m: usize) -> SdmsopInstance {
    let dir = data_dir();
    let read = |rel: String| std::fs::read_to_string(dir.join(&rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
    let meta = MetaTable::parse(&read("gtsp_opt.txt".into())).expect("bundled metadata parses");
    let g = parse_gtsp(&read(format!("gtsp/{name}.gtsp"))).expect("bundled GTSP file parses");
    let im = InstanceMeta::new(meta.gtsp_opt_cost(name).expect("listed instance"), 0.25).expect("valid budget");
    transform_to_sdmsop(&g, rule, im, m).expect("bundled instance transforms").instance
}
