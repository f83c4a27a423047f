//! Regenerates `data/case_study.json` from the built-in encoding.
//!
//! `cargo run -p hwlrp-core --example write_case_study -- data/case_study.json`

use hwlrp::instance::{case_study_instance, to_json};

fn main() -> std::io::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/case_study.json".into());
    std::fs::write(&path, to_json(&case_study_instance()) + "\n")
}
