//! Runs a bundled scenario through the same entry point as the CLI and prints
//! the report header and gates.
//!
//! Usage: cargo run --example run_scenario -- [heat|clt|tightness|basis-check] [config]

use std::path::PathBuf;

use nucleartight::scenario::{run_file, Command, Overrides};

fn main() -> nucleartight::Result<()> {
    let mut args = std::env::args().skip(1);
    let command = match args.next().as_deref() {
        Some("clt") => Command::Clt,
        Some("tightness") => Command::Tightness,
        Some("basis-check") => Command::BasisCheck,
        _ => Command::Heat,
    };
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/smoke.json"));
    let out = run_file(command, &config, &Overrides::default())?;
    let report: serde_json::Value = serde_json::from_str(&out.json)?;
    println!(
        "scenario {} ({})",
        report["header"]["scenario"],
        command.name()
    );
    println!("config hash {}", report["header"]["config_hash"]);
    let gates = report.get("gates").or_else(|| report.get("checks"));
    for g in gates.and_then(|g| g.as_array()).into_iter().flatten() {
        println!(
            "  [{}] {}: {}",
            if g["passed"] == true { "pass" } else { "FAIL" },
            g["name"],
            g["detail"]
        );
    }
    println!("exit status {:?}", out.status());
    Ok(())
}
