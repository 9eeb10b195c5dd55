//! One function per subcommand. Each either writes all of its outputs or none.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use stylekv_core::diagnostics;
use stylekv_core::toymodel::{ToyConfig, ToyModel};
use stylekv_core::transition::Window;

use crate::experiments;
use crate::output::{write_atomic, OutputDir};
use crate::record::{RunRecord, RunSettings};
use crate::weights_file;

pub fn read_config(path: &Path) -> Result<ToyConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: ToyConfig = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    cfg.validate().with_context(|| format!("invalid config {}", path.display()))?;
    Ok(cfg)
}

pub fn cmd_build_model(config: &Path, out: &Path) -> Result<()> {
    let model = ToyModel::build(read_config(config)?)?;
    write_atomic(out, weights_file::to_json(&model)?.as_bytes())
}

pub fn cmd_interp_sweep(model: &Path, alphas: &[f32], out: &Path) -> Result<()> {
    let model = weights_file::load(model)?;
    let rows = experiments::interp_sweep(&model, alphas)?;
    write_atomic(out, experiments::sweep_csv(&rows).as_bytes())
}

pub fn cmd_transition(model: &Path, settings: &RunSettings, out: &Path) -> Result<()> {
    let model = weights_file::load(model)?;
    let record = experiments::transition_record(&model, settings)?;
    write_atomic(out, serde_json::to_string(&record)?.as_bytes())
}

pub fn cmd_grid(model: &Path, windows: &[Window], ks: &[usize], alpha: f32, out: &Path) -> Result<()> {
    let model = weights_file::load(model)?;
    let rows = experiments::grid(&model, windows, ks, alpha)?;
    write_atomic(out, experiments::grid_csv(&rows).as_bytes())
}

/// Writes `variance.csv` and one `attention_layer{l}.csv` per layer into `out`.
pub fn cmd_diagnose(run: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(run).with_context(|| format!("reading {}", run.display()))?;
    let record: RunRecord = serde_json::from_str(&text).with_context(|| format!("parsing run record {}", run.display()))?;
    let trace = record
        .trace
        .ok_or_else(|| anyhow!("run record {} contains no trace", run.display()))?;
    let series = diagnostics::attention_variance(&trace)?;

    let mut dir = OutputDir::create(out)?;
    let mut csv = String::from("position,layer,var\n");
    for (t, row) in series.values.iter().enumerate() {
        for (layer, v) in row.iter().enumerate() {
            writeln!(csv, "{},{layer},{v}", t + 1)?;
        }
    }
    dir.write("variance.csv", csv.as_bytes())?;
    for layer in 0..series.layers() {
        let map = diagnostics::attention_map(&trace, layer)?;
        dir.write(
            &format!("attention_layer{layer}.csv"),
            diagnostics::attention_map_csv(&map).as_bytes(),
        )?;
    }
    dir.commit();
    Ok(())
}
