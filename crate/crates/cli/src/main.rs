//! Batch front end for the rate-region engine. Every command reads JSON
//! inputs, prints one JSON document to stdout with the seed and the sha256
//! of each input embedded, and exits 0 unless a structural error occurred.
//! Verdicts (point outside region, encoding failures, ...) are data.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use bccr_core::dist::AuxSizes;
use bccr_core::io::{
    channel_from_json, constraints_to_csv, distribution_from_json, network_from_json,
    points_to_csv, sig12, sim_config_from_json,
};
use bccr_core::region::{
    compute_profile, hk_reduction, jiang_reduction, marton_reduction, rate_region,
    region_boundary, Variant,
};
use bccr_core::{build_plan, run_experiment, ChannelSpec64, FactoredDistribution64, LinearSystem64};

#[derive(Parser)]
#[command(name = "bccr", about = "Rate-region engine for broadcast channels with cognitive relays", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cm,
    Nocm,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Cm => Variant::Cm,
            VariantArg::Nocm => Variant::NoCm,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the projected rate region and information profile.
    Region {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum, default_value = "cm")]
        variant: VariantArg,
        /// Write the constraint CSV here (also embedded in the JSON).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Additionally sample this many distributions for boundary points.
        #[arg(long)]
        budget: Option<usize>,
        /// Auxiliary alphabet sizes for boundary sampling, as
        /// q,w1,u1,x1,w2,v2,x2,wb,ub,vb,xb.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Test a rate point for membership and list the binding constraints.
    Check {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum, default_value = "cm")]
        variant: VariantArg,
        /// r0,r1,r2 for cm; r1,r2 for nocm.
        #[arg(long)]
        point: String,
    },
    /// Compare the full region against its reductions on a lattice.
    Compare {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        dist: PathBuf,
    },
    /// Run the random-coding simulator.
    Simulate {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build the message-plan graph for a cognitive-relay network.
    Maccm {
        #[arg(long)]
        network: PathBuf,
        /// Write the plan in DOT format here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(doc) => {
            println!("{}", serde_json::to_string_pretty(&doc).expect("document"));
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

struct Inputs {
    hashes: BTreeMap<String, Value>,
}

impl Inputs {
    fn new() -> Self {
        Inputs {
            hashes: BTreeMap::new(),
        }
    }

    fn read(&mut self, label: &str, path: &Path) -> Result<String, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        self.hashes.insert(
            label.to_string(),
            json!({
                "path": path.display().to_string(),
                "sha256": hex(&Sha256::digest(text.as_bytes())),
            }),
        );
        Ok(text)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn load_pair(
    inputs: &mut Inputs,
    channel: &Path,
    dist: &Path,
) -> Result<(ChannelSpec64, FactoredDistribution64), String> {
    let chan = channel_from_json(&inputs.read("channel", channel)?).map_err(|e| e.to_string())?;
    let d = distribution_from_json(&inputs.read("dist", dist)?).map_err(|e| e.to_string())?;
    Ok((chan, d))
}

fn manifest(command: &str, seed: u64, inputs: Inputs) -> Value {
    json!({
        "command": command,
        "seed": seed,
        "inputs": inputs.hashes,
    })
}

fn parse_sizes(text: &str) -> Result<AuxSizes, String> {
    let v: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if v.len() != 11 {
        return Err(format!("--sizes needs 11 comma-separated values, got {}", v.len()));
    }
    Ok(AuxSizes {
        q: v[0],
        w1: v[1],
        u1: v[2],
        x1: v[3],
        w2: v[4],
        v2: v[5],
        x2: v[6],
        wb: v[7],
        ub: v[8],
        vb: v[9],
        xb: v[10],
    })
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    if let Some(p) = path {
        std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

/// Lattice inclusion summary: how many 0.05-step points of `inner` (within
/// its bounding box) fall outside `outer`, skipping a 1e-6 boundary band.
fn inclusion_summary(inner: &LinearSystem64, outer: &LinearSystem64) -> Value {
    const STEP: f64 = 0.05;
    let dim = inner.vars().len();
    if dim != outer.vars().len() {
        return json!({ "comparable": false });
    }
    // Bound each axis by the largest single-variable upper bound.
    let mut hi = vec![0.0f64; dim];
    for c in inner.constraints() {
        for (j, &k) in c.coeffs.iter().enumerate() {
            if k > 0 && c.constant > 0.0 {
                hi[j] = hi[j].max(c.constant / k as f64);
            }
        }
    }
    let steps: Vec<usize> = hi.iter().map(|h| (h / STEP).ceil() as usize + 1).collect();
    let mut idx = vec![0usize; dim];
    let (mut total, mut violations) = (0u64, 0u64);
    loop {
        let pt: Vec<f64> = idx.iter().map(|&i| i as f64 * STEP).collect();
        if inner.contains(&pt) && inner.margin(&pt) > 1e-6 {
            total += 1;
            if !outer.contains(&pt) {
                violations += 1;
            }
        }
        let mut axis = 0;
        loop {
            if axis == dim {
                return json!({
                    "comparable": true,
                    "lattice_step": STEP,
                    "inner_points": total,
                    "violations": violations,
                });
            }
            idx[axis] += 1;
            if idx[axis] <= steps[axis] {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn run(cli: Cli) -> Result<Value, String> {
    match cli.command {
        Command::Region {
            channel,
            dist,
            variant,
            out,
            budget,
            sizes,
            seed,
        } => {
            let mut inputs = Inputs::new();
            let (chan, d) = load_pair(&mut inputs, &channel, &dist)?;
            let profile = compute_profile(&d, &chan).map_err(|e| e.to_string())?;
            let region = rate_region(&profile, variant.into()).map_err(|e| e.to_string())?;
            let csv = constraints_to_csv(&region);
            write_out(&out, &csv)?;
            let mut doc = manifest("region", seed, inputs);
            let obj = doc.as_object_mut().unwrap();
            obj.insert("variant".into(), json!(variant_name(variant)));
            obj.insert("profile".into(), serde_json::to_value(&profile).unwrap());
            obj.insert("constraints_csv".into(), json!(csv));
            if let Some(budget) = budget {
                let sz = match &sizes {
                    Some(s) => parse_sizes(s)?,
                    None => AuxSizes::all_binary(),
                };
                let points = region_boundary(&chan, variant.into(), budget, seed, sz)
                    .map_err(|e| e.to_string())?;
                obj.insert("boundary_points_csv".into(), json!(points_to_csv(&points)));
            }
            Ok(doc)
        }
        Command::Check {
            channel,
            dist,
            variant,
            point,
        } => {
            let mut inputs = Inputs::new();
            let (chan, d) = load_pair(&mut inputs, &channel, &dist)?;
            let coords: Vec<f64> = point
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let profile = compute_profile(&d, &chan).map_err(|e| e.to_string())?;
            let region = rate_region(&profile, variant.into()).map_err(|e| e.to_string())?;
            if coords.len() != region.vars().len() {
                return Err(format!(
                    "--point needs {} coordinates for this variant, got {}",
                    region.vars().len(),
                    coords.len()
                ));
            }
            let inside = region.contains(&coords);
            // Rows at (or violating) the point: slack <= 0 within round-off.
            let rows: Vec<Value> = region
                .constraints()
                .iter()
                .filter_map(|c| {
                    let lhs: f64 = c
                        .coeffs
                        .iter()
                        .zip(&coords)
                        .map(|(&k, &x)| k as f64 * x)
                        .sum();
                    let slack = c.constant - lhs;
                    if slack <= 1e-9 {
                        Some(json!({
                            "coeffs": c.coeffs,
                            "constant": sig12(c.constant),
                            "slack": sig12(slack),
                        }))
                    } else {
                        None
                    }
                })
                .collect();
            let mut doc = manifest("check", 0, inputs);
            let obj = doc.as_object_mut().unwrap();
            obj.insert("variant".into(), json!(variant_name(variant)));
            obj.insert("point".into(), json!(coords));
            obj.insert("inside".into(), json!(inside));
            obj.insert("binding_constraints".into(), json!(rows));
            Ok(doc)
        }
        Command::Compare { channel, dist } => {
            let mut inputs = Inputs::new();
            let (chan, d) = load_pair(&mut inputs, &channel, &dist)?;
            let profile = compute_profile(&d, &chan).map_err(|e| e.to_string())?;
            let full_nocm = rate_region(&profile, Variant::NoCm).map_err(|e| e.to_string())?;
            let full_cm = rate_region(&profile, Variant::Cm).map_err(|e| e.to_string())?;
            let hk = hk_reduction(&d, &chan).map_err(|e| e.to_string())?;
            let jiang = jiang_reduction(&d, &chan).map_err(|e| e.to_string())?;
            let marton = marton_reduction(&d, &chan).map_err(|e| e.to_string())?;
            let mut doc = manifest("compare", 0, inputs);
            let obj = doc.as_object_mut().unwrap();
            obj.insert(
                "regions_csv".into(),
                json!({
                    "full_cm": constraints_to_csv(&full_cm),
                    "full_nocm": constraints_to_csv(&full_nocm),
                    "hk": constraints_to_csv(&hk),
                    "jiang": constraints_to_csv(&jiang),
                    "marton": constraints_to_csv(&marton),
                }),
            );
            obj.insert(
                "inclusion_in_full".into(),
                json!({
                    "hk": inclusion_summary(&hk, &full_nocm),
                    "jiang": inclusion_summary(&jiang, &full_nocm),
                    "marton": inclusion_summary(&marton, &full_cm),
                }),
            );
            Ok(doc)
        }
        Command::Simulate {
            channel,
            dist,
            sim,
            trials,
            seed,
        } => {
            let mut inputs = Inputs::new();
            let (chan, d) = load_pair(&mut inputs, &channel, &dist)?;
            let mut config =
                sim_config_from_json(&inputs.read("sim", &sim)?).map_err(|e| e.to_string())?;
            if let Some(t) = trials {
                config.trials = t;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            let report = run_experiment(&d, &chan, &config).map_err(|e| e.to_string())?;
            let mut doc = manifest("simulate", config.seed, inputs);
            let obj = doc.as_object_mut().unwrap();
            obj.insert("config".into(), serde_json::to_value(&config).unwrap());
            obj.insert("report".into(), serde_json::to_value(&report).unwrap());
            Ok(doc)
        }
        Command::Maccm { network, dot } => {
            let mut inputs = Inputs::new();
            let spec =
                network_from_json(&inputs.read("network", &network)?).map_err(|e| e.to_string())?;
            let plan = build_plan(&spec).map_err(|e| e.to_string())?;
            let graph = plan.to_digraph();
            write_out(&dot, &graph.to_dot())?;
            let mut doc = manifest("maccm", 0, inputs);
            let obj = doc.as_object_mut().unwrap();
            obj.insert("graph".into(), serde_json::from_str(&graph.to_json()).unwrap());
            obj.insert("acyclic".into(), json!(graph.is_acyclic()));
            obj.insert("dot".into(), json!(graph.to_dot()));
            Ok(doc)
        }
    }
}

fn variant_name(v: VariantArg) -> &'static str {
    match v {
        VariantArg::Cm => "cm",
        VariantArg::Nocm => "nocm",
    }
}
