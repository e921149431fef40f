//! JSON and CSV interchange: channel kernels, factored distributions,
//! network specs, simulator configs, and the region/point-cloud CSV dumps.

use serde::{Deserialize, Serialize};

use crate::channel::{Alphabet, ChannelSpec};
use crate::dist::{
    AuxSizes, FactoredDistribution, FACTOR_1_COND, FACTOR_1_TARGETS, FACTOR_2_COND,
    FACTOR_2_TARGETS, FACTOR_B_COND, FACTOR_B_TARGETS, FACTOR_XB_COND, FACTOR_XB_TARGETS,
};
use crate::error::{Error, Result};
use crate::linsys::LinearSystem;
use crate::maccm::NetworkSpec;
use crate::region::BoundaryPoint;
use crate::sim::{SimConfig, SimReport};
use crate::tensor::Tensor;
use crate::variable::VariableId;

/// Formats a number with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (11 - exp).clamp(0, 17) as usize;
    let s = format!("{x:.decimals$}");
    // Trim trailing zeros (and a bare trailing dot) for stable short forms.
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn parse_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelAlphabets {
    x1: usize,
    #[serde(rename = "xB")]
    xb: usize,
    x2: usize,
    y1: usize,
    y2: usize,
}

/// Channel file: alphabet sizes plus the kernel as nested arrays in index
/// order (x1, xB, x2, y1, y2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    alphabets: ChannelAlphabets,
    kernel: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

pub fn channel_to_json(chan: &ChannelSpec<f64>) -> String {
    let (nx1, nxb, nx2, ny1, ny2) = (
        chan.alph_x1().size(),
        chan.alph_xb().size(),
        chan.alph_x2().size(),
        chan.alph_y1().size(),
        chan.alph_y2().size(),
    );
    let kernel = (0..nx1)
        .map(|x1| {
            (0..nxb)
                .map(|xb| {
                    (0..nx2)
                        .map(|x2| {
                            (0..ny1)
                                .map(|y1| {
                                    (0..ny2)
                                        .map(|y2| chan.kernel().get(&[x1, xb, x2, y1, y2]))
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let file = ChannelFile {
        alphabets: ChannelAlphabets {
            x1: nx1,
            xb: nxb,
            x2: nx2,
            y1: ny1,
            y2: ny2,
        },
        kernel,
    };
    serde_json::to_string_pretty(&file).expect("channel serializes")
}

pub fn channel_from_json(text: &str) -> Result<ChannelSpec<f64>> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| parse_err("channel", e))?;
    let a = &file.alphabets;
    let shape = [a.x1, a.xb, a.x2, a.y1, a.y2];
    let mut flat = Vec::with_capacity(shape.iter().product());
    if file.kernel.len() != a.x1 {
        return Err(parse_err("channel", "kernel depth does not match x1"));
    }
    for l1 in &file.kernel {
        if l1.len() != a.xb {
            return Err(parse_err("channel", "kernel depth does not match xB"));
        }
        for l2 in l1 {
            if l2.len() != a.x2 {
                return Err(parse_err("channel", "kernel depth does not match x2"));
            }
            for l3 in l2 {
                if l3.len() != a.y1 {
                    return Err(parse_err("channel", "kernel depth does not match y1"));
                }
                for l4 in l3 {
                    if l4.len() != a.y2 {
                        return Err(parse_err("channel", "kernel depth does not match y2"));
                    }
                    flat.extend_from_slice(l4);
                }
            }
        }
    }
    let kernel = Tensor::from_vec(&shape, flat)?;
    ChannelSpec::new(
        Alphabet::new(a.x1)?,
        Alphabet::new(a.xb)?,
        Alphabet::new(a.x2)?,
        Alphabet::new(a.y1)?,
        Alphabet::new(a.y2)?,
        kernel,
    )
}

/// One factor: its axis order (conditioning variables then targets) and the
/// row-major probability data in exactly that order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorFile {
    pub index_order: Vec<String>,
    pub data: Vec<f64>,
}

/// Distribution file mirroring the five factors of the input factorization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistFile {
    pub sizes: AuxSizes,
    pub factor_q: FactorFile,
    pub factor_1: FactorFile,
    pub factor_2: FactorFile,
    pub factor_b: FactorFile,
    pub factor_xb: FactorFile,
}

fn factor_order(cond: &[VariableId], targets: &[VariableId]) -> Vec<String> {
    cond.iter()
        .chain(targets)
        .map(|v| v.name().to_string())
        .collect()
}

pub fn distribution_to_json(dist: &FactoredDistribution<f64>) -> String {
    let file = DistFile {
        sizes: dist.sizes(),
        factor_q: FactorFile {
            index_order: vec!["Q".into()],
            data: dist.factor_q().data().to_vec(),
        },
        factor_1: FactorFile {
            index_order: factor_order(&FACTOR_1_COND, &FACTOR_1_TARGETS),
            data: dist.factor_1().data().to_vec(),
        },
        factor_2: FactorFile {
            index_order: factor_order(&FACTOR_2_COND, &FACTOR_2_TARGETS),
            data: dist.factor_2().data().to_vec(),
        },
        factor_b: FactorFile {
            index_order: factor_order(&FACTOR_B_COND, &FACTOR_B_TARGETS),
            data: dist.factor_b().data().to_vec(),
        },
        factor_xb: FactorFile {
            index_order: factor_order(&FACTOR_XB_COND, &FACTOR_XB_TARGETS),
            data: dist.factor_xb().data().to_vec(),
        },
    };
    serde_json::to_string_pretty(&file).expect("distribution serializes")
}

pub fn distribution_from_json(text: &str) -> Result<FactoredDistribution<f64>> {
    let file: DistFile = serde_json::from_str(text).map_err(|e| parse_err("distribution", e))?;
    let sizes = file.sizes;
    let build = |name: &str,
                 f: &FactorFile,
                 cond: &[VariableId],
                 targets: &[VariableId]|
     -> Result<Tensor<f64>> {
        let want = factor_order(cond, targets);
        if f.index_order != want {
            return Err(parse_err(
                name,
                format!("index_order {:?}, expected {:?}", f.index_order, want),
            ));
        }
        let shape: Vec<usize> = cond
            .iter()
            .chain(targets)
            .map(|&v| sizes.size_of(v))
            .collect::<Result<_>>()?;
        Tensor::from_vec(&shape, f.data.clone())
    };
    if file.factor_q.index_order != ["Q"] {
        return Err(parse_err("factor_q", "index_order must be [\"Q\"]"));
    }
    let factor_q = Tensor::from_vec(&[sizes.q], file.factor_q.data.clone())?;
    FactoredDistribution::new(
        sizes,
        factor_q,
        build("factor_1", &file.factor_1, &FACTOR_1_COND, &FACTOR_1_TARGETS)?,
        build("factor_2", &file.factor_2, &FACTOR_2_COND, &FACTOR_2_TARGETS)?,
        build("factor_b", &file.factor_b, &FACTOR_B_COND, &FACTOR_B_TARGETS)?,
        build(
            "factor_xb",
            &file.factor_xb,
            &FACTOR_XB_COND,
            &FACTOR_XB_TARGETS,
        )?,
    )
}

pub fn network_to_json(spec: &NetworkSpec) -> String {
    serde_json::to_string_pretty(spec).expect("network serializes")
}

pub fn network_from_json(text: &str) -> Result<NetworkSpec> {
    let spec: NetworkSpec = serde_json::from_str(text).map_err(|e| parse_err("network", e))?;
    spec.validate()?;
    Ok(spec)
}

pub fn sim_config_to_json(config: &SimConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

pub fn sim_config_from_json(text: &str) -> Result<SimConfig> {
    let config: SimConfig =
        serde_json::from_str(text).map_err(|e| parse_err("simulator config", e))?;
    config.validate()?;
    Ok(config)
}

pub fn sim_report_to_json(report: &SimReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// One constraint per row: the coefficient on each kept variable, the
/// relation, and the constant.
pub fn constraints_to_csv(sys: &LinearSystem<f64>) -> String {
    let mut out = String::new();
    for v in sys.vars() {
        out.push_str(v);
        out.push(',');
    }
    out.push_str("relation,constant\n");
    for c in sys.constraints() {
        for k in &c.coeffs {
            out.push_str(&k.to_string());
            out.push(',');
        }
        out.push_str("<=,");
        out.push_str(&sig12(c.constant));
        out.push('\n');
    }
    out
}

/// Boundary point cloud: rates plus the index of the generating sample.
pub fn points_to_csv(points: &[BoundaryPoint<f64>]) -> String {
    let mut out = String::from("r0,r1,r2,sample\n");
    for p in points {
        match p.point.r0 {
            Some(r0) => out.push_str(&sig12(r0)),
            None => {}
        }
        out.push(',');
        out.push_str(&sig12(p.point.r1));
        out.push(',');
        out.push_str(&sig12(p.point.r2));
        out.push(',');
        out.push_str(&p.sample.to_string());
        out.push('\n');
    }
    out
}
