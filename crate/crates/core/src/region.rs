//! Mutual-information profile of the achievability theorem and the linear
//! inequality systems it induces, with their projections, reductions and
//! boundary sampling.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::dist::{AuxSizes, FactoredDistribution};
use crate::error::{Error, Result};
use crate::info::cond_mutual_info;
use crate::joint::JointTensor;
use crate::linsys::LinearSystem;
use crate::real::{real, Real};
use crate::variable::VariableId;

use VariableId::{Q, U1, UB, V2, VB, W1, W2, WB, Y1, Y2};

/// Variables of the assembled systems. `R1` and `R2` are derived via the
/// rate-splitting equalities R1 = R10 + R11 and R2 = R20 + R22.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemVariable {
    R0,
    R10,
    R11,
    R20,
    R22,
    B0,
    B1,
    B2,
    R1,
    R2,
}

impl SystemVariable {
    pub fn name(self) -> &'static str {
        match self {
            SystemVariable::R0 => "R0",
            SystemVariable::R10 => "R10",
            SystemVariable::R11 => "R11",
            SystemVariable::R20 => "R20",
            SystemVariable::R22 => "R22",
            SystemVariable::B0 => "B0",
            SystemVariable::B1 => "B1",
            SystemVariable::B2 => "B2",
            SystemVariable::R1 => "R1",
            SystemVariable::R2 => "R2",
        }
    }
}

/// Region variant: with or without the common message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Cm,
    NoCm,
}

/// All scalar information terms of the two rate regions, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutualInfoProfile<T = f64> {
    pub eta0: T,
    pub eta1: T,
    pub eta2: T,
    /// The unnamed fourth-bin term I(UB; VB | U1, V2, W1, W2, WB, Q).
    pub eta12: T,
    pub theta1: T,
    pub theta2: T,
    /// Receiver-1 terms, index k-1 holding the k-th displayed term.
    pub i_y1: [T; 7],
    /// Receiver-2 terms, same indexing.
    pub i_y2: [T; 7],
}

impl<T: Real> MutualInfoProfile<T> {
    pub fn zero() -> Self {
        MutualInfoProfile {
            eta0: T::zero(),
            eta1: T::zero(),
            eta2: T::zero(),
            eta12: T::zero(),
            theta1: T::zero(),
            theta2: T::zero(),
            i_y1: [T::zero(); 7],
            i_y2: [T::zero(); 7],
        }
    }

    pub fn fields(&self) -> Vec<(&'static str, T)> {
        let mut out = vec![
            ("eta0", self.eta0),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("eta12", self.eta12),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
        ];
        for k in 0..7 {
            out.push(("i_y1", self.i_y1[k]));
        }
        for k in 0..7 {
            out.push(("i_y2", self.i_y2[k]));
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.fields()
            .iter()
            .map(|(_, v)| v.abs())
            .fold(T::zero(), T::max)
    }
}

/// A rate tuple; `r0` is absent in the no-common-message variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint<T = f64> {
    pub r0: Option<T>,
    pub r1: T,
    pub r2: T,
}

impl<T: Real> RatePoint<T> {
    pub fn cm(r0: T, r1: T, r2: T) -> Self {
        RatePoint {
            r0: Some(r0),
            r1,
            r2,
        }
    }

    pub fn nocm(r1: T, r2: T) -> Self {
        RatePoint { r0: None, r1, r2 }
    }

    pub fn coords(&self) -> Vec<T> {
        match self.r0 {
            Some(r0) => vec![r0, self.r1, self.r2],
            None => vec![self.r1, self.r2],
        }
    }
}

/// Evaluates every information term of the profile on the 13-variable joint.
pub fn compute_profile<T: Real>(
    dist: &FactoredDistribution<T>,
    chan: &ChannelSpec<T>,
) -> Result<MutualInfoProfile<T>> {
    let joint = dist.build_joint(chan)?;
    profile_from_joint(&joint)
}

/// Profile evaluation given a pre-built joint over all thirteen variables.
pub fn profile_from_joint<T: Real>(joint: &JointTensor<T>) -> Result<MutualInfoProfile<T>> {
    let i = |a: &[VariableId], b: &[VariableId], c: &[VariableId]| cond_mutual_info(joint, a, b, c);
    Ok(MutualInfoProfile {
        eta0: i(&[U1, V2], &[WB], &[W1, W2, Q])?,
        eta1: i(&[V2], &[UB], &[U1, W1, W2, WB, Q])?,
        eta2: i(&[U1], &[VB], &[V2, W1, W2, WB, Q])?,
        eta12: i(&[UB], &[VB], &[U1, V2, W1, W2, WB, Q])?,
        theta1: i(&[U1], &[WB], &[W1, W2, Q])?,
        theta2: i(&[V2], &[WB], &[W1, W2, Q])?,
        i_y1: [
            i(&[U1, UB], &[Y1], &[W1, W2, WB, Q])?,
            i(&[WB, UB], &[Y1], &[W1, W2, U1, Q])?,
            i(&[W2, WB, UB], &[Y1], &[W1, U1, Q])?,
            i(&[U1, WB, UB], &[Y1], &[W1, W2, Q])?,
            i(&[U1, W2, WB, UB], &[Y1], &[W1, Q])?,
            i(&[W1, U1, WB, UB], &[Y1], &[W2, Q])?,
            i(&[W1, U1, W2, WB, UB], &[Y1], &[Q])?,
        ],
        i_y2: [
            i(&[V2, VB], &[Y2], &[W1, W2, WB, Q])?,
            i(&[WB, VB], &[Y2], &[W1, W2, V2, Q])?,
            i(&[W1, WB, VB], &[Y2], &[W2, V2, Q])?,
            i(&[V2, WB, VB], &[Y2], &[W1, W2, Q])?,
            i(&[W1, V2, WB, VB], &[Y2], &[W2, Q])?,
            i(&[W2, V2, WB, VB], &[Y2], &[W1, Q])?,
            i(&[W1, V2, W2, WB, VB], &[Y2], &[Q])?,
        ],
    })
}

const CM_VARS: [&str; 8] = ["R0", "R10", "R11", "R20", "R22", "B0", "B1", "B2"];
const NOCM_VARS: [&str; 7] = ["R10", "R11", "R20", "R22", "B0", "B1", "B2"];

/// Left-hand-side variable lists of the 7 receiver-1 and 7 receiver-2 upper
/// bounds, in display order. `R0` rows are filtered out for the
/// no-common-message variant.
const Y1_ROWS: [&[&str]; 7] = [
    &["R11", "B1"],
    &["R0", "B0", "B1"],
    &["R20", "R0", "B0", "B1"],
    &["R0", "B0", "R11", "B1"],
    &["R20", "R0", "B0", "R11", "B1"],
    &["R10", "R0", "B0", "R11", "B1"],
    &["R10", "R20", "R0", "B0", "R11", "B1"],
];
const Y2_ROWS: [&[&str]; 7] = [
    &["R22", "B2"],
    &["R0", "B0", "B2"],
    &["R10", "R0", "B0", "B2"],
    &["R0", "B0", "R22", "B2"],
    &["R10", "R0", "B0", "R22", "B2"],
    &["R20", "R0", "B0", "R22", "B2"],
    &["R10", "R20", "R0", "B0", "R22", "B2"],
];

fn assemble<T: Real>(profile: &MutualInfoProfile<T>, variant: Variant) -> LinearSystem<T> {
    let vars: &[&str] = match variant {
        Variant::Cm => &CM_VARS,
        Variant::NoCm => &NOCM_VARS,
    };
    let mut sys = LinearSystem::new(vars);
    for v in vars {
        sys.add_nonneg(v).expect("declared variable");
    }
    let ge = |sys: &mut LinearSystem<T>, names: &[&str], c: T| {
        let terms: Vec<(&str, i64)> = names.iter().map(|&n| (n, 1)).collect();
        sys.add_ge(&terms, c).expect("declared variable");
    };
    let le = |sys: &mut LinearSystem<T>, names: &[&str], c: T| {
        let terms: Vec<(&str, i64)> = names
            .iter()
            .filter(|&&n| variant == Variant::Cm || n != "R0")
            .map(|&n| (n, 1))
            .collect();
        sys.add_le(&terms, c).expect("declared variable");
    };
    ge(&mut sys, &["B0"], profile.eta0);
    ge(&mut sys, &["B0", "B1"], profile.eta0 + profile.eta1);
    ge(&mut sys, &["B0", "B2"], profile.eta0 + profile.eta2);
    ge(
        &mut sys,
        &["B0", "B1", "B2"],
        profile.eta0 + profile.eta1 + profile.eta2 + profile.eta12,
    );
    for (k, row) in Y1_ROWS.iter().enumerate() {
        if variant == Variant::NoCm && (k == 1 || k == 2) {
            continue; // redundant without a common message (I_Y1^2, I_Y1^3 rows)
        }
        le(&mut sys, row, profile.i_y1[k] + profile.theta1);
    }
    for (k, row) in Y2_ROWS.iter().enumerate() {
        if variant == Variant::NoCm && (k == 1 || k == 2) {
            continue;
        }
        le(&mut sys, row, profile.i_y2[k] + profile.theta2);
    }
    sys
}

/// The 26-constraint system of the common-message region over
/// (R0, R10, R11, R20, R22, B0, B1, B2). Strict inequalities are closed.
pub fn build_system_cm<T: Real>(profile: &MutualInfoProfile<T>) -> LinearSystem<T> {
    assemble(profile, Variant::Cm)
}

/// The 21-constraint no-common-message system over the seven variables
/// without R0; the four rows made redundant by dropping R0 are omitted.
pub fn build_system_nocm<T: Real>(profile: &MutualInfoProfile<T>) -> LinearSystem<T> {
    assemble(profile, Variant::NoCm)
}

pub fn build_system<T: Real>(profile: &MutualInfoProfile<T>, variant: Variant) -> LinearSystem<T> {
    assemble(profile, variant)
}

/// Adds the derived rate variables R1, R2 and their coupling equalities.
pub fn couple_rates<T: Real>(system: &LinearSystem<T>) -> LinearSystem<T> {
    let mut sys = system.clone();
    sys.add_variable("R1");
    sys.add_variable("R2");
    sys.add_eq(&[("R1", 1), ("R10", -1), ("R11", -1)], T::zero())
        .expect("declared variable");
    sys.add_eq(&[("R2", 1), ("R20", -1), ("R22", -1)], T::zero())
        .expect("declared variable");
    sys
}

/// Projects a coupled system onto the kept rate coordinates.
pub fn project_to_rates<T: Real>(
    system: &LinearSystem<T>,
    keep: &[SystemVariable],
) -> Result<LinearSystem<T>> {
    let names: Vec<&str> = keep.iter().map(|v| v.name()).collect();
    system.project(&names)
}

/// End-to-end region in rate space for a profile.
pub fn rate_region<T: Real>(
    profile: &MutualInfoProfile<T>,
    variant: Variant,
) -> Result<LinearSystem<T>> {
    let sys = couple_rates(&build_system(profile, variant));
    let keep: &[SystemVariable] = match variant {
        Variant::Cm => &[SystemVariable::R0, SystemVariable::R1, SystemVariable::R2],
        Variant::NoCm => &[SystemVariable::R1, SystemVariable::R2],
    };
    project_to_rates(&sys, keep)
}

/// Feasibility of a rate point, by pinning the rates in the unprojected
/// system and eliminating the remaining variables.
pub fn membership<T: Real>(
    point: &RatePoint<T>,
    profile: &MutualInfoProfile<T>,
    variant: Variant,
) -> Result<bool> {
    if point.r1 < T::zero() || point.r2 < T::zero() {
        return Ok(false);
    }
    let sys = couple_rates(&build_system(profile, variant));
    let mut pins: Vec<(&str, T)> = vec![("R1", point.r1), ("R2", point.r2)];
    match variant {
        Variant::Cm => {
            let r0 = point
                .r0
                .ok_or_else(|| Error::InvalidArgument("cm membership needs r0".into()))?;
            if r0 < T::zero() {
                return Ok(false);
            }
            pins.push(("R0", r0));
        }
        Variant::NoCm => {}
    }
    Ok(sys.pin(&pins)?.is_feasible())
}

/// Han-Kobayashi reduction: WB, UB, VB degenerate, no common message.
pub fn hk_reduction<T: Real>(
    dist: &FactoredDistribution<T>,
    chan: &ChannelSpec<T>,
) -> Result<LinearSystem<T>> {
    let d = dist.degenerate(&[WB, UB, VB])?;
    let profile = compute_profile(&d, chan)?;
    rate_region(&profile, Variant::NoCm)
}

/// Reduction to the earlier no-common-message region: WB degenerate and
/// B0 pinned to zero.
pub fn jiang_reduction<T: Real>(
    dist: &FactoredDistribution<T>,
    chan: &ChannelSpec<T>,
) -> Result<LinearSystem<T>> {
    let d = dist.degenerate(&[WB])?;
    let profile = compute_profile(&d, chan)?;
    let sys = couple_rates(&build_system_nocm(&profile)).pin(&[("B0", T::zero())])?;
    project_to_rates(&sys, &[SystemVariable::R1, SystemVariable::R2])
}

/// Broadcast-channel reduction: W1, U1, W2, V2 degenerate. After the
/// degeneration eta0, theta1 and theta2 must vanish; a violation indicates
/// an implementation bug, hence the hard assertion.
pub fn marton_reduction<T: Real>(
    dist: &FactoredDistribution<T>,
    chan: &ChannelSpec<T>,
) -> Result<LinearSystem<T>> {
    let d = dist.degenerate(&[W1, U1, W2, V2])?;
    let profile = compute_profile(&d, chan)?;
    let tol: T = real(1e-9);
    assert!(
        profile.eta0 <= tol && profile.theta1 <= tol && profile.theta2 <= tol,
        "degeneration left eta0/theta1/theta2 nonzero: {:?} {:?} {:?}",
        profile.eta0,
        profile.theta1,
        profile.theta2
    );
    let sys = couple_rates(&build_system_cm(&profile));
    project_to_rates(
        &sys,
        &[SystemVariable::R0, SystemVariable::R1, SystemVariable::R2],
    )
}

/// A Pareto-maximal rate point together with the index of the sampled
/// distribution that generated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint<T = f64> {
    pub point: RatePoint<T>,
    pub sample: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

fn clamp_size(requested: usize, needed: usize) -> usize {
    requested.min(needed).max(1)
}

/// Structured members of the sampling family: the degenerate scheme, an
/// interference-style identity coupling, a broadcast-style coupling and
/// their combination. Random sampling alone almost never lands on these
/// near-deterministic corners, yet they generate the region's extreme
/// points on clean channels.
fn canonical_candidates<T: Real>(
    sizes: AuxSizes,
    chan: &ChannelSpec<T>,
) -> Vec<FactoredDistribution<T>> {
    let x1 = chan.alph_x1().size();
    let x2 = chan.alph_x2().size();
    let xb = chan.alph_xb().size();
    let mut out = Vec::new();
    // Fully degenerate auxiliaries, uniform inputs.
    if let Ok(d) = FactoredDistribution::uniform_inputs(x1, x2, xb) {
        out.push(d);
    }
    let mut sizes = sizes;
    sizes.x1 = x1;
    sizes.x2 = x2;
    sizes.xb = xb;
    let m1 = clamp_size(sizes.u1, x1);
    let m2 = clamp_size(sizes.v2, x2);
    let mb = clamp_size(sizes.wb, xb);
    let point = |cond: bool| if cond { T::one() } else { T::zero() };
    // U1 = X1, V2 = X2 uniform; broadcasting auxiliaries constant.
    let ident = FactoredDistribution::from_fns(
        sizes,
        |q| point(q == 0),
        |_, t| point(t[0] == 0 && t[1] < m1 && t[2] == t[1]) / T::from_usize(m1).unwrap(),
        |_, t| point(t[0] == 0 && t[1] < m2 && t[2] == t[1]) / T::from_usize(m2).unwrap(),
        |_, t| point(t[0] == 0 && t[1] == 0 && t[2] == 0),
        |_, t| point(t[0] == 0),
    );
    // WB = XB uniform; everything else constant.
    let marton = FactoredDistribution::from_fns(
        sizes,
        |q| point(q == 0),
        |_, t| point(t[0] == 0 && t[1] == 0 && t[2] == 0),
        |_, t| point(t[0] == 0 && t[1] == 0 && t[2] == 0),
        |_, t| point(t[0] < mb && t[1] == 0 && t[2] == 0) / T::from_usize(mb).unwrap(),
        |c, t| point(t[0] == c[7].min(xb - 1)),
    );
    // Both couplings at once.
    let combined = FactoredDistribution::from_fns(
        sizes,
        |q| point(q == 0),
        |_, t| point(t[0] == 0 && t[1] < m1 && t[2] == t[1]) / T::from_usize(m1).unwrap(),
        |_, t| point(t[0] == 0 && t[1] < m2 && t[2] == t[1]) / T::from_usize(m2).unwrap(),
        |_, t| point(t[0] < mb && t[1] == 0 && t[2] == 0) / T::from_usize(mb).unwrap(),
        |c, t| point(t[0] == c[7].min(xb - 1)),
    );
    for d in [ident, marton, combined].into_iter().flatten() {
        out.push(d);
    }
    out
}

fn directions<T: Real>(dim: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    if dim == 2 {
        let m = 9;
        for j in 0..m {
            let th = std::f64::consts::FRAC_PI_2 * (j as f64 + 0.5) / m as f64;
            out.push(vec![real(th.cos()), real(th.sin())]);
        }
        out.push(vec![T::one(), T::zero()]);
        out.push(vec![T::zero(), T::one()]);
    } else {
        for a in 0..4 {
            for b in 0..4 {
                let az = std::f64::consts::FRAC_PI_2 * (a as f64 + 0.5) / 4.0;
                let el = std::f64::consts::FRAC_PI_2 * (b as f64 + 0.5) / 4.0;
                out.push(vec![
                    real(el.sin()),
                    real(el.cos() * az.cos()),
                    real(el.cos() * az.sin()),
                ]);
            }
        }
        out.push(vec![T::one(), T::zero(), T::zero()]);
        out.push(vec![T::zero(), T::one(), T::zero()]);
        out.push(vec![T::zero(), T::zero(), T::one()]);
    }
    out
}

fn ray_max<T: Real>(sys: &LinearSystem<T>, dir: &[T]) -> T {
    let tol: T = real(1e-12);
    let mut t_max: T = real(1e6);
    for c in sys.constraints() {
        let dot = c
            .coeffs
            .iter()
            .zip(dir)
            .fold(T::zero(), |acc, (&k, &d)| acc + real::<T>(k as f64) * d);
        if dot > tol {
            t_max = t_max.min((c.constant / dot).max(T::zero()));
        }
    }
    t_max
}

fn dominates<T: Real>(a: &[T], b: &[T]) -> bool {
    let tol: T = real(1e-9);
    a.iter().zip(b).all(|(&x, &y)| x >= y - tol)
        && a.iter().zip(b).any(|(&x, &y)| x > y + tol)
}

/// Weak-dominance Pareto filter with floating-point tolerance.
pub fn pareto_filter<T: Real>(points: Vec<BoundaryPoint<T>>) -> Vec<BoundaryPoint<T>> {
    let tol: T = real(1e-9);
    let mut kept: Vec<BoundaryPoint<T>> = Vec::new();
    for p in points {
        let pc = p.point.coords();
        if kept.iter().any(|k| {
            let kc = k.point.coords();
            dominates(&kc, &pc) || kc.iter().zip(&pc).all(|(&a, &b)| (a - b).abs() <= tol)
        }) {
            continue;
        }
        kept.retain(|k| !dominates(&pc, &k.point.coords()));
        kept.push(p);
    }
    kept
}

/// Samples distributions (structured corners first, then seeded random
/// draws with increasing sharpening) and collects the Pareto-maximal
/// boundary points of their projected regions.
pub fn region_boundary<T: Real>(
    chan: &ChannelSpec<T>,
    variant: Variant,
    budget: usize,
    seed: u64,
    sizes: AuxSizes,
) -> Result<Vec<BoundaryPoint<T>>> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be >= 1".into()));
    }
    let canonical = canonical_candidates(sizes, chan);
    let mut raw: Vec<BoundaryPoint<T>> = Vec::new();
    for sample in 0..budget {
        let dist = if sample < canonical.len() {
            canonical[sample].clone()
        } else {
            let d = FactoredDistribution::random(sizes, derive_seed(seed, sample as u64))?;
            let k = [1, 2, 4, 8][sample % 4];
            d.sharpened(k)
        };
        let profile = match compute_profile(&dist, chan) {
            Ok(p) => p,
            Err(Error::AlphabetMismatch(_)) => continue,
            Err(e) => return Err(e),
        };
        let proj = rate_region(&profile, variant)?;
        let dim = proj.vars().len();
        let origin = vec![T::zero(); dim];
        if !proj.contains(&origin) {
            continue;
        }
        for dir in directions::<T>(dim) {
            let t = ray_max(&proj, &dir);
            let shrink = t * (T::one() - real::<T>(1e-9));
            let coords: Vec<T> = dir.iter().map(|&d| d * shrink).collect();
            let point = match variant {
                Variant::Cm => RatePoint::cm(coords[0], coords[1], coords[2]),
                Variant::NoCm => RatePoint::nocm(coords[0], coords[1]),
            };
            if membership(&point, &profile, variant)? {
                raw.push(BoundaryPoint { point, sample });
            }
        }
    }
    Ok(pareto_filter(raw))
}
