use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::info::cond_mutual_info;
use crate::joint::JointTensor;
use crate::real::{real, Real};
use crate::tensor::{for_each_index, Tensor};
use crate::variable::VariableId;

use VariableId::*;

/// Largest joint tensor (product of all alphabet sizes) the engine builds.
pub const JOINT_CELL_CAP: usize = 1 << 24;

/// Per-conditioning-cell normalization slack for factors.
pub const FACTOR_TOL: f64 = 1e-12;

/// Threshold on the conditional-independence and reconstruction checks.
pub const FACTORIZATION_TOL: f64 = 1e-9;

/// Alphabet sizes of the eleven input-side variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSizes {
    pub q: usize,
    pub w1: usize,
    pub u1: usize,
    pub x1: usize,
    pub w2: usize,
    pub v2: usize,
    pub x2: usize,
    pub wb: usize,
    pub ub: usize,
    pub vb: usize,
    pub xb: usize,
}

impl AuxSizes {
    /// All sizes 1 except the channel inputs.
    pub fn degenerate(x1: usize, x2: usize, xb: usize) -> Self {
        AuxSizes {
            q: 1,
            w1: 1,
            u1: 1,
            x1,
            w2: 1,
            v2: 1,
            x2,
            wb: 1,
            ub: 1,
            vb: 1,
            xb,
        }
    }

    /// Every input-side variable binary.
    pub fn all_binary() -> Self {
        AuxSizes {
            q: 1,
            w1: 2,
            u1: 2,
            x1: 2,
            w2: 2,
            v2: 2,
            x2: 2,
            wb: 2,
            ub: 2,
            vb: 2,
            xb: 2,
        }
    }

    pub fn size_of(&self, v: VariableId) -> Result<usize> {
        Ok(match v {
            Q => self.q,
            W1 => self.w1,
            U1 => self.u1,
            X1 => self.x1,
            W2 => self.w2,
            V2 => self.v2,
            X2 => self.x2,
            WB => self.wb,
            UB => self.ub,
            VB => self.vb,
            XB => self.xb,
            Y1 | Y2 => return Err(Error::UnknownVariable(v.name().to_string())),
        })
    }

    fn set_size(&mut self, v: VariableId, s: usize) {
        match v {
            Q => self.q = s,
            W1 => self.w1 = s,
            U1 => self.u1 = s,
            X1 => self.x1 = s,
            W2 => self.w2 = s,
            V2 => self.v2 = s,
            X2 => self.x2 = s,
            WB => self.wb = s,
            UB => self.ub = s,
            VB => self.vb = s,
            XB => self.xb = s,
            Y1 | Y2 => unreachable!(),
        }
    }

    fn shape(&self, vars: &[VariableId]) -> Vec<usize> {
        vars.iter().map(|&v| self.size_of(v).unwrap()).collect()
    }

    pub fn input_cells(&self) -> usize {
        VariableId::INPUT_SIDE
            .iter()
            .map(|&v| self.size_of(v).unwrap())
            .product()
    }
}

/// Factor signatures: conditioning variables first, then targets, in the
/// fixed orders below. Tensors are laid out in exactly this axis order.
pub const FACTOR_1_COND: [VariableId; 1] = [Q];
pub const FACTOR_1_TARGETS: [VariableId; 3] = [W1, U1, X1];
pub const FACTOR_2_COND: [VariableId; 1] = [Q];
pub const FACTOR_2_TARGETS: [VariableId; 3] = [W2, V2, X2];
pub const FACTOR_B_COND: [VariableId; 5] = [Q, W1, U1, W2, V2];
pub const FACTOR_B_TARGETS: [VariableId; 3] = [WB, UB, VB];
pub const FACTOR_XB_COND: [VariableId; 10] = [Q, W1, U1, X1, W2, V2, X2, WB, UB, VB];
pub const FACTOR_XB_TARGETS: [VariableId; 1] = [XB];

/// Input distribution factored as
/// P(Q) P(W1,U1,X1|Q) P(W2,V2,X2|Q) P(WB,UB,VB|W1,U1,W2,V2,Q)
/// P(XB|X1,X2,VB,UB,WB,U1,W1,V2,W2,Q).
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredDistribution<T = f64> {
    sizes: AuxSizes,
    factor_q: Tensor<T>,
    factor_1: Tensor<T>,
    factor_2: Tensor<T>,
    factor_b: Tensor<T>,
    factor_xb: Tensor<T>,
}

fn check_factor<T: Real>(name: &str, t: &Tensor<T>, target_cells: usize) -> Result<()> {
    let tol: T = real(FACTOR_TOL);
    if t.data().iter().any(|&p| p < T::zero()) {
        return Err(Error::InvalidDistribution(format!(
            "{name}: negative entry"
        )));
    }
    for (row, chunk) in t.data().chunks(target_cells).enumerate() {
        let s: T = chunk.iter().copied().fold(T::zero(), |a, b| a + b);
        if (s - T::one()).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "{name}: conditioning cell {row} sums to {s}"
            )));
        }
    }
    Ok(())
}

impl<T: Real> FactoredDistribution<T> {
    pub fn new(
        sizes: AuxSizes,
        factor_q: Tensor<T>,
        factor_1: Tensor<T>,
        factor_2: Tensor<T>,
        factor_b: Tensor<T>,
        factor_xb: Tensor<T>,
    ) -> Result<Self> {
        let checks: [(&str, &Tensor<T>, &[VariableId], &[VariableId]); 5] = [
            ("factor_q", &factor_q, &[], &[Q]),
            ("factor_1", &factor_1, &FACTOR_1_COND, &FACTOR_1_TARGETS),
            ("factor_2", &factor_2, &FACTOR_2_COND, &FACTOR_2_TARGETS),
            ("factor_b", &factor_b, &FACTOR_B_COND, &FACTOR_B_TARGETS),
            ("factor_xb", &factor_xb, &FACTOR_XB_COND, &FACTOR_XB_TARGETS),
        ];
        for (name, tensor, cond, targets) in checks {
            let mut shape = sizes.shape(cond);
            shape.extend(sizes.shape(targets));
            if tensor.sizes() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "{name}: shape {:?}, expected {:?}",
                    tensor.sizes(),
                    shape
                )));
            }
            let target_cells: usize = sizes.shape(targets).iter().product();
            check_factor(name, tensor, target_cells)?;
        }
        Ok(FactoredDistribution {
            sizes,
            factor_q,
            factor_1,
            factor_2,
            factor_b,
            factor_xb,
        })
    }

    /// Builds the factors from probability closures; each closure receives
    /// (conditioning indices, target indices) in the factor's axis order.
    pub fn from_fns(
        sizes: AuxSizes,
        fq: impl Fn(usize) -> T,
        f1: impl Fn(&[usize], &[usize]) -> T,
        f2: impl Fn(&[usize], &[usize]) -> T,
        fb: impl Fn(&[usize], &[usize]) -> T,
        fxb: impl Fn(&[usize], &[usize]) -> T,
    ) -> Result<Self> {
        let build = |cond: &[VariableId],
                     targets: &[VariableId],
                     f: &dyn Fn(&[usize], &[usize]) -> T| {
            let mut shape = sizes.shape(cond);
            let ncond = shape.len();
            shape.extend(sizes.shape(targets));
            let mut t = Tensor::zeros(&shape);
            for_each_index(&shape, |i| {
                let v = f(&i[..ncond], &i[ncond..]);
                t.set(i, v);
            });
            t
        };
        let mut factor_q = Tensor::zeros(&[sizes.q]);
        for q in 0..sizes.q {
            factor_q.set(&[q], fq(q));
        }
        FactoredDistribution::new(
            sizes,
            factor_q,
            build(&FACTOR_1_COND, &FACTOR_1_TARGETS, &f1),
            build(&FACTOR_2_COND, &FACTOR_2_TARGETS, &f2),
            build(&FACTOR_B_COND, &FACTOR_B_TARGETS, &fb),
            build(&FACTOR_XB_COND, &FACTOR_XB_TARGETS, &fxb),
        )
    }

    /// All auxiliaries constant, channel inputs independent uniform.
    pub fn uniform_inputs(x1: usize, x2: usize, xb: usize) -> Result<Self> {
        let sizes = AuxSizes::degenerate(x1, x2, xb);
        FactoredDistribution::from_fns(
            sizes,
            |_| T::one(),
            |_, t| T::one() / T::from_usize(x1).unwrap() * bool_mass(t[0] == 0 && t[1] == 0),
            |_, t| T::one() / T::from_usize(x2).unwrap() * bool_mass(t[0] == 0 && t[1] == 0),
            |_, _| T::one(),
            |_, _| T::one() / T::from_usize(xb).unwrap(),
        )
    }

    /// Replaces factor_XB by the deterministic map `f`, which receives the
    /// conditioning indices in `FACTOR_XB_COND` order and returns the XB
    /// symbol.
    pub fn with_deterministic_xb(mut self, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let mut shape = self.sizes.shape(&FACTOR_XB_COND);
        shape.push(self.sizes.xb);
        let mut t = Tensor::zeros(&shape);
        let xb_size = self.sizes.xb;
        let ncond = FACTOR_XB_COND.len();
        let mut bad = None;
        for_each_index(&shape[..ncond], |cond| {
            let xb = f(cond);
            if xb >= xb_size {
                bad = Some(xb);
                return;
            }
            let mut idx = cond.to_vec();
            idx.push(xb);
            t.set(&idx, T::one());
        });
        if let Some(xb) = bad {
            return Err(Error::InvalidArgument(format!(
                "deterministic XB symbol {xb} outside alphabet of size {xb_size}"
            )));
        }
        self.factor_xb = t;
        Ok(self)
    }

    /// Seed-deterministic random distribution: every conditioning row is an
    /// independent flat-Dirichlet draw.
    pub fn random(sizes: AuxSizes, seed: u64) -> Result<Self> {
        if sizes.input_cells() > JOINT_CELL_CAP {
            return Err(Error::SizeCap {
                got: sizes.input_cells(),
                cap: JOINT_CELL_CAP,
            });
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut draw_rows = |shape: &[usize], target_cells: usize| {
            let mut t: Tensor<T> = Tensor::zeros(shape);
            for chunk in t.data_mut().chunks_mut(target_cells) {
                let mut total = 0.0f64;
                let mut raw = vec![0.0f64; chunk.len()];
                for r in raw.iter_mut() {
                    // Exp(1) draws normalize to a flat Dirichlet sample.
                    *r = -(1.0 - rng.random::<f64>()).ln();
                    total += *r;
                }
                for (c, r) in chunk.iter_mut().zip(raw) {
                    *c = real(r / total);
                }
            }
            t
        };
        let factor_q = draw_rows(&[sizes.q], sizes.q);
        let shape = |cond: &[VariableId], targets: &[VariableId]| {
            let mut s = sizes.shape(cond);
            s.extend(sizes.shape(targets));
            s
        };
        let cells = |targets: &[VariableId]| -> usize { sizes.shape(targets).iter().product() };
        let factor_1 = draw_rows(
            &shape(&FACTOR_1_COND, &FACTOR_1_TARGETS),
            cells(&FACTOR_1_TARGETS),
        );
        let factor_2 = draw_rows(
            &shape(&FACTOR_2_COND, &FACTOR_2_TARGETS),
            cells(&FACTOR_2_TARGETS),
        );
        let factor_b = draw_rows(
            &shape(&FACTOR_B_COND, &FACTOR_B_TARGETS),
            cells(&FACTOR_B_TARGETS),
        );
        let factor_xb = draw_rows(
            &shape(&FACTOR_XB_COND, &FACTOR_XB_TARGETS),
            cells(&FACTOR_XB_TARGETS),
        );
        FactoredDistribution::new(sizes, factor_q, factor_1, factor_2, factor_b, factor_xb)
    }

    /// Raises every conditioning row to the power `k` and renormalizes,
    /// pushing the distribution toward deterministic rows.
    pub fn sharpened(&self, k: i32) -> Self {
        let sharpen = |t: &Tensor<T>, target_cells: usize| {
            let mut out = t.clone();
            for chunk in out.data_mut().chunks_mut(target_cells) {
                let mut total = T::zero();
                for v in chunk.iter_mut() {
                    *v = v.powi(k);
                    total += *v;
                }
                if total > T::zero() {
                    for v in chunk.iter_mut() {
                        *v = *v / total;
                    }
                }
            }
            out
        };
        let s = &self.sizes;
        FactoredDistribution {
            sizes: *s,
            factor_q: sharpen(&self.factor_q, s.q),
            factor_1: sharpen(&self.factor_1, s.w1 * s.u1 * s.x1),
            factor_2: sharpen(&self.factor_2, s.w2 * s.v2 * s.x2),
            factor_b: sharpen(&self.factor_b, s.wb * s.ub * s.vb),
            factor_xb: sharpen(&self.factor_xb, s.xb),
        }
    }

    pub fn sizes(&self) -> AuxSizes {
        self.sizes
    }

    pub fn factor_q(&self) -> &Tensor<T> {
        &self.factor_q
    }
    pub fn factor_1(&self) -> &Tensor<T> {
        &self.factor_1
    }
    pub fn factor_2(&self) -> &Tensor<T> {
        &self.factor_2
    }
    pub fn factor_b(&self) -> &Tensor<T> {
        &self.factor_b
    }
    pub fn factor_xb(&self) -> &Tensor<T> {
        &self.factor_xb
    }

    /// Joint over the eleven input-side variables in canonical order
    /// (Q, W1, U1, X1, W2, V2, X2, WB, UB, VB, XB).
    pub fn input_joint(&self) -> Result<JointTensor<T>> {
        let vars = VariableId::INPUT_SIDE.to_vec();
        let shape = self.sizes.shape(&vars);
        let cells: usize = shape.iter().product();
        if cells > JOINT_CELL_CAP {
            return Err(Error::SizeCap {
                got: cells,
                cap: JOINT_CELL_CAP,
            });
        }
        let mut t = Tensor::zeros(&shape);
        // Index positions in canonical order:
        // 0:Q 1:W1 2:U1 3:X1 4:W2 5:V2 6:X2 7:WB 8:UB 9:VB 10:XB
        for_each_index(&shape, |i| {
            let p = self.factor_q.get(&[i[0]])
                * self.factor_1.get(&[i[0], i[1], i[2], i[3]])
                * self.factor_2.get(&[i[0], i[4], i[5], i[6]])
                * self
                    .factor_b
                    .get(&[i[0], i[1], i[2], i[4], i[5], i[7], i[8], i[9]])
                * self.factor_xb.get(i);
            t.set(i, p);
        });
        Ok(JointTensor::new_unchecked(vars, t))
    }

    /// Degenerates the listed auxiliary variables to singleton alphabets.
    ///
    /// The remaining factors are re-extracted as conditionals of the
    /// marginalized input joint, keeping each factor's original conditioning
    /// signature; removed conditioning variables are averaged out under
    /// their distribution given the kept conditioners.
    pub fn degenerate(&self, vars: &[VariableId]) -> Result<Self> {
        for &v in vars {
            if !v.is_auxiliary() {
                return Err(Error::NotAuxiliary(v.name().to_string()));
            }
        }
        let removed = |v: VariableId| vars.contains(&v);
        let mut sizes = self.sizes;
        for &v in vars {
            sizes.set_size(v, 1);
        }
        let joint = self.input_joint()?;

        let extract = |cond: &[VariableId], targets: &[VariableId]| -> Result<Tensor<T>> {
            let kept_cond: Vec<VariableId> =
                cond.iter().copied().filter(|&v| !removed(v)).collect();
            let kept_targets: Vec<VariableId> =
                targets.iter().copied().filter(|&v| !removed(v)).collect();
            let data = if kept_targets.is_empty() {
                // All targets removed: every row is the trivial point mass.
                let rows: usize = sizes.shape(&kept_cond).iter().product();
                Tensor::from_vec(&[rows], vec![T::one(); rows])?
            } else {
                joint.conditional(&kept_targets, &kept_cond)?
            };
            // Reshape to the full factor signature; removed axes have size 1,
            // so the row-major layout is unchanged.
            let mut shape = sizes.shape(cond);
            shape.extend(sizes.shape(targets));
            Tensor::from_vec(&shape, data.data().to_vec())
        };

        let factor_q = if removed(Q) {
            Tensor::from_vec(&[1], vec![T::one()])?
        } else {
            self.factor_q.clone()
        };
        FactoredDistribution::new(
            sizes,
            factor_q,
            extract(&FACTOR_1_COND, &FACTOR_1_TARGETS)?,
            extract(&FACTOR_2_COND, &FACTOR_2_TARGETS)?,
            extract(&FACTOR_B_COND, &FACTOR_B_TARGETS)?,
            extract(&FACTOR_XB_COND, &FACTOR_XB_TARGETS)?,
        )
    }

    /// Full 13-variable joint: input joint times the channel kernel.
    pub fn build_joint(&self, chan: &ChannelSpec<T>) -> Result<JointTensor<T>> {
        let s = &self.sizes;
        if s.x1 != chan.alph_x1().size()
            || s.x2 != chan.alph_x2().size()
            || s.xb != chan.alph_xb().size()
        {
            return Err(Error::AlphabetMismatch(format!(
                "distribution inputs (x1={}, xB={}, x2={}) vs channel ({}, {}, {})",
                s.x1,
                s.xb,
                s.x2,
                chan.alph_x1().size(),
                chan.alph_xb().size(),
                chan.alph_x2().size()
            )));
        }
        let vars = VariableId::ALL.to_vec();
        let mut shape = s.shape(&VariableId::INPUT_SIDE);
        shape.push(chan.alph_y1().size());
        shape.push(chan.alph_y2().size());
        let cells: usize = shape.iter().product();
        if cells > JOINT_CELL_CAP {
            return Err(Error::SizeCap {
                got: cells,
                cap: JOINT_CELL_CAP,
            });
        }
        let input = self.input_joint()?;
        let mut t = Tensor::zeros(&shape);
        for_each_index(&shape, |i| {
            // i[..11] indexes the input joint; x1=i[3], x2=i[6], xb=i[10].
            let p = input.tensor().get(&i[..11])
                * chan.kernel().get(&[i[3], i[10], i[6], i[11], i[12]]);
            t.set(i, p);
        });
        Ok(JointTensor::new_unchecked(vars, t))
    }
}

#[inline]
fn bool_mass<T: Real>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

/// One violated property of the factored structure.
#[derive(Debug, Clone)]
pub struct FactorizationViolation {
    pub description: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default)]
pub struct FactorizationReport {
    pub violations: Vec<FactorizationViolation>,
}

impl FactorizationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that a joint over the input-side variables is consistent with the
/// factorization: the branch independence I((W1,U1,X1);(W2,V2,X2)|Q) must
/// vanish and the joint must be reproducible from its own conditionals in
/// the factor signature (total variation).
pub fn validate_factorization<T: Real>(joint: &JointTensor<T>) -> Result<FactorizationReport> {
    let j = joint.marginal(&VariableId::INPUT_SIDE)?;
    let mut report = FactorizationReport::default();

    let cmi = cond_mutual_info(&j, &[W1, U1, X1], &[W2, V2, X2], &[Q])?;
    let cmi = cmi.to_f64().unwrap_or(f64::NAN);
    if !(cmi <= FACTORIZATION_TOL) {
        report.violations.push(FactorizationViolation {
            description: "I((W1,U1,X1);(W2,V2,X2)|Q) > 0".into(),
            magnitude: cmi,
        });
    }

    // Rebuild the joint from its own conditionals in the factor signature.
    let fq = j.marginal(&[Q])?;
    let f1 = j.conditional(&FACTOR_1_TARGETS, &FACTOR_1_COND)?;
    let f2 = j.conditional(&FACTOR_2_TARGETS, &FACTOR_2_COND)?;
    let fb = j.conditional(&FACTOR_B_TARGETS, &FACTOR_B_COND)?;
    let fxb = j.conditional(&FACTOR_XB_TARGETS, &FACTOR_XB_COND)?;
    let mut tv = T::zero();
    let shape = j.tensor().sizes().to_vec();
    for_each_index(&shape, |i| {
        let p = fq.tensor().get(&[i[0]])
            * f1.get(&[i[0], i[1], i[2], i[3]])
            * f2.get(&[i[0], i[4], i[5], i[6]])
            * fb.get(&[i[0], i[1], i[2], i[4], i[5], i[7], i[8], i[9]])
            * fxb.get(i);
        tv += (p - j.tensor().get(i)).abs();
    });
    let tv = (tv * real(0.5)).to_f64().unwrap_or(f64::NAN);
    if !(tv <= FACTORIZATION_TOL) {
        report.violations.push(FactorizationViolation {
            description: "joint is not reproducible from its chain conditionals".into(),
            magnitude: tv,
        });
    }
    Ok(report)
}

/// Spec-level alias for [`FactoredDistribution::random`].
pub fn random_distribution<T: Real>(sizes: AuxSizes, seed: u64) -> Result<FactoredDistribution<T>> {
    FactoredDistribution::random(sizes, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_sizes() -> AuxSizes {
        AuxSizes {
            q: 2,
            w1: 2,
            u1: 2,
            x1: 2,
            w2: 2,
            v2: 2,
            x2: 2,
            wb: 2,
            ub: 2,
            vb: 2,
            xb: 2,
        }
    }

    #[test]
    fn uniform_inputs_joint_is_uniform_over_the_inputs() {
        let d = FactoredDistribution::<f64>::uniform_inputs(2, 3, 2).unwrap();
        let j = d.input_joint().unwrap();
        let m = j.marginal(&[X1, X2, XB]).unwrap();
        for &p in m.tensor().data() {
            assert_abs_diff_eq!(p, 1.0 / 12.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn random_distribution_is_seed_deterministic() {
        let a = FactoredDistribution::<f64>::random(small_sizes(), 5).unwrap();
        let b = FactoredDistribution::<f64>::random(small_sizes(), 5).unwrap();
        let c = FactoredDistribution::<f64>::random(small_sizes(), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn build_joint_matches_an_elementwise_oracle() {
        let d = FactoredDistribution::<f64>::random(small_sizes(), 11).unwrap();
        let chan = ChannelSpec::from_fn([2, 2, 2, 2, 2], |x1, xb, _, y1, y2| {
            let p = if y1 == x1 { 0.9 } else { 0.1 };
            let q = if y2 == xb { 0.6 } else { 0.4 };
            p * q
        })
        .unwrap();
        let joint = d.build_joint(&chan).unwrap();
        assert_abs_diff_eq!(joint.tensor().sum(), 1.0, epsilon = 1e-10);
        // The input marginal must reproduce the input joint exactly.
        let input = d.input_joint().unwrap();
        let m = joint.marginal(&VariableId::INPUT_SIDE).unwrap();
        for (a, b) in m.tensor().data().iter().zip(input.tensor().data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        // And the conditional of the outputs must reproduce the kernel.
        let cond = joint.conditional(&[Y1, Y2], &[X1, XB, X2]).unwrap();
        for_each_index(&[2, 2, 2, 2, 2], |i| {
            assert_abs_diff_eq!(cond.get(i), chan.kernel().get(i), epsilon = 1e-10);
        });
    }

    #[test]
    fn sharpening_with_power_one_is_identity() {
        let d = FactoredDistribution::<f64>::random(small_sizes(), 3).unwrap();
        let same = d.sharpened(1);
        for (a, b) in same.factor_b().data().iter().zip(d.factor_b().data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        let sharp = d.sharpened(64);
        // Every row of a heavily sharpened factor is near a point mass.
        for chunk in sharp.factor_1().data().chunks(8) {
            assert!(chunk.iter().cloned().fold(0.0, f64::max) > 0.99);
        }
    }

    #[test]
    fn deterministic_xb_range_is_checked() {
        let d = FactoredDistribution::<f64>::uniform_inputs(2, 2, 2).unwrap();
        assert!(d.clone().with_deterministic_xb(|_| 2).is_err());
        let d = d.with_deterministic_xb(|c| c[3]).unwrap();
        let j = d.input_joint().unwrap();
        // XB == X1 with probability one.
        let m = j.marginal(&[X1, XB]).unwrap();
        assert_abs_diff_eq!(m.tensor().get(&[0, 1]), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.tensor().get(&[1, 0]), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn degeneration_rejects_channel_inputs() {
        let d = FactoredDistribution::<f64>::random(small_sizes(), 1).unwrap();
        assert!(matches!(d.degenerate(&[X1]), Err(Error::NotAuxiliary(_))));
        assert!(matches!(d.degenerate(&[Y1]), Err(Error::NotAuxiliary(_))));
    }

    // Degenerating the broadcast-node block is exact: the removed variables
    // condition only their own factor and the XB factor, and both are
    // re-extracted as true conditionals of the marginalized joint.
    #[test]
    fn degenerating_the_broadcast_block_preserves_the_marginal() {
        let d = FactoredDistribution::<f64>::random(small_sizes(), 21).unwrap();
        for removed in [vec![WB], vec![WB, UB, VB]] {
            let dd = d.degenerate(&removed).unwrap();
            for &v in &removed {
                assert_eq!(dd.sizes().size_of(v).unwrap(), 1);
            }
            let keep_axes: Vec<usize> = VariableId::INPUT_SIDE
                .iter()
                .enumerate()
                .filter(|(_, v)| !removed.contains(v))
                .map(|(i, _)| i)
                .collect();
            let want = d.input_joint().unwrap().tensor().marginalize(&keep_axes);
            let got = dd.input_joint().unwrap();
            for (a, b) in got.tensor().data().iter().zip(want.data()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degeneration_is_idempotent_and_composes_on_the_broadcast_block() {
        let d = FactoredDistribution::<f64>::random(small_sizes(), 8).unwrap();
        let once = d.degenerate(&[WB]).unwrap();
        let twice = once.degenerate(&[WB]).unwrap();
        for (a, b) in once
            .input_joint()
            .unwrap()
            .tensor()
            .data()
            .iter()
            .zip(twice.input_joint().unwrap().tensor().data())
        {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let all = d.degenerate(&[WB, UB, VB]).unwrap();
        let seq = d
            .degenerate(&[WB])
            .unwrap()
            .degenerate(&[UB])
            .unwrap()
            .degenerate(&[VB])
            .unwrap();
        for (a, b) in all
            .input_joint()
            .unwrap()
            .tensor()
            .data()
            .iter()
            .zip(seq.input_joint().unwrap().tensor().data())
        {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn factorization_validator_accepts_factored_joints() {
        let d = FactoredDistribution::<f64>::random(small_sizes(), 14).unwrap();
        let report = validate_factorization(&d.input_joint().unwrap()).unwrap();
        assert!(report.ok(), "violations: {:?}", report.violations);
    }

    #[test]
    fn factorization_validator_detects_cross_branch_coupling() {
        // W1 and W2 equal a shared fair coin: the branch independence
        // I((W1,U1,X1);(W2,V2,X2)|Q) = 1 bit.
        let mut sizes = AuxSizes::degenerate(1, 1, 1);
        sizes.w1 = 2;
        sizes.w2 = 2;
        let shape = sizes.shape(&VariableId::INPUT_SIDE);
        let mut t = Tensor::zeros(&shape);
        for w in 0..2 {
            let mut idx = vec![0; 11];
            idx[1] = w; // W1
            idx[4] = w; // W2
            t.set(&idx, 0.5);
        }
        let joint = JointTensor::new(VariableId::INPUT_SIDE.to_vec(), t).unwrap();
        let report = validate_factorization(&joint).unwrap();
        assert!(!report.ok());
        assert!(report.violations[0].magnitude > 0.9);
    }

    #[test]
    fn factorization_validator_detects_small_perturbations() {
        let d = FactoredDistribution::<f64>::random(small_sizes(), 30).unwrap();
        let joint = d.input_joint().unwrap();
        let mut t = joint.tensor().clone();
        // Move 1e-3 of mass from the heaviest cell to the first one.
        let argmax = (0..t.data().len())
            .max_by(|&a, &b| t.data()[a].total_cmp(&t.data()[b]))
            .unwrap();
        t.data_mut()[argmax] -= 1e-3;
        t.data_mut()[0] += 1e-3;
        let perturbed = JointTensor::new(VariableId::INPUT_SIDE.to_vec(), t).unwrap();
        let report = validate_factorization(&perturbed).unwrap();
        assert!(!report.ok());
    }
}
