//! Entropies and conditional mutual informations over a [`JointTensor`],
//! in bits. Marginalization is explicit summation over the dense joint.

use crate::error::Result;
use crate::joint::JointTensor;
use crate::real::{real, Real};
use crate::variable::{check_disjoint, VariableId};

/// Negative round-off accepted before clamping a CMI to zero.
pub const CMI_CLAMP_TOL: f64 = 1e-12;

/// I(A; B | C) by direct summation: Σ p(abc) log2( p(abc) p(c) / (p(ac) p(bc)) ),
/// with 0·log 0 = 0. Clamped to be nonnegative.
pub fn cond_mutual_info<T: Real>(
    joint: &JointTensor<T>,
    a: &[VariableId],
    b: &[VariableId],
    c: &[VariableId],
) -> Result<T> {
    let raw = cond_mutual_info_unclamped(joint, a, b, c)?;
    debug_assert!(raw >= real(-CMI_CLAMP_TOL), "CMI below round-off: {raw:?}");
    Ok(raw.max(T::zero()))
}

/// As [`cond_mutual_info`] but without the final clamp; used to verify the
/// pre-clamp nonnegativity tolerance.
pub fn cond_mutual_info_unclamped<T: Real>(
    joint: &JointTensor<T>,
    a: &[VariableId],
    b: &[VariableId],
    c: &[VariableId],
) -> Result<T> {
    check_disjoint(&[a, b, c])?;
    let mut order = a.to_vec();
    order.extend_from_slice(b);
    order.extend_from_slice(c);
    let m = joint.marginal(&order)?;

    let na = a.len();
    let nb = b.len();
    let axes_ac: Vec<usize> = (0..na).chain(na + nb..order.len()).collect();
    let axes_bc: Vec<usize> = (na..order.len()).collect();
    let axes_c: Vec<usize> = (na + nb..order.len()).collect();
    let p_ac = m.tensor().marginalize(&axes_ac);
    let p_bc = m.tensor().marginalize(&axes_bc);
    let p_c = m.tensor().marginalize(&axes_c);

    let sizes = m.tensor().sizes();
    let b_cells: usize = sizes[na..na + nb].iter().product();
    let c_cells: usize = sizes[na + nb..].iter().product();

    let mut total = T::zero();
    for (flat, &p) in m.tensor().data().iter().enumerate() {
        if p <= T::zero() {
            continue;
        }
        // Row-major layout: flat = (ia * b_cells + ib) * c_cells + ic.
        let ic = flat % c_cells;
        let rest = flat / c_cells;
        let ib = rest % b_cells;
        let ia = rest / b_cells;
        let pac = p_ac.data()[ia * c_cells + ic];
        let pbc = p_bc.data()[ib * c_cells + ic];
        let pc = p_c.data()[ic];
        total += p * (p * pc / (pac * pbc)).log2();
    }
    Ok(total)
}

/// Conditional entropy H(A | C) = H(A, C) − H(C), in bits.
pub fn entropy<T: Real>(
    joint: &JointTensor<T>,
    a: &[VariableId],
    given: &[VariableId],
) -> Result<T> {
    check_disjoint(&[a, given])?;
    let mut order = a.to_vec();
    order.extend_from_slice(given);
    let m = joint.marginal(&order)?;
    let h_ac = neg_sum_p_log_p(m.tensor().data());
    if given.is_empty() {
        return Ok(h_ac);
    }
    let axes_c: Vec<usize> = (a.len()..order.len()).collect();
    let p_c = m.tensor().marginalize(&axes_c);
    Ok((h_ac - neg_sum_p_log_p(p_c.data())).max(T::zero()))
}

fn neg_sum_p_log_p<T: Real>(p: &[T]) -> T {
    let mut h = T::zero();
    for &v in p {
        if v > T::zero() {
            h -= v * v.log2();
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::tensor::{for_each_index, Tensor};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use VariableId::*;

    fn binary_entropy(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    fn random_joint(vars: &[VariableId], sizes: &[usize], seed: u64) -> JointTensor<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut t = Tensor::zeros(sizes);
        let mut total = 0.0;
        for v in t.data_mut() {
            *v = -(1.0 - rng.random::<f64>()).ln();
            total += *v;
        }
        for v in t.data_mut() {
            *v /= total;
        }
        JointTensor::new(vars.to_vec(), t).unwrap()
    }

    #[test]
    fn independent_variables_have_zero_cmi() {
        // Q, W1 independent uniform bits; W2 a fair coin independent of both.
        let mut t = Tensor::zeros(&[2, 2, 2]);
        for v in t.data_mut() {
            *v = 0.125;
        }
        let j = JointTensor::new(vec![Q, W1, W2], t).unwrap();
        let i = cond_mutual_info(&j, &[Q], &[W1], &[W2]).unwrap();
        assert_abs_diff_eq!(i, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bsc_mutual_information_matches_closed_form() {
        let p = 0.11;
        let mut t = Tensor::zeros(&[2, 2]);
        for x in 0..2 {
            for y in 0..2 {
                let flip = if x == y { 1.0 - p } else { p };
                t.set(&[x, y], 0.5 * flip);
            }
        }
        let j = JointTensor::new(vec![X1, Y1], t).unwrap();
        let i = cond_mutual_info(&j, &[X1], &[Y1], &[]).unwrap();
        assert_abs_diff_eq!(i, 1.0 - binary_entropy(p), epsilon = 1e-12);
    }

    #[test]
    fn chain_rule_holds_on_random_joints() {
        for seed in 0..20 {
            let j = random_joint(&[W1, U1, Y1, Q], &[2, 3, 2, 2], seed);
            let lhs = cond_mutual_info(&j, &[W1, U1], &[Y1], &[Q]).unwrap();
            let rhs = cond_mutual_info(&j, &[W1], &[Y1], &[Q]).unwrap()
                + cond_mutual_info(&j, &[U1], &[Y1], &[W1, Q]).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn cmi_is_symmetric() {
        let j = random_joint(&[Q, W1, W2], &[3, 2, 4], 5);
        let a = cond_mutual_info(&j, &[Q], &[W1], &[W2]).unwrap();
        let b = cond_mutual_info(&j, &[W1], &[Q], &[W2]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn cmi_invariant_under_symbol_relabeling() {
        let j = random_joint(&[Q, W1, W2], &[3, 2, 2], 9);
        // Swap the symbols of W1.
        let mut t = Tensor::zeros(&[3, 2, 2]);
        for_each_index(&[3, 2, 2], |i| {
            t.set(&[i[0], 1 - i[1], i[2]], j.tensor().get(i));
        });
        let k = JointTensor::new(vec![Q, W1, W2], t).unwrap();
        let a = cond_mutual_info(&j, &[Q], &[W1], &[W2]).unwrap();
        let b = cond_mutual_info(&k, &[Q], &[W1], &[W2]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn uniform_bit_entropy_is_one() {
        let t = Tensor::from_vec(&[2], vec![0.5, 0.5]).unwrap();
        let j = JointTensor::new(vec![Q], t).unwrap();
        assert_abs_diff_eq!(entropy(&j, &[Q], &[]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn deterministic_variable_has_zero_entropy() {
        let t = Tensor::from_vec(&[3], vec![0.0, 1.0, 0.0]).unwrap();
        let j = JointTensor::new(vec![Q], t).unwrap();
        assert_abs_diff_eq!(entropy(&j, &[Q], &[]).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_matches_direct_summation_and_bound() {
        let j = random_joint(&[Q, W1], &[3, 4], 2);
        let h = entropy(&j, &[Q, W1], &[]).unwrap();
        let mut want = 0.0;
        for &p in j.tensor().data() {
            if p > 0.0 {
                want -= p * p.log2();
            }
        }
        assert_abs_diff_eq!(h, want, epsilon = 1e-12);
        assert!(h <= (12.0f64).log2() + 1e-12);
        let hc = entropy(&j, &[Q], &[W1]).unwrap();
        assert!(hc >= 0.0 && hc <= (3.0f64).log2() + 1e-12);
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let j = random_joint(&[Q, W1], &[2, 2], 3);
        let err = cond_mutual_info(&j, &[Q], &[Q], &[]).unwrap_err();
        assert!(matches!(err, Error::OverlappingVarSets(_)));
        let err = cond_mutual_info(&j, &[Q], &[W2], &[]).unwrap_err();
        assert!(matches!(err, Error::UnknownVariable(_)));
    }
}
