use crate::error::{Error, Result};
use crate::real::{real, Real};
use crate::tensor::Tensor;
use crate::variable::VariableId;

/// Normalization slack accepted for a joint distribution.
pub const JOINT_TOL: f64 = 1e-10;

/// A joint probability distribution over a named list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTensor<T = f64> {
    vars: Vec<VariableId>,
    tensor: Tensor<T>,
}

impl<T: Real> JointTensor<T> {
    /// Wraps a tensor as a joint, checking nonnegativity and normalization.
    pub fn new(vars: Vec<VariableId>, tensor: Tensor<T>) -> Result<Self> {
        if vars.len() != tensor.rank() {
            return Err(Error::DimensionMismatch(format!(
                "{} variables vs tensor rank {}",
                vars.len(),
                tensor.rank()
            )));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[i + 1..].contains(v) {
                return Err(Error::InvalidArgument(format!("duplicate variable {v}")));
            }
        }
        if tensor.data().iter().any(|&p| p < T::zero()) {
            return Err(Error::InvalidDistribution(
                "negative probability cell".into(),
            ));
        }
        let total = tensor.sum();
        if (total - T::one()).abs() > real(JOINT_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "joint sums to {total}, expected 1"
            )));
        }
        Ok(JointTensor { vars, tensor })
    }

    /// Internal constructor for tensors known to be valid by construction.
    pub(crate) fn new_unchecked(vars: Vec<VariableId>, tensor: Tensor<T>) -> Self {
        JointTensor { vars, tensor }
    }

    pub fn vars(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn tensor(&self) -> &Tensor<T> {
        &self.tensor
    }

    pub fn size_of(&self, v: VariableId) -> Result<usize> {
        Ok(self.tensor.sizes()[self.axis_of(v)?])
    }

    pub fn axis_of(&self, v: VariableId) -> Result<usize> {
        self.vars
            .iter()
            .position(|&x| x == v)
            .ok_or_else(|| Error::UnknownVariable(v.name().to_string()))
    }

    /// Marginal joint over `keep`, axes ordered as given.
    pub fn marginal(&self, keep: &[VariableId]) -> Result<JointTensor<T>> {
        let axes: Vec<usize> = keep
            .iter()
            .map(|&v| self.axis_of(v))
            .collect::<Result<_>>()?;
        Ok(JointTensor {
            vars: keep.to_vec(),
            tensor: self.tensor.marginalize(&axes),
        })
    }

    /// Conditional kernel P(targets | given) extracted from this joint.
    ///
    /// The returned tensor's axes are `given` followed by `targets`. Rows
    /// whose conditioning event has zero mass are filled uniformly.
    pub fn conditional(&self, targets: &[VariableId], given: &[VariableId]) -> Result<Tensor<T>> {
        let mut order = given.to_vec();
        order.extend_from_slice(targets);
        let m = self.marginal(&order)?;
        let g = self.marginal(given)?;
        let target_cells: usize = targets
            .iter()
            .map(|&v| self.size_of(v))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .product();
        let mut out = m.tensor.clone();
        let uniform = T::one() / T::from_usize(target_cells).unwrap();
        for (row, chunk) in out.data_mut().chunks_mut(target_cells).enumerate() {
            let mass = g.tensor.data()[row];
            if mass > T::zero() {
                for v in chunk.iter_mut() {
                    *v = *v / mass;
                }
            } else {
                for v in chunk.iter_mut() {
                    *v = uniform;
                }
            }
        }
        Ok(out)
    }
}
