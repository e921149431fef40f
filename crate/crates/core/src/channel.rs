use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{real, Real};
use crate::tensor::{for_each_index, Tensor};

/// Largest kernel (product of the five alphabet sizes) the engine accepts.
pub const KERNEL_CELL_CAP: usize = 1 << 24;

/// Row-normalization slack for channel kernels.
pub const CHANNEL_TOL: f64 = 1e-12;

/// A finite symbol alphabet; symbols are the indices `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("alphabet size must be >= 1".into()));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Y1,
    Y2,
}

/// The discrete memoryless BCCR channel P(y1, y2 | x1, xB, x2).
///
/// Kernel axes are ordered (x1, xB, x2, y1, y2). The constructor checks
/// structure (dimensions, size cap) only; probability-level problems are
/// reported by [`ChannelSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec<T = f64> {
    alph_x1: Alphabet,
    alph_xb: Alphabet,
    alph_x2: Alphabet,
    alph_y1: Alphabet,
    alph_y2: Alphabet,
    kernel: Tensor<T>,
}

/// One probability-level violation found by validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelViolation {
    /// Row (x1, xB, x2) does not sum to 1.
    RowSum { x1: usize, xb: usize, x2: usize, sum: f64 },
    /// A kernel cell lies outside [0, 1].
    OutOfRange { x1: usize, xb: usize, x2: usize, y1: usize, y2: usize, value: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct ChannelReport {
    pub violations: Vec<ChannelViolation>,
}

impl ChannelReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Real> ChannelSpec<T> {
    pub fn new(
        alph_x1: Alphabet,
        alph_xb: Alphabet,
        alph_x2: Alphabet,
        alph_y1: Alphabet,
        alph_y2: Alphabet,
        kernel: Tensor<T>,
    ) -> Result<Self> {
        let want = [
            alph_x1.size(),
            alph_xb.size(),
            alph_x2.size(),
            alph_y1.size(),
            alph_y2.size(),
        ];
        if kernel.sizes() != want {
            return Err(Error::DimensionMismatch(format!(
                "kernel shape {:?} does not match alphabets {:?}",
                kernel.sizes(),
                want
            )));
        }
        let cells: usize = want.iter().product();
        if cells > KERNEL_CELL_CAP {
            return Err(Error::SizeCap {
                got: cells,
                cap: KERNEL_CELL_CAP,
            });
        }
        Ok(ChannelSpec {
            alph_x1,
            alph_xb,
            alph_x2,
            alph_y1,
            alph_y2,
            kernel,
        })
    }

    /// Builds a channel from a closure giving P(y1, y2 | x1, xB, x2).
    pub fn from_fn(
        sizes: [usize; 5],
        f: impl Fn(usize, usize, usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut kernel = Tensor::zeros(&sizes);
        for_each_index(&sizes, |i| {
            let v = f(i[0], i[1], i[2], i[3], i[4]);
            kernel.set(i, v);
        });
        ChannelSpec::new(
            Alphabet::new(sizes[0])?,
            Alphabet::new(sizes[1])?,
            Alphabet::new(sizes[2])?,
            Alphabet::new(sizes[3])?,
            Alphabet::new(sizes[4])?,
            kernel,
        )
    }

    /// Deterministic channel y1 = y2 = xB, all alphabets binary.
    pub fn noiseless_broadcast_binary() -> Self {
        ChannelSpec::from_fn([2, 2, 2, 2, 2], |_, xb, _, y1, y2| {
            if y1 == xb && y2 == xb {
                T::one()
            } else {
                T::zero()
            }
        })
        .expect("fixed-size construction")
    }

    /// Orthogonal noiseless links y1 = x1, y2 = x2 with binary alphabets.
    pub fn orthogonal_links_binary() -> Self {
        ChannelSpec::from_fn([2, 2, 2, 2, 2], |x1, _, x2, y1, y2| {
            if y1 == x1 && y2 == x2 {
                T::one()
            } else {
                T::zero()
            }
        })
        .expect("fixed-size construction")
    }

    pub fn alph_x1(&self) -> Alphabet {
        self.alph_x1
    }
    pub fn alph_xb(&self) -> Alphabet {
        self.alph_xb
    }
    pub fn alph_x2(&self) -> Alphabet {
        self.alph_x2
    }
    pub fn alph_y1(&self) -> Alphabet {
        self.alph_y1
    }
    pub fn alph_y2(&self) -> Alphabet {
        self.alph_y2
    }

    pub fn kernel(&self) -> &Tensor<T> {
        &self.kernel
    }

    /// Checks every entry lies in [0, 1] and every input triple's row sums
    /// to 1 within `CHANNEL_TOL`.
    pub fn validate(&self) -> ChannelReport {
        let mut report = ChannelReport::default();
        let tol: T = real(CHANNEL_TOL);
        let ny1 = self.alph_y1.size();
        let ny2 = self.alph_y2.size();
        for_each_index(
            &[self.alph_x1.size(), self.alph_xb.size(), self.alph_x2.size()],
            |i| {
                let mut sum = T::zero();
                for y1 in 0..ny1 {
                    for y2 in 0..ny2 {
                        let v = self.kernel.get(&[i[0], i[1], i[2], y1, y2]);
                        if v < T::zero() || v > T::one() {
                            report.violations.push(ChannelViolation::OutOfRange {
                                x1: i[0],
                                xb: i[1],
                                x2: i[2],
                                y1,
                                y2,
                                value: v.to_f64().unwrap_or(f64::NAN),
                            });
                        }
                        sum += v;
                    }
                }
                if (sum - T::one()).abs() > tol {
                    report.violations.push(ChannelViolation::RowSum {
                        x1: i[0],
                        xb: i[1],
                        x2: i[2],
                        sum: sum.to_f64().unwrap_or(f64::NAN),
                    });
                }
            },
        );
        report
    }

    /// Marginal kernel P(y | x1, xB, x2) for one receiver, axes
    /// (x1, xB, x2, y).
    pub fn output_marginal(&self, receiver: Receiver) -> Tensor<T> {
        match receiver {
            Receiver::Y1 => self.kernel.marginalize(&[0, 1, 2, 3]),
            Receiver::Y2 => self.kernel.marginalize(&[0, 1, 2, 4]),
        }
    }
}

/// Spec-level entry point; see [`ChannelSpec::validate`].
pub fn validate_channel<T: Real>(spec: &ChannelSpec<T>) -> ChannelReport {
    spec.validate()
}
