//! Linear inequality systems with exact integer variable coefficients and
//! real constants, projected by Fourier-Motzkin elimination. All relations
//! are `<=`; equalities are encoded as constraint pairs.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::real::{real, Real};

/// Comparison tolerance on constants; constant rows `0 <= c` are accepted
/// when `c >= -FEAS_TOL`.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T> {
    /// Integer coefficients aligned with the system's variable order.
    pub coeffs: Vec<i64>,
    /// Right-hand side: Σ coeffs·x <= constant.
    pub constant: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T = f64> {
    vars: Vec<String>,
    constraints: Vec<LinearConstraint<T>>,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl<T: Real> LinearSystem<T> {
    pub fn new(vars: &[&str]) -> Self {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        for (i, v) in vars.iter().enumerate() {
            assert!(!vars[i + 1..].contains(v), "duplicate variable {v}");
        }
        LinearSystem {
            vars,
            constraints: Vec::new(),
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn constraints(&self) -> &[LinearConstraint<T>] {
        &self.constraints
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Appends a variable with zero coefficient in every existing row.
    pub fn add_variable(&mut self, name: &str) {
        assert!(
            !self.vars.iter().any(|v| v == name),
            "duplicate variable {name}"
        );
        self.vars.push(name.to_string());
        for c in &mut self.constraints {
            c.coeffs.push(0);
        }
    }

    /// Adds Σ terms <= constant.
    pub fn add_le(&mut self, terms: &[(&str, i64)], constant: T) -> Result<()> {
        let mut coeffs = vec![0i64; self.vars.len()];
        for (name, k) in terms {
            coeffs[self.var_index(name)?] += k;
        }
        self.constraints.push(LinearConstraint { coeffs, constant });
        Ok(())
    }

    /// Adds Σ terms >= constant.
    pub fn add_ge(&mut self, terms: &[(&str, i64)], constant: T) -> Result<()> {
        let neg: Vec<(&str, i64)> = terms.iter().map(|&(n, k)| (n, -k)).collect();
        self.add_le(&neg, -constant)
    }

    /// Adds Σ terms = constant as a pair of inequalities.
    pub fn add_eq(&mut self, terms: &[(&str, i64)], constant: T) -> Result<()> {
        self.add_le(terms, constant)?;
        self.add_ge(terms, constant)
    }

    /// Adds x >= 0.
    pub fn add_nonneg(&mut self, name: &str) -> Result<()> {
        self.add_ge(&[(name, 1)], T::zero())
    }

    /// Fourier-Motzkin step: projects the feasible set along one variable.
    pub fn eliminate_variable(&self, name: &str) -> Result<LinearSystem<T>> {
        let j = self.var_index(name)?;
        let mut out_vars = self.vars.clone();
        out_vars.remove(j);
        let drop_col = |c: &LinearConstraint<T>| -> LinearConstraint<T> {
            let mut coeffs = c.coeffs.clone();
            coeffs.remove(j);
            LinearConstraint {
                coeffs,
                constant: c.constant,
            }
        };
        let mut out = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for c in &self.constraints {
            match c.coeffs[j].cmp(&0) {
                std::cmp::Ordering::Equal => out.push(drop_col(c)),
                std::cmp::Ordering::Greater => pos.push(c),
                std::cmp::Ordering::Less => neg.push(c),
            }
        }
        for p in &pos {
            for n in &neg {
                let a = p.coeffs[j]; // > 0
                let b = -n.coeffs[j]; // > 0
                let mut coeffs = Vec::with_capacity(self.vars.len() - 1);
                for (k, (&cp, &cn)) in p.coeffs.iter().zip(&n.coeffs).enumerate() {
                    if k != j {
                        coeffs.push(b * cp + a * cn);
                    }
                }
                let constant = real::<T>(b as f64) * p.constant + real::<T>(a as f64) * n.constant;
                out.push(LinearConstraint { coeffs, constant });
            }
        }
        Ok(LinearSystem {
            vars: out_vars,
            constraints: out,
        })
    }

    /// Removes duplicate rows, scaling duplicates and trivially true
    /// constant rows; the feasible set is unchanged.
    pub fn prune_redundant(&self) -> LinearSystem<T> {
        let mut best: HashMap<Vec<i64>, T> = HashMap::new();
        let mut order: Vec<Vec<i64>> = Vec::new();
        let tol: T = real(FEAS_TOL);
        for c in &self.constraints {
            let g = c.coeffs.iter().fold(0i64, |g, &k| gcd(g, k));
            if g == 0 {
                // Constant row: drop when trivially true, keep otherwise
                // (it certifies infeasibility).
                if c.constant >= -tol {
                    continue;
                }
                let key = c.coeffs.clone();
                match best.get_mut(&key) {
                    Some(v) => {
                        if c.constant < *v {
                            *v = c.constant;
                        }
                    }
                    None => {
                        best.insert(key.clone(), c.constant);
                        order.push(key);
                    }
                }
                continue;
            }
            let coeffs: Vec<i64> = c.coeffs.iter().map(|&k| k / g).collect();
            let constant = c.constant / real::<T>(g as f64);
            match best.get_mut(&coeffs) {
                Some(v) => {
                    if constant < *v {
                        *v = constant;
                    }
                }
                None => {
                    best.insert(coeffs.clone(), constant);
                    order.push(coeffs);
                }
            }
        }
        LinearSystem {
            vars: self.vars.clone(),
            constraints: order
                .into_iter()
                .map(|coeffs| {
                    let constant = best[&coeffs];
                    LinearConstraint { coeffs, constant }
                })
                .collect(),
        }
    }

    /// Eliminates every variable not in `keep`, pruning after each step.
    /// The elimination order greedily minimizes #positive × #negative rows.
    pub fn project(&self, keep: &[&str]) -> Result<LinearSystem<T>> {
        for k in keep {
            self.var_index(k)?;
        }
        let mut sys = self.prune_redundant();
        loop {
            let candidates: Vec<usize> = (0..sys.vars.len())
                .filter(|&j| !keep.contains(&sys.vars[j].as_str()))
                .collect();
            let Some(&j) = candidates.iter().min_by_key(|&&j| {
                let pos = sys
                    .constraints
                    .iter()
                    .filter(|c| c.coeffs[j] > 0)
                    .count();
                let neg = sys
                    .constraints
                    .iter()
                    .filter(|c| c.coeffs[j] < 0)
                    .count();
                pos * neg
            }) else {
                break;
            };
            let name = sys.vars[j].clone();
            sys = sys.eliminate_variable(&name)?.prune_redundant();
        }
        Ok(sys)
    }

    /// True iff the system has a solution, by eliminating every variable and
    /// inspecting the surviving constant rows.
    pub fn is_feasible(&self) -> bool {
        let end = match self.project(&[]) {
            Ok(s) => s,
            Err(_) => return false,
        };
        let tol: T = real(FEAS_TOL);
        end.constraints.iter().all(|c| c.constant >= -tol)
    }

    /// Substitutes fixed values for the named variables.
    pub fn pin(&self, assignments: &[(&str, T)]) -> Result<LinearSystem<T>> {
        let mut cols: Vec<(usize, T)> = Vec::with_capacity(assignments.len());
        for (name, v) in assignments {
            cols.push((self.var_index(name)?, *v));
        }
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|j| !cols.iter().any(|(c, _)| c == j))
            .collect();
        let vars: Vec<String> = keep.iter().map(|&j| self.vars[j].clone()).collect();
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let mut constant = c.constant;
                for &(j, v) in &cols {
                    constant -= real::<T>(c.coeffs[j] as f64) * v;
                }
                LinearConstraint {
                    coeffs: keep.iter().map(|&j| c.coeffs[j]).collect(),
                    constant,
                }
            })
            .collect();
        Ok(LinearSystem { vars, constraints })
    }

    /// Direct evaluation: does `point` (aligned with the variable order)
    /// satisfy every constraint within `FEAS_TOL`?
    pub fn contains(&self, point: &[T]) -> bool {
        assert_eq!(point.len(), self.vars.len());
        let tol: T = real(FEAS_TOL);
        self.constraints.iter().all(|c| {
            let lhs = c
                .coeffs
                .iter()
                .zip(point)
                .fold(T::zero(), |acc, (&k, &x)| acc + real::<T>(k as f64) * x);
            lhs <= c.constant + tol
        })
    }

    /// Signed margin to the nearest constraint boundary: min over rows of
    /// (constant − Σ coeffs·x). Negative means infeasible.
    pub fn margin(&self, point: &[T]) -> T {
        assert_eq!(point.len(), self.vars.len());
        self.constraints
            .iter()
            .map(|c| {
                let lhs = c
                    .coeffs
                    .iter()
                    .zip(point)
                    .fold(T::zero(), |acc, (&k, &x)| acc + real::<T>(k as f64) * x);
                c.constant - lhs
            })
            .fold(T::infinity(), T::min)
    }

    /// Text dump, one constraint per line; round-trips through [`parse`].
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("vars:");
        for v in &self.vars {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
        for c in &self.constraints {
            let mut any = false;
            for (j, &k) in c.coeffs.iter().enumerate() {
                if k != 0 {
                    out.push_str(&format!("{k:+}·{} ", self.vars[j]));
                    any = true;
                }
            }
            if !any {
                out.push_str("0 ");
            }
            out.push_str(&format!("<= {}\n", c.constant));
        }
        out
    }
}

impl LinearSystem<f64> {
    /// Parses the [`dump`](LinearSystem::dump) format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty system dump".into()))?;
        let header = header
            .strip_prefix("vars:")
            .ok_or_else(|| Error::Parse("missing vars header".into()))?;
        let vars: Vec<&str> = header.split_whitespace().collect();
        let mut sys = LinearSystem::new(&vars);
        for line in lines {
            let (lhs, rhs) = line
                .split_once("<=")
                .ok_or_else(|| Error::Parse(format!("missing relation in {line:?}")))?;
            let constant: f64 = rhs
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad constant in {line:?}: {e}")))?;
            let mut terms: Vec<(&str, i64)> = Vec::new();
            for tok in lhs.split_whitespace() {
                if tok == "0" {
                    continue;
                }
                let (k, v) = tok
                    .split_once('·')
                    .ok_or_else(|| Error::Parse(format!("bad term {tok:?}")))?;
                let k: i64 = k
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad coefficient {tok:?}: {e}")))?;
                terms.push((v, k));
            }
            sys.add_le(&terms, constant)?;
        }
        Ok(sys)
    }
}
