//! Two-outcome correlator inequalities and their text file format.
//!
//! ```text
//! # comments and blank lines are ignored anywhere
//! bound 2
//! settings 2 2
//! 1 1
//! 1 -1
//! marginals_A        (optional, followed by one line of mA reals)
//! 0 0
//! marginals_B        (optional, followed by one line of mB reals)
//! 0 0
//! ```
//!
//! The inequality reads `Σ c_xy ⟨A_x B_y⟩ + Σ a_x ⟨A_x⟩ + Σ b_y ⟨B_y⟩ ≤ bound`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    /// `c_xy`, Alice's setting indexes rows.
    pub coefficients: Vec<Vec<f64>>,
    pub marginals_a: Vec<f64>,
    pub marginals_b: Vec<f64>,
    pub local_bound: f64,
}

impl Inequality {
    pub fn new(coefficients: Vec<Vec<f64>>, local_bound: f64) -> Result<Self> {
        let m_a = coefficients.len();
        let m_b = coefficients.first().map_or(0, Vec::len);
        let ineq = Self {
            coefficients,
            marginals_a: vec![0.0; m_a],
            marginals_b: vec![0.0; m_b],
            local_bound,
        };
        ineq.validate()?;
        Ok(ineq)
    }

    /// `⟨A0B0⟩ + ⟨A0B1⟩ + ⟨A1B0⟩ − ⟨A1B1⟩ ≤ 2`.
    pub fn chsh() -> Self {
        Self::new(vec![vec![1.0, 1.0], vec![1.0, -1.0]], 2.0).expect("valid preset")
    }

    pub fn settings_a(&self) -> usize {
        self.coefficients.len()
    }

    pub fn settings_b(&self) -> usize {
        self.coefficients.first().map_or(0, Vec::len)
    }

    pub fn has_marginals(&self) -> bool {
        self.marginals_a.iter().chain(&self.marginals_b).any(|v| *v != 0.0)
    }

    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.settings_a(), self.settings_b(), |x, y| self.coefficients[x][y])
    }

    /// Alice and Bob exchanged: transposed coefficients, swapped marginals.
    pub fn swapped(&self) -> Self {
        let (ma, mb) = (self.settings_a(), self.settings_b());
        Self {
            coefficients: (0..mb)
                .map(|y| (0..ma).map(|x| self.coefficients[x][y]).collect())
                .collect(),
            marginals_a: self.marginals_b.clone(),
            marginals_b: self.marginals_a.clone(),
            local_bound: self.local_bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.settings_a() == 0 || self.settings_b() == 0 {
            return invalid("inequality needs at least one setting per party");
        }
        if self.coefficients.iter().any(|row| row.len() != self.settings_b()) {
            return invalid("coefficient matrix is not rectangular");
        }
        if self.marginals_a.len() != self.settings_a() || self.marginals_b.len() != self.settings_b() {
            return invalid("marginal vector length does not match settings");
        }
        let all = self
            .coefficients
            .iter()
            .flatten()
            .chain(&self.marginals_a)
            .chain(&self.marginals_b);
        if all.clone().any(|v| !v.is_finite()) || !self.local_bound.is_finite() {
            return invalid("non-finite coefficient or bound");
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, message: String| Error::Parse { line, message };
        let reals = |line: usize, fields: &[&str]| -> Result<Vec<f64>> {
            fields
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| err(line, format!("not a real number: {f:?}")))
                })
                .collect()
        };

        let (line, first) = lines.next().ok_or_else(|| err(1, "empty file: bound missing".into()))?;
        let fields: Vec<&str> = first.split_whitespace().collect();
        if fields.first() != Some(&"bound") {
            return Err(err(line, "bound missing: first entry must be `bound <real>`".into()));
        }
        if fields.len() != 2 {
            return Err(err(line, "expected `bound <real>`".into()));
        }
        let local_bound = reals(line, &fields[1..])?[0];

        let (line, second) = lines
            .next()
            .ok_or_else(|| err(line + 1, "missing `settings <mA> <mB>`".into()))?;
        let fields: Vec<&str> = second.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "settings" {
            return Err(err(line, "expected `settings <mA> <mB>`".into()));
        }
        let dims: Vec<usize> = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| err(line, format!("not a setting count: {f:?}")))
            })
            .collect::<Result<_>>()?;
        let (m_a, m_b) = (dims[0], dims[1]);
        if m_a == 0 || m_b == 0 {
            return Err(err(line, "setting counts must be positive".into()));
        }

        let mut coefficients = Vec::with_capacity(m_a);
        let mut last_line = line;
        for _ in 0..m_a {
            let (line, row) = lines
                .next()
                .ok_or_else(|| err(last_line + 1, format!("expected {m_a} coefficient rows")))?;
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() != m_b {
                return Err(err(
                    line,
                    format!("coefficient row has {} entries, expected {m_b}", fields.len()),
                ));
            }
            coefficients.push(reals(line, &fields)?);
            last_line = line;
        }

        let mut marginals_a = vec![0.0; m_a];
        let mut marginals_b = vec![0.0; m_b];
        let mut seen = (false, false);
        while let Some((line, keyword)) = lines.next() {
            let (target, expected, flag) = match keyword {
                "marginals_A" => (&mut marginals_a, m_a, &mut seen.0),
                "marginals_B" => (&mut marginals_b, m_b, &mut seen.1),
                other => return Err(err(line, format!("unexpected entry {other:?}"))),
            };
            if *flag {
                return Err(err(line, format!("duplicate {keyword} block")));
            }
            *flag = true;
            let (vline, values) = lines
                .next()
                .ok_or_else(|| err(line + 1, format!("{keyword} needs a line of {expected} reals")))?;
            let fields: Vec<&str> = values.split_whitespace().collect();
            if fields.len() != expected {
                return Err(err(
                    vline,
                    format!("{keyword} has {} entries, expected {expected}", fields.len()),
                ));
            }
            *target = reals(vline, &fields)?;
        }

        let ineq = Self {
            coefficients,
            marginals_a,
            marginals_b,
            local_bound,
        };
        ineq.validate().map_err(|e| err(0, e.to_string()))?;
        Ok(ineq)
    }

    /// Shortest round-trip formatting, so `parse(to_text(x)) == x` exactly.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "bound {:?}", self.local_bound);
        let _ = writeln!(s, "settings {} {}", self.settings_a(), self.settings_b());
        for row in &self.coefficients {
            let _ = writeln!(s, "{}", join(row));
        }
        if self.marginals_a.iter().any(|v| *v != 0.0) {
            let _ = writeln!(s, "marginals_A\n{}", join(&self.marginals_a));
        }
        if self.marginals_b.iter().any(|v| *v != 0.0) {
            let _ = writeln!(s, "marginals_B\n{}", join(&self.marginals_b));
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
