//! One- and two-qubit gates.
//!
//! Matrices are row-major. For a two-qubit gate placed on targets `[a, b]`
//! the local basis is ordered `|ab>` with `a` as the more significant bit, so
//! the textbook CNOT matrix on targets `[control, target]` is the CNOT with
//! that control and target.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);
const H: C64 = C64::new(FRAC_1_SQRT_2, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    arity: usize,
    matrix: Vec<C64>,
    label: Option<String>,
}

impl Gate {
    /// Builds a gate from a row-major matrix, rejecting anything that is not
    /// unitary to within [`tolerances::UNITARY`]. Global phase is allowed.
    pub fn new(matrix: Vec<C64>, label: Option<String>) -> Result<Self> {
        let arity = match matrix.len() {
            4 => 1,
            16 => 2,
            len => return Err(Error::MatrixShape { len }),
        };
        let gate = Self {
            arity,
            matrix,
            label,
        };
        let deviation = gate.unitarity_deviation();
        if deviation.is_nan() || deviation > tolerances::UNITARY {
            return Err(Error::NotUnitary {
                label: gate.name().to_string(),
                deviation,
            });
        }
        Ok(gate)
    }

    fn known(matrix: Vec<C64>, label: &str) -> Self {
        Self::new(matrix, Some(label.to_string())).expect("built-in gate is unitary")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or("matrix")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.dim() + col]
    }

    /// Largest entry of `|U^dag U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.at(k, i).conj() * self.at(k, j);
                }
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn identity() -> Self {
        Self::known(vec![ONE, ZERO, ZERO, ONE], "I")
    }

    pub fn h() -> Self {
        Self::known(vec![H, H, H, -H], "H")
    }

    pub fn x() -> Self {
        Self::known(vec![ZERO, ONE, ONE, ZERO], "X")
    }

    pub fn y() -> Self {
        Self::known(vec![ZERO, -I, I, ZERO], "Y")
    }

    pub fn z() -> Self {
        Self::known(vec![ONE, ZERO, ZERO, -ONE], "Z")
    }

    pub fn s() -> Self {
        Self::known(vec![ONE, ZERO, ZERO, I], "S")
    }

    pub fn t() -> Self {
        Self::known(
            vec![ONE, ZERO, ZERO, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            "T",
        )
    }

    /// `Rz(phi) Ry(theta) Rz(lambda)` up to global phase; covers every
    /// one-qubit unitary.
    pub fn u3(theta: f64, phi: f64, lambda: f64) -> Self {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let m = vec![
            C64::new(c, 0.0),
            -C64::from_polar(s, lambda),
            C64::from_polar(s, phi),
            C64::from_polar(c, phi + lambda),
        ];
        Self::new(m, Some("U3".into())).expect("u3 is unitary")
    }

    pub fn cnot() -> Self {
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[5] = ONE;
        m[11] = ONE;
        m[14] = ONE;
        Self::known(m, "CNOT")
    }

    pub fn cz() -> Self {
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[5] = ONE;
        m[10] = ONE;
        m[15] = -ONE;
        Self::known(m, "CZ")
    }

    pub fn swap() -> Self {
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[6] = ONE;
        m[9] = ONE;
        m[15] = ONE;
        Self::known(m, "SWAP")
    }

    /// The Bell-basis rotation `|00><Psi+| + |01><Psi-| + |10><Phi+| + |11><Phi-|`.
    ///
    /// Rows are the standard-basis outcomes, columns the standard basis of
    /// the measured pair; row `k` holds `<bell_k|` for the Bell state that
    /// reports outcome `k`.
    pub fn bell_rotation() -> Self {
        let m = vec![
            // <Psi+| = (<01| + <10|)/sqrt2
            ZERO, H, H, ZERO, //
            // <Psi-| = (<01| - <10|)/sqrt2
            ZERO, H, -H, ZERO, //
            // <Phi+| = (<00| + <11|)/sqrt2
            H, ZERO, ZERO, H, //
            // <Phi-| = (<00| - <11|)/sqrt2
            H, ZERO, ZERO, -H,
        ];
        Self::known(m, "BellRot")
    }

    /// `CNOT (H x I)`: maps `|00>` to Phi+ in one time step.
    pub fn phi_plus_prep() -> Self {
        Gate::cnot()
            .compose(&Gate::h().tensor(&Gate::identity()))
            .with_label("PhiPlusPrep")
    }

    /// Looks up a gate by its JSON name.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "I" => Self::identity(),
            "H" => Self::h(),
            "X" => Self::x(),
            "Y" => Self::y(),
            "Z" => Self::z(),
            "S" => Self::s(),
            "T" => Self::t(),
            "XZ" => Self::x().compose(&Self::z()).with_label("XZ"),
            "CNOT" => Self::cnot(),
            "CZ" => Self::cz(),
            "SWAP" => Self::swap(),
            "BellRot" => Self::bell_rotation(),
            "PhiPlusPrep" => Self::phi_plus_prep(),
            _ => return None,
        })
    }

    /// Matrix product `self * other`: `other` acts first.
    pub fn compose(&self, other: &Gate) -> Gate {
        assert_eq!(self.arity, other.arity, "compose needs equal arity");
        let n = self.dim();
        let mut m = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.at(i, k) * other.at(k, j);
                }
                m[i * n + j] = acc;
            }
        }
        Gate {
            arity: self.arity,
            matrix: m,
            label: None,
        }
    }

    /// Two-qubit gate `self (x) other`, with `self` on the first target.
    pub fn tensor(&self, other: &Gate) -> Gate {
        assert!(self.arity == 1 && other.arity == 1, "tensor of one-qubit gates only");
        let mut m = vec![ZERO; 16];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        m[(2 * a + b) * 4 + (2 * c + d)] = self.at(a, c) * other.at(b, d);
                    }
                }
            }
        }
        Gate {
            arity: 2,
            matrix: m,
            label: None,
        }
    }

    pub fn dagger(&self) -> Gate {
        let n = self.dim();
        let mut m = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.at(j, i).conj();
            }
        }
        Gate {
            arity: self.arity,
            matrix: m,
            label: self.label.as_ref().map(|l| format!("{l}^dag")),
        }
    }

    /// If `self = c * other` for a unit-modulus `c`, returns `c`.
    pub fn phase_relative_to(&self, other: &Gate, tol: f64) -> Option<C64> {
        if self.arity != other.arity {
            return None;
        }
        let (idx, _) = other
            .matrix
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
        let c = self.matrix[idx] / other.matrix[idx];
        let fits = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .all(|(a, b)| (a - c * b).norm() <= tol);
        (fits && (c.norm() - 1.0).abs() <= tol).then_some(c)
    }

    pub fn equals_up_to_phase(&self, other: &Gate, tol: f64) -> bool {
        self.phase_relative_to(other, tol).is_some()
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_unitary() {
        for name in [
            "I", "H", "X", "Y", "Z", "S", "T", "XZ", "CNOT", "CZ", "SWAP", "BellRot", "PhiPlusPrep",
        ] {
            let g = Gate::by_name(name).unwrap();
            assert!(g.unitarity_deviation() < 1e-14, "{name}");
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let m = vec![ONE, ONE, ZERO, ONE];
        assert!(matches!(Gate::new(m, None), Err(Error::NotUnitary { .. })));
        assert!(matches!(
            Gate::new(vec![ONE; 3], None),
            Err(Error::MatrixShape { len: 3 })
        ));
        // slightly off: 1 + 1e-9 on the diagonal
        let m = vec![C64::new(1.0 + 1e-9, 0.0), ZERO, ZERO, ONE];
        assert!(Gate::new(m, None).is_err());
    }

    #[test]
    fn global_phase_is_accepted() {
        let m = vec![I, ZERO, ZERO, I];
        let g = Gate::new(m, None).unwrap();
        assert!(g.equals_up_to_phase(&Gate::identity(), 1e-12));
        assert!(!g.equals_up_to_phase(&Gate::z(), 1e-12));
    }

    #[test]
    fn xz_is_minus_i_y() {
        let xz = Gate::by_name("XZ").unwrap();
        let c = xz.phase_relative_to(&Gate::y(), 1e-12).unwrap();
        assert!((c - (-I)).norm() < 1e-12);
    }

    #[test]
    fn compose_and_dagger() {
        let h = Gate::h();
        assert!(h.compose(&h).equals_up_to_phase(&Gate::identity(), 1e-12));
        let t = Gate::t();
        assert!(t.compose(&t.dagger()).equals_up_to_phase(&Gate::identity(), 1e-12));
        let u = Gate::u3(0.3, 1.1, -0.4);
        assert!(u.unitarity_deviation() < 1e-14);
    }
}
