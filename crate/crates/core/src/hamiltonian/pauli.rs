use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{invalid, QklsError, Result};
use crate::scalar::{Cx, Real};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// 2x2 matrix in the computational basis, row-major.
    pub fn matrix<T: Real>(self) -> [[Cx<T>; 2]; 2] {
        let o = Complex::new(T::zero(), T::zero());
        let l = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = QklsError;

    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(QklsError::Parse(format!("unknown Pauli symbol '{other}'"))),
        }
    }
}

/// Tensor product of single-qubit Paulis, one symbol per qubit.
///
/// Symbol `j` (left to right) acts on qubit `j`; qubit 0 is the most
/// significant bit of a basis-state index, so the string `"XI"` is `X ⊗ I`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    axes: Vec<Pauli>,
}

impl PauliString {
    pub fn new(axes: Vec<Pauli>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("a Pauli string needs at least one qubit"));
        }
        Ok(Self { axes })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; n])
    }

    /// String with `ops` placed on the given qubits and identity elsewhere.
    pub fn with_ops(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut axes = vec![Pauli::I; n];
        for &(q, p) in ops {
            if q >= n {
                return Err(invalid(format!("qubit {q} out of range for {n} qubits")));
            }
            axes[q] = p;
        }
        Self::new(axes)
    }

    pub fn num_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.axes
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&p| p == Pauli::I)
    }

    /// Bit-level form used for fast application to state vectors.
    pub fn masks(&self) -> PauliMasks {
        let n = self.axes.len();
        let mut m = PauliMasks::default();
        for (q, &p) in self.axes.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => m.flip |= bit,
                Pauli::Z => m.phase |= bit,
                Pauli::Y => {
                    m.flip |= bit;
                    m.phase |= bit;
                    m.y_count += 1;
                }
            }
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.axes {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = QklsError;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s.chars().map(Pauli::try_from).collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }
}

/// `P = i^{y_count} X^{flip} Z^{phase}`, so `P|x> = i^{y} (-1)^{|x & phase|} |x ^ flip>`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip: usize,
    pub phase: usize,
    pub y_count: u32,
}

impl PauliMasks {
    /// Image of basis state `x`: returns `(target, amp)` with `P|x> = amp |target>`.
    #[inline]
    pub fn act<T: Real>(&self, x: usize) -> (usize, Cx<T>) {
        let sign_flip = (x & self.phase).count_ones() & 1 == 1;
        let mut amp = match self.y_count % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
        if sign_flip {
            amp = -amp;
        }
        (x ^ self.flip, amp)
    }
}
