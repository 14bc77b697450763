//! Composite Hilbert space of two two-level ions and two motional modes.
//!
//! The factors are ordered `(ion1, ion2, mode_c, mode_r)` and basis indices are
//! row-major in that order, so the last factor (breathing mode) varies fastest.
//! Internal levels are encoded as `|e> -> 0`, `|g> -> 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tensor factor of the composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    Ion1,
    Ion2,
    /// Center-of-mass mode, operators `a`, `a^dag`.
    ModeC,
    /// Breathing mode, operators `b`, `b^dag`.
    ModeR,
}

impl Subsystem {
    pub const ALL: [Subsystem; 4] = [Self::Ion1, Self::Ion2, Self::ModeC, Self::ModeR];

    pub fn position(self) -> usize {
        self as usize
    }

    pub fn is_mode(self) -> bool {
        matches!(self, Self::ModeC | Self::ModeR)
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ion1 => "ion1",
            Self::Ion2 => "ion2",
            Self::ModeC => "mode_c",
            Self::ModeR => "mode_r",
        })
    }
}

/// Internal level of a single ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    /// Long-lived excited state, the upper level (`sigma_z = +1`).
    E,
    /// Ground state (`sigma_z = -1`).
    G,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::E => 0,
            Level::G => 1,
        }
    }

    pub fn from_index(i: usize) -> Level {
        if i == 0 {
            Level::E
        } else {
            Level::G
        }
    }
}

/// Labels of one basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub s1: Level,
    pub s2: Level,
    pub n_c: usize,
    pub n_r: usize,
}

/// Dimensions and index maps of the composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    n_c_cut: usize,
    n_r_cut: usize,
}

/// Number of internal basis states of the two ions.
pub const INTERNAL_DIM: usize = 4;

impl SpaceDescriptor {
    /// Both cutoffs must be at least 1; squeezing needs two Fock levels per mode.
    pub fn new(n_c_cut: i64, n_r_cut: i64) -> Result<Self> {
        for (field, value) in [("n_c_cut", n_c_cut), ("n_r_cut", n_r_cut)] {
            if value < 1 {
                return Err(Error::InvalidCutoff { field, value });
            }
        }
        Ok(Self {
            n_c_cut: n_c_cut as usize,
            n_r_cut: n_r_cut as usize,
        })
    }

    pub fn n_c_cut(&self) -> usize {
        self.n_c_cut
    }

    pub fn n_r_cut(&self) -> usize {
        self.n_r_cut
    }

    pub fn dim_c(&self) -> usize {
        self.n_c_cut + 1
    }

    pub fn dim_r(&self) -> usize {
        self.n_r_cut + 1
    }

    /// Dimension of the motional factor `mode_c (x) mode_r`.
    pub fn motional_dim(&self) -> usize {
        self.dim_c() * self.dim_r()
    }

    pub fn dim(&self) -> usize {
        INTERNAL_DIM * self.motional_dim()
    }

    pub fn subsystem_dim(&self, s: Subsystem) -> usize {
        match s {
            Subsystem::Ion1 | Subsystem::Ion2 => 2,
            Subsystem::ModeC => self.dim_c(),
            Subsystem::ModeR => self.dim_r(),
        }
    }

    pub fn dims(&self) -> [usize; 4] {
        [2, 2, self.dim_c(), self.dim_r()]
    }

    /// Row-major stride of a factor.
    pub fn stride(&self, s: Subsystem) -> usize {
        let dims = self.dims();
        dims[s.position() + 1..].iter().product()
    }

    pub fn cutoff(&self, mode: Subsystem) -> Option<usize> {
        match mode {
            Subsystem::ModeC => Some(self.n_c_cut),
            Subsystem::ModeR => Some(self.n_r_cut),
            _ => None,
        }
    }

    /// Index of the two-ion internal configuration, `2 s1 + s2`.
    pub fn internal_index(s1: Level, s2: Level) -> usize {
        2 * s1.index() + s2.index()
    }

    pub fn motional_index(&self, n_c: usize, n_r: usize) -> usize {
        n_c * self.dim_r() + n_r
    }

    pub fn index(&self, label: BasisLabel) -> Result<usize> {
        self.check_fock(Subsystem::ModeC, label.n_c)?;
        self.check_fock(Subsystem::ModeR, label.n_r)?;
        Ok(Self::internal_index(label.s1, label.s2) * self.motional_dim()
            + self.motional_index(label.n_c, label.n_r))
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        let digits = self.digits(index);
        BasisLabel {
            s1: Level::from_index(digits[0]),
            s2: Level::from_index(digits[1]),
            n_c: digits[2],
            n_r: digits[3],
        }
    }

    /// Per-factor digits of a composite index.
    pub fn digits(&self, mut index: usize) -> [usize; 4] {
        let dims = self.dims();
        let mut out = [0; 4];
        for k in (0..4).rev() {
            out[k] = index % dims[k];
            index /= dims[k];
        }
        out
    }

    pub(crate) fn check_fock(&self, mode: Subsystem, n: usize) -> Result<()> {
        let cutoff = self.cutoff(mode).expect("mode subsystem");
        if n > cutoff {
            return Err(Error::FockIndexOutOfRange {
                mode,
                index: n,
                cutoff,
            });
        }
        Ok(())
    }

    pub fn check_same(&self, other: &SpaceDescriptor) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

/// Convenience wrapper around [`SpaceDescriptor::new`].
pub fn make_space(n_c_cut: i64, n_r_cut: i64) -> Result<SpaceDescriptor> {
    SpaceDescriptor::new(n_c_cut, n_r_cut)
}
