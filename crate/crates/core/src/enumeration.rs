//! Canonical enumeration of machine spaces, index ranges for sharding, and
//! opt-in symmetry reduction for binary spaces.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{decode_rule, MachineSpace};

pub fn space_size(space: &MachineSpace) -> Result<u128> {
    space.space_size()
}

/// Half-open interval `[start, end)` of rule indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexRange {
    start: u128,
    end: u128,
}

impl IndexRange {
    pub fn new(start: u128, end: u128, space: &MachineSpace) -> Result<Self> {
        let size = space.space_size()?;
        if start > end || end > size {
            return Err(Error::Validation(format!(
                "index range [{start}, {end}) is not within [0, {size}) for space {space}"
            )));
        }
        Ok(IndexRange { start, end })
    }

    pub fn full(space: &MachineSpace) -> Result<Self> {
        Ok(IndexRange {
            start: 0,
            end: space.space_size()?,
        })
    }

    pub fn start(&self) -> u128 {
        self.start
    }

    pub fn end(&self) -> u128 {
        self.end
    }

    pub fn len(&self) -> u128 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, index: u128) -> bool {
        (self.start..self.end).contains(&index)
    }

    /// Split at `mid` into `[start, mid)` and `[mid, end)`.
    pub fn split_at(&self, mid: u128) -> Result<(IndexRange, IndexRange)> {
        if mid < self.start || mid > self.end {
            return Err(Error::range("split point", mid, self.start, self.end + 1));
        }
        Ok((
            IndexRange {
                start: self.start,
                end: mid,
            },
            IndexRange {
                start: mid,
                end: self.end,
            },
        ))
    }

    /// Consecutive sub-ranges of at most `chunk` indices covering this range.
    pub fn chunks(&self, chunk: u128) -> impl Iterator<Item = IndexRange> + '_ {
        let chunk = chunk.max(1);
        let n = self.len().div_ceil(chunk);
        (0..n).map(move |k| IndexRange {
            start: self.start + k * chunk,
            end: (self.start + (k + 1) * chunk).min(self.end),
        })
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

impl IntoIterator for IndexRange {
    type Item = u128;
    type IntoIter = Range<u128>;
    fn into_iter(self) -> Range<u128> {
        self.start..self.end
    }
}

/// Ascending rule indices of `range`, checked against the space.
pub fn iter_space(space: &MachineSpace, range: IndexRange) -> Result<Range<u128>> {
    if range.end > space.space_size()? {
        return Err(Error::Validation(format!(
            "index range {range} exceeds space {space}"
        )));
    }
    Ok(range.start..range.end)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transform {
    Complement,
    Mirror,
}

/// One orbit of the group generated by symbol complement and mirroring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryClass {
    /// Smallest rule index in the orbit.
    pub representative: u128,
    /// Orbit size: 1, 2 or 4.
    pub multiplicity: u8,
    /// Generators that produce the whole orbit from the representative.
    pub transforms: Vec<Transform>,
}

impl SymmetryClass {
    /// All rule indices in the orbit, ascending.
    pub fn members(&self, space: &MachineSpace) -> Result<Vec<u128>> {
        Ok(orbit(self.representative, space)?.0)
    }
}

/// Orbit of `index` under {id, C, M, CM} plus which single transforms fix it.
fn orbit(index: u128, space: &MachineSpace) -> Result<(Vec<u128>, bool, bool)> {
    let rule = decode_rule(index, space)?;
    let c = rule.complement()?;
    let m = rule.mirror();
    let cm = c.mirror();
    let mut members = vec![index, c.encode()?, m.encode()?, cm.encode()?];
    let c_fixed = members[1] == index;
    let m_fixed = members[2] == index;
    members.sort_unstable();
    members.dedup();
    Ok((members, c_fixed, m_fixed))
}

/// The class of `index` if `index` is its representative, `None` otherwise.
pub fn class_of_representative(index: u128, space: &MachineSpace) -> Result<Option<SymmetryClass>> {
    let (members, c_fixed, m_fixed) = orbit(index, space)?;
    if members[0] != index {
        return Ok(None);
    }
    let transforms = match members.len() {
        4 => vec![Transform::Complement, Transform::Mirror],
        // Exactly one of C, M, CM fixes the rule; a generator that moves it
        // produces the other member.
        2 if c_fixed => vec![Transform::Mirror],
        2 => vec![Transform::Complement],
        _ => vec![],
    };
    debug_assert!(!(members.len() == 2 && c_fixed && m_fixed));
    Ok(Some(SymmetryClass {
        representative: index,
        multiplicity: members.len() as u8,
        transforms,
    }))
}

/// Symmetry classes of a binary space in ascending representative order.
pub fn reduce_by_symmetry(
    space: &MachineSpace,
) -> Result<impl Iterator<Item = Result<SymmetryClass>> + '_> {
    if space.symbols() != 2 {
        return Err(Error::Unsupported(format!(
            "symmetry reduction needs a binary alphabet, space {space} has {} symbols",
            space.symbols()
        )));
    }
    let size = space.space_size()?;
    Ok((0..size).filter_map(move |i| class_of_representative(i, space).transpose()))
}
