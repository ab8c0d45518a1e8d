use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Total number of taxels on the skin (35 upper + 28 lower).
pub const TAXEL_COUNT: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Upper,
    Lower,
}

impl Section {
    pub const ALL: [Section; 2] = [Section::Upper, Section::Lower];

    /// Wire identifier used by the streaming protocol.
    pub fn id(self) -> u8 {
        match self {
            Section::Upper => 0,
            Section::Lower => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(Section::Upper),
            1 => Some(Section::Lower),
            _ => None,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Section::Upper => Section::Lower,
            Section::Lower => Section::Upper,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Section::Upper => "upper",
            Section::Lower => "lower",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Section {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "upper" => Ok(Section::Upper),
            "lower" => Ok(Section::Lower),
            _ => Err(format!("unknown arm section '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionGrid {
    pub section: Section,
    pub rows: usize,
    pub cols: usize,
}

impl SectionGrid {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Geometry of the skin sections and the flattening rule.
///
/// Sections are laid out back to back in declaration order; within a section
/// taxels are numbered row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorLayout {
    sections: Vec<SectionGrid>,
}

impl Default for SensorLayout {
    fn default() -> Self {
        Self::skin()
    }
}

impl SensorLayout {
    /// The arm skin: upper section 7 rows × 5 cols, lower section 7 rows × 4 cols.
    pub fn skin() -> Self {
        Self {
            sections: vec![
                SectionGrid { section: Section::Upper, rows: 7, cols: 5 },
                SectionGrid { section: Section::Lower, rows: 7, cols: 4 },
            ],
        }
    }

    pub fn sections(&self) -> &[SectionGrid] {
        &self.sections
    }

    pub fn taxel_count(&self) -> usize {
        self.sections.iter().map(SectionGrid::len).sum()
    }

    pub fn grid(&self, section: Section) -> Option<&SectionGrid> {
        self.sections.iter().find(|g| g.section == section)
    }

    pub fn contains(&self, section: Section) -> bool {
        self.grid(section).is_some()
    }

    /// Flat index range occupied by `section`.
    pub fn range(&self, section: Section) -> Option<Range<usize>> {
        let mut offset = 0;
        for g in &self.sections {
            if g.section == section {
                return Some(offset..offset + g.len());
            }
            offset += g.len();
        }
        None
    }

    pub fn flatten_index(&self, section: Section, row: usize, col: usize) -> Result<usize> {
        let grid = self.grid(section).ok_or_else(|| {
            CoreError::Config(format!("section {section} is not part of this layout"))
        })?;
        if row >= grid.rows || col >= grid.cols {
            return Err(CoreError::OutOfBounds {
                section,
                row,
                col,
                rows: grid.rows,
                cols: grid.cols,
            });
        }
        let start = self.range(section).map(|r| r.start).unwrap_or(0);
        Ok(start + row * grid.cols + col)
    }

    /// Inverse of [`flatten_index`](Self::flatten_index).
    pub fn locate(&self, index: usize) -> Option<(Section, usize, usize)> {
        let mut offset = 0;
        for g in &self.sections {
            if index < offset + g.len() {
                let local = index - offset;
                return Some((g.section, local / g.cols, local % g.cols));
            }
            offset += g.len();
        }
        None
    }
}
