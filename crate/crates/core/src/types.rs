//! Finger identities and presentation materials.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FINGER_NAMES: [&str; 10] = [
    "Left-Index",
    "Left-Middle",
    "Left-Ring",
    "Left-Little",
    "Left-Thumb",
    "Right-Index",
    "Right-Middle",
    "Right-Ring",
    "Right-Little",
    "Right-Thumb",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hand {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Finger {
    Index,
    Middle,
    Ring,
    Little,
    Thumb,
}

/// Finger class label, 1 through 10.
///
/// Classes 1..=5 are the left hand (index, middle, ring, little, thumb) and
/// 6..=10 repeat the same order for the right hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FingerClass(u8);

impl FingerClass {
    pub const COUNT: u8 = 10;

    pub fn new(index: u8) -> Result<Self> {
        if (1..=Self::COUNT).contains(&index) {
            Ok(FingerClass(index))
        } else {
            Err(Error::Validation(format!(
                "finger class {index} outside 1..=10"
            )))
        }
    }

    pub fn all() -> impl Iterator<Item = FingerClass> {
        (1..=Self::COUNT).map(FingerClass)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        FINGER_NAMES[(self.0 - 1) as usize]
    }

    pub fn hand(self) -> Hand {
        if self.0 <= 5 {
            Hand::Left
        } else {
            Hand::Right
        }
    }

    pub fn finger(self) -> Finger {
        match (self.0 - 1) % 5 {
            0 => Finger::Index,
            1 => Finger::Middle,
            2 => Finger::Ring,
            3 => Finger::Little,
            _ => Finger::Thumb,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FINGER_NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .map(|i| FingerClass(i as u8 + 1))
    }
}

impl TryFrom<u8> for FingerClass {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        FingerClass::new(value)
    }
}

impl From<FingerClass> for u8 {
    fn from(c: FingerClass) -> u8 {
        c.0
    }
}

impl fmt::Display for FingerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Presentation material: live skin or one of the eight spoof materials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Material {
    Live,
    EcoFlex,
    PlayDoh,
    WoodGlue,
    Gelatine,
    Latex,
    #[serde(rename = "OOMOO")]
    Oomoo,
    Silicone,
    BodyDouble,
}

impl Material {
    pub const ALL: [Material; 9] = [
        Material::Live,
        Material::EcoFlex,
        Material::PlayDoh,
        Material::WoodGlue,
        Material::Gelatine,
        Material::Latex,
        Material::Oomoo,
        Material::Silicone,
        Material::BodyDouble,
    ];

    pub const SPOOFS: [Material; 8] = [
        Material::EcoFlex,
        Material::PlayDoh,
        Material::WoodGlue,
        Material::Gelatine,
        Material::Latex,
        Material::Oomoo,
        Material::Silicone,
        Material::BodyDouble,
    ];

    pub fn is_live(self) -> bool {
        self == Material::Live
    }

    /// Canonical manifest string.
    pub fn as_str(self) -> &'static str {
        match self {
            Material::Live => "Live",
            Material::EcoFlex => "EcoFlex",
            Material::PlayDoh => "PlayDoh",
            Material::WoodGlue => "WoodGlue",
            Material::Gelatine => "Gelatine",
            Material::Latex => "Latex",
            Material::Oomoo => "OOMOO",
            Material::Silicone => "Silicone",
            Material::BodyDouble => "BodyDouble",
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Material::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown material '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_mapping_is_bijective() {
        let names: std::collections::HashSet<_> = FingerClass::all().map(|c| c.name()).collect();
        assert_eq!(names.len(), 10);
        for c in FingerClass::all() {
            assert_eq!(FingerClass::from_name(c.name()), Some(c));
        }
        assert_eq!(FingerClass::new(1).unwrap().name(), "Left-Index");
        assert_eq!(FingerClass::new(5).unwrap().finger(), Finger::Thumb);
        assert_eq!(FingerClass::new(9).unwrap().name(), "Right-Little");
        assert_eq!(FingerClass::new(10).unwrap().hand(), Hand::Right);
    }

    #[test]
    fn class_range_enforced() {
        assert!(FingerClass::new(0).is_err());
        assert!(FingerClass::new(11).is_err());
    }

    #[test]
    fn materials() {
        assert_eq!(Material::ALL.len(), 9);
        assert_eq!(Material::ALL.iter().filter(|m| !m.is_live()).count(), 8);
        for m in Material::ALL {
            assert_eq!(m.as_str().parse::<Material>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
    }
}
