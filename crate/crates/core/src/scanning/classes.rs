//! The fixed label set shared by every channel and file.

use serde::{Deserialize, Serialize};

pub type ClassId = u8;

pub const BACKGROUND: ClassId = 0;
pub const SKIN: ClassId = 1;
pub const FACE: ClassId = 2;
pub const HAIR: ClassId = 3;
pub const TOP: ClassId = 4;
pub const BOTTOM: ClassId = 5;
pub const SHOES: ClassId = 6;
pub const FLOOR: ClassId = 7;
pub const WALL: ClassId = 8;
/// Texels that received no votes.
pub const UNLABELED: ClassId = 255;

pub const HUMAN_CLASSES: [ClassId; 6] = [SKIN, FACE, HAIR, TOP, BOTTOM, SHOES];

pub fn is_human(c: ClassId) -> bool {
    (SKIN..=SHOES).contains(&c)
}

pub fn class_name(c: ClassId) -> Option<&'static str> {
    Some(match c {
        BACKGROUND => "background",
        SKIN => "skin",
        FACE => "face",
        HAIR => "hair",
        TOP => "top",
        BOTTOM => "bottom",
        SHOES => "shoes",
        FLOOR => "floor",
        WALL => "wall",
        UNLABELED => "unlabeled",
        _ => return None,
    })
}

/// Flat render color of a class.
pub fn albedo(c: ClassId) -> [u8; 3] {
    match c {
        SKIN => [224, 172, 140],
        FACE => [240, 196, 160],
        HAIR => [70, 45, 30],
        TOP => [40, 90, 200],
        BOTTOM => [60, 60, 70],
        SHOES => [150, 30, 30],
        FLOOR => [170, 160, 140],
        WALL => [200, 205, 210],
        _ => [0, 0, 0],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    pub id: ClassId,
    pub name: String,
}

/// Ordered class list as written to sidecar files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSet {
    pub classes: Vec<ClassEntry>,
    pub unlabeled: ClassId,
}

impl ClassSet {
    pub fn standard() -> ClassSet {
        ClassSet {
            classes: (BACKGROUND..=WALL)
                .map(|id| ClassEntry { id, name: class_name(id).expect("known class").to_string() })
                .collect(),
            unlabeled: UNLABELED,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_classes_are_one_to_six() {
        let human: Vec<ClassId> = (0..=255u8).filter(|&c| is_human(c)).collect();
        assert_eq!(human, HUMAN_CLASSES);
        let set = ClassSet::standard();
        assert_eq!(set.classes.len(), 9);
        assert_eq!(set.classes[4].name, "top");
    }
}
