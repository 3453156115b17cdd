use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Patch class. `Tumor` is the positive class ("class-1") throughout the crate:
/// forests are trained on target 1.0 for tumor and 0.0 for normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Tumor,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Tumor => "tumor",
            Label::Normal => "normal",
        }
    }

    /// Regression target for this class.
    pub fn target(self) -> f64 {
        match self {
            Label::Tumor => 1.0,
            Label::Normal => 0.0,
        }
    }

    pub fn from_class(class_one: bool) -> Self {
        if class_one {
            Label::Tumor
        } else {
            Label::Normal
        }
    }

    pub fn is_tumor(self) -> bool {
        self == Label::Tumor
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tumor" | "1" => Ok(Label::Tumor),
            "normal" | "non-tumor" | "0" => Ok(Label::Normal),
            other => Err(Error::Data(format!(
                "unknown label {other:?} (expected `tumor` or `normal`)"
            ))),
        }
    }
}
