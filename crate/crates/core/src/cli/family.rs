use std::fmt;

use crate::hyper::HyperParams;
use crate::potentials::{walk_to_b, PotentialSeq, WalkSpec};

/// A malformed family string, with the byte offset of the offending part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyError {
    pub input: String,
    pub position: usize,
    pub message: String,
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {} in {:?}\n  {}\n  {}^", self.message, self.position, self.input, self.input, " ".repeat(self.position))
    }
}

impl std::error::Error for FamilyError {}

/// Parsed `name:p1,p2[,p3]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub name: String,
    pub params: Vec<f64>,
}

/// `(name, parameter count range, parameter names)` of the known families.
const FAMILIES: &[(&str, usize, usize, &str)] = &[
    ("hyper", 2, 2, "a,s"),
    ("invsq", 1, 1, "w"),
    ("bessel", 2, 2, "x0,d"),
    ("homographic", 2, 2, "x0,d"),
    ("head", 2, 3, "b1,b2[,w]"),
];

impl FamilySpec {
    pub fn parse(input: &str) -> Result<Self, FamilyError> {
        let err = |position: usize, message: String| FamilyError { input: input.to_string(), position, message };
        let Some(colon) = input.find(':') else {
            return Err(err(input.len(), "expected `name:p1,p2[,p3]`".into()));
        };
        let name = &input[..colon];
        let Some(&(_, min, max, names)) = FAMILIES.iter().find(|f| f.0 == name) else {
            let known: Vec<&str> = FAMILIES.iter().map(|f| f.0).collect();
            return Err(err(0, format!("unknown family {name:?} (known: {})", known.join(", "))));
        };
        let mut params = Vec::new();
        let mut pos = colon + 1;
        for piece in input[colon + 1..].split(',') {
            let trimmed = piece.trim();
            match trimmed.parse::<f64>() {
                Ok(v) if v.is_finite() => params.push(v),
                _ => return Err(err(pos, format!("parameter {:?} is not a finite number", trimmed))),
            }
            pos += piece.len() + 1;
        }
        if params.len() < min || params.len() > max {
            return Err(err(colon + 1, format!("family {name} takes parameters {names}, got {}", params.len())));
        }
        Ok(FamilySpec { name: name.to_string(), params })
    }

    /// The pinning sequence. Walk families use the sequence induced by the
    /// walk; the contact weight is supplied separately.
    pub fn build(&self) -> crate::Result<PotentialSeq> {
        let p = &self.params;
        match self.name.as_str() {
            "hyper" => PotentialSeq::hyper(p[0], p[1]),
            "invsq" => PotentialSeq::inverse_square(p[0]),
            "bessel" => Ok(walk_to_b(&WalkSpec::bessel(p[0], p[1])?)?.1),
            "homographic" => Ok(walk_to_b(&WalkSpec::homographic(p[0], p[1])?)?.1),
            "head" => PotentialSeq::with_head(&p[..2], p.get(2).copied().unwrap_or(0.0)),
            other => unreachable!("family {other} passed parsing"),
        }
    }

    /// Closed-form parameters for the hypergeometric family.
    pub fn hyper_params(&self) -> Option<HyperParams> {
        (self.name == "hyper").then(|| HyperParams::new(self.params[0], self.params[1]).ok()).flatten()
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        write!(f, "{}:{}", self.name, ps.join(","))
    }
}
