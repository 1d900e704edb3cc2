//! Named systems.
//!
//! | name | system |
//! |---|---|
//! | `flagship` | `(3y, x + sin(2 pi x)/8 + y)` |
//! | `shear(i,j)` | `(i y, x + j y)` |
//! | `rotation(d)` | `(d y, x + y)` |
//! | `northsouth(a,d)` | `(d y, x + a sin(2 pi x))` |
//! | `stepifs` or `stepifs(d)` | digit-selected north-south maps over `d y`, default `d = 4` |

use crate::base::ExpandingBase;
use crate::error::{Error, Result};
use crate::fiber::FiberFamily;
use crate::skew::SkewSystem;
use crate::stepifs::{StepIfs, StepIfsParams};

/// `(name pattern, description)` for every catalog entry.
pub const CATALOG: &[(&str, &str)] = &[
    ("flagship", "sine-coupled fiber, amplitude 1/8, over 3y mod 1"),
    ("shear(i,j)", "linear shear x + j y over i y mod 1"),
    ("rotation(d)", "rigid rotation x + y over d y mod 1"),
    ("northsouth(a,d)", "decoupled north-south map x + a sin(2 pi x) over d y mod 1"),
    ("stepifs(d)", "step skew product of four north-south maps over d y mod 1, d >= 4 (default 4)"),
];

fn catalog_list() -> String {
    CATALOG.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

fn unknown(name: &str) -> Error {
    Error::UnknownSystem {
        name: name.to_string(),
        catalog: catalog_list(),
    }
}

/// Splits `head(a,b,...)` into `head` and its trimmed arguments.
fn parse_call(name: &str) -> Option<(&str, Vec<&str>)> {
    let name = name.trim();
    match name.find('(') {
        None => Some((name, Vec::new())),
        Some(open) => {
            let inner = name[open + 1..].strip_suffix(')')?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(str::trim).collect()
            };
            Some((name[..open].trim(), args))
        }
    }
}

fn arg<T: std::str::FromStr>(name: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| unknown(name))
}

pub fn flagship() -> SkewSystem {
    SkewSystem::new(
        ExpandingBase::Linear { d: 3 },
        FiberFamily::SineCoupled { amplitude: 0.125 },
    )
    .expect("flagship parameters are valid")
}

pub fn make_named(name: &str) -> Result<SkewSystem> {
    let (head, args) = parse_call(name).ok_or_else(|| unknown(name))?;
    match (head, args.as_slice()) {
        ("flagship", []) => Ok(flagship()),
        ("shear", [i, j]) => SkewSystem::new(
            ExpandingBase::linear(arg(name, i)?)?,
            FiberFamily::LinearShear { j: arg(name, j)? },
        ),
        ("rotation", [d]) => SkewSystem::new(ExpandingBase::linear(arg(name, d)?)?, FiberFamily::RigidRotation),
        ("northsouth", [a, d]) => SkewSystem::new(
            ExpandingBase::linear(arg(name, d)?)?,
            FiberFamily::north_south(arg(name, a)?)?,
        ),
        ("stepifs", []) => step_ifs(StepIfsParams::default(), 4),
        ("stepifs", [d]) => step_ifs(StepIfsParams::default(), arg(name, d)?),
        _ => Err(unknown(name)),
    }
}

pub fn step_ifs(params: StepIfsParams, degree: u32) -> Result<SkewSystem> {
    let ifs = StepIfs::build(params, degree)?;
    SkewSystem::new(ExpandingBase::linear(degree)?, FiberFamily::StepIfs(ifs))
}
