use std::fmt;

use serde::Serialize;

/// A problem with the user's input: flags, config keys, expressions or files.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Invalid(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Validation,
    Numerical,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Validation => 2,
            Kind::Numerical => 1,
        }
    }
}

pub fn classify(err: &anyhow::Error) -> Kind {
    use kinfp_core::Error as E;
    for cause in err.chain() {
        if cause.is::<Invalid>() || cause.is::<serde_json::Error>() {
            return Kind::Validation;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::DimensionMismatch { .. }
                | E::NonPositiveRadius(_)
                | E::NonFiniteCoordinate
                | E::InvalidGrid(_)
                | E::NonFinite { .. }
                | E::GridTooSmall { .. }
                | E::GridMismatch(_)
                | E::BadMagic
                | E::MalformedHeader(_)
                | E::Truncated { .. }
                | E::NotOnGrid(_)
                | E::RadiusTooLarge(_)
                | E::NonCompactSource
                | E::UnderResolved(_)
                | E::InvalidParameter(_) => Kind::Validation,
                _ => Kind::Numerical,
            };
        }
    }
    Kind::Numerical
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: Kind,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    argument: Option<&'a str>,
}

/// One-line JSON error object for stderr.
pub fn render(kind: Kind, message: &str, argument: Option<&str>) -> String {
    serde_json::json!({ "error": ErrorBody { kind, message, argument } }).to_string()
}
