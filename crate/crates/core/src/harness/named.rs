use crate::error::{Error, Result};
use crate::functionals::{ScalarFunctional, SmoothFunctional};

pub const FUNCTIONAL_NAMES: &str = "power:<p>, xz2, identity";

/// Resolve a functional by CLI name: `power:p` (`h(z) = z^p`), `xz2`
/// (`g(z, x) = x z²`) or `identity` (`h(z) = z`).
pub fn parse_functional(name: &str) -> Result<SmoothFunctional> {
    let unknown = || Error::UnknownFunctional {
        name: name.to_string(),
        valid: FUNCTIONAL_NAMES.to_string(),
    };
    match name {
        "xz2" => Ok(SmoothFunctional::x_weighted_square()),
        "identity" => Ok(SmoothFunctional::from_scalar(ScalarFunctional::identity())),
        _ => {
            let p = name.strip_prefix("power:").ok_or_else(unknown)?;
            let p: f64 = p.parse().map_err(|_| unknown())?;
            Ok(SmoothFunctional::from_scalar(ScalarFunctional::power(p)?))
        }
    }
}

/// Like [`parse_functional`] but insists on an x-free functional.
pub fn parse_scalar(name: &str) -> Result<ScalarFunctional> {
    parse_functional(name)?
        .scalar()
        .cloned()
        .ok_or_else(|| Error::InvalidConfig(format!("`{name}` depends on x; an h(z) is required")))
}
