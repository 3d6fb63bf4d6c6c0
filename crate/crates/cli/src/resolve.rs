use anyhow::{bail, Result};
use isoloc_core::bodies::{named, Body};
use isoloc_core::isotropic::{isotropize, named_isotropic, IsotropizeConfig};
use isoloc_core::RngStream;

use crate::config::BodyEntry;

/// Stream used for whitening body literals, fixed so that `verify` can
/// rebuild the same body from the record's seed.
const WHITENING_STREAM: u64 = 0x1507;

/// Builds a body at dimension `n`, in isotropic position when asked. Named
/// bodies use exact scalings; literals are whitened from samples.
pub fn resolve_body(entry: &BodyEntry, n: usize, isotropic: bool, seed: u64) -> Result<Body> {
    let body = match entry {
        BodyEntry::Name(name) if isotropic => return Ok(named_isotropic(name, n)?),
        BodyEntry::Name(name) => return Ok(named(name, n)?),
        BodyEntry::Literal(spec) => spec.build(Some(n))?,
    };
    if body.dim() != n {
        bail!("body literal has dimension {} but the run asks for {n}", body.dim());
    }
    if !isotropic {
        return Ok(body);
    }
    let (iso, _) = isotropize(&body, &IsotropizeConfig::default(), &RngStream::new(seed, WHITENING_STREAM))?;
    Ok(iso)
}
