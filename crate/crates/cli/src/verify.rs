//! Re-checks the certificates and property flags stored in a record.

use std::path::Path;

use anyhow::{Context, Result};
use isoloc_core::estimators::DistanceCertificate;
use isoloc_core::EstimateRecord;

use crate::config::BodyEntry;
use crate::record::{check_holds, read_record, row_check, META_OP};
use crate::resolve::resolve_body;

const TOL: f64 = 1e-8;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub rows: usize,
    pub certificates: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

fn verify_certificate(rec: &EstimateRecord, cert: &DistanceCertificate) -> Result<Option<String>> {
    if cert.n != rec.n || !close(rec.value, cert.bound) {
        return Ok(Some(format!("value {} does not match the certificate bound {}", rec.value, cert.bound)));
    }
    let isotropic = rec.params.get("isotropic").and_then(|v| v.as_bool()).unwrap_or(true);
    let body = |label: &str| -> Result<_> { resolve_body(&BodyEntry::from_label(label)?, cert.n, isotropic, rec.seed) };
    let (k1, k2) = (body(&cert.bodies[0])?, body(&cert.bodies[1])?);
    Ok(match cert.verify(&k1, &k2) {
        Ok(true) => None,
        Ok(false) => Some("recomputed containment factors differ from the stored ones".into()),
        Err(e) => Some(format!("certificate does not re-check: {e}")),
    })
}

pub fn verify_record(path: &Path) -> Result<VerifyReport> {
    let rows = read_record(path)?;
    let mut report = VerifyReport::default();
    for (i, rec) in rows.iter().enumerate().filter(|(_, r)| r.op != META_OP) {
        report.rows += 1;
        let at = format!("row {} ({} {} n={})", i + 1, rec.op, rec.bodies.join(":"), rec.n);
        if let Some(c) = rec.params.get("certificate") {
            let cert: DistanceCertificate =
                serde_json::from_value(c.clone()).with_context(|| format!("{at}: malformed certificate"))?;
            report.certificates += 1;
            if let Some(msg) = verify_certificate(rec, &cert)? {
                report.failures.push(format!("{at}: {msg}"));
            }
        }
        if let Some((lo, hi, stored)) = row_check(rec).with_context(|| at.clone())? {
            report.checks += 1;
            let holds = check_holds(rec.value, lo, hi);
            if holds != stored {
                report.failures.push(format!("{at}: stored flag {stored} but the check evaluates to {holds}"));
            } else if !holds {
                report.failures.push(format!("{at}: value {} outside [{lo:?}, {hi:?}]", rec.value));
            }
        }
    }
    Ok(report)
}
