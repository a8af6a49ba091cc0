//! Input files, built-in fixtures and small flag parsers.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use shellspec_core::convex_geometry::ConvexBody2D;
use shellspec_core::mesh::{fixtures, AngularSpacing, StarAnnularDomain, TriMesh};

use crate::{usage, UsageError};

pub fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())).into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// Unit disk inside the radius-2 disk centered at (0.3, 0).
    EccentricAnnulus,
    /// Radius-2 disk minus the unit square.
    BallMinusSquare,
    /// Unit regular hexagon inside its 0.5-neighborhood.
    HexagonNeighborhood,
    /// Concentric annulus 1 < r < 2.
    ConcentricAnnulus,
}

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::EccentricAnnulus, Fixture::BallMinusSquare, Fixture::HexagonNeighborhood];

    pub fn domain(self) -> anyhow::Result<StarAnnularDomain> {
        Ok(match self {
            Fixture::EccentricAnnulus => fixtures::eccentric_annulus(0.3)?,
            Fixture::BallMinusSquare => fixtures::ball_minus_square()?,
            Fixture::HexagonNeighborhood => {
                fixtures::parallel_annulus(ConvexBody2D::regular(6, [0.0, 0.0], 1.0)?, 0.5)?
            }
            Fixture::ConcentricAnnulus => fixtures::concentric_annulus(1.0, 2.0)?,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Fixture::EccentricAnnulus => "eccentric-annulus",
            Fixture::BallMinusSquare => "ball-minus-square",
            Fixture::HexagonNeighborhood => "hexagon-neighborhood",
            Fixture::ConcentricAnnulus => "concentric-annulus",
        }
    }
}

/// A domain from `--domain file.json` or `--fixture name`, exactly one of them.
pub fn load_domain(file: &Option<PathBuf>, fixture: &Option<Fixture>) -> anyhow::Result<StarAnnularDomain> {
    match (file, fixture) {
        (Some(p), None) => {
            let text = read_file(p)?;
            StarAnnularDomain::from_json(&text).map_err(|e| UsageError(format!("{}: {e}", p.display())).into())
        }
        (None, Some(f)) => f.domain(),
        (Some(_), Some(_)) => usage("give either --domain or --fixture, not both"),
        (None, None) => usage("a domain is required: --domain file.json or --fixture name"),
    }
}

pub fn load_mesh(file: &Option<PathBuf>) -> anyhow::Result<TriMesh> {
    let Some(p) = file else { return usage("--mesh file.json is required") };
    TriMesh::from_json(&read_file(p)?).map_err(|e| UsageError(format!("{}: {e}", p.display())).into())
}

/// Nodal potential: a JSON array with one number per mesh vertex.
pub fn load_potential(file: &Path, n_vertices: usize) -> anyhow::Result<Vec<f64>> {
    let v: Vec<f64> = serde_json::from_str(&read_file(file)?)
        .map_err(|e| UsageError(format!("{}: expected an array of numbers: {e}", file.display())))?;
    if v.len() != n_vertices {
        return usage(format!("{}: {} potential values for {n_vertices} vertices", file.display(), v.len()));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Uniform,
    OuterArclength,
}

impl From<Spacing> for AngularSpacing {
    fn from(s: Spacing) -> Self {
        match s {
            Spacing::Uniform => AngularSpacing::Uniform,
            Spacing::OuterArclength => AngularSpacing::OuterArclength,
        }
    }
}

/// `every:k` → `k`.
pub fn parse_every(s: &str) -> anyhow::Result<usize> {
    match s.strip_prefix("every:").map(|k| k.parse::<usize>()) {
        Some(Ok(k)) if k > 0 => Ok(k),
        _ => usage(format!("expected every:K with K >= 1, got '{s}'")),
    }
}

pub fn point3(v: &[f64]) -> anyhow::Result<[f64; 3]> {
    match v {
        &[x, y, z] => Ok([x, y, z]),
        _ => usage(format!("expected three coordinates x,y,z, got {v:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_parser() {
        assert_eq!(parse_every("every:4").unwrap(), 4);
        assert!(parse_every("every:0").is_err());
        assert!(parse_every("4").is_err());
    }

    #[test]
    fn domain_source_is_exclusive() {
        assert!(load_domain(&None, &None).is_err());
        assert!(load_domain(&Some("x.json".into()), &Some(Fixture::EccentricAnnulus)).is_err());
        assert!(load_domain(&None, &Some(Fixture::HexagonNeighborhood)).is_ok());
    }
}
