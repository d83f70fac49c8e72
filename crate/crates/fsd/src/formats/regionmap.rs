//! Region map config: structured text, one region per line.
//!
//! ```text
//! scheme: ibug68
//! region left_eye elliptic polygon 36 37 38 39 40 41
//! region f10 generic hull 0 1 2 ... 16
//! ```
//!
//! Blank lines and `#` comments are ignored. Region order in the file is
//! the feature order.

use std::path::Path;

use fsd_core::pipeline::{OutlineMode, Region, RegionKind, RegionMap};
use fsd_core::LandmarkScheme;

use crate::error::{CliError, Result};

pub fn read_region_map(path: &Path) -> Result<RegionMap> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_region_map(&text, path)
}

pub fn parse_region_map(text: &str, path: &Path) -> Result<RegionMap> {
    let mut scheme: Option<LandmarkScheme> = None;
    let mut regions: Vec<Region> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("scheme:") {
            if scheme.is_some() {
                return Err(CliError::format(path, lineno, "scheme declared twice"));
            }
            scheme = Some(
                LandmarkScheme::from_name(rest.trim())
                    .map_err(|e| CliError::format(path, lineno, e.to_string()))?,
            );
        } else if let Some(rest) = line.strip_prefix("region ") {
            let mut toks = rest.split_whitespace();
            let (id, kind_tok, outline_tok) = match (toks.next(), toks.next(), toks.next()) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => {
                    return Err(CliError::format(
                        path,
                        lineno,
                        "expected `region <id> <elliptic|generic> <polygon|hull> <indices...>`",
                    ));
                }
            };
            let kind = match kind_tok {
                "elliptic" => RegionKind::Elliptic,
                "generic" => RegionKind::Generic,
                other => {
                    return Err(CliError::format(
                        path,
                        lineno,
                        format!("unknown region kind `{other}`"),
                    ));
                }
            };
            let outline = match outline_tok {
                "polygon" => OutlineMode::Polygon,
                "hull" => OutlineMode::Hull,
                other => {
                    return Err(CliError::format(
                        path,
                        lineno,
                        format!("unknown outline mode `{other}`"),
                    ));
                }
            };
            let indices: Vec<usize> = toks
                .map(|t| {
                    t.parse().map_err(|_| {
                        CliError::format(path, lineno, format!("invalid landmark index `{t}`"))
                    })
                })
                .collect::<Result<_>>()?;
            regions.push(Region { id: id.to_string(), kind, outline, indices });
        } else {
            return Err(CliError::format(path, lineno, format!("unexpected line `{line}`")));
        }
    }
    let scheme = scheme
        .ok_or_else(|| CliError::format(path, 0, "missing `scheme:` declaration"))?;
    RegionMap::new(scheme, regions).map_err(CliError::from)
}

pub fn write_region_map(path: &Path, map: &RegionMap) -> Result<()> {
    let mut out = format!("scheme: {}\n", map.scheme().name());
    for r in map.regions() {
        let kind = match r.kind {
            RegionKind::Elliptic => "elliptic",
            RegionKind::Generic => "generic",
        };
        let outline = match r.outline {
            OutlineMode::Polygon => "polygon",
            OutlineMode::Hull => "hull",
        };
        out.push_str(&format!("region {} {kind} {outline}", r.id));
        for ix in &r.indices {
            out.push_str(&format!(" {ix}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}
