//! Defaults file (`--config` or `ORFOCUS_CONFIG`) merged under command-line flags.

use std::path::Path;

use orfocus_core::fusion::{Aggregation, FusionConfig};
use orfocus_core::segmentation::SegConfig;
use serde::Deserialize;

use crate::args::{FusionArgs, SegArgs};
use crate::failure::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub fusion: FusionSection,
    #[serde(default)]
    pub segmentation: SegSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSection {
    pub onfocus_threshold: Option<f64>,
    pub in_frame_threshold: Option<f64>,
    pub aggregation: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegSection {
    pub max_gap: Option<f64>,
    pub min_duration: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("config file {}: {e}", path.display())))
}

/// `any_face`, `largest_face` or `tracked:<id>`.
pub fn parse_aggregation(s: &str) -> Result<Aggregation, Failure> {
    match s {
        "any_face" => Ok(Aggregation::AnyFace),
        "largest_face" => Ok(Aggregation::LargestFace),
        _ => match s.strip_prefix("tracked:") {
            Some(id) if !id.is_empty() => Ok(Aggregation::TrackedSubject(id.to_string())),
            _ => Err(Failure::Config(format!(
                "unknown aggregation '{s}' (expected any_face, largest_face or tracked:<id>)"
            ))),
        },
    }
}

impl FileConfig {
    pub fn fusion(&self, flags: &FusionArgs) -> Result<FusionConfig, Failure> {
        let d = FusionConfig::default();
        let aggregation = match flags.aggregation.as_ref().or(self.fusion.aggregation.as_ref()) {
            Some(s) => parse_aggregation(s)?,
            None => d.aggregation,
        };
        let c = FusionConfig {
            onfocus_threshold: flags.onfocus_threshold.or(self.fusion.onfocus_threshold).unwrap_or(d.onfocus_threshold),
            in_frame_threshold: flags.in_frame_threshold.or(self.fusion.in_frame_threshold).unwrap_or(d.in_frame_threshold),
            aggregation,
        };
        c.validate().map_err(|e| Failure::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn segmentation(&self, flags: &SegArgs) -> Result<SegConfig, Failure> {
        let d = SegConfig::default();
        let c = SegConfig {
            max_gap: flags.max_gap.or(self.segmentation.max_gap).unwrap_or(d.max_gap),
            min_duration: flags.min_duration.or(self.segmentation.min_duration).unwrap_or(d.min_duration),
        };
        c.validate().map_err(|e| Failure::Config(e.to_string()))?;
        Ok(c)
    }
}
