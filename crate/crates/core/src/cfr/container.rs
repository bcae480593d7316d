//! Profile files.
//!
//! Layout, one item per line:
//!
//! ```text
//! gtobench-profile 1
//! sha256 <hex digest of the payload bytes>
//! <payload: the profile as JSON>
//! ```

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{CfrError, StrategyProfile};
use crate::game::Variant;

pub const PROFILE_MAGIC: &str = "gtobench-profile";
pub const PROFILE_VERSION: u32 = 1;

fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode_profile(profile: &StrategyProfile) -> String {
    let payload = serde_json::to_string(profile).expect("profiles serialize");
    format!(
        "{PROFILE_MAGIC} {PROFILE_VERSION}\nsha256 {}\n{payload}",
        digest_hex(payload.as_bytes())
    )
}

pub fn decode_profile(text: &str) -> Result<StrategyProfile, CfrError> {
    let mut parts = text.splitn(3, '\n');
    let header = parts.next().unwrap_or_default();
    let Some(version) = header.strip_prefix(PROFILE_MAGIC).map(str::trim) else {
        return Err(CfrError::CorruptPayload("missing container header".into()));
    };
    if version != PROFILE_VERSION.to_string() {
        return Err(CfrError::VersionMismatch {
            expected: PROFILE_VERSION,
            found: version.to_string(),
        });
    }
    let checksum = parts
        .next()
        .and_then(|l| l.strip_prefix("sha256 "))
        .ok_or_else(|| CfrError::CorruptPayload("missing checksum line".into()))?;
    let payload = parts
        .next()
        .ok_or_else(|| CfrError::CorruptPayload("missing payload".into()))?;
    if digest_hex(payload.as_bytes()) != checksum.trim() {
        return Err(CfrError::CorruptPayload("checksum mismatch".into()));
    }
    serde_json::from_str(payload).map_err(|e| CfrError::CorruptPayload(e.to_string()))
}

pub fn save_profile(profile: &StrategyProfile, path: impl AsRef<Path>) -> Result<(), CfrError> {
    fs::write(path, encode_profile(profile))?;
    Ok(())
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<StrategyProfile, CfrError> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CfrError::CorruptPayload("not UTF-8".into()))?;
    decode_profile(&text)
}

/// Load and check that the profile solves `expected`.
pub fn load_profile_for(path: impl AsRef<Path>, expected: Variant) -> Result<StrategyProfile, CfrError> {
    let profile = load_profile(path)?;
    if profile.variant != expected {
        return Err(CfrError::VariantMismatch {
            expected,
            found: profile.variant,
        });
    }
    Ok(profile)
}
