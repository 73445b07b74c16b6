//! Gluing, bending and attachment of radial profiles.

pub mod attach;
pub mod bend;
pub mod bridge;

pub use bridge::{
    glue_profiles, make_bridge_zeta, translate_for_gluing, translation_length, Bridge, BridgeReport,
    BridgeSpec, Cutoff, Translation, Zeta,
};
pub use bend::{bend_profile, bend_with, Bent, BendReport, BendSpec, Bump};
pub use attach::{glue_to_rn, AttachCase, AttachOptions, Attached, JunctionReport, SegmentMargin};
