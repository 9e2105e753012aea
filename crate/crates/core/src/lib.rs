//! Static privacy analysis for software architectures.
//!
//! Components of an architecture carry taint labels naming the kinds of
//! personal data they may hold. A component that anonymizes, filters or
//! encrypts data additionally untaints labels. An architecture is sound
//! when data leaving a component never carries a label its receiver lacks.
//!
//! - [`graph`]: the directed flow graph.
//! - [`taint`]: label specifications, the tainting invariants, repair and
//!   policy synthesis.
//! - [`blp`]: Bell-LaPadula invariants and the projection that relates them
//!   to tainting.
//! - [`boundary`]: systems with internal, passive and active components.
//! - [`arch`]: the text format for architectures.
//! - [`report`]: findings, per-label views, metrics and DOT export.
//! - [`firewall`]: host firewall generation and audit.
//! - [`cli`]: the `archtaint` command.

pub mod arch;
pub mod blp;
pub mod boundary;
pub mod cli;
pub mod firewall;
pub mod graph;
pub mod report;
pub mod taint;

pub use arch::{parse_spec, serialize_spec, ArchitectureSpec, CryptoPair};
pub use graph::{Edge, Graph, NodeId};
pub use report::{analyze, Analysis, Finding, FindingKind};
pub use taint::{Label, LabelAssignment, LabelSet, TaintSpec};

/// The bundled case-study documents.
pub mod fixtures {
    /// Home energy meter and phone behind an anonymizer.
    pub const SMART_HOME: &str = include_str!("../fixtures/smart-home.arch");
    /// [`SMART_HOME`] with an anonymizer that untaints nothing.
    pub const SMART_HOME_BROKEN: &str = include_str!("../fixtures/smart-home-broken.arch");
    /// Energy monitoring with filtering, aggregation and encryption.
    pub const IDEM: &str = include_str!("../fixtures/idem.arch");
    /// Phone sensor collection through an upload gateway.
    pub const MEASRDROID: &str = include_str!("../fixtures/measrdroid.arch");
    /// The ruleset generated for the collector host.
    pub const COLLECTDROID_GENERATED_RULES: &str =
        include_str!("../fixtures/collectdroid-generated.rules");
    /// The hand-extended collector ruleset, with logging and service rules.
    pub const COLLECTDROID_TUNED_RULES: &str = include_str!("../fixtures/collectdroid-tuned.rules");
    /// Reachability goals for the collector.
    pub const MEASRDROID_ASSERTIONS: &str = include_str!("../fixtures/measrdroid.assert");
    /// Management access that only the tuned ruleset grants.
    pub const MEASRDROID_SSH_ASSERTIONS: &str = include_str!("../fixtures/measrdroid-ssh.assert");
}
