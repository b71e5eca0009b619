//! Aspect-oriented weaving of UML class-diagram models.
//!
//! A [`CoreModel`] holds the functional classes of a system. Crosscutting
//! concerns live in an [`AspectModel`] as aspects with pointcuts and advices,
//! and [`WeavingModel`]s link the two. [`weave`] composes them into a
//! [`WovenModel`]. The [`requirements`] module models the AND/OR
//! decomposition of cooperative requirements.
//!
//! ```
//! use modelweave::dsl::parse_core;
//!
//! let m = parse_core("model M { class A { attr x : Integer; } }", "m.core")
//!     .into_result()
//!     .unwrap();
//! assert!(m.validate().is_empty());
//! ```

pub mod aspect_model;
pub mod cli;
pub mod core_model;
pub mod dsl;
pub mod report;
pub mod requirements;
pub mod weaver;
pub mod weaving_model;

pub use aspect_model::{
    Advice, AdviceKind, AdvicePayload, AdviceType, AspectModel, AspectRequirement, NamePattern, NewElement, Pointcut,
    PointcutKind, Priority, UpdateSpec,
};
pub use core_model::{
    AssociationDecl, AssociationEnd, AttributeDecl, ClassDecl, CoreModel, Element, ElementKind, MethodDecl,
    Multiplicity, Parameter, QualifiedName,
};
pub use report::{ValidationReport, Violation};
pub use requirements::{Connective, DecompositionGraph, Expression, RequirementKind, RequirementNode};
pub use weaver::{weave, WeaveError, WeaveOptions, WeaveOutcome, WovenModel};
pub use weaving_model::{ElementRef, LinkKind, ModelRef, RefTarget, WeaveLink, WeavingKind, WeavingModel};
