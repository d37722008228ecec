//! The generate / verify / critique loop and its data model.

mod model;
mod run;
mod task;
mod templates;
mod types;

pub use model::{
    ChatModel, Completion, ModelError, RecordEntry, RecordSink, RecordingModel, ReplayModel, ScriptedModel,
    GENERATION_TEMPERATURE, VERIFICATION_TEMPERATURE,
};
pub use run::{extract_verdict, modal_index, Harness, HarnessError};
pub use task::{Assessment, Payload, ProblemInstance, SoundVerifier};
pub use templates::{DomainTemplates, TemplateSet, TemplateSetError, VerifyVariant};
pub use types::*;
