//! Prompt rendering, replay history formatting and completion backends.

mod backend;
mod gateway;
mod history;
mod prompts;
mod settings;
mod template;

pub use backend::{
    extract_content, Backend, BackendError, RemoteBackend, RemoteConfig, ScriptError,
    ScriptedBackend,
};
pub use gateway::{
    sha256_hex, CallRecord, Gateway, GatewayError, RetryPolicy, DEFAULT_MAX_RETRIES,
    DEFAULT_PARSE_RETRIES,
};
pub use history::{
    format_entry, format_history, format_history_window, parse_history_line, ReplayEntry,
    EMPTY_HISTORY,
};
pub use prompts::{format_actions, PromptBuilder, RenderedPrompt, DEFAULT_STEP_SIZE};
pub use settings::{BackendKind, LlmSettings, SettingsError};
pub use template::{
    builtin_env_description, env_description, placeholders, render_prompt, without_revision_rule,
    PromptFields, TemplateError, TemplateId, TemplateSet, PLACEHOLDERS,
};
