//! Prompting a chat backend to fix detected smells.

pub mod backend;
pub mod extract;
pub mod http;
pub mod prompt;
pub mod runner;

pub use backend::{Backend, BackendDescriptor, BackendError, BackendKind, ChatRequest, Replay, Scenario, ScriptedMock};
pub use extract::extract_code;
pub use http::{HttpChat, HttpChatConfig};
pub use prompt::{render_prompt, MissingSmellName, PromptTier};
pub use runner::{plan_attempts, run_attempts, submit, Clock, FixAttempt, RetryPolicy, RunOptions, TokenBucket};
