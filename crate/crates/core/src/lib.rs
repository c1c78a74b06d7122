pub mod config;
pub mod domain;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod rag;
pub mod template;
