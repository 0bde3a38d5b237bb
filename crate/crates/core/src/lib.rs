//! Story prompts, scenario checks and a block-language simulator for the
//! Cubetto tangible-programming robot.
//!
//! The crate covers the whole loop a teacher (or a researcher comparing
//! models) goes through:
//!
//! - [`catalog`] renders the story prompt from three parameters: a
//!   narrative world, the toys that act as subjects, and a task.
//! - [`gateway`] sends prompts to OpenAI-compatible chat endpoints, or
//!   replays canned answers, and keeps full provenance of every response.
//! - [`lint`] checks a response for the usual defects.
//! - [`blocklang`] parses and simulates forward/turn-left/turn-right
//!   programs on a grid, with a breadth-first oracle for shortest programs.
//! - [`report`] stores results in a round/model/preset archive and renders
//!   teacher documents and cross-model comparison tables.
//!
//! ```
//! use cubetto_core::catalog::{list_presets, render_prompt, PromptTemplate};
//!
//! let pirates = &list_presets()[1];
//! let prompt = render_prompt(&PromptTemplate::standard(), &pirates.params);
//! assert!(prompt.contains("It should be about pirates, involve Lego figures"));
//! ```

pub mod blocklang;
pub mod catalog;
pub mod gateway;
pub mod lint;
pub mod report;

// The guide's Rust snippets compile and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/prompts.md")]
    mod prompts {}
    #[doc = include_str!("../../../book/src/generation.md")]
    mod generation {}
    #[doc = include_str!("../../../book/src/lint.md")]
    mod lint {}
    #[doc = include_str!("../../../book/src/blocklang.md")]
    mod blocklang {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/archive.md")]
    mod archive {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
