//! Checkers, transformers and experiments for the AF2 family of
//! second-order Curry-style type systems.

pub mod cli;
pub mod corpus;
pub mod lambda;
pub mod logic;
pub mod positivity;
pub mod report;
pub mod semantics;
pub mod subtyping;
pub mod syntax;
pub mod typing;
pub mod verify;
pub mod workspace;
