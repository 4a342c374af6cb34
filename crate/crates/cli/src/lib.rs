//! Command implementations behind the `readforge` binary.

pub mod commands;
pub mod fetch;
pub mod serve;

pub use commands::{cmd_compile, cmd_history_add, cmd_serve, cmd_validate};
pub use fetch::{default_fetcher, NetFetcher, OfflineFetcher};
pub use serve::{router, EventKind, ReaderEvent, ServeState};
