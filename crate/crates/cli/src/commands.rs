//! Subcommand bodies. Each returns a process exit code and writes
//! diagnostics to the supplied stream.

use std::io::Write;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use readforge_core::project::{count_severity, Finding};
use readforge_core::{compile_project, history_add, validate_project, Fetcher, Project, ProjectError, Severity};

use crate::serve::{router, ServeState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;

fn report_error(err: &mut dyn Write, e: &ProjectError) {
    if let ProjectError::EmptyText { path, diagnostics } = e {
        for d in diagnostics {
            let _ = writeln!(err, "{path}:{d}");
        }
    }
    let _ = writeln!(err, "error: {e}");
}

fn report_findings(err: &mut dyn Write, findings: &[Finding]) {
    for f in findings {
        let _ = writeln!(err, "{f}");
    }
}

fn load(config_path: &Path, err: &mut dyn Write) -> Option<Project> {
    match Project::load(config_path) {
        Ok(p) => Some(p),
        Err(e) => {
            report_error(err, &e);
            None
        }
    }
}

pub fn cmd_compile(config_path: &Path, fetcher: &dyn Fetcher, err: &mut dyn Write) -> i32 {
    let Some(project) = load(config_path, err) else { return EXIT_ERROR };
    match compile_project(&project, fetcher) {
        Ok(outcome) => {
            report_findings(err, &outcome.findings);
            let _ = writeln!(
                err,
                "compiled {} text page(s) and {} concordance page(s) into {} ({} warning(s), {} error(s))",
                outcome.plan.text_pages.len(),
                outcome.plan.concordance_pages.len(),
                project.output_dir().display(),
                outcome.warnings(),
                outcome.errors(),
            );
            if outcome.errors() > 0 {
                EXIT_ERROR
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            report_error(err, &e);
            EXIT_ERROR
        }
    }
}

pub fn cmd_history_add(config_path: &Path, text_id: &str, err: &mut dyn Write) -> i32 {
    let Some(project) = load(config_path, err) else { return EXIT_ERROR };
    match history_add(&project, text_id) {
        Ok(len) => {
            let _ = writeln!(err, "added `{text_id}` to {} ({len} text(s) read)", project.history_path().display());
            EXIT_OK
        }
        Err(e) => {
            report_error(err, &e);
            EXIT_ERROR
        }
    }
}

pub fn cmd_validate(config_path: &Path, fetcher: &dyn Fetcher, err: &mut dyn Write) -> i32 {
    let Some(project) = load(config_path, err) else { return EXIT_ERROR };
    let findings = validate_project(&project, fetcher);
    report_findings(err, &findings);
    let errors = count_severity(&findings, Severity::Error);
    let _ = writeln!(
        err,
        "{} error(s), {} warning(s)",
        errors,
        count_severity(&findings, Severity::Warning)
    );
    if errors > 0 {
        EXIT_ERROR
    } else {
        EXIT_OK
    }
}

/// Blocks serving the project's output directory until the process is
/// interrupted. Returns 1 if the port cannot be bound.
pub fn cmd_serve(config_path: &Path, host: &str, port: u16, log_path: &Path, err: &mut dyn Write) -> i32 {
    let Some(project) = load(config_path, err) else { return EXIT_ERROR };
    let addr: SocketAddr = match format!("{host}:{port}").parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: invalid address {host}:{port}: {e}");
            return EXIT_ERROR;
        }
    };
    let state = Arc::new(ServeState::new(project.output_dir(), log_path.to_path_buf(), project.config.logging_enabled));

    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start runtime: {e}");
            return EXIT_ERROR;
        }
    };
    runtime.block_on(async {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                let _ = writeln!(err, "error: cannot bind {addr}: {e}");
                return EXIT_ERROR;
            }
        };
        let consent = if state.logging_enabled { "enabled" } else { "disabled" };
        let _ = writeln!(err, "serving {} on http://{addr} (event logging {consent})", state.site_dir.display());
        match axum::serve(listener, router(state)).await {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_ERROR
            }
        }
    })
}
