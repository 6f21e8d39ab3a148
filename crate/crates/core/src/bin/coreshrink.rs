use std::io;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

fn main() {
    let interrupt = Arc::new(AtomicBool::new(false));
    let flag = interrupt.clone();
    let _ = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed));
    let argv: Vec<String> = std::env::args().collect();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = coreshrink::cli::run(
        &argv,
        &mut stdout.lock(),
        &mut stderr.lock(),
        Some(interrupt),
    );
    std::process::exit(code);
}
