use clap::Parser;
use obatalab_cli::{run, Cli, Status};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not failures.
            std::process::exit(if e.use_stderr() { Status::Crash as i32 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var("OBATALAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: worker pool: {e}");
                    std::process::exit(Status::Crash as i32);
                }
            }
            _ => {
                eprintln!("error: OBATALAB_THREADS must be a positive integer, got {v:?}");
                std::process::exit(Status::Crash as i32);
            }
        }
    }
    let status = match run(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            Status::Crash
        }
    };
    std::process::exit(status as i32);
}
