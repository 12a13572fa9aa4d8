//! Regenerates the shipped fixtures: `cargo run --example make_fixtures [dir]`.

use std::path::PathBuf;

fn main() {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fixtures"));
    match obatalab_cli::fixtures::write_all(&root) {
        Ok(n) => println!("wrote {n} fixtures to {}", root.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
