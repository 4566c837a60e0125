use std::io::Write;

fn main() {
    let outcome = stonebis::cli::run(std::env::args_os());
    let mut stdout = std::io::stdout();
    let _ = stdout.write_all(outcome.output.as_bytes());
    std::process::exit(outcome.code);
}
