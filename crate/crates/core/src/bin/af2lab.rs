use af2lab::report::EXIT_USAGE;
use std::io::Write;

fn main() {
    let (out, code) = af2lab::cli::main_with_args(std::env::args_os());
    let _ = if code == EXIT_USAGE { std::io::stderr().write_all(out.as_bytes()) } else { std::io::stdout().write_all(out.as_bytes()) };
    std::process::exit(code);
}
