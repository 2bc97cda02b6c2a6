//! Binary entry point.

fn main() {
    std::process::exit(supercrit::run(std::env::args_os()));
}
