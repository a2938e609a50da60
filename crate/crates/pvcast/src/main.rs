use std::process;

fn main() {
    process::exit(pvcast::cli::run());
}
