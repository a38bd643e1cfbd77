fn main() { std::process::exit(tivi_core::harness::cli::run(std::env::args().skip(1))); }
