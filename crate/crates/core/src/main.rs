fn main() {
    std::process::exit(harmonic_explorer::cli::run_cli(std::env::args()));
}
