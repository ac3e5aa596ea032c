fn main() {
    std::process::exit(heislab_cli::run_cli(std::env::args().collect()));
}
