fn main() {
    std::process::exit(phaseopt::cli::run(std::env::args_os()));
}
