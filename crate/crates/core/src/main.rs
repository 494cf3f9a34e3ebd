fn main() {
    std::process::exit(fracobs::cli::run_from_env());
}
