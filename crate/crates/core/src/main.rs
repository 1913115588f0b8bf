fn main() {
    std::process::exit(thundering::cli::run_from_env());
}
