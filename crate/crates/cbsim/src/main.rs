fn main() {
    std::process::exit(cbsim::cli::run());
}
