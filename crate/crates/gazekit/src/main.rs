fn main() {
    std::process::exit(gazekit::cli::run());
}
