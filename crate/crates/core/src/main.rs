fn main() {
    std::process::exit(cqed_core::cli::run());
}
