fn main() {
    std::process::exit(wise::cli::run());
}
