fn main() {
    std::process::exit(pedheading::cli::run());
}
