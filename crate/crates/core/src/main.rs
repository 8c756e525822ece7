fn main() {
    std::process::exit(dpdg::cli::run());
}
