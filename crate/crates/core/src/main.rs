fn main() {
    std::process::exit(unimodal_bandit::cli::main());
}
