fn main() {
    let code = courtcast::cli::run(std::env::args().collect());
    std::process::exit(code);
}
