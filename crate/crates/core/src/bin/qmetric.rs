fn main() {
    std::process::exit(qmetric::cli::run(std::env::args_os()));
}
