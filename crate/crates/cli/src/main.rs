fn main() {
    std::process::exit(collatz_cli::run(std::env::args_os()));
}
