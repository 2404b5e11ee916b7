fn main() {
    std::process::exit(bridgevec::cli::main_with_args(std::env::args_os()));
}
