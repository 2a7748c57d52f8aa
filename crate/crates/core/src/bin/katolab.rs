fn main() {
    std::process::exit(katolab::cli::main_with_args(std::env::args_os()));
}
