fn main() {
    std::process::exit(ptrparse::cli::main_with_args(std::env::args_os()));
}
