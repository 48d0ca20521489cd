fn main() {
    std::process::exit(cbtr::cli::main_with_args(std::env::args_os()));
}
