fn main() {
    std::process::exit(interpnn::cli::main_with_args(std::env::args_os()));
}
