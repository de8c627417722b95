fn main() {
    std::process::exit(fpdvi_core::cli::main_with_args(std::env::args_os()));
}
