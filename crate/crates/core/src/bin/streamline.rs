fn main() {
    std::process::exit(streamline_core::cli::main_with_args(std::env::args_os()));
}
