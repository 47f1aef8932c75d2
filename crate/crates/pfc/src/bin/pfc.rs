fn main() {
    std::process::exit(pfc::cli::main_with_args(std::env::args_os()));
}
