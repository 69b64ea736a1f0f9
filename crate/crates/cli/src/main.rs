fn main() {
    std::process::exit(fairdiv_cli::main_with_args(std::env::args_os()));
}
