fn main() {
    std::process::exit(cwpath_cli::main_with_args(std::env::args_os()));
}
