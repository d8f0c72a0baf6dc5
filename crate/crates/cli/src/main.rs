fn main() {
    std::process::exit(padlab_cli::main_with_args(std::env::args_os()));
}
