fn main() {
    std::process::exit(resumerag_cli::main_with_args(std::env::args_os()).into());
}
